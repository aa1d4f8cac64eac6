"""Directed graphs, G(n, p) sampling, SCC decomposition and validation oracles.

Graphs are immutable: a vertex count plus a set of ordered pairs (no
self-loops). Arcs are also addressable through a fixed bit layout, index
``u*(n-1) + (v if v < u else v - 1)``, which lets a graph be encoded as an
integer mask; exhaustive enumeration is then just integer counting.

Two oracles validate the analytic recursion elsewhere in the package:

* ``exact_pc_bruteforce`` enumerates every digraph on n <= 5 vertices once,
  aggregates strongly connected counts by arc count, and evaluates the
  resulting polynomial in p exactly.
* ``estimate_pc_monte_carlo`` samples graphs in bulk and reports a Wilson
  score interval.

Both use a bit-parallel reachability kernel that processes 64 graphs per
machine word; per-graph work (sampling a single graph, Tarjan's algorithm)
is plain Python.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from statistics import NormalDist

import numpy as np

from .connectivity import Prob

__all__ = [
    "CostGuardError",
    "DirectedGraph",
    "SccDecomposition",
    "McEstimate",
    "arc_pairs",
    "arc_index",
    "sample_digraph",
    "strongly_connected_components",
    "is_strongly_connected",
    "strongly_connected_counts",
    "exact_pc_bruteforce",
    "wilson_interval",
    "estimate_pc_monte_carlo",
]

BRUTEFORCE_MAX_N = 5  # 2^(n(n-1)) graphs; n = 5 is already ~10^6

# Monte Carlo arc draws are uint16 thresholds, i.e. p is realized on a
# 1/65536 grid (exact for p = k/65536, off by at most 2^-17 otherwise).
_MC_P_GRID = 1 << 16
_MC_CHUNK = 1 << 16


class CostGuardError(RuntimeError):
    """Raised when a computation is refused because it exceeds the cost envelope."""


def arc_index(n: int, u: int, v: int) -> int:
    """Bit position of arc (u, v) in the row-major no-diagonal layout."""
    return u * (n - 1) + (v if v < u else v - 1)


def arc_pairs(n: int) -> list[tuple[int, int]]:
    """All ordered pairs (u, v), u != v, in bit-layout order."""
    return [(u, v) for u in range(n) for v in range(n) if v != u]


@dataclass(frozen=True)
class DirectedGraph:
    """Immutable digraph: vertex count plus a set of ordered arcs, no self-loops."""

    n: int
    arcs: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("vertex count must be >= 1")
        arcs = frozenset((int(u), int(v)) for u, v in self.arcs)
        for u, v in arcs:
            if u == v:
                raise ValueError(f"self-loop ({u}, {v}) not allowed")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"arc ({u}, {v}) out of range for n={self.n}")
        object.__setattr__(self, "arcs", arcs)

    @classmethod
    def from_mask(cls, n: int, mask: int) -> "DirectedGraph":
        pairs = arc_pairs(n)
        return cls(n, frozenset(pairs[j] for j in range(len(pairs)) if (mask >> j) & 1))

    @classmethod
    def complete(cls, n: int) -> "DirectedGraph":
        return cls(n, frozenset(arc_pairs(n)))

    @classmethod
    def cycle(cls, n: int) -> "DirectedGraph":
        """Directed n-cycle 0 -> 1 -> ... -> n-1 -> 0."""
        return cls(n, frozenset((u, (u + 1) % n) for u in range(n)))

    @property
    def mask(self) -> int:
        m = 0
        for u, v in self.arcs:
            m |= 1 << arc_index(self.n, u, v)
        return m

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self.arcs

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in sorted(self.arcs):
            adj[u].append(v)
        return adj


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_digraph(n: int, p: Prob, rng) -> DirectedGraph:
    """Sample G(n, p): each ordered arc present independently with probability p.

    ``rng`` is a ``numpy.random.Generator`` or a seed for ``default_rng``;
    a fixed seed reproduces the same graph.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    pf = float(p)
    if not 0.0 <= pf <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    gen = _as_rng(rng)
    pairs = arc_pairs(n)
    draws = gen.random(len(pairs))
    return DirectedGraph(n, frozenset(pr for pr, d in zip(pairs, draws) if d < pf))


@dataclass(frozen=True)
class SccDecomposition:
    """Strongly connected components plus the deduplicated condensation arcs.

    Components are frozensets partitioning the vertex set, listed in
    reverse topological order of the condensation (sinks first);
    condensation arcs are pairs of component indices.
    """

    components: tuple
    condensation: frozenset

    @property
    def component_of(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for i, comp in enumerate(self.components):
            for v in comp:
                out[v] = i
        return out


def strongly_connected_components(g: DirectedGraph) -> SccDecomposition:
    """Tarjan's algorithm, iterative so deep graphs cannot hit the recursion limit."""
    n = g.n
    adj = g.adjacency()
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comp_id = [-1] * n
    components: list[frozenset] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while pi < len(adj[v]):
                w = adj[v][pi]
                pi += 1
                if index[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp_id[w] = len(components)
                    comp.append(w)
                    if w == v:
                        break
                components.append(frozenset(comp))
    condensation = frozenset(
        (comp_id[u], comp_id[v]) for u, v in g.arcs if comp_id[u] != comp_id[v]
    )
    return SccDecomposition(tuple(components), condensation)


def is_strongly_connected(g: DirectedGraph) -> bool:
    """True iff the graph has exactly one strongly connected component."""
    return len(strongly_connected_components(g).components) == 1


# ---------------------------------------------------------------------------
# Bit-parallel ensemble kernel: one bit per graph, 64 graphs per word.
# ---------------------------------------------------------------------------

def _strong_flags(planes: np.ndarray, n: int) -> np.ndarray:
    """Bitmask of strongly connected graphs.

    ``planes[a]`` holds, for arc slot ``a`` in bit-layout order, one bit per
    graph telling whether that arc is present. A graph is strongly connected
    iff vertex 0 reaches every vertex and every vertex reaches vertex 0.
    """
    pairs = arc_pairs(n)
    words = planes.shape[1]
    flags = np.full(words, ~np.uint64(0), dtype=np.uint64)
    tmp = np.empty(words, dtype=np.uint64)
    for backward in (False, True):
        reach = np.zeros((n, words), dtype=np.uint64)
        reach[0] = ~np.uint64(0)
        for _ in range(n - 1):
            before = reach.copy()
            for a, (u, v) in enumerate(pairs):
                if backward:
                    u, v = v, u
                np.bitwise_and(reach[u], planes[a], out=tmp)
                np.bitwise_or(reach[v], tmp, out=reach[v])
            if np.array_equal(before, reach):
                break
        for v in range(1, n):
            np.bitwise_and(flags, reach[v], out=flags)
    return flags


def _popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


def _enumeration_planes(n: int) -> np.ndarray:
    """Arc planes for the full enumeration: graph g = bit pattern of its mask."""
    pairs = arc_pairs(n)
    n_arcs = len(pairs)
    n_graphs = 1 << n_arcs
    words = max(1, n_graphs >> 6)
    planes = np.empty((n_arcs, words), dtype=np.uint64)
    for j in range(n_arcs):
        if j < 6:
            # bit j of the lane index: constant pattern within every word
            word = sum(1 << i for i in range(64) if (i >> j) & 1)
            planes[j] = np.uint64(word)
        else:
            run = 1 << (j - 6)
            block = np.concatenate(
                [np.zeros(run, dtype=np.uint64), np.full(run, ~np.uint64(0), dtype=np.uint64)]
            )
            planes[j] = np.tile(block, words // (2 * run))
    return planes


@lru_cache(maxsize=None)
def strongly_connected_counts(n: int) -> tuple[int, ...]:
    """Count strongly connected digraphs on n labeled vertices, by arc count.

    Entry e is the number of strongly connected digraphs with exactly e
    arcs; the enumeration covers all 2^(n(n-1)) graphs, so n is capped at
    ``BRUTEFORCE_MAX_N``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > BRUTEFORCE_MAX_N:
        raise CostGuardError(
            f"exhaustive enumeration refused for n={n} (max {BRUTEFORCE_MAX_N})"
        )
    if n == 1:
        return (1,)
    n_arcs = n * (n - 1)
    flags = _strong_flags(_enumeration_planes(n), n)
    bits = np.unpackbits(flags.view(np.uint8), bitorder="little")[: 1 << n_arcs]
    sizes = np.bitwise_count(np.arange(1 << n_arcs, dtype=np.uint32))
    counts = np.bincount(sizes[bits.astype(bool)], minlength=n_arcs + 1)
    return tuple(int(c) for c in counts)


def exact_pc_bruteforce(n: int, p: Prob) -> Prob:
    """Strong-connectivity probability by exhaustive enumeration (n <= 5).

    Aggregates the count of strongly connected digraphs by arc count e and
    evaluates sum_e c_e p^e (1-p)^(n(n-1)-e); exact when p is a Fraction.
    The counts are computed once per n and cached.
    """
    counts = strongly_connected_counts(n)
    if n == 1:
        return Fraction(1) if isinstance(p, Fraction) else 1.0
    q = 1 - p
    n_arcs = n * (n - 1)
    total = 0
    for e, c in enumerate(counts):
        if c:
            total += c * p ** e * q ** (n_arcs - e)
    return total


# ---------------------------------------------------------------------------
# Monte Carlo estimation
# ---------------------------------------------------------------------------

_WILSON_Z = {0.99: NormalDist().inv_cdf(0.995)}


def wilson_interval(hits: int, samples: int, confidence: float = 0.99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Chosen over the Wald interval because it behaves sensibly when the
    estimate sits near 0 or 1, which is the regime of interest here.
    """
    if not 0 <= hits <= samples or samples < 1:
        raise ValueError("need 0 <= hits <= samples, samples >= 1")
    z = _WILSON_Z.get(confidence)
    if z is None:
        z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    zz = z * z
    denom = samples + zz
    center = (hits + zz / 2.0) / denom
    half = z * ((hits * (samples - hits) / samples + zz / 4.0) ** 0.5) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate with a Wilson confidence interval."""

    samples: int
    hits: int
    estimate: float
    lo: float
    hi: float
    confidence: float = 0.99

    @property
    def interval(self) -> tuple[float, float]:
        return (self.lo, self.hi)


def _mc_chunk_hits(n: int, threshold: int, size: int, seed: np.random.SeedSequence) -> int:
    """Count strongly connected graphs among ``size`` samples from one RNG stream."""
    gen = np.random.Generator(np.random.PCG64(seed))
    n_arcs = n * (n - 1)
    padded = (size + 63) & ~63
    draws = gen.integers(0, _MC_P_GRID, size=(n_arcs, padded), dtype=np.uint16)
    planes = np.packbits(draws < threshold, axis=1).view(np.uint64)
    flags = _strong_flags(planes, n)
    if padded != size:
        # lanes are consumed packbits-style (MSB first within each byte);
        # valid lanes are a prefix, so mask whole trailing bytes plus bits
        byte_view = flags.view(np.uint8)
        full_bytes = size >> 3
        if size & 7:
            byte_view[full_bytes] &= np.uint8((0xFF00 >> (size & 7)) & 0xFF)
            full_bytes += 1
        byte_view[full_bytes:] = 0
    return _popcount(flags)


def estimate_pc_monte_carlo(
    n: int,
    p: Prob,
    samples: int,
    seed: int = 0,
    confidence: float = 0.99,
    workers: int = 1,
) -> McEstimate:
    """Estimate the strong-connectivity probability of G(n, p) by sampling.

    The sample budget is split into fixed-size chunks, each drawing from an
    independent substream spawned from ``seed`` (``SeedSequence.spawn``), so
    results are deterministic for a given (seed, samples) and independent of
    ``workers``; merging is plain count addition. Arc draws compare uint16
    variates against round(p * 65536), i.e. p is realized on a 1/65536 grid
    (exact at the endpoints and for p = k/65536).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    pf = float(p)
    if not 0.0 <= pf <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if n == 1:
        return McEstimate(samples, samples, 1.0, *wilson_interval(samples, samples, confidence), confidence)
    threshold = round(pf * _MC_P_GRID)
    plan = [_MC_CHUNK] * (samples // _MC_CHUNK)
    if samples % _MC_CHUNK:
        plan.append(samples % _MC_CHUNK)
    seeds = np.random.SeedSequence(seed).spawn(len(plan))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(lambda args: _mc_chunk_hits(n, threshold, *args), zip(plan, seeds)))
    else:
        hits = sum(_mc_chunk_hits(n, threshold, sz, sq) for sz, sq in zip(plan, seeds))
    lo, hi = wilson_interval(hits, samples, confidence)
    return McEstimate(samples, hits, hits / samples, lo, hi, confidence)
