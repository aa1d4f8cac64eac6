"""Strong-connectivity probabilities of directed Erdos-Renyi graphs.

For a random digraph on ``n`` labeled vertices in which each of the
``n(n-1)`` ordered arcs is present independently with probability ``p``,
this module evaluates

* the probability that the graph is strongly connected,
* the complementary probability that it is not,
* the probability that a prescribed split of the vertices into strongly
  connected groups carries no directed cycle between the groups,
* the connectivity probability of the undirected G(n, p) model, and
* an exponential lower bound useful for large ``n``.

The core algorithm is an inclusion-exclusion recursion over integer
partitions: a non-strongly-connected digraph decomposes uniquely into at
least two maximal strongly connected pieces whose quotient graph is
acyclic, so the disconnection probability is a sum over partitions of
``n`` weighted by the number of labeled decompositions, the per-piece
connectivity probabilities and the acyclic-interconnect probability.

Arithmetic is exact (``fractions.Fraction``) when ``p`` is a ``Fraction``
and IEEE-754 binary64 when ``p`` is a float. The float path swaps the
partition sum for an O(n^3) reachability factorization (condition on the
co-reach set of a fixed vertex), which keeps large-``n`` curves cheap; the
two routes are cross-checked against each other in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import groupby, product
from typing import Iterator, Sequence, Union

Prob = Union[Fraction, float]

__all__ = [
    "Prob",
    "enumerate_partitions",
    "count_labeled_decompositions",
    "ConnectivitySession",
    "prob_acyclic_interconnect",
    "prob_disconnected",
    "prob_strongly_connected",
    "prob_connected_undirected",
    "prob_disconnected_undirected",
    "lower_bound_pc",
    "pc_curve",
    "PcCurve",
]

# Largest n for which pc_curve picks the exact path on its own.
EXACT_CURVE_LIMIT = 24


def _partitions_desc(n: int, max_part: int) -> Iterator[tuple[int, ...]]:
    """Partitions of ``n`` with parts <= max_part, non-increasing, reverse-lex order."""
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions_desc(n - first, first):
            yield (first,) + rest


def enumerate_partitions(n: int, min_length: int = 1) -> list[tuple[int, ...]]:
    """List all partitions of ``n`` with at least ``min_length`` parts.

    Each partition is a non-increasing tuple of positive integers summing
    to ``n``; the list is in reverse-lexicographic order, e.g.
    ``enumerate_partitions(4, 2) == [(3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if min_length < 1:
        raise ValueError("min_length must be >= 1")
    return [parts for parts in _partitions_desc(n, n) if len(parts) >= min_length]


def count_labeled_decompositions(parts: Sequence[int]) -> int:
    """Number of ways to split sum(parts) labeled items into unlabeled groups of these sizes.

    Multinomial coefficient divided by the factorials of the multiplicities
    of repeated group sizes; the empty partition counts as 1.
    """
    parts = _canonical(parts)
    if not parts:
        return 1
    n = sum(parts)
    count = math.factorial(n)
    for size in parts:
        count //= math.factorial(size)
    for _, grp in groupby(parts):
        count //= math.factorial(len(tuple(grp)))
    return count


def _canonical(parts: Sequence[int]) -> tuple[int, ...]:
    parts = tuple(int(x) for x in parts)
    if any(x < 1 for x in parts):
        raise ValueError("partition parts must be positive integers")
    return tuple(sorted(parts, reverse=True))


def _check_open_unit(p: Prob) -> None:
    if not 0 < p < 1:
        raise ValueError(f"edge probability must satisfy 0 < p < 1, got {p!r}")


class ConnectivitySession:
    """Memoized evaluator of connectivity probabilities at a fixed edge probability.

    One session holds the memo tables for a single ``p``; sessions are
    independent of each other, so distinct sessions may be used freely from
    concurrent threads. Exact rational arithmetic is used when ``p`` is a
    ``Fraction``, floats otherwise.
    """

    def __init__(self, p: Prob):
        _check_open_unit(p)
        self.p = p
        self.exact = isinstance(p, Fraction)
        one = Fraction(1) if self.exact else 1.0
        self._one = one
        self._q = 1 - p  # probability that a given arc is absent
        self._qpow: dict[int, Prob] = {0: one}
        self._acyclic: dict[tuple[int, ...], Prob] = {(): one}
        self._strong: dict[int, Prob] = {1: one}
        # float-path tables: P(vertex 1 reaches everything) and the spread
        # probabilities P(a t-vertex mutually reachable block reaches all of
        # w outsiders), grown on demand
        self._reach_all: list[float] = [0.0, 1.0]
        self._spread: dict[int, list[float]] = {}

    # -- powers of (1 - p), heavily reused across partition terms --
    def _qp(self, e: int) -> Prob:
        val = self._qpow.get(e)
        if val is None:
            val = self._q ** e
            self._qpow[e] = val
        return val

    def prob_acyclic_interconnect(self, parts: Sequence[int]) -> Prob:
        """Probability that arcs between the given vertex groups form no directed cycle.

        The groups, of sizes ``parts``, are contracted to super-nodes; an
        arc between two groups of sizes a and b exists with probability
        1 - (1-p)^(ab). Returned is the probability that the contracted
        digraph is acyclic. Empty and single-group splits give 1.
        """
        return self._acyclic_rec(_canonical(parts))

    def _acyclic_rec(self, parts: tuple[int, ...]) -> Prob:
        memo = self._acyclic
        val = memo.get(parts)
        if val is not None:
            return val
        if len(parts) == 1:
            memo[parts] = self._one
            return self._one
        n = sum(parts)
        # Inclusion-exclusion over the sub-multisets of groups that have no
        # outgoing arcs: identical sub-multisets are grouped, each weighted
        # by the product of binomials over repeated group sizes.
        sizes = []
        counts = []
        for s, grp in groupby(parts):
            sizes.append(s)
            counts.append(len(tuple(grp)))
        total = 0
        for choice in product(*(range(c + 1) for c in counts)):
            chosen = sum(choice)
            if chosen == 0:
                continue
            m = 0
            sqsum = 0
            coeff = 1
            for j, s, c in zip(choice, sizes, counts):
                m += j * s
                sqsum += j * s * s
                coeff = coeff * math.comb(c, j)
            residual = []
            for j, s, c in zip(choice, sizes, counts):
                residual.extend([s] * (c - j))
            # forbidden arcs: every chosen group loses all m_i(n - m_i)
            # of its outgoing arcs, which totals m*n - sum(m_i^2)
            term = coeff * self._qp(m * n - sqsum) * self._acyclic_rec(tuple(residual))
            total = total + term if chosen % 2 else total - term
        memo[parts] = total
        return total

    def prob_strongly_connected(self, n: int) -> Prob:
        """Probability that G(n, p) is strongly connected."""
        return 1 - self.prob_disconnected(n)

    def prob_disconnected(self, n: int) -> Prob:
        """Probability that G(n, p) is not strongly connected (0 for n = 1)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        # fill ascending so the recursion never recurses deeply
        for m in range(2, n + 1):
            if m not in self._strong:
                self._strong[m] = 1 - self._disconnected(m)
        if n == 1:
            return self._one - 1
        return 1 - self._strong[n]

    def _disconnected(self, n: int) -> Prob:
        if self.exact:
            total = Fraction(0)
            for parts in _partitions_desc(n, n - 1):
                total += self._partition_term(n, parts)
            return total
        return self._disconnected_float(n)

    def _partition_term(self, n: int, parts: tuple[int, ...]) -> Prob:
        term = count_labeled_decompositions(parts) * self._acyclic_rec(parts)
        for size in parts:
            term *= self._strong[size] if size > 1 else self._one
        return term

    def _reach(self, n: int) -> float:
        """P(vertex 1 reaches every vertex of G(n, p)), float path.

        Conditioning on the exact reach set of vertex 1 gives
        R(n) = 1 - sum_{k<n} C(n-1, k-1) R(k) (1-p)^(k(n-k)).
        """
        vals = self._reach_all
        q = float(self._q)
        while len(vals) <= n:
            m = len(vals)
            s = 0.0
            binom = 1.0  # C(m-1, k-1), updated incrementally
            for k in range(1, m):
                s += binom * vals[k] * q ** (k * (m - k))
                binom *= (m - k) / k
            vals.append(1.0 - s)
        return vals[n]

    def _spread_all(self, t: int, w: int) -> float:
        """P(a t-vertex mutually reachable block reaches all of w outside vertices).

        Only arcs block->outside and outside-internal matter; conditioning
        on the exact reached subset gives
        U(t, w) = 1 - sum_{y<w} C(w, y) U(t, y) (1-p)^((t+y)(w-y)).
        """
        vals = self._spread.setdefault(t, [1.0])
        q = float(self._q)
        while len(vals) <= w:
            m = len(vals)
            s = 0.0
            binom = 1.0  # C(m, y), updated incrementally
            for y in range(m):
                s += binom * vals[y] * q ** ((t + y) * (m - y))
                binom *= (m - y) / (y + 1)
            vals.append(1.0 - s)
        return vals[w]

    def _disconnected_float(self, n: int) -> float:
        # Float path: a reachability factorization instead of the partition
        # sum (whose sub-multiset recursion grows combinatorially). With
        # T the co-reach set of vertex 1, a digraph has vertex 1 reaching
        # everything iff arcs into T are absent, the subgraph on T is
        # strongly connected, and T spreads to the other n-|T| vertices:
        #   R(n) = sum_t C(n-1, t-1) P_C(t) (1-p)^(t(n-t)) U(t, n-t),
        # whose t = n term isolates P_C(n). Cross-checked against the exact
        # partition recursion in the test suite.
        strong = self._strong
        q = float(self._q)
        s = 0.0
        binom = 1.0  # C(n-1, t-1), updated incrementally
        for t in range(1, n):
            s += binom * strong[t] * q ** (t * (n - t)) * self._spread_all(t, n - t)
            binom *= (n - t) / t
        return 1.0 - (self._reach(n) - s)


# -- module-level conveniences (fresh session per call) --

def prob_acyclic_interconnect(parts: Sequence[int], p: Prob) -> Prob:
    """Probability that arcs between vertex groups of sizes ``parts`` form no directed cycle."""
    return ConnectivitySession(p).prob_acyclic_interconnect(parts)


def prob_disconnected(n: int, p: Prob) -> Prob:
    """Probability that G(n, p) is not strongly connected."""
    return ConnectivitySession(p).prob_disconnected(n)


def prob_strongly_connected(n: int, p: Prob) -> Prob:
    """Probability that G(n, p) is strongly connected.

    Exact rational when ``p`` is a ``Fraction``; float otherwise.
    """
    return ConnectivitySession(p).prob_strongly_connected(n)


def prob_disconnected_undirected(n: int, p: Prob) -> Prob:
    """Probability that an undirected G(n, p) graph is disconnected.

    Complement of ``prob_connected_undirected``, computed directly so that
    values far below float resolution of ``1 - x`` remain meaningful (the
    disconnection probability at large n is dominated by a single isolated
    vertex and can be ~1e-200 while still comparable against bounds).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_open_unit(p)
    if isinstance(p, Fraction):
        q = 1 - p
        disc: list[Prob] = [Fraction(0), Fraction(0)]
        for nn in range(2, n + 1):
            s = Fraction(0)
            for k in range(1, nn):
                s += math.comb(nn - 1, k - 1) * (1 - disc[k]) * q ** (k * (nn - k))
            disc.append(s)
        return disc[n]
    lnq = math.log1p(-p)
    fdisc = [0.0, 0.0]
    for nn in range(2, n + 1):
        s = 0.0
        for k in range(1, nn):
            connected_k = 1.0 - fdisc[k]
            if connected_k <= 0.0:
                continue
            # log-domain term so the binomial cannot overflow and the
            # power cannot silently underflow away a contributing term
            lt = (
                math.lgamma(nn)
                - math.lgamma(k)
                - math.lgamma(nn - k + 1)
                + math.log(connected_k)
                + k * (nn - k) * lnq
            )
            s += math.exp(lt)
        fdisc.append(s)
    return fdisc[n]


def prob_connected_undirected(n: int, p: Prob) -> Prob:
    """Probability that an undirected G(n, p) graph is connected.

    Uses the classical recurrence obtained by conditioning on the size of
    the component containing a fixed vertex:

        P(n) = 1 - sum_{k=1}^{n-1} C(n-1, k-1) P(k) (1-p)^(k(n-k))

    with P(1) = 1. Exact when ``p`` is a ``Fraction``; float mode works on
    the disconnection side in the log domain.
    """
    return 1 - prob_disconnected_undirected(n, p)


def lower_bound_pc(n: int, p: Prob) -> float:
    """Exponential lower bound 1 - (n-1)^2 (1-p^2)^(n-1) on the strong-connectivity probability.

    Valid (and useful) for large ``n``; may be negative for small ``n``.
    Evaluated in the log domain so the power never underflows.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    pf = float(p)
    if not 0 < pf <= 1:
        raise ValueError(f"edge probability must satisfy 0 < p <= 1, got {p!r}")
    t = (1.0 - pf) * (1.0 + pf)
    if t <= 0.0:
        return 1.0
    return 1.0 - math.exp(2.0 * math.log(n - 1.0) + (n - 1.0) * math.log(t))


@dataclass(frozen=True)
class PcCurve:
    """Strong-connectivity probability for n = 1..n_max at a fixed p."""

    p: Prob
    rows: tuple[tuple[int, Prob], ...]
    argmin_n: int


def pc_curve(n_max: int, p: Prob, exact: bool | None = None) -> PcCurve:
    """Tabulate the strong-connectivity probability for n = 1..n_max.

    ``exact=None`` picks exact arithmetic when ``p`` is a ``Fraction`` and
    ``n_max <= EXACT_CURVE_LIMIT``, floats otherwise. The argmin over the
    computed range breaks ties toward smaller n.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if exact is None:
        exact = isinstance(p, Fraction) and n_max <= EXACT_CURVE_LIMIT
    pv: Prob = p if exact else float(p)
    if exact and not isinstance(p, Fraction):
        raise ValueError("exact mode requires p as a Fraction")
    session = ConnectivitySession(pv)
    rows = [(n, session.prob_strongly_connected(n)) for n in range(1, n_max + 1)]
    best = min(range(len(rows)), key=lambda i: (rows[i][1], rows[i][0]))
    return PcCurve(p=pv, rows=tuple(rows), argmin_n=rows[best][0])
