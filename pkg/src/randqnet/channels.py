"""Random CNOT dynamics on qubit networks in the Pauli-transfer representation.

Each network link applies a CNOT from its tail (control) to its head
(target). Because CNOT is a Clifford operation it conjugates every Pauli
word to a single signed Pauli word, so the transfer matrix of one CNOT is
a signed permutation of the 4^n Pauli indices and the transfer matrix of a
random-unitary mixture is a weighted sum of such permutations. All channel
algebra here (composition, iteration, distances) is therefore real matrix
algebra on 4^n x 4^n arrays.

Conventions: Pauli words are strings over "IXYZ" with the qubit-0 letter
first; index ``a`` carries the qubit-q letter in its q-th base-4 digit.
A state is the real coefficient vector r[a] = Tr(sigma_a rho) / 2^n, so
r[0] = 1/2^n encodes unit trace and trace preservation of a channel is
exactly "row 0 equals the unit vector e_0".
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .connectivity import Prob
from .digraph import CostGuardError, DirectedGraph, arc_pairs, sample_digraph

__all__ = [
    "PAULI_LETTERS",
    "SignedPauli",
    "word_to_index",
    "index_to_word",
    "pauli_word_matrix",
    "cnot_conjugate",
    "ChannelSpec",
    "channel_ptm",
    "averaged_channel_ptm",
    "attractor_projector",
    "asymptotic_channel",
    "asymptotic_channel_exact",
    "hs_distance",
    "evolve_state",
    "state_zero",
    "state_plus",
    "state_mixed",
    "pauli_coeffs",
    "density_matrix",
    "static_average_iterate",
    "convergence_trace",
    "static_convergence_traces",
]

PAULI_LETTERS = "IXYZ"

STATIC_EXHAUSTIVE_MAX_N = 4   # 2^(n(n-1)) graphs; 4096 at n = 4
EXACT_CHANNEL_MAX_N = 4       # exact rational asymptotic map

_I, _X, _Y, _Z = 0, 1, 2, 3

# single-qubit products sigma_a sigma_b = phase * sigma_c, phase in {1, i, -1, -i}
_MUL: dict[tuple[int, int], tuple[int, complex]] = {}
for _a in range(4):
    _MUL[(_I, _a)] = (_a, 1)
    _MUL[(_a, _I)] = (_a, 1)
    _MUL[(_a, _a)] = (_I, 1)
_MUL[(_X, _Y)] = (_Z, 1j)
_MUL[(_Y, _X)] = (_Z, -1j)
_MUL[(_Y, _Z)] = (_X, 1j)
_MUL[(_Z, _Y)] = (_X, -1j)
_MUL[(_Z, _X)] = (_Y, 1j)
_MUL[(_X, _Z)] = (_Y, -1j)

# Heisenberg images of the generators under CNOT conjugation, as
# (control letter, target letter): X_c -> X_c X_t, Z_c -> Z_c,
# X_t -> X_t, Z_t -> Z_c Z_t; Y images follow from Y = i X Z.
_GEN_CONTROL = {_I: (_I, _I), _X: (_X, _X), _Y: (_Y, _X), _Z: (_Z, _I)}
_GEN_TARGET = {_I: (_I, _I), _X: (_I, _X), _Y: (_Z, _Y), _Z: (_Z, _Z)}


def _build_cnot_table() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    out_c = np.zeros((4, 4), dtype=np.int64)
    out_t = np.zeros((4, 4), dtype=np.int64)
    sign = np.zeros((4, 4), dtype=np.int64)
    for a in range(4):
        for b in range(4):
            c1, t1 = _GEN_CONTROL[a]
            c2, t2 = _GEN_TARGET[b]
            cc, pc = _MUL[(c1, c2)]
            tt, pt = _MUL[(t1, t2)]
            phase = pc * pt
            if phase not in (1, -1):
                raise RuntimeError("CNOT conjugation produced a non-real phase")
            out_c[a, b] = cc
            out_t[a, b] = tt
            sign[a, b] = int(phase.real)
    return out_c, out_t, sign


_CNOT_C, _CNOT_T, _CNOT_SIGN = _build_cnot_table()


def word_to_index(word: str) -> int:
    idx = 0
    for q, ch in enumerate(word):
        idx += PAULI_LETTERS.index(ch) * 4 ** q
    return idx


def index_to_word(index: int, n: int) -> str:
    if not 0 <= index < 4 ** n:
        raise ValueError("index out of range")
    return "".join(PAULI_LETTERS[(index >> (2 * q)) & 3] for q in range(n))


_SINGLE_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_word_matrix(word: str) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a Pauli word (qubit 0 = least significant bit)."""
    out = np.array([[1.0 + 0j]])
    for ch in reversed(word):
        out = np.kron(out, _SINGLE_MATS[ch])
    return out


@dataclass(frozen=True)
class SignedPauli:
    word: str
    sign: int


def cnot_conjugate(word: str, control: int, target: int) -> SignedPauli:
    """Image U P U^dagger of a Pauli word under the CNOT with given control/target.

    Always another Pauli word with sign +-1; only the control and target
    letters change.
    """
    n = len(word)
    if control == target:
        raise ValueError("control and target must differ")
    if not (0 <= control < n and 0 <= target < n):
        raise ValueError("control/target out of range")
    dc = PAULI_LETTERS.index(word[control])
    dt = PAULI_LETTERS.index(word[target])
    letters = list(word)
    letters[control] = PAULI_LETTERS[_CNOT_C[dc, dt]]
    letters[target] = PAULI_LETTERS[_CNOT_T[dc, dt]]
    return SignedPauli("".join(letters), int(_CNOT_SIGN[dc, dt]))


@lru_cache(maxsize=None)
def _cnot_index_action(n: int, control: int, target: int) -> tuple[np.ndarray, np.ndarray]:
    """Permutation and sign arrays of CNOT conjugation on all 4^n Pauli indices."""
    idx = np.arange(4 ** n)
    dc = (idx >> (2 * control)) & 3
    dt = (idx >> (2 * target)) & 3
    perm = idx + (_CNOT_C[dc, dt] - dc) * 4 ** control + (_CNOT_T[dc, dt] - dt) * 4 ** target
    sign = _CNOT_SIGN[dc, dt].astype(np.float64)
    perm.setflags(write=False)
    sign.setflags(write=False)
    return perm, sign


@dataclass(frozen=True)
class ChannelSpec:
    """A graph together with positive link weights summing to one."""

    graph: DirectedGraph
    weights: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.graph.arcs:
            raise ValueError("no links to apply: graph has an empty arc set")
        if set(self.weights) != set(self.graph.arcs):
            raise ValueError("weight keys must be exactly the graph's arcs")
        vals = list(self.weights.values())
        if any(w <= 0 for w in vals):
            raise ValueError("all link weights must be positive")
        if abs(sum(vals) - 1.0) > 1e-9:
            raise ValueError("link weights must sum to 1")

    @classmethod
    def uniform(cls, graph: DirectedGraph) -> "ChannelSpec":
        m = len(graph.arcs)
        if m == 0:
            raise ValueError("no links to apply: graph has an empty arc set")
        return cls(graph, {arc: 1.0 / m for arc in graph.arcs})


def channel_ptm(spec: ChannelSpec) -> np.ndarray:
    """Transfer matrix of the random-unitary channel sum_l q_l U_l rho U_l^dagger.

    Each link contributes its signed permutation weighted by q_l; the
    result has at most |E| non-zero entries per column and row 0 = e_0.
    """
    n = spec.graph.n
    d = 4 ** n
    M = np.zeros((d, d))
    cols = np.arange(d)
    for (u, v) in sorted(spec.graph.arcs):
        perm, sign = _cnot_index_action(n, u, v)
        M[perm, cols] += spec.weights[(u, v)] * sign
    return M


def averaged_channel_ptm(n: int, p: Prob) -> np.ndarray:
    """Transfer matrix of the graph-averaged single-step channel.

    Averaging the per-graph uniform-weight channel over G(n, p) collapses,
    by link symmetry, to w_id * Id + c * sum over all n(n-1) links of the
    link's signed permutation, where w_id = (1-p)^(n(n-1)) is the no-link
    probability (an arcless graph applies no operation) and
    c = (1 - w_id) / (n(n-1)).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 < float(p) < 1:
        raise ValueError("p must lie strictly in (0, 1)")
    n_arcs = n * (n - 1)
    if isinstance(p, Fraction):
        w_id = float((1 - p) ** n_arcs)
    else:
        w_id = (1.0 - float(p)) ** n_arcs
    d = 4 ** n
    M = w_id * np.eye(d)
    cols = np.arange(d)
    c = (1.0 - w_id) / n_arcs
    for (u, v) in arc_pairs(n):
        perm, sign = _cnot_index_action(n, u, v)
        M[perm, cols] += c * sign
    return M


def attractor_projector(n: int) -> np.ndarray:
    """Rank-2 orthogonal projector onto span{|0...0>, |+...+>} in the state space.

    The two spanning vectors overlap by 2^(-n/2); orthogonalizing |+...+>
    against |0...0> leaves w/sqrt(2^n - 1) with w = (0, 1, ..., 1), so
    P = e_0 e_0^T + w w^T / (2^n - 1), a real matrix with P^2 = P = P^T and
    trace 2.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    dim = 2 ** n
    P = np.full((dim, dim), 1.0 / (dim - 1)) if dim > 1 else np.zeros((1, 1))
    if dim > 1:
        P[0, :] = 0.0
        P[:, 0] = 0.0
    P[0, 0] = 1.0
    return P


def _pauli_masks(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-index bit masks: X-type bits, Z-type bits, and the Y-letter count."""
    idx = np.arange(4 ** n)
    xmask = np.zeros(4 ** n, dtype=np.int64)
    zmask = np.zeros(4 ** n, dtype=np.int64)
    ny = np.zeros(4 ** n, dtype=np.int64)
    for q in range(n):
        d = (idx >> (2 * q)) & 3
        xmask |= ((d == _X) | (d == _Y)) << q
        zmask |= ((d == _Z) | (d == _Y)) << q
        ny += d == _Y
    return xmask, zmask, ny


@lru_cache(maxsize=None)
def _asymptotic_numerator(n: int) -> tuple[np.ndarray, int]:
    """Integer numerator matrix N and denominator D with asymptotic map = N / D.

    The limit map rho -> P rho P + Tr((I-P) rho)/(2^n - 2) (I-P) is built
    from the rank-2 decomposition P = e_0 e_0^T + w w^T/(2^n - 1) with
    w = (0, 1, ..., 1). All inner products <x|sigma_a|y> between {e_0, w}
    are Gaussian integers, so the whole transfer matrix is one integer
    matrix over a common denominator: exact entries, and rounding happens
    once on conversion to float.
    """
    if n < 2:
        raise ValueError("the asymptotic map needs n >= 2 (no CNOT exists on one qubit)")
    d = 4 ** n
    dim = 2 ** n
    K = dim - 1
    D = dim - 2
    xm, zm, ny = _pauli_masks(n)
    phase_re = np.array([1, 0, -1, 0], dtype=np.int64)[ny % 4]
    phase_im = np.array([0, 1, 0, -1], dtype=np.int64)[ny % 4]
    nonzero_x = (xm != 0).astype(np.int64)
    parity = 1 - 2 * (np.bitwise_count((xm & zm).astype(np.uint64)).astype(np.int64) & 1)

    # <e0|sigma|e0>, <e0|sigma|w>, <w|sigma|e0>, <w|sigma|w>, all times i^ny
    t11 = (xm == 0).astype(np.int64)  # phase is +1 here since ny = 0 when xm = 0
    t1w_mag = nonzero_x * parity      # basis state xm, sign (-1)^{pc(xm & zm)}
    tw1_mag = nonzero_x
    tww_mag = dim * (zm == 0).astype(np.int64) - 1 - nonzero_x * parity

    def cplx(mag):
        return mag * phase_re, mag * phase_im

    t1w = cplx(t1w_mag)
    tw1 = cplx(tw1_mag)
    tww = cplx(tww_mag)

    def outer_cc(a, b):
        re = np.outer(a[0], b[0]) - np.outer(a[1], b[1])
        im = np.outer(a[0], b[1]) + np.outer(a[1], b[0])
        return re, im

    # K^2 * Tr(sigma_a P sigma_b P): weights 1, 1/K, 1/K, 1/K^2 cleared
    a_re = K * K * np.outer(t11, t11)
    a_im = np.zeros_like(a_re)
    for left, right in ((tw1, t1w), (t1w, tw1)):
        re, im = outer_cc(left, right)
        a_re += K * re
        a_im += K * im
    re, im = outer_cc(tww, tww)
    a_re += re
    a_im += im

    # g_a * K = Tr(P sigma_a) * K; imaginary parts vanish identically
    g_re = K * t11 + tww[0]
    if np.any(tww[1]):
        raise RuntimeError("trace of P sigma_a must be real")
    h = -g_re
    h[0] += dim * K
    numer = D * a_re + np.outer(h, h)
    if np.any(a_im):
        raise RuntimeError("asymptotic transfer matrix must be real")
    numer.setflags(write=False)
    return numer, dim * K * K * D


def asymptotic_channel(n: int) -> np.ndarray:
    """Transfer matrix of the common limit of iterated strongly connected CNOT networks.

    Implements rho -> P rho P + Tr((I-P) rho)/(2^n - 2) (I-P) with P the
    projector onto span{|0...0>, |+...+>}; one map per n, independent of
    the graph and of the link weights. Trace-preserving and idempotent.
    """
    numer, denom = _asymptotic_numerator(n)
    return numer / denom


def asymptotic_channel_exact(n: int) -> list[list[Fraction]]:
    """Exact rational entries of the asymptotic transfer matrix (n <= 4)."""
    if n > EXACT_CHANNEL_MAX_N:
        raise CostGuardError(f"exact asymptotic map refused for n={n} (max {EXACT_CHANNEL_MAX_N})")
    numer, denom = _asymptotic_numerator(n)
    return [[Fraction(int(x), denom) for x in row] for row in numer]


def hs_distance(m1: np.ndarray, m2: np.ndarray) -> float:
    """Hilbert-Schmidt (Frobenius) distance between two transfer matrices."""
    m1 = np.asarray(m1)
    m2 = np.asarray(m2)
    if m1.shape != m2.shape:
        raise ValueError(f"dimension mismatch: {m1.shape} vs {m2.shape}")
    return float(np.linalg.norm(m1 - m2))


def evolve_state(coeffs: np.ndarray, M: np.ndarray, r: int) -> np.ndarray:
    """Apply a transfer matrix r times to a Pauli coefficient vector."""
    coeffs = np.asarray(coeffs, dtype=float)
    if r < 0:
        raise ValueError("r must be >= 0")
    if M.shape != (coeffs.size, coeffs.size):
        raise ValueError(f"dimension mismatch: state {coeffs.size}, matrix {M.shape}")
    out = coeffs.copy()
    for _ in range(r):
        out = M @ out
    return out


def state_zero(n: int) -> np.ndarray:
    """Coefficient vector of |0...0><0...0|: 2^-n on every {I,Z} word."""
    xm, _, _ = _pauli_masks(n)
    return np.where(xm == 0, 1.0, 0.0) / 2 ** n


def state_plus(n: int) -> np.ndarray:
    """Coefficient vector of |+...+><+...+|: 2^-n on every {I,X} word."""
    _, zm, _ = _pauli_masks(n)
    return np.where(zm == 0, 1.0, 0.0) / 2 ** n


def state_mixed(n: int) -> np.ndarray:
    """Coefficient vector of the maximally mixed state I / 2^n."""
    r = np.zeros(4 ** n)
    r[0] = 1.0 / 2 ** n
    return r


def pauli_coeffs(rho: np.ndarray) -> np.ndarray:
    """Pauli coefficient vector r[a] = Tr(sigma_a rho) / 2^n of a density matrix."""
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.shape != (dim, dim) or 2 ** n != dim:
        raise ValueError("rho must be 2^n x 2^n")
    out = np.empty(4 ** n)
    for a in range(4 ** n):
        val = np.trace(pauli_word_matrix(index_to_word(a, n)) @ rho) / dim
        out[a] = val.real
    return out


def density_matrix(coeffs: np.ndarray) -> np.ndarray:
    """Density matrix sum_a r[a] sigma_a from a Pauli coefficient vector."""
    d = coeffs.size
    n = (d.bit_length() - 1) // 2
    if 4 ** n != d:
        raise ValueError("coefficient vector length must be a power of 4")
    rho = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for a, c in enumerate(coeffs):
        if c:
            rho += c * pauli_word_matrix(index_to_word(a, n))
    return rho


# ---------------------------------------------------------------------------
# Static (quenched) ensemble averages
# ---------------------------------------------------------------------------

def _mask_channel_ptm(n: int, mask: int) -> np.ndarray:
    """Uniform-weight channel of the graph encoded by ``mask``; identity if arcless."""
    if mask == 0:
        return np.eye(4 ** n)
    return channel_ptm(ChannelSpec.uniform(DirectedGraph.from_mask(n, mask)))


@lru_cache(maxsize=None)
def _iso_classes(n: int) -> tuple[tuple[int, int], ...]:
    """(representative mask, orbit size) for digraphs up to vertex relabeling."""
    pairs = arc_pairs(n)
    n_arcs = len(pairs)
    arc_maps = []
    for perm in itertools.permutations(range(n)):
        arc_maps.append([pairs.index((perm[u], perm[v])) for (u, v) in pairs])
    seen = bytearray(1 << n_arcs)
    classes = []
    for mask in range(1 << n_arcs):
        if seen[mask]:
            continue
        orbit = set()
        for amap in arc_maps:
            m2 = 0
            mm = mask
            j = 0
            while mm:
                if mm & 1:
                    m2 |= 1 << amap[j]
                mm >>= 1
                j += 1
            orbit.add(m2)
        for m2 in orbit:
            seen[m2] = 1
        classes.append((mask, len(orbit)))
    return tuple(classes)


@lru_cache(maxsize=None)
def _qubit_perm_index(n: int, perm: tuple[int, ...]) -> np.ndarray:
    """Pauli-index permutation induced by relabeling qubit q -> perm[q]."""
    idx = np.arange(4 ** n)
    out = np.zeros_like(idx)
    for q in range(n):
        out += ((idx >> (2 * q)) & 3) * 4 ** perm[q]
    out.setflags(write=False)
    return out


def _symmetrize(B: np.ndarray, n: int) -> np.ndarray:
    """Sum of Pi B Pi^T over all qubit relabelings Pi."""
    d = B.shape[0]
    out = np.zeros_like(B)
    for perm in itertools.permutations(range(n)):
        pv = _qubit_perm_index(n, perm)
        tmp = np.empty_like(B)
        tmp[np.ix_(pv, pv)] = B
        out += tmp
    return out


def _graph_weights(n: int, p: float, masks) -> np.ndarray:
    n_arcs = n * (n - 1)
    q = 1.0 - p
    return np.array([p ** bin(m).count("1") * q ** (n_arcs - bin(m).count("1")) for m in masks])


class _StaticEnsemble:
    """Incrementally iterable ensemble of per-graph channel powers.

    For n <= 3 every labeled graph is enumerated directly. For n = 4 only
    one representative per isomorphism class is iterated (218 instead of
    4096 matrix powers); the ensemble average is recovered by summing the
    class-weighted representative powers and symmetrizing over the 24
    qubit relabelings, which is exact because relabeling a graph conjugates
    its transfer matrix by the corresponding Pauli-index permutation.
    """

    def __init__(self, n: int, sampled_masks=None):
        self.n = n
        if sampled_masks is not None:
            counter = Counter(sampled_masks)
            self.masks = sorted(counter)
            total = sum(counter.values())
            self.base_weights = np.array([counter[m] / total for m in self.masks])
            self.symmetrize = False
        elif n <= 3:
            self.masks = list(range(1 << (n * (n - 1))))
            self.base_weights = None
            self.symmetrize = False
        elif n <= STATIC_EXHAUSTIVE_MAX_N:
            classes = _iso_classes(n)
            self.masks = [m for m, _ in classes]
            self.orbit = np.array([o for _, o in classes], dtype=float)
            self.base_weights = None
            self.symmetrize = True
        else:
            raise CostGuardError(
                f"exhaustive static average refused for n={n} (max {STATIC_EXHAUSTIVE_MAX_N})"
            )
        footprint = 3 * len(self.masks) * (4 ** n) ** 2 * 8
        if footprint > 2_000_000_000:
            raise CostGuardError(
                f"static ensemble of {len(self.masks)} distinct graphs at n={n} "
                f"needs ~{footprint / 1e9:.1f} GB; reduce the budget"
            )
        self.bases = np.stack([_mask_channel_ptm(n, m) for m in self.masks])
        self.powers = np.stack([np.eye(4 ** n)] * len(self.masks))
        self._buf = np.empty_like(self.powers)
        self.r = 0

    def step(self):
        np.matmul(self.powers, self.bases, out=self._buf)
        self.powers, self._buf = self._buf, self.powers
        self.r += 1

    def average(self, p: float | None = None) -> np.ndarray:
        """Ensemble average of the current powers at edge probability p."""
        if self.base_weights is not None:
            w = self.base_weights
            return np.einsum("g,gab->ab", w, self.powers)
        w = _graph_weights(self.n, p, self.masks)
        if not self.symmetrize:
            return np.einsum("g,gab->ab", w, self.powers)
        w = w * self.orbit / math.factorial(self.n)
        B = np.einsum("g,gab->ab", w, self.powers)
        return _symmetrize(B, self.n)


def static_average_iterate(
    n: int,
    p: Prob,
    r: int,
    mode: str = "exhaustive",
    budget: int = 10_000,
    seed: int = 0,
) -> np.ndarray:
    """Average of the r-th channel power over graphs drawn once and then fixed.

    ``exhaustive`` sums p^|E| (1-p)^(n(n-1)-|E|) M_g^r over every graph
    (n <= 4; arcless graphs contribute the identity); ``sampled`` averages
    over ``budget`` seeded graph draws with equal weights.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    pf = float(p)
    if r == 0:
        if mode == "exhaustive" and n > STATIC_EXHAUSTIVE_MAX_N:
            raise CostGuardError(
                f"exhaustive static average refused for n={n} (max {STATIC_EXHAUSTIVE_MAX_N})"
            )
        return np.eye(4 ** n)  # every graph contributes M^0 = Id
    if mode == "exhaustive":
        ens = _StaticEnsemble(n)
    elif mode == "sampled":
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        masks = [sample_digraph(n, pf, rng).mask for _ in range(budget)]
        ens = _StaticEnsemble(n, sampled_masks=masks)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    for _ in range(r):
        ens.step()
    return ens.average(pf)


def static_convergence_traces(
    n: int,
    p_list,
    r_max: int,
    mode: str = "exhaustive",
    budget: int = 10_000,
    seed: int = 0,
) -> dict:
    """Distance-to-limit traces of the static ensemble for several p at once.

    Returns {p: [(r, D)]} with D the Hilbert-Schmidt distance between the
    ensemble-averaged r-th power and the asymptotic map. The per-graph
    powers do not depend on p, so all requested p values share one sweep.
    """
    if r_max < 0:
        raise ValueError("r_max must be >= 0")
    p_list = list(p_list)
    limit = asymptotic_channel(n)
    if mode == "exhaustive":
        ensembles = {None: _StaticEnsemble(n)}
    elif mode == "sampled":
        ensembles = {}
        for p in p_list:
            rng = np.random.default_rng(np.random.SeedSequence(seed))
            masks = [sample_digraph(n, float(p), rng).mask for _ in range(budget)]
            ensembles[float(p)] = _StaticEnsemble(n, sampled_masks=masks)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    out = {p: [] for p in p_list}
    for r in range(r_max + 1):
        for p in p_list:
            ens = ensembles.get(None) or ensembles[float(p)]
            out[p].append((r, hs_distance(ens.average(float(p)), limit)))
        if r < r_max:
            for ens in ensembles.values():
                ens.step()
    return out


def convergence_trace(
    n: int,
    p: Prob,
    mode: str,
    r_max: int,
    budget: int = 10_000,
    seed: int = 0,
    stop_below: float | None = None,
) -> list[tuple[int, float]]:
    """Distance D(r) between the r-th iterate and the asymptotic map, r = 0..r_max.

    ``dynamic``: the graph is redrawn every step, so the r-th iterate is
    the r-th power of the averaged single-step channel. ``static``: one
    unknown graph is fixed throughout, so the r-th iterate is the ensemble
    average of per-graph r-th powers. ``stop_below`` truncates the trace
    once D drops under the given value.
    """
    if r_max < 0:
        raise ValueError("r_max must be >= 0")
    if mode == "dynamic":
        limit = asymptotic_channel(n)
        step = averaged_channel_ptm(n, p)
        cur = np.eye(4 ** n)
        rows = []
        for r in range(r_max + 1):
            dist = hs_distance(cur, limit)
            rows.append((r, dist))
            if stop_below is not None and dist < stop_below:
                break
            if r < r_max:
                cur = step @ cur
        return rows
    if mode == "static":
        traces = static_convergence_traces(n, [p], r_max, mode="exhaustive" if n <= STATIC_EXHAUSTIVE_MAX_N else "sampled", budget=budget, seed=seed)
        rows = traces[p]
        if stop_below is not None:
            cut = []
            for r, dist in rows:
                cut.append((r, dist))
                if dist < stop_below:
                    break
            return cut
        return rows
    raise ValueError(f"unknown mode {mode!r}")
