"""Shared test oracles, kept independent of the package implementations."""

from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from randqnet import DirectedGraph


# --- dense quantum oracles -------------------------------------------------

_P1 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_pauli(word: str) -> np.ndarray:
    """Dense Pauli word, qubit 0 least significant."""
    out = np.array([[1.0 + 0j]])
    for ch in reversed(word):
        out = np.kron(out, _P1[ch])
    return out


def dense_cnot(n: int, control: int, target: int) -> np.ndarray:
    """Dense CNOT unitary on n qubits, qubit q <-> bit q of the basis index."""
    dim = 1 << n
    U = np.zeros((dim, dim))
    for b in range(dim):
        b2 = b ^ (1 << target) if (b >> control) & 1 else b
        U[b2, b] = 1.0
    return U


def ptm_of_unitary(n: int, U: np.ndarray) -> np.ndarray:
    """Transfer matrix of rho -> U rho U^dagger via explicit traces."""
    d = 4 ** n
    words = ["".join(w[q] for q in range(n)) for w in _index_words(n)]
    sigmas = [kron_pauli(w) for w in words]
    M = np.zeros((d, d))
    for b in range(d):
        image = U @ sigmas[b] @ U.conj().T
        for a in range(d):
            M[a, b] = np.trace(sigmas[a] @ image).real / 2 ** n
    return M


def _index_words(n: int):
    for a in range(4 ** n):
        word = []
        aa = a
        for _ in range(n):
            word.append("IXYZ"[aa % 4])
            aa //= 4
        yield word


# --- graph oracles ----------------------------------------------------------

def naive_strongly_connected(g: DirectedGraph) -> bool:
    """n BFS passes: every vertex reaches every other."""
    adj = g.adjacency()
    for src in range(g.n):
        seen = {src}
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
        if len(seen) != g.n:
            return False
    return True


def block_digraph_is_acyclic(k: int, arcs: set) -> bool:
    state = [0] * k
    def dfs(u):
        state[u] = 1
        for (a, b) in arcs:
            if a == u:
                if state[b] == 1:
                    return False
                if state[b] == 0 and not dfs(b):
                    return False
        state[u] = 2
        return True
    return all(state[u] or dfs(u) for u in range(k))


def acyclic_interconnect_oracle(parts, p: Fraction) -> Fraction:
    """Brute force: enumerate the 2^(k(k-1)) block-level digraphs.

    An arc between blocks of sizes a and b exists with probability
    1 - (1-p)^(ab); the result sums the probability of every acyclic
    block-level digraph.
    """
    parts = tuple(parts)
    k = len(parts)
    pairs = [(i, j) for i in range(k) for j in range(k) if i != j]
    total = Fraction(0)
    for mask in range(1 << len(pairs)):
        arcs = {pairs[t] for t in range(len(pairs)) if (mask >> t) & 1}
        if not block_digraph_is_acyclic(k, arcs):
            continue
        prob = Fraction(1)
        for t, (i, j) in enumerate(pairs):
            absent = (1 - p) ** (parts[i] * parts[j])
            prob *= (1 - absent) if (mask >> t) & 1 else absent
        total += prob
    return total


def undirected_connected_oracle(n: int, p: Fraction) -> Fraction:
    """Brute force over all 2^C(n,2) undirected graphs."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    total = Fraction(0)
    for mask in range(1 << len(pairs)):
        parent = list(range(n))
        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x
        edges = 0
        for t, (i, j) in enumerate(pairs):
            if (mask >> t) & 1:
                edges += 1
                parent[find(i)] = find(j)
        if len({find(v) for v in range(n)}) == 1:
            total += p ** edges * (1 - p) ** (len(pairs) - edges)
    return total


def set_partitions(items):
    """All partitions of a list into unordered non-empty blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in set_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [[first] + smaller[i]] + smaller[i + 1:]
        yield [[first]] + smaller


def partition_count(n: int) -> int:
    """Number of integer partitions of n, by the two-variable DP."""
    table = [[0] * (n + 1) for _ in range(n + 1)]
    for k in range(n + 1):
        table[0][k] = 1
    for m in range(1, n + 1):
        for k in range(1, n + 1):
            table[m][k] = table[m][k - 1] + (table[m - k][min(m - k, k)] if m >= k else 0)
    return table[n][n]


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20250809)
