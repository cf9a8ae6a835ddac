"""Subshifts of finite type, words, higher-block recoding and entropy.

Words are plain tuples of integer symbols in ``0..D-1``. A system of range
``k`` is recoded as an edge shift whose vertices are the admissible
``(k-1)``-words and whose edges are the admissible ``k``-words.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from ._graph import is_nontrivial, strongly_connected_components
from .errors import (NoConvergence, NoCycle, NonPrimitive, NotAdmissible,
                     RangeTooSmall, StrandedSymbol)

Word = tuple


def word_str(word, alphabet_size=10):
    """Render a word as a digit string (comma separated when D > 10)."""
    if alphabet_size > 10:
        return ",".join(str(s) for s in word)
    return "".join(str(s) for s in word)


def parse_word(text, alphabet_size=10):
    text = text.strip()
    if "," in text or " " in text:
        parts = [p for p in text.replace(",", " ").split() if p]
        return tuple(int(p) for p in parts)
    if alphabet_size > 10:
        raise ValueError(f"word {text!r} must be comma separated when D > 10")
    return tuple(int(c) for c in text)


@dataclass(frozen=True)
class SymbolicSystem:
    """One-sided SFT on ``D`` symbols given by a 0/1 transition table.

    Use :func:`build_system` to construct a validated instance.
    """

    alphabet_size: int
    transitions: tuple

    def allows(self, a, b):
        return self.transitions[a][b] == 1

    @cached_property
    def matrix(self):
        return np.array(self.transitions, dtype=np.int64)

    @property
    def is_full_shift(self):
        return all(all(row) for row in self.transitions)

    def is_admissible(self, word):
        if any(not (0 <= s < self.alphabet_size) for s in word):
            return False
        return all(self.allows(a, b) for a, b in zip(word, word[1:]))

    def check_word(self, word):
        if not self.is_admissible(word):
            raise NotAdmissible(f"word {word_str(word, self.alphabet_size)!r} is not admissible")
        return tuple(word)


def _primitivity_exponent(matrix):
    """Smallest p with matrix**p > 0 entrywise, or None past Wielandt's bound."""
    n = matrix.shape[0]
    bound = n * n - 2 * n + 2
    a = matrix > 0
    power = a.copy()
    for p in range(1, bound + 1):
        if power.all():
            return p
        power = (power.astype(np.int64) @ a.astype(np.int64)) > 0
    return None


def build_system(alphabet_size, transitions):
    """Validate a transition table and return the corresponding SFT.

    >>> build_system(2, [[1, 1], [1, 0]]).is_full_shift
    False
    """
    if int(alphabet_size) != alphabet_size or alphabet_size < 2:
        raise ValueError("alphabet_size must be an integer >= 2")
    D = int(alphabet_size)
    rows = [list(r) for r in transitions]
    if len(rows) != D or any(len(r) != D for r in rows):
        raise ValueError(f"transition table must be {D}x{D}")
    if any(x not in (0, 1) for r in rows for x in r):
        raise ValueError("transition entries must be 0 or 1")
    mat = np.array(rows, dtype=np.int64)
    empty_rows = [a for a in range(D) if not mat[a].any()]
    empty_cols = [b for b in range(D) if not mat[:, b].any()]
    if empty_rows or empty_cols:
        raise StrandedSymbol(
            f"symbols with no successor: {empty_rows}; symbols with no predecessor: {empty_cols}")
    if _primitivity_exponent(mat) is None:
        raise NonPrimitive(
            f"transition matrix has no all-positive power up to {D * D - 2 * D + 2} "
            "(reducible or periodic)")
    return SymbolicSystem(D, tuple(tuple(int(x) for x in r) for r in rows))


def enumerate_words(system, n):
    """All admissible ``n``-words in lexicographic order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    D = system.alphabet_size
    words = [(a,) for a in range(D)]
    for _ in range(n - 1):
        words = [w + (b,) for w in words for b in range(D) if system.allows(w[-1], b)]
    return words


@dataclass(frozen=True)
class EventuallyPeriodicPoint:
    """The point ``preperiod . cycle . cycle . ...`` of the shift space."""

    preperiod: tuple
    cycle: tuple

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("cycle must be nonempty")
        object.__setattr__(self, "preperiod", tuple(self.preperiod))
        object.__setattr__(self, "cycle", tuple(self.cycle))

    def prefix(self, length):
        out = list(self.preperiod[:length])
        p = len(self.cycle)
        i = 0
        while len(out) < length:
            out.append(self.cycle[i % p])
            i += 1
        return tuple(out)

    def validate(self, system):
        # preperiod.cycle.cycle covers every junction
        system.check_word(self.preperiod + self.cycle + self.cycle)
        return self


class Edge(NamedTuple):
    tail: int
    head: int
    label: tuple
    weight: object = 0


@dataclass(frozen=True)
class WeightedEdgeGraph:
    """Edge-shift recoding of a range-``k`` system.

    Vertices are indexed densely; ``vertices[i]`` is the ``(k-1)``-word of
    vertex ``i``. For ``k = 1`` there is a single vertex (the empty word) and
    one loop per letter.
    """

    k: int
    alphabet_size: int
    vertices: tuple
    edges: tuple = field(repr=False)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @cached_property
    def vertex_index(self):
        return {w: i for i, w in enumerate(self.vertices)}

    @cached_property
    def edge_index(self):
        return {e.label: i for i, e in enumerate(self.edges)}

    @cached_property
    def in_edges(self):
        out = [[] for _ in self.vertices]
        for i, e in enumerate(self.edges):
            out[e.head].append(i)
        return tuple(tuple(x) for x in out)

    @cached_property
    def out_edges(self):
        out = [[] for _ in self.vertices]
        for i, e in enumerate(self.edges):
            out[e.tail].append(i)
        return tuple(tuple(x) for x in out)

    @property
    def weights(self):
        return [e.weight for e in self.edges]

    def with_weights(self, weights):
        weights = list(weights)
        if len(weights) != len(self.edges):
            raise ValueError("one weight per edge required")
        edges = tuple(e._replace(weight=w) for e, w in zip(self.edges, weights))
        return replace(self, edges=edges)

    def weight_matrix(self, edge_subset=None):
        """Max-plus matrix ``M[u][v]`` = best weight of an edge u -> v (None if absent)."""
        n = self.n_vertices
        M = [[None] * n for _ in range(n)]
        indices = range(len(self.edges)) if edge_subset is None else edge_subset
        for i in indices:
            e = self.edges[i]
            cur = M[e.tail][e.head]
            if cur is None or e.weight > cur:
                M[e.tail][e.head] = e.weight
        return M

    def adjacency(self, edge_subset=None):
        """Integer adjacency matrix counting parallel edges."""
        n = self.n_vertices
        A = np.zeros((n, n), dtype=np.int64)
        indices = range(len(self.edges)) if edge_subset is None else edge_subset
        for i in indices:
            e = self.edges[i]
            A[e.tail, e.head] += 1
        return A

    def edge_str(self, i):
        return word_str(self.edges[i].label, self.alphabet_size)

    def vertex_str(self, v):
        return word_str(self.vertices[v], self.alphabet_size) or "()"

    def path_edges(self, symbols: Sequence[int]):
        """Edge indices of the k-windows of a finite symbol string."""
        k = self.k
        out = []
        for i in range(len(symbols) - k + 1):
            label = tuple(symbols[i:i + k])
            try:
                out.append(self.edge_index[label])
            except KeyError:
                raise NotAdmissible(f"{word_str(label, self.alphabet_size)!r} is not admissible") from None
        return out


def recode(system, k):
    """Higher-block presentation of ``system`` at range ``k`` (all weights 0)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    D = system.alphabet_size
    if k == 1:
        if not system.is_full_shift:
            raise RangeTooSmall("range k=1 needs the full shift; use k >= 2 for this system")
        return WeightedEdgeGraph(1, D, ((),), tuple(Edge(0, 0, (a,), 0) for a in range(D)))
    verts = enumerate_words(system, k - 1)
    index = {w: i for i, w in enumerate(verts)}
    edges = tuple(Edge(index[w[:-1]], index[w[1:]], w, 0) for w in enumerate_words(system, k))
    return WeightedEdgeGraph(k, D, tuple(verts), edges)


def topological_entropy(adjacency, rel_tol=1e-13, max_iters=1_000_000):
    """Natural log of the Perron root of a nonnegative integer matrix.

    Each nontrivial strongly connected block is handled separately by power
    iteration on ``I + A`` (primitive even when the block is periodic), stopped
    by the Collatz-Wielandt bracket. A block that is a single cycle has entropy
    exactly 0.
    """
    A = np.asarray(adjacency)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError("adjacency must be square")
    if (A < 0).any():
        raise ValueError("adjacency must be nonnegative")
    comps = strongly_connected_components(n, lambda u: np.nonzero(A[u])[0].tolist())
    comps = [c for c in comps if is_nontrivial(c, lambda u, v: A[u, v] > 0)]
    if not comps:
        raise NoCycle("adjacency is nilpotent: no cycle, entropy undefined")
    best = 0.0
    for comp in comps:
        sub = A[np.ix_(comp, comp)].astype(float)
        if sub.sum() == len(comp):
            continue  # a single periodic orbit
        best = max(best, math.log(_perron_root_shifted(sub, rel_tol, max_iters)))
    return best


def _perron_root_shifted(sub, rel_tol, max_iters):
    m = sub.shape[0]
    B = sub + np.eye(m)
    x = np.ones(m)
    for _ in range(max_iters):
        y = B @ x
        ratios = y / x
        lo, hi = ratios.min() - 1.0, ratios.max() - 1.0
        if hi - lo <= rel_tol * lo:
            return 0.5 * (lo + hi)
        x = y / y.max()
    raise NoConvergence(f"power iteration did not reach rel_tol={rel_tol} in {max_iters} steps")
