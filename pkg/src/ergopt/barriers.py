"""Peierls barriers between irreducible components and the max-plus rate bound."""
from __future__ import annotations

from dataclasses import dataclass, field

from . import maxplus
from .errors import DiagonalNotNegative, ErgoptError, NoCycle


@dataclass(frozen=True)
class ExtCostMatrix:
    """``entries[j-1][i-1]`` is the barrier for entering component ``i`` from ``j``.

    ``skipped[(j, i)]`` lists the vertices of component ``i`` that have no
    incoming edge from outside the component and were therefore left out of
    the infimum.
    """

    ids: tuple
    entries: list
    skipped: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.ids)

    def __call__(self, j, i):
        return self.entries[j - 1][i - 1]


@dataclass(frozen=True)
class RateBound:
    lam: object  # None when no finite cycle exists among the restricted ids
    witness_cycle: tuple
    restricted_ids: tuple

    @property
    def no_finite_cycle(self):
        return self.lam is None


def s_ext_detail(j, i, mane, decomposition, graph):
    comp_i = decomposition.component(i)
    value, skipped = None, []
    for v in comp_i.vertex_set:
        inner, seen = None, False
        for e_idx in graph.in_edges[v]:
            if e_idx in comp_i.edge_set:
                continue
            seen = True
            e = graph.edges[e_idx]
            inner = maxplus.oplus(inner, maxplus.otimes(mane.from_component(j, e.tail), e.weight))
        if not seen:
            skipped.append(v)
            continue
        if inner is None:
            return None, skipped  # no walk from component j: the infimum is bottom
        value = inner if value is None else min(value, inner)
    return value, skipped


def s_ext(j, i, mane, decomposition, graph):
    """Cheapest way into component ``i`` through a preimage outside it, starting in ``j``.

    Minimum over vertices ``v`` of component ``i`` of the best
    ``S(component j, tail e) + w(e)`` over edges ``e`` into ``v`` that do not
    belong to component ``i``. ``None`` when undefined.
    """
    return s_ext_detail(j, i, mane, decomposition, graph)[0]


def ext_cost_matrix(decomposition, mane, graph, tol=1e-9):
    ids = tuple(decomposition.ids)
    n = len(ids)
    entries = [[None] * n for _ in range(n)]
    skipped = {}
    for j in ids:
        for i in ids:
            val, skip = s_ext_detail(j, i, mane, decomposition, graph)
            entries[j - 1][i - 1] = val
            if skip:
                skipped[(j, i)] = skip
    for j in ids:
        for i in ids:
            val = entries[j - 1][i - 1]
            if val is not None and val > tol:
                raise ErgoptError(f"barrier S_ext({j},{i}) = {val} is positive")
        d = entries[j - 1][j - 1]
        if d is not None and d >= -tol:
            raise DiagonalNotNegative(f"S_ext({j},{j}) = {d} is not negative")
    return ExtCostMatrix(ids, entries, skipped)


def rate_bound(ext, decomposition, tol_h=None):
    """Max-plus eigenvalue of the barrier matrix over maximal-entropy components."""
    if tol_h is None:
        ids = tuple(decomposition.max_entropy_ids)
    else:
        ids = tuple(c.id for c in decomposition.components if c.entropy >= decomposition.h - tol_h)
    # arc a -> b carries S_ext(b, a)
    G = [[ext(b, a) for b in ids] for a in ids]
    try:
        lam, cyc = maxplus.karp(G)
    except NoCycle:
        return RateBound(None, (), ids)
    return RateBound(lam, tuple(ids[x] for x in cyc), ids)


def cycle_value(ext, cycle):
    """Mean barrier along a cycle of component ids (arc a -> b weighs S_ext(b, a))."""
    total = 0
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        val = ext(b, a)
        if val is None:
            return None
        total += val
    return maxplus.exact_div(total, len(cycle))
