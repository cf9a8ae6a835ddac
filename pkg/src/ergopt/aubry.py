"""Aubry set, irreducible components and the Mañé potential of the finite model.

Everything here works on the *normalized* edge graph (weights ``<= 0`` with
maximal cycle mean 0). The Aubry set is the set of infinite paths through the
critical subgraph (edges lying on zero-weight cycles) and its irreducible
components are the nontrivial strongly connected pieces of that subgraph.
Component ids are 1-based and ordered by smallest vertex index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import maxplus
from ._graph import strongly_connected_components
from .errors import ErgoptError
from .sft import topological_entropy


@dataclass(frozen=True)
class AubryComponent:
    id: int
    vertex_set: tuple
    edge_set: frozenset
    entropy: float
    subaction_value: object


@dataclass(frozen=True)
class AubryDecomposition:
    components: tuple
    critical_edge_set: frozenset
    h: float
    max_entropy_ids: tuple
    tol_h: float = 1e-9

    def component(self, cid):
        return self.components[cid - 1]

    @property
    def ids(self):
        return [c.id for c in self.components]

    def component_of_vertex(self, v):
        for c in self.components:
            if v in c.vertex_set:
                return c.id
        return None


@dataclass(frozen=True)
class ManeData:
    """Walk suprema of the normalized weights.

    ``star[u][v]`` is the best total weight of a walk of length >= 1 from ``u``
    to ``v`` (``None`` if there is none); ``component_rows[j-1][v]`` is the
    Mañé potential from any point of component ``j`` to a point whose first
    vertex is ``v``.
    """

    star: list = field(repr=False)
    component_rows: list = field(repr=False)

    def from_component(self, cid, v):
        return self.component_rows[cid - 1][v]


def critical_subgraph(graph, tol=1e-9):
    """Indices of the edges lying on zero-weight cycles of ``graph``."""
    star = maxplus.kleene_star(graph.weight_matrix(), tol=max(tol, 1e-12))
    out = set()
    for i, e in enumerate(graph.edges):
        back = star[e.head][e.tail]
        if back is not None and abs(e.weight + back) <= tol:
            out.add(i)
    return frozenset(out)


def irreducible_components(graph, critical, V=None, tol=1e-9):
    """Nontrivial SCCs of the critical subgraph, with entropies and ``V`` values."""
    n = graph.n_vertices
    succ = [[] for _ in range(n)]
    for i in critical:
        e = graph.edges[i]
        succ[e.tail].append(e.head)
    comps = []
    for vs in strongly_connected_components(n, lambda u: succ[u]):
        vset = set(vs)
        edges = frozenset(i for i in critical
                          if graph.edges[i].tail in vset and graph.edges[i].head in vset)
        if edges:
            comps.append((tuple(sorted(vs)), edges))
    comps.sort(key=lambda c: c[0][0])
    out = []
    for cid, (vs, edges) in enumerate(comps, start=1):
        for i in edges:
            if abs(graph.edges[i].weight) > tol:
                raise ErgoptError(f"critical edge {graph.edge_str(i)} has nonzero weight {graph.edges[i].weight}")
        adj = graph.adjacency(edges)[np.ix_(vs, vs)]
        h_i = topological_entropy(adj)
        value = None
        if V is not None:
            vals = [V[v] for v in vs]
            if max(vals) - min(vals) > tol:
                raise ErgoptError(f"subaction not constant on component {cid}: spread {max(vals) - min(vals)}")
            value = vals[0]
        out.append(AubryComponent(cid, vs, edges, h_i, value))
    return out


def normalized_subaction(graph, tol=1e-9):
    """Canonical calibrated subaction of the normalized weights.

    This, not the subaction used to normalize, is the one that is constant
    on components: the latter differs from it by the coboundary removed
    during normalization.
    """
    return maxplus.principal_eigenvector(graph.weight_matrix(), 0, tol)


def decompose(ndata, tol_zero=1e-9, tol_h=1e-9, V=None):
    """Aubry decomposition of a :class:`~ergopt.potential.NormalizationData`.

    ``V`` is a calibrated subaction of the normalized potential (default:
    the canonical one) used for the component values.
    """
    graph = ndata.graph
    crit = critical_subgraph(graph, tol_zero)
    if V is None:
        V = normalized_subaction(graph, tol_zero)
    comps = irreducible_components(graph, crit, V, tol_zero)
    h = max(c.entropy for c in comps)
    top = tuple(c.id for c in comps if c.entropy >= h - tol_h)
    return AubryDecomposition(tuple(comps), crit, h, top, tol_h)


def mane_matrix(graph, components, tol=1e-9):
    W = graph.weight_matrix()
    star = maxplus.star_plus(W, tol=max(tol, 1e-12))
    rows = []
    for comp in components:
        row = [None] * graph.n_vertices
        for u in comp.vertex_set:
            for v in range(graph.n_vertices):
                s = 0 if u == v else star[u][v]
                row[v] = maxplus.oplus(row[v], s)
        rows.append(row)
    return ManeData(star, rows)


def aubry_membership(point, decomposition, graph):
    """Id of the irreducible component containing an eventually periodic point.

    The point lies in the Aubry set exactly when every edge along its path is
    critical; its component is then the one carrying the periodic part.
    """
    k = graph.k
    pre, cyc = point.preperiod, point.cycle
    # every k-window of the point starts within the first |pre| + |cyc| symbols
    symbols = point.prefix(len(pre) + len(cyc) + k - 1)
    path = graph.path_edges(symbols)  # raises NotAdmissible
    if any(i not in decomposition.critical_edge_set for i in path):
        return None
    return decomposition.component_of_vertex(graph.edges[path[-1]].head)
