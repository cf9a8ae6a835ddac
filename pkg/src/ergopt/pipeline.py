"""End-to-end analysis of a system/potential pair."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import aubry, barriers, potential as pot, thermo
from .sft import recode


@dataclass(frozen=True)
class Analysis:
    system: object
    potential: object
    graph: object            # edge graph carrying the original weights
    normalization: object
    decomposition: object
    mane: object
    ext: object
    bound: object
    tol_zero: float
    tol_h: float

    @property
    def m(self):
        return self.normalization.m

    @property
    def V(self):
        return self.normalization.V

    @property
    def normalized_graph(self):
        return self.normalization.graph

    @property
    def omega_is_whole(self):
        """True when every edge is critical, i.e. the Aubry set is the whole shift."""
        return len(self.decomposition.critical_edge_set) == len(self.graph.edges)

    def lam(self):
        return self.bound.lam


def analyze(system, potential, tol_zero=1e-9, tol_h=1e-9, exact=True):
    """Normalize, decompose the Aubry set and compute barriers and the rate bound.

    With ``exact`` (default) potential values are converted to ``Fraction`` so
    every zero test is decided exactly; the tolerances then only guard floats.
    """
    if exact:
        potential = potential.exact()
    graph = pot.attach_potential(recode(system, potential.range), potential)
    ndata = pot.normalize(graph, tol_zero)
    decomp = aubry.decompose(ndata, tol_zero, tol_h)
    mane = aubry.mane_matrix(ndata.graph, decomp.components, tol_zero)
    ext = barriers.ext_cost_matrix(decomp, mane, ndata.graph, tol_zero)
    bound = barriers.rate_bound(ext, decomp)
    return Analysis(system, potential, graph, ndata, decomp, mane, ext, bound, tol_zero, tol_h)


def h_extended(analysis, precision=thermo.PrecisionConfig()):
    """``h`` recomputed at full precision from the maximal-entropy components."""
    g = analysis.normalized_graph
    best = None
    for cid in analysis.decomposition.max_entropy_ids:
        comp = analysis.decomposition.component(cid)
        adj = g.adjacency(comp.edge_set)[np.ix_(comp.vertex_set, comp.vertex_set)]
        h = thermo.entropy_mp(adj, precision)
        best = h if best is None else max(best, h)
    return best


def beta_grid(beta_min=1.0, beta_max=50.0, steps=50):
    if steps < 2:
        return [float(beta_min)]
    return [beta_min + (beta_max - beta_min) * t / (steps - 1) for t in range(steps)]


def sweep(analysis, betas, precision=thermo.PrecisionConfig(), workers=1):
    """Pressure sweep of the normalized potential with the precision pre-check."""
    betas = list(betas)
    precision.check_range(max(betas), analysis.bound.lam)
    h = h_extended(analysis, precision)
    return thermo.pressure_sweep(analysis.normalized_graph, betas, h, precision,
                                 exact_zero=analysis.omega_is_whole, workers=workers)


def zero_temperature_values(analysis, beta, precision=thermo.PrecisionConfig()):
    """Component values of ``(1/beta) log H_beta`` and their expected error.

    Near zero temperature this approximates the subaction selected by the
    limit, which is the one the per-pair barrier inequality refers to. The
    error is of order ``log(max in-degree) / beta``.
    """
    g = analysis.normalized_graph
    _, V = thermo.eigenfunction(g, beta, precision)
    values = {c.id: sum(V[v] for v in c.vertex_set) / len(c.vertex_set)
              for c in analysis.decomposition.components}
    indeg = max(len(e) for e in g.in_edges)
    return values, 2 * math.log(indeg) / beta


def verify(analysis, betas, precision=thermo.PrecisionConfig(), tol=1e-3, workers=1):
    points = sweep(analysis, betas, precision, workers)
    rate = thermo.empirical_rate(points)
    values, slack = None, 0.0
    trusted = [p.beta for p in points if p.trusted and p.beta > 0]
    if trusted:
        values, slack = zero_temperature_values(analysis, max(trusted), precision)
    return thermo.verify_rate(points, rate, analysis.bound, tol, analysis.decomposition,
                                   analysis.ext, component_values=values, slack=slack)


def safe_beta_max(lam, precision=thermo.PrecisionConfig(), cap=50.0, margin=0.75):
    """Largest beta (times ``margin``) at which the residual stays resolvable."""
    if lam is None or lam >= 0:
        return cap
    limit = (precision.mantissa_bits - 16) * math.log(2) / -float(lam)
    return min(cap, margin * limit)
