"""Locally constant potentials, maximal averages and normalization.

The normalized potential is ``w(e) - m + V(tail e) - V(head e)``: cohomologous
to ``w - m``, non-positive, with maximal cycle mean 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import maxplus
from .errors import (MissingCylinderValue, NormalizationFailure, RangeMismatch,
                     WordTooShort)
from .sft import WeightedEdgeGraph, enumerate_words, word_str


@dataclass(frozen=True)
class LocallyConstantPotential:
    """A potential depending on the first ``range`` symbols of a point."""

    range: int
    values: dict

    def __post_init__(self):
        if self.range < 1:
            raise ValueError("range must be >= 1")
        vals = {tuple(w): v for w, v in self.values.items()}
        for w, v in vals.items():
            if len(w) != self.range:
                raise ValueError(f"word {w} does not have length {self.range}")
            if not math.isfinite(v):
                raise ValueError(f"value for {w} is not finite")
        object.__setattr__(self, "values", vals)

    def __call__(self, word):
        return self.values[tuple(word)]

    def missing_words(self, system):
        return [w for w in enumerate_words(system, self.range) if w not in self.values]

    def exact(self):
        """Copy with every value converted to an exact ``Fraction``."""
        return LocallyConstantPotential(self.range, {w: Fraction(v) for w, v in self.values.items()})


def attach_potential(graph: WeightedEdgeGraph, potential: LocallyConstantPotential):
    if potential.range != graph.k:
        raise RangeMismatch(f"potential has range {potential.range} but graph was recoded at k={graph.k}")
    missing = [e.label for e in graph.edges if e.label not in potential.values]
    if missing:
        raise MissingCylinderValue(word_str(w, graph.alphabet_size) for w in missing)
    return graph.with_weights(potential.values[e.label] for e in graph.edges)


def birkhoff_sum(potential, word):
    """Sum of the potential over every ``k``-window of ``word``."""
    k = potential.range
    word = tuple(word)
    if len(word) < k:
        raise WordTooShort(f"word of length {len(word)} is shorter than the range {k}")
    return sum(potential(word[i:i + k]) for i in range(len(word) - k + 1))


def maximal_average(graph):
    """``m(A)``: the maximum mean weight of a cycle of the recoded graph."""
    return maxplus.max_cycle_mean(graph.weight_matrix())


def _best_edge(graph, u, v):
    best = None
    for i in graph.out_edges[u]:
        e = graph.edges[i]
        if e.head == v and (best is None or e.weight > graph.edges[best].weight):
            best = i
    return best


def maximizing_cycle_edges(graph):
    _, cyc = maxplus.karp(graph.weight_matrix())
    return [_best_edge(graph, u, v) for u, v in zip(cyc, cyc[1:] + cyc[:1])]


def maximizing_cycle(graph):
    """Period word of a periodic orbit whose cycle measure is maximizing."""
    return tuple(graph.edges[i].label[0] for i in maximizing_cycle_edges(graph))


def calibrated_subaction(graph, m=None, tol=1e-9):
    M = graph.weight_matrix()
    if m is None:
        m = maxplus.max_cycle_mean(M)
    return maxplus.principal_eigenvector(M, m, tol)


@dataclass(frozen=True)
class NormalizationData:
    m: object
    V: tuple
    normalized_weights: tuple
    graph: WeightedEdgeGraph  # same edges, carrying the normalized weights


def normalize(graph, tol_zero=1e-9):
    """Compute ``m``, the canonical calibrated subaction and the normalized weights.

    Raises :class:`NormalizationFailure` if the result is not non-positive,
    calibrated and of zero maximal cycle mean (which would be a bug upstream).
    """
    m = maximal_average(graph)
    V = calibrated_subaction(graph, m, tol_zero)
    if any(v is None for v in V):
        raise NormalizationFailure("subaction undefined on some vertex: graph not strongly connected")
    wbar = tuple(e.weight - m + V[e.tail] - V[e.head] for e in graph.edges)
    data = NormalizationData(m, tuple(V), wbar, graph.with_weights(wbar))
    check_normalization(data, tol_zero)
    return data


def check_normalization(data, tol_zero=1e-9):
    g = data.graph
    w = data.normalized_weights
    bad = [g.edge_str(i) for i, x in enumerate(w) if x > 1e-12]
    if bad:
        raise NormalizationFailure(f"normalized weight positive on {bad}")
    for v in range(g.n_vertices):
        top = max(w[i] for i in g.in_edges[v])
        if abs(top) > tol_zero:
            raise NormalizationFailure(f"calibration fails at vertex {g.vertex_str(v)}: max incoming {top}")
    mean = maxplus.max_cycle_mean(g.weight_matrix())
    if abs(mean) > tol_zero:
        raise NormalizationFailure(f"normalized maximal cycle mean is {mean}, not 0")
