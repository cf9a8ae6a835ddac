"""Brute-force references for small instances.

None of these routines share code with the optimized paths they check:
cycle means come from explicit simple-cycle enumeration, walk suprema from a
walk-length dynamic program, barriers straight from their definition, and the
rate bound from enumerating every cyclic family of distinct components. All
arithmetic on weights is exact (``Fraction``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ErgoptError, NoCycle, TooLarge
from .potential import LocallyConstantPotential
from .sft import build_system, recode, enumerate_words
from .thermo import scaled_log_sum_exp

MAX_VERTICES = 12
MAX_WORDS = 1 << 24


def _exact(x):
    return Fraction(x)


def _check_size(graph, limit=MAX_VERTICES):
    if graph.n_vertices > limit:
        raise TooLarge(f"{graph.n_vertices} vertices exceeds the oracle limit of {limit}")


def _best_arcs(graph):
    best = {}
    for e in graph.edges:
        w = _exact(e.weight)
        key = (e.tail, e.head)
        if key not in best or w > best[key]:
            best[key] = w
    return best


def simple_cycles(n, arcs):
    """Every simple cycle (as a vertex list starting at its smallest vertex)."""
    succ = {u: sorted(v for (a, v) in arcs if a == u) for u in range(n)}
    out = []
    for s in range(n):
        stack = [(s, [s])]
        while stack:
            v, path = stack.pop()
            for w in succ[v]:
                if w == s:
                    out.append(path)
                elif w > s and w not in path:
                    stack.append((w, path + [w]))
    return out


def oracle_max_cycle_mean(graph):
    _check_size(graph)
    arcs = _best_arcs(graph)
    best = None
    for cyc in simple_cycles(graph.n_vertices, arcs):
        total = sum(arcs[(a, b)] for a, b in zip(cyc, cyc[1:] + cyc[:1]))
        mean = total / len(cyc)
        if best is None or mean > best:
            best = mean
    if best is None:
        raise NoCycle("graph has no cycle")
    return best


def oracle_mane_row(graph, u, max_len=None):
    """Best total weight of walks of length 1..max_len from ``u`` to every vertex."""
    _check_size(graph)
    n = graph.n_vertices
    if max_len is None:
        max_len = 2 * n
    if max_len < n:
        raise ValueError("max_len must be at least the number of vertices")
    arcs = _best_arcs(graph)
    cur = {u: Fraction(0)}
    best = [None] * n
    best_at_n = None
    for length in range(1, max_len + 1):
        nxt = {}
        for (a, b), w in arcs.items():
            if a in cur:
                s = cur[a] + w
                if b not in nxt or s > nxt[b]:
                    nxt[b] = s
        cur = nxt
        for b, s in cur.items():
            if best[b] is None or s > best[b]:
                best[b] = s
        if length == n:
            best_at_n = list(best)
    if best != best_at_n:
        raise ErgoptError("walk suprema still increasing past |V| steps: a positive cycle exists")
    return best


def oracle_mane(graph, u, v, max_len=None):
    return oracle_mane_row(graph, u, max_len)[v]


def oracle_component_rows(graph, components, max_len=None):
    rows = {}
    star = {u: oracle_mane_row(graph, u, max_len) for c in components for u in c.vertex_set}
    for c in components:
        row = [None] * graph.n_vertices
        for u in c.vertex_set:
            for v in range(graph.n_vertices):
                s = Fraction(0) if u == v else star[u][v]
                if s is not None and (row[v] is None or s > row[v]):
                    row[v] = s
        rows[c.id] = row
    return rows


def oracle_s_ext(decomposition, graph, j, i, max_len=None, rows=None):
    """Barrier into component ``i`` from component ``j``, straight from the definition."""
    if rows is None:
        rows = oracle_component_rows(graph, decomposition.components, max_len)
    comp = decomposition.component(i)
    inf = None
    for v in comp.vertex_set:
        cands = [e for idx, e in enumerate(graph.edges) if e.head == v and idx not in comp.edge_set]
        if not cands:
            continue
        vals = [rows[j][e.tail] + _exact(e.weight) for e in cands if rows[j][e.tail] is not None]
        if not vals:
            return None
        sup = max(vals)
        inf = sup if inf is None else min(inf, sup)
    return inf


def oracle_rate_bound(ext, ids):
    """Largest mean barrier over cyclic families of distinct components."""
    best = None
    for size in range(1, len(ids) + 1):
        for fam in itertools.permutations(ids, size):
            if fam[0] != min(fam):
                continue
            total = Fraction(0)
            for a, b in zip(fam, fam[1:] + fam[:1]):
                val = ext(b, a)
                if val is None:
                    break
                total += _exact(val)
            else:
                mean = total / size
                if best is None or mean > best:
                    best = mean
    return best


def _word_sums(system, potential, n):
    D, k = system.alphabet_size, potential.range
    count = int(np.linalg.matrix_power(system.matrix, n - 1).sum()) if n > 1 else D
    if count > MAX_WORDS:
        raise TooLarge(f"{count} admissible {n}-words exceeds the oracle limit of {MAX_WORDS}")
    table = np.full(D ** k, np.nan)
    for w, val in potential.values.items():
        code = 0
        for s in w:
            code = code * D + s
        table[code] = float(val)
    allowed = system.matrix.astype(bool)
    last = np.arange(D)
    code = np.arange(D)  # last min(len, k-1) symbols, base D
    sums = table[np.arange(D)] if k == 1 else np.zeros(D)
    length = 1
    mod = D ** max(k - 1, 1)
    while length < n:
        parts_last, parts_code, parts_sums = [], [], []
        for b in range(D):
            keep = allowed[last, b]
            c, s = code[keep], sums[keep]
            if k == 1:
                s = s + table[b]
            elif length + 1 >= k:
                s = s + table[c * D + b]  # c holds exactly the last k-1 symbols here
            parts_last.append(np.full(c.size, b))
            parts_code.append((c * D + b) % mod if k > 1 else c)
            parts_sums.append(s)
        last = np.concatenate(parts_last)
        code = np.concatenate(parts_code)
        sums = np.concatenate(parts_sums)
        length += 1
    assert sums.size == count
    return sums


def oracle_pressure_words(system, potential, beta, n):
    """``(1/n) log`` of the partition function over admissible ``n``-words.

    ``beta`` may be a number or a sequence (the word enumeration is shared).
    """
    if n < potential.range:
        raise ValueError("n must be at least the potential range")
    sums = _word_sums(system, potential, n)
    if np.isnan(sums).any():
        raise ErgoptError("potential lacks values for some admissible words")
    betas = [beta] if np.isscalar(beta) else list(beta)
    out = [scaled_log_sum_exp(float(b) * sums / n, n) for b in betas]
    return out[0] if np.isscalar(beta) else out


def pressure_words_envelope(beta, max_abs_weight, alphabet_size, n):
    return (beta * float(max_abs_weight) + math.log(alphabet_size)) / n


def normalized_potential(analysis):
    g = analysis.normalized_graph
    return LocallyConstantPotential(g.k, {e.label: e.weight for e in g.edges})


# ---------------------------------------------------------------- instances

def random_primitive_system(rng, D):
    while True:
        table = (rng.random((D, D)) < 0.7).astype(int)
        try:
            return build_system(D, table.tolist())
        except ErgoptError:
            continue


def random_planted_instance(rng, max_D=3, max_k=3, low=-5, twist=False):
    """Random SFT with integer weights in ``[low, 0]`` and a planted zero cycle.

    With ``twist`` a random integer coboundary and constant are added, so the
    normalization step has real work to do.
    """
    D = int(rng.integers(2, max_D + 1))
    system = random_primitive_system(rng, D)
    ks = [k for k in range(1, max_k + 1) if k > 1 or system.is_full_shift]
    k = int(rng.choice(ks))
    graph = recode(system, k)
    words = [e.label for e in graph.edges]
    values = {w: int(rng.integers(low, 1)) for w in words}
    arcs = {(e.tail, e.head) for e in graph.edges}
    cycles = simple_cycles(graph.n_vertices, arcs)
    cyc = cycles[int(rng.integers(len(cycles)))]
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        for e in graph.edges:
            if e.tail == a and e.head == b:
                values[e.label] = 0
                break
    if twist:
        g = {v: int(rng.integers(-3, 4)) for v in graph.vertices}
        c = int(rng.integers(-3, 4))
        values = {w: val + c + g[w[:-1]] - g[w[1:]] for w, val in values.items()}
    return system, LocallyConstantPotential(k, values)


# ---------------------------------------------------------------- reports

@dataclass(frozen=True)
class OracleReport:
    checked_quantity: str
    optimized_value: object
    oracle_value: object
    discrepancy: float
    instance: str
    passed: bool

    def line(self):
        status = "ok  " if self.passed else "FAIL"
        return (f"{status} {self.checked_quantity:<28} optimized={_fmt(self.optimized_value):<14} "
                f"oracle={_fmt(self.oracle_value):<14} |diff|={self.discrepancy:.3g}")


def _fmt(x):
    if x is None:
        return "bottom"
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _cmp(name, opt, ora, instance, tol):
    if opt is None or ora is None:
        ok = opt is None and ora is None
        return OracleReport(name, opt, ora, 0.0 if ok else math.inf, instance, ok)
    diff = abs(float(Fraction(opt) - Fraction(ora))) if not isinstance(opt, float) else abs(opt - float(ora))
    return OracleReport(name, opt, ora, diff, instance, diff <= tol)


def run_oracle_checks(analysis, max_length=None, tol=1e-10, betas=(0.0, 1.0, 5.0), n_words=14,
                      instance="", precision=None):
    """Compare every optimized quantity of ``analysis`` with its oracle."""
    from . import thermo

    reports = []
    graph = analysis.graph
    ngraph = analysis.normalized_graph
    decomp = analysis.decomposition
    _check_size(graph)
    reports.append(_cmp("m(A)", analysis.m, oracle_max_cycle_mean(graph), instance, tol))
    for u in range(ngraph.n_vertices):
        row = oracle_mane_row(ngraph, u, max_length)
        for v in range(ngraph.n_vertices):
            reports.append(_cmp(f"star({ngraph.vertex_str(u)},{ngraph.vertex_str(v)})",
                                analysis.mane.star[u][v], row[v], instance, tol))
    rows = oracle_component_rows(ngraph, decomp.components, max_length)
    for c in decomp.components:
        for v in range(ngraph.n_vertices):
            reports.append(_cmp(f"S(comp {c.id},{ngraph.vertex_str(v)})",
                                analysis.mane.from_component(c.id, v), rows[c.id][v], instance, tol))
    for j in decomp.ids:
        for i in decomp.ids:
            reports.append(_cmp(f"S_ext({j},{i})", analysis.ext(j, i),
                                oracle_s_ext(decomp, ngraph, j, i, rows=rows), instance, tol))
    reports.append(_cmp("lambda", analysis.bound.lam,
                        oracle_rate_bound(analysis.ext, analysis.bound.restricted_ids), instance, tol))
    precision = precision or thermo.PrecisionConfig(mantissa_bits=128, power_iter_rel_tol=1e-30)
    try:
        words = oracle_pressure_words(analysis.system, normalized_potential(analysis), betas, n_words)
    except TooLarge as exc:
        reports.append(OracleReport("pressure words", None, None, math.inf, f"{instance} skipped: {exc}", True))
        return reports
    wmax = max(abs(float(w)) for w in analysis.normalization.normalized_weights)
    for b, approx in zip(betas, words):
        P = float(thermo.pressure(ngraph, b, precision))
        env = pressure_words_envelope(b, wmax, analysis.system.alphabet_size, n_words)
        diff = abs(approx - P)
        reports.append(OracleReport(f"P({b:g}) words n={n_words}", P, approx, diff,
                                    f"{instance} envelope={env:.4g}", diff <= env))
    return reports
