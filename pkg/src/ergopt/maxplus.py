"""Max-plus linear algebra on small dense matrices.

A matrix is a list of rows; ``None`` is the bottom element (minus infinity),
every other entry is a real number. The routines are written against the
number protocol only, so ``Fraction`` inputs are processed exactly and
``float`` inputs in double precision.
"""
from __future__ import annotations

from fractions import Fraction

from ._graph import is_nontrivial, strongly_connected_components
from .errors import NoCycle, PositiveCycle

BOTTOM = None


def oplus(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a if a >= b else b


def otimes(a, b):
    if a is None or b is None:
        return None
    return a + b


def exact_div(x, n):
    if isinstance(x, (int, Fraction)):
        return Fraction(x) / n
    return x / n


def square(M):
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("max-plus matrix must be square")
    return n


def shift(M, c):
    """Entrywise ``M - c`` on finite entries."""
    return [[None if x is None else x - c for x in row] for row in M]


def transpose(M):
    return [list(col) for col in zip(*M)]


def matmul(A, B):
    n, m, p = len(A), len(B), len(B[0]) if B else 0
    out = [[None] * p for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        Oi = out[i]
        for k in range(m):
            a = Ai[k]
            if a is None:
                continue
            Bk = B[k]
            for j in range(p):
                b = Bk[j]
                if b is None:
                    continue
                s = a + b
                if Oi[j] is None or s > Oi[j]:
                    Oi[j] = s
    return out


def _components(M):
    n = square(M)
    succ = [[v for v in range(n) if M[u][v] is not None] for u in range(n)]
    comps = strongly_connected_components(n, lambda u: succ[u])
    return [c for c in comps if is_nontrivial(c, lambda u, v: M[u][v] is not None)]


def _karp_component(M, comp):
    m = len(comp)
    src = comp[0]
    D = [{v: None for v in comp} for _ in range(m + 1)]
    pred = [{v: None for v in comp} for _ in range(m + 1)]
    D[0][src] = 0
    for k in range(1, m + 1):
        prev, cur, pk = D[k - 1], D[k], pred[k]
        for v in comp:
            best, arg = None, None
            for u in comp:
                w = M[u][v]
                if w is None or prev[u] is None:
                    continue
                s = prev[u] + w
                if best is None or s > best:
                    best, arg = s, u
            cur[v], pk[v] = best, arg
    lam, vstar = None, None
    for v in comp:
        if D[m][v] is None:
            continue
        worst = None
        for k in range(m):
            if D[k][v] is None:
                continue
            q = exact_div(D[m][v] - D[k][v], m - k)
            if worst is None or q < worst:
                worst = q
        if worst is not None and (lam is None or worst > lam):
            lam, vstar = worst, v
    # walk back along the optimal length-m walk into vstar
    walk = [vstar]
    for k in range(m, 0, -1):
        walk.append(pred[k][walk[-1]])
    walk.reverse()
    return lam, walk


def _cycle_mean(M, cycle):
    total = 0
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        total += M[a][b]
    return exact_div(total, len(cycle))


def _simple_cycles_in_walk(walk):
    out = []
    for i in range(len(walk)):
        try:
            j = walk.index(walk[i], i + 1)
        except ValueError:
            continue
        seg = walk[i:j]
        if len(set(seg)) == len(seg):
            out.append(seg)
    return out


def karp(M, tol=1e-12):
    """Maximum cycle mean and a simple cycle attaining it.

    Returns ``(lam, cycle)`` where ``cycle`` lists the vertices in order
    (the closing arc goes from the last vertex back to the first).
    """
    comps = _components(M)
    if not comps:
        raise NoCycle("matrix has no cycle of finite entries")
    best, best_comp, best_walk = None, None, None
    for comp in comps:
        lam, walk = _karp_component(M, comp)
        if best is None or lam > best:
            best, best_comp, best_walk = lam, comp, walk
    cands = _simple_cycles_in_walk(best_walk)
    if cands:
        cyc = max(cands, key=lambda c: _cycle_mean(M, c))
        if abs(_cycle_mean(M, cyc) - best) <= tol:
            return best, cyc
    return best, _critical_cycle(M, best_comp, best)


def _critical_cycle(M, comp, lam):
    sub = [[M[u][v] for v in comp] for u in comp]
    crit = critical_edges(sub, lam)
    succ = {}
    for u, v in sorted(crit):
        succ.setdefault(u, v)
    start = min(succ)
    seen, path = {}, []
    v = start
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = succ[v]
    return [comp[x] for x in path[seen[v]:]]


def max_cycle_mean(M):
    """Largest mean weight over directed cycles (Karp per SCC)."""
    return karp(M)[0]


def kleene_star(M, tol=1e-12):
    """Max-weight walk matrix (walks of length >= 0) by Floyd-Warshall.

    Requires every cycle to have non-positive weight; a diagonal that relaxes
    above ``tol`` raises :class:`PositiveCycle`.
    """
    n = square(M)
    d = [list(row) for row in M]
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik is None:
                continue
            di = d[i]
            for j in range(n):
                b = dk[j]
                if b is None:
                    continue
                s = dik + b
                if di[j] is None or s > di[j]:
                    di[j] = s
    for i in range(n):
        if d[i][i] is not None and d[i][i] > tol:
            raise PositiveCycle(f"cycle of positive weight {float(d[i][i]):.6g} through vertex {i}")
        d[i][i] = 0
    return d


def star_plus(M, tol=1e-12):
    """Max-weight walks of length >= 1: ``M (x) M*``."""
    return matmul(M, kleene_star(M, tol))


def critical_edges(M, lam, tol=1e-9):
    """Arcs lying on some cycle of mean ``lam``."""
    W = shift(M, lam)
    star = kleene_star(W, tol=max(tol, 1e-12))
    out = set()
    n = len(M)
    for u in range(n):
        for v in range(n):
            w = W[u][v]
            if w is None or star[v][u] is None:
                continue
            if abs(w + star[v][u]) <= tol:
                out.add((u, v))
    return out


def critical_vertices(M, lam, tol=1e-9):
    return sorted({u for u, _ in critical_edges(M, lam, tol)})


def principal_eigenvector(M, lam=None, tol=1e-9):
    """Canonical eigenvector ``V(v) = max_c star(c, v)`` over critical ``c``.

    ``star`` is the Kleene star of ``M - lam``. The result satisfies
    ``max_u V(u) + M[u][v] - lam = V(v)`` for every ``v`` reachable from the
    critical graph; unreachable entries are ``None``.
    """
    if lam is None:
        lam = max_cycle_mean(M)
    W = shift(M, lam)
    star = kleene_star(W, tol=max(tol, 1e-12))
    crit = critical_vertices(M, lam, tol)
    n = len(M)
    V = [None] * n
    for v in range(n):
        for c in crit:
            V[v] = oplus(V[v], star[c][v])
    return V
