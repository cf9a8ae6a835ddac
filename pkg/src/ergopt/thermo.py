"""Extended-precision transfer operators, pressure sweeps and rate estimates.

All pressures here are for the normalized potential; the pressure of the
original potential is ``P(beta) + beta * m``.

The Perron root of the transfer matrix is found by a shifted inverse power
iteration whose shift is the upper Collatz-Wielandt bound (Noda's iteration).
The iterate stays positive and the bracket ``[min (Lx)_v / x_v, max (Lx)_v / x_v]``
always contains the root, so stopping is certified. Plain power iteration is
useless here: near zero temperature the spectral gap closes like ``exp(lambda*beta)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from ._graph import is_nontrivial, strongly_connected_components
from .errors import (EmptyTermList, InsufficientPoints, NoConvergence, NoCycle,
                     PrecisionTooLow)

LOG2E = 1.0 / math.log(2.0)


@dataclass(frozen=True)
class PrecisionConfig:
    mantissa_bits: int = 256
    power_iter_rel_tol: float = 1e-40
    max_iters: int = 100_000

    def __post_init__(self):
        if self.mantissa_bits < 64:
            raise ValueError("mantissa_bits must be >= 64")
        if not self.power_iter_rel_tol > 0:
            raise ValueError("power_iter_rel_tol must be positive")

    def context(self):
        ctx = mpmath.MPContext()
        ctx.prec = self.mantissa_bits
        return ctx

    @property
    def untrusted_below(self):
        return mpmath.ldexp(mpmath.mpf(1), -self.mantissa_bits + 8)

    def required_bits(self, beta, lam):
        """Bits needed so that ``exp(beta*lam) >= 2**(16 - bits)``."""
        return math.ceil(16 - beta * float(lam) * LOG2E)

    def check_range(self, beta_max, lam_est):
        """Reject a sweep whose residual would underflow the mantissa.

        ``lam_est`` is the predicted decay rate of the residual (the barrier
        bound); ``None`` means the residual vanishes identically.
        """
        if lam_est is None or lam_est >= 0 or beta_max <= 0:
            return
        need = self.required_bits(beta_max, lam_est)
        if need > self.mantissa_bits:
            max_beta = (self.mantissa_bits - 16) / (-float(lam_est) * LOG2E)
            raise PrecisionTooLow(
                f"residual ~ exp({float(lam_est):.6g} * beta) reaches 2^{-(need - 16):d} at "
                f"beta={beta_max:g}, below what {self.mantissa_bits}-bit arithmetic resolves. "
                f"Use --precision-bits {need} or more, or lower --beta-max to {max_beta:.4g}.")


def to_mp(ctx, x):
    if isinstance(x, Fraction):
        return ctx.mpf(x.numerator) / x.denominator
    return ctx.mpf(x)


def transfer_matrix(graph, beta, ctx):
    """``L[v, u] = sum of exp(beta * w(e))`` over edges ``e: u -> v``."""
    n = graph.n_vertices
    L = ctx.zeros(n, n)
    b = to_mp(ctx, beta)
    for e in graph.edges:
        L[e.head, e.tail] += ctx.exp(b * to_mp(ctx, e.weight))
    return L


def transfer_apply(graph, beta, vector, precision=PrecisionConfig()):
    """Apply the transfer operator at inverse temperature ``beta`` to a vertex function."""
    ctx = precision.context()
    b = to_mp(ctx, beta)
    vec = [to_mp(ctx, x) for x in vector]
    out = [ctx.mpf(0) for _ in range(graph.n_vertices)]
    for e in graph.edges:
        out[e.head] += ctx.exp(b * to_mp(ctx, e.weight)) * vec[e.tail]
    return out


@dataclass
class PerronResult:
    lower: object
    upper: object
    vector: list
    iterations: int

    @property
    def root(self):
        return (self.lower + self.upper) / 2


def perron(L, ctx, rel_tol, max_iters=100_000, x0=None, polish=True):
    """Perron root and vector of an irreducible nonnegative mp matrix.

    Stops once the Collatz-Wielandt bracket is within ``rel_tol``; with
    ``polish`` it keeps going while the bracket still at least halves, up to
    working precision (convergence is quadratic, so this costs a step or two).
    """
    n = L.rows
    x = ctx.matrix([1] * n) if x0 is None else ctx.matrix(list(x0))
    floor = ctx.ldexp(ctx.mpf(1), 8 - ctx.prec)
    best = None
    for it in range(max_iters + 1):
        y = L * x
        ratios = [y[i] / x[i] for i in range(n)]
        lo, hi = min(ratios), max(ratios)
        width = hi - lo
        if best is not None and not width < best.upper - best.lower:
            return best  # polishing stalled at working precision
        if width <= rel_tol * lo:
            res = PerronResult(lo, hi, [x[i] for i in range(n)], it)
            if not polish or width <= floor * lo:
                return res
            if best is not None and not 2 * width <= best.upper - best.lower:
                return res
            best = res
        # a few ulps above the upper bound keeps the shifted matrix an M-matrix
        shift = hi * (1 + floor)
        try:
            z = ctx.lu_solve(shift * ctx.eye(n) - L, x)
        except ZeroDivisionError:
            if best is not None:
                return best
            if width > rel_tol * lo:
                raise NoConvergence("shifted system singular before the bracket closed")
            return PerronResult(lo, hi, [x[i] for i in range(n)], it)
        if all(z[i] < 0 for i in range(n)):
            z = -z  # shift fell below the root by rounding; direction is still right
        if not all(z[i] > 0 for i in range(n)):
            z = y  # mixed signs: take a plain power step instead
        x = z / max(z[i] for i in range(n))
    raise NoConvergence(f"Perron iteration: bracket width {ctx.nstr(hi - lo, 5)} after {max_iters} steps")


def pressure_detail(graph, beta, precision=PrecisionConfig(), x0=None):
    ctx = precision.context()
    L = transfer_matrix(graph, beta, ctx)
    try:
        res = perron(L, ctx, ctx.mpf(precision.power_iter_rel_tol), precision.max_iters, x0)
    except NoConvergence as exc:
        raise NoConvergence(f"beta={beta}: {exc}") from None
    P = ctx.log(res.root)
    err = ctx.log(res.upper) - ctx.log(res.lower)
    return P, err, res


def pressure(graph, beta, precision=PrecisionConfig()):
    """``P(beta)``: log of the spectral radius of the transfer matrix."""
    return pressure_detail(graph, beta, precision)[0]


def entropy_mp(adjacency, precision=PrecisionConfig()):
    """Topological entropy in extended precision (max over irreducible blocks)."""
    A = np.asarray(adjacency)
    n = A.shape[0]
    ctx = precision.context()
    comps = strongly_connected_components(n, lambda u: np.nonzero(A[u])[0].tolist())
    comps = [c for c in comps if is_nontrivial(c, lambda u, v: A[u, v] > 0)]
    if not comps:
        raise NoCycle("adjacency is nilpotent")
    best = ctx.mpf(0)
    for comp in comps:
        sub = A[np.ix_(comp, comp)]
        if sub.sum() == len(comp):
            continue
        M = ctx.matrix([[int(x) for x in row] for row in sub])
        res = perron(M, ctx, ctx.mpf(precision.power_iter_rel_tol), precision.max_iters)
        best = max(best, ctx.log(res.root))
    return best


@dataclass(frozen=True)
class PressurePoint:
    beta: float
    pressure: object
    residual: object
    log_residual: float
    trusted: bool
    exact_zero: bool = False
    error_bound: object = 0


def _point(beta, P, err, h, h_err, precision):
    ctx = precision.context()
    D = P - h
    bound = err + h_err
    if D > 0:
        logD = float(ctx.log(D))
    else:
        logD = -math.inf
    trusted = bool(D >= precision.untrusted_below and D > 256 * bound)
    return PressurePoint(beta, P, D, logD, trusted, False, bound)


def _pack(x):
    # mpf types are tied to their context and do not pickle; raw tuples do
    return x._mpf_ if hasattr(x, "_mpf_") else x


def _unpack(ctx, x):
    return ctx.make_mpf(x) if isinstance(x, tuple) else x


def _sweep_chunk(graph, betas, h, h_err, precision):
    out, x = [], None
    for beta in betas:
        P, err, res = pressure_detail(graph, beta, precision, x0=x)
        x = res.vector
        out.append(_point(beta, P, err, h, h_err, precision))
    return out


def _remote_chunk(args):
    graph, betas, h, h_err, precision = args
    ctx = precision.context()
    pts = _sweep_chunk(graph, betas, _unpack(ctx, h), _unpack(ctx, h_err), precision)
    return [(p.beta, _pack(p.pressure), _pack(p.residual), p.log_residual, p.trusted,
             _pack(p.error_bound)) for p in pts]


def pressure_sweep(graph, beta_grid, h, precision=PrecisionConfig(), *, exact_zero=False,
                   h_err=0, workers=1):
    """Pressures and residuals ``P(beta) - h`` over a grid of inverse temperatures.

    ``h`` must be computed at the same precision. With ``exact_zero`` (the
    Aubry set is the whole shift) every residual is 0 by construction and no
    eigenvalue is computed. Residuals under ``2**(8 - mantissa_bits)`` or not
    clearly above the eigenvalue bracket are marked untrusted.
    """
    betas = list(beta_grid)
    if exact_zero:
        return [PressurePoint(b, h, h * 0, -math.inf, False, True, 0) for b in betas]
    if workers <= 1 or len(betas) < 2 * workers:
        return _sweep_chunk(graph, betas, h, h_err, precision)
    # contiguous chunks keep the warm start effective inside each worker
    size = -(-len(betas) // workers)
    chunks = [betas[i:i + size] for i in range(0, len(betas), size)]
    ctx = precision.context()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_remote_chunk, [(graph, c, _pack(h), _pack(h_err), precision) for c in chunks])
        rows = [row for part in parts for row in part]
    return [PressurePoint(b, _unpack(ctx, P), _unpack(ctx, D), logD, trusted, False, _unpack(ctx, err))
            for b, P, D, logD, trusted, err in rows]


@dataclass
class RateEstimate:
    slopes: list  # (beta_a, beta_b, slope)
    gamma_estimate: float
    gamma_naive: float
    exact_zero: bool = False
    note: str = ""


def empirical_rate(points):
    """Finite-difference decay rate of ``log(P - h)`` over the trusted points."""
    if points and all(p.exact_zero for p in points):
        return RateEstimate([], -math.inf, -math.inf, True, "rate = -inf (P == h identically)")
    good = sorted((p for p in points if p.trusted), key=lambda p: p.beta)
    if len(good) < 3:
        raise InsufficientPoints(f"need >= 3 trusted points, have {len(good)}")
    slopes = []
    for a, b in zip(good, good[1:]):
        slopes.append((a.beta, b.beta, (b.log_residual - a.log_residual) / (b.beta - a.beta)))
    last = good[-1]
    return RateEstimate(slopes, slopes[-1][2], last.log_residual / last.beta)


@dataclass
class RateReport:
    points: list
    rate: RateEstimate
    lam: object
    tol: float
    passed: bool
    notes: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    @property
    def gamma_estimate(self):
        return self.rate.gamma_estimate

    @property
    def slopes(self):
        return self.rate.slopes


SUBACTION_CAVEAT = (
    "caveat: the per-pair inequality gamma + V(i) >= S_ext(j,i) + V(j) holds for a subaction "
    "obtained as a zero-temperature limit of (1/beta) log H_beta; V here is that quantity at one "
    "finite beta (or the canonical max-plus subaction), so these rows are diagnostic only and "
    "never fail a run")


def verify_rate(points, rate, bound, tol=1e-3, decomposition=None, ext=None,
                     component_values=None, slack=0.0):
    """Check that the measured decay rate is not faster than the barrier bound.

    PASS iff ``gamma_estimate >= lambda - tol``. When ``decomposition`` and
    ``ext`` are given, the per-pair subaction inequality is tabulated as a
    diagnostic, using ``component_values`` (id -> V) when supplied and the
    components' canonical values otherwise; ``slack`` widens the check for
    a finite-temperature approximation of V.
    """
    notes = []
    lam = bound.lam
    if rate.exact_zero:
        passed = True
        notes.append("Aubry set is the whole shift: P(beta) == h, nothing to bound")
    elif lam is None:
        passed = True
        notes.append("no finite barrier cycle among maximal-entropy components: bound is vacuous")
    else:
        passed = rate.gamma_estimate >= float(lam) - tol
    diagnostics = []
    if decomposition is not None and ext is not None and not rate.exact_zero:
        excluded = [c.id for c in decomposition.components if c.id not in bound.restricted_ids]
        if excluded:
            notes.append(f"components {excluded} have entropy below h and are excluded from the bound")
        if component_values is None:
            component_values = {c.id: float(c.subaction_value) for c in decomposition.components}
        for i in bound.restricted_ids:
            for j in decomposition.ids:
                s = ext(j, i)
                if s is None:
                    continue
                lhs = rate.gamma_estimate + component_values[i]
                rhs = float(s) + component_values[j]
                diagnostics.append((i, j, lhs, rhs, lhs >= rhs - tol - slack))
    return RateReport(points, rate, lam, tol, passed, notes, diagnostics)


def eigenfunction(graph, beta, precision=PrecisionConfig()):
    """Dominant positive eigenvector ``H`` (sup-norm 1) and ``(1/beta) log H``."""
    _, _, res = pressure_detail(graph, beta, precision)
    ctx = precision.context()
    top = max(res.vector)
    H = [x / top for x in res.vector]
    V = [float(ctx.log(x)) / float(beta) if beta else 0.0 for x in H]
    return H, V


def calibration_defect(graph, V):
    """``max_v |V(v) - max over edges e -> v of (w(e) + V(tail e))|``."""
    worst = 0.0
    for v in range(graph.n_vertices):
        best = max(float(graph.edges[i].weight) + V[graph.edges[i].tail] for i in graph.in_edges[v])
        worst = max(worst, abs(V[v] - best))
    return worst


def scaled_log_sum_exp(terms, n, ctx=None):
    """``(1/n) log sum_i exp(n (phi_i + psi_i))`` evaluated without overflow.

    ``terms`` is a sequence of ``(phi, psi)`` pairs, or a numpy array of pairs
    (shape ``(N, 2)``) or of already-summed exponents (shape ``(N,)``).
    """
    if isinstance(terms, np.ndarray):
        s = terms.sum(axis=-1) if terms.ndim == 2 else terms
        if s.size == 0:
            raise EmptyTermList("no terms")
        top = s.max()
        return float(top + np.log(np.exp(n * (s - top)).sum()) / n)
    sums = [phi + psi for phi, psi in terms]
    if not sums:
        raise EmptyTermList("no terms")
    top = max(sums)
    if ctx is None:
        return float(top) + math.log(sum(math.exp(n * float(s - top)) for s in sums)) / n
    return top + ctx.log(ctx.fsum(ctx.exp(n * (s - top)) for s in sums)) / n
