"""Equivariant quantum differential equation of P^{m-1} and its solutions.

The connection is ``q d/dq - x*_q`` acting on H*_T(P^{m-1}); in the monomial
basis ``1, x, ..., x^{m-1}`` the operator ``x*_q`` is the companion matrix of
``prod_i (x - z_i) = q``.  Solutions come from the residue series in
:mod:`artifact.series`; along a ray ``s = r e^{-2 pi i theta}``, ``q = s^m``
the coordinate on the universal cover is ``log q = m (log r - 2 pi i theta)``.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import scipy.special

from . import _kernels
from .errors import DimensionMismatch, PoorFit, StepUnderflow, UnwrapFailure
from .rings import (
    CohClass,
    KClass,
    TorusParams,
    chern_character,
    coh_to_poly,
    integrate_values,
    vandermonde,
)
from .series import DEFAULT_CONFIG, Column, SeriesConfig, evaluate_solutions

log = logging.getLogger(__name__)

DEFAULT_R0 = 3.0


def ray_logq(r: float, theta: float, m: int) -> complex:
    """Universal-cover coordinate of ``q = (r e^{-2 pi i theta})^m``."""
    return m * (math.log(r) - 2j * math.pi * theta)


def _logq(q, logq):
    if logq is not None:
        return complex(logq)
    q = complex(q)
    if q == 0:
        raise ValueError("q must be nonzero")
    return cmath.log(q)


def relation_coefficients(tp: TorusParams) -> np.ndarray:
    """Coefficients of ``x^m - prod(x - z_i)`` in ``1, x, ..., x^{m-1}``:
    entry k is ``(-1)^{m-k-1} e_{m-k}(z)``."""
    m = tp.m
    return np.array([(-1) ** (m - k - 1) * tp.elementary_symmetric(m - k) for k in range(m)],
                    dtype=complex)


def connection_matrix(tp: TorusParams, q: complex) -> np.ndarray:
    """Matrix of quantum multiplication by ``x`` at ``q`` in the monomial basis."""
    m = tp.m
    C = np.zeros((m, m), dtype=complex)
    for k in range(m - 1):
        C[k + 1, k] = 1.0
    C[:, m - 1] = relation_coefficients(tp)
    C[0, m - 1] += complex(q)
    return C


def euler_matrix(tp: TorusParams, q: complex) -> np.ndarray:
    """``c_1 *_q`` in the monomial basis (``m`` times the connection matrix)."""
    return tp.m * connection_matrix(tp, q)


# ------------------------------------------------------------ residue terms


def _check_J(J: int, m: int) -> int:
    if not 1 <= J <= m:
        raise IndexError(f"fixed-point index J must lie in 1..{m}, got {J}")
    return J - 1


def jackson_term(J: int, rterm: int, q: complex, tp: TorusParams, logq=None) -> CohClass:
    """``-Res_{t = z_J + rterm}`` of master function times weight function.

    ``J`` is 1-based.  Closed form from ``Res_{u=-r} Gamma(u) = (-1)^r / r!``::

        (-1)^r / r! * e^{i pi sum z} (e^{-i pi m} q)^{z_J + r}
            * prod_{i != J} Gamma(z_i - z_J - r) * prod_{i != I} (z_i - z_J - r)
    """
    j = _check_J(J, tp.m)
    if rterm < 0:
        raise ValueError("rterm must be nonnegative")
    m = tp.m
    z = tp.z
    L = _logq(q, logq)
    t = z[j] + rterm
    log_fact = math.lgamma(rterm + 1)
    base = (-1) ** rterm * cmath.exp(1j * math.pi * sum(z) + t * (L - 1j * math.pi * m) - log_fact)
    for i in range(m):
        if i != j:
            base *= _kernels.cgamma(z[i] - t)
    vals = np.empty(m, dtype=complex)
    for I in range(m):
        w = base
        for i in range(m):
            if i != I:
                w *= z[i] - t
        vals[I] = w
    return CohClass(tp, vals)


def master_function(t: complex, tp: TorusParams, logq: complex) -> complex:
    """``e^{i pi sum z} (e^{-i pi m} q)^t prod_i Gamma(z_i - t)`` (scipy Gamma)."""
    m = tp.m
    val = cmath.exp(1j * math.pi * sum(tp.z) + t * (logq - 1j * math.pi * m))
    for zi in tp.z:
        val *= complex(scipy.special.gamma(zi - t))
    return val


def weight_function(t: complex, tp: TorusParams) -> np.ndarray:
    """``prod_{j}(y_j - t)`` at each fixed point: ``prod_{i != I}(z_i - t)``."""
    z = tp.zarr
    return np.array([np.prod(np.delete(z, I) - t) for I in range(tp.m)])


def residue_by_quadrature(J: int, rterm: int, q: complex, tp: TorusParams, logq=None,
                          radius: float = 0.05, nodes: int = 64) -> CohClass:
    """Trapezoid-rule contour integral of ``-master * weight`` around
    ``t = z_J + rterm``; an independent check of :func:`jackson_term`."""
    j = _check_J(J, tp.m)
    L = _logq(q, logq)
    t0 = tp.z[j] + rterm
    acc = np.zeros(tp.m, dtype=complex)
    for k in range(nodes):
        dt = radius * cmath.exp(2j * math.pi * k / nodes)
        t = t0 + dt
        acc += master_function(t, tp, L) * weight_function(t, tp) * dt
    return CohClass(tp, -acc / nodes)


# --------------------------------------------------------------- solutions


def jackson_solution(J: int, q: complex, tp: TorusParams, cfg: SeriesConfig = DEFAULT_CONFIG,
                     logq=None):
    """The Jackson integral ``Phi_J`` (J 1-based) as a class, with an estimate
    of the relative truncation error."""
    j = _check_J(J, tp.m)
    L = _logq(q, logq)
    w = np.zeros(tp.m, dtype=complex)
    w[j] = 1.0
    col = evaluate_solutions(tp, [w], L, cfg)[0]
    vals = col.values()
    trunc = cfg.tol if col.bits == 53 else 2.0 ** (-col.bits)
    return CohClass(tp, vals), trunc


def fundamental_apply(c: CohClass | KClass | Sequence, q: complex, tp: TorusParams,
                      cfg: SeriesConfig = DEFAULT_CONFIG, logq=None) -> Column:
    """Apply the fundamental solution to a class: ``sum_J c_J Phi_J``.

    ``c`` may be a cohomology class (fixed-point values), a raw weight vector
    or a K-class, in which case its Chern character is used and recomputed
    exactly at whatever precision the cancellation requires.
    """
    L = _logq(q, logq)
    if isinstance(c, CohClass):
        row = c.values
    else:
        row = c
    return evaluate_solutions(tp, [row], L, cfg)[0]


def phi_of_kclass(k: KClass, q: complex, tp: TorusParams, cfg: SeriesConfig = DEFAULT_CONFIG,
                  logq=None) -> CohClass:
    """Solution attached to a K-class: ``O(-n) (x) 1^w -> Z^w Phi^n``."""
    return CohClass(tp, fundamental_apply(k, q, tp, cfg, logq).values())


def phi_power(n: int, q: complex, tp: TorusParams, cfg: SeriesConfig = DEFAULT_CONFIG,
              logq=None) -> CohClass:
    """``Phi^n = sum_J exp(2 pi i n z_J) Phi_J``."""
    return phi_of_kclass(KClass.line(-n), q, tp, cfg, logq)


def qde_residual(evaluate: Callable[[complex], np.ndarray], logq: complex, tp: TorusParams,
                 h: float = 1e-4) -> float:
    """Relative residual ``|(q d/dq - x*_q) f| / |f|`` of a class-valued
    function given by its fixed-point values, by central differences in
    ``log q`` (a q-step of ``|q| h``)."""
    V = vandermonde(tp)

    def coeffs(L):
        return np.linalg.solve(V, np.asarray(evaluate(L), dtype=complex))

    c0 = coeffs(logq)
    dc = (coeffs(logq + h) - coeffs(logq - h)) / (2 * h)
    res = dc - connection_matrix(tp, cmath.exp(logq)) @ c0
    return float(np.linalg.norm(res) / np.linalg.norm(c0))


# ------------------------------------------------------------------- frames


def sector_arg(n: int, theta: float, m: int) -> float:
    """``arg(e^{-i pi} zeta_m^n s) = 2 pi n/m - pi - 2 pi theta``."""
    return 2 * math.pi * n / m - math.pi - 2 * math.pi * theta


def in_sector(n: int, theta: float, m: int) -> bool:
    return n / m - 1 < theta < n / m


@dataclass(frozen=True)
class SolutionFrame:
    """Solutions ``Phi^n`` at one point ``s = r e^{-2 pi i theta}``."""

    theta: float
    r: float
    tp: TorusParams
    labels: tuple
    columns: tuple
    min_hadamard: float = field(default=math.nan, compare=False)

    @property
    def logq(self) -> complex:
        return ray_logq(self.r, self.theta, self.tp.m)

    def values(self, i: int) -> np.ndarray:
        return self.columns[i].values()

    def log_integral(self, i: int) -> complex:
        return self.columns[i].integral_log

    def sector_args(self) -> list:
        return [sector_arg(n, self.theta, self.tp.m) for n in self.labels]

    def sector_flags(self) -> list:
        return [in_sector(n, self.theta, self.tp.m) for n in self.labels]

    def to_csv_rows(self) -> list:
        rows = []
        for n, col in zip(self.labels, self.columns):
            row = [self.r, n, col.logmag.real, col.logmag.imag]
            for v in col.direction:
                row += [v.real, v.imag]
            rows.append(row)
        return rows


def _series_frame(theta, r, tp, cfg, labels):
    cols = evaluate_solutions(tp, [KClass.line(-n) for n in labels], ray_logq(r, theta, tp.m), cfg)
    return SolutionFrame(theta, r, tp, tuple(labels), tuple(cols))


def fundamental_frame(theta: float, r: float, tp: TorusParams, cfg: SeriesConfig = DEFAULT_CONFIG,
                      labels: Sequence[int] | None = None, strategy: str = "series",
                      r0: float = DEFAULT_R0, rtol: float = 1e-10) -> SolutionFrame:
    """Columns ``Phi^n`` (n in ``labels``, default ``0..m-1``) at radius ``r``.

    ``strategy="series"`` sums the residue series directly with automatic
    precision escalation.  ``strategy="hybrid"`` sums the series at
    ``min(r, r0)`` and continues to ``r`` with :func:`ode_extend`; it is
    cheaper but carries subdominant columns only to double precision.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    labels = tuple(range(tp.m)) if labels is None else tuple(int(n) for n in labels)
    if strategy == "series" or r <= r0:
        return _series_frame(theta, r, tp, cfg, labels)
    if strategy != "hybrid":
        raise ValueError(f"unknown strategy {strategy!r}")
    start = _series_frame(theta, r0, tp, cfg, labels)
    return ode_extend(start, r, rtol=rtol)


def ode_extend(frame: SolutionFrame, r_target: float, rtol: float = 1e-10,
               hmin_rel: float = 1e-12, zero_connection: bool = False) -> SolutionFrame:
    """Continue every column of ``frame`` along its ray to ``r_target`` with
    an adaptive Dormand-Prince 5(4) integrator on ``dc/dr = (m/r) C(q) c``.

    ``zero_connection`` replaces the connection by zero (test hook).
    """
    if r_target <= frame.r:
        raise ValueError("r_target must exceed the frame radius")
    tp = frame.tp
    V = vandermonde(tp)
    Y = np.empty((tp.m, len(frame.columns)), dtype=complex)
    lnorm = np.empty(len(frame.columns), dtype=complex)
    for j, col in enumerate(frame.columns):
        c = np.linalg.solve(V, col.direction)
        nrm = float(np.max(np.abs(c)))
        Y[:, j] = c / nrm
        lnorm[j] = col.logmag + math.log(nrm)
    Y, lnorm, nacc, nrej, min_had, status = _kernels.dp45_extend(
        Y, lnorm, float(frame.r), float(r_target), float(frame.theta),
        relation_coefficients(tp), rtol, hmin_rel, 1e-2, 1e2, bool(zero_connection))
    if status:
        raise StepUnderflow(f"adaptive step fell below {hmin_rel:g}*r before reaching r={r_target}")
    log.debug("ode_extend %g -> %g: %d accepted, %d rejected, min Hadamard ratio %.3g",
              frame.r, r_target, nacc, nrej, min_had)
    cols = []
    for j in range(Y.shape[1]):
        vals = V @ Y[:, j]
        amax = float(np.max(np.abs(vals)))
        direction = vals / amax
        logmag = complex(lnorm[j]) + math.log(amax)
        integ = integrate_values(direction, tp)
        ilog = logmag + cmath.log(integ) if integ != 0 else complex(-math.inf)
        cols.append(Column(direction, logmag, ilog, 53, 0))
    return SolutionFrame(frame.theta, float(r_target), tp, frame.labels, tuple(cols), min_had)


# ----------------------------------------------------- continuous log traces


def _nearest_branch(prev: float, cur: float) -> float:
    return cur + 2 * math.pi * round((prev - cur) / (2 * math.pi))


def continuous_logs(evaluate: Callable[[float], np.ndarray], rgrid: Sequence[float],
                    max_jump: float = math.pi / 2, max_subdivisions: int = 1 << 12):
    """Evaluate complex logarithms on a grid and make their imaginary parts
    continuous in r.

    ``evaluate(r)`` returns an array of complex logs (one per tracked
    quantity).  The branch at the first radius is the principal one; later
    values take the branch nearest their predecessor.  Intervals where some
    imaginary part moves by ``max_jump`` or more are bisected.  Returns the
    refined grid and an array of shape (len(grid), k).
    """
    rs = [float(r) for r in rgrid]
    vals = [np.asarray(evaluate(r), dtype=complex) for r in rs]
    out_r = [rs[0]]
    out_v = [vals[0].copy()]
    budget = max_subdivisions
    stack = list(zip(rs[1:], vals[1:]))[::-1]
    while stack:
        r, v = stack.pop()
        prev = out_v[-1]
        adj = np.array([complex(x.real, _nearest_branch(p.imag, x.imag)) if np.isfinite(x.real) else x
                        for x, p in zip(v, prev)])
        jumps = np.abs(adj.imag - prev.imag)
        finite = np.isfinite(adj.real) & np.isfinite(prev.real)
        if np.any(jumps[finite] >= max_jump):
            budget -= 1
            if budget < 0:
                raise UnwrapFailure(
                    f"phase refinement exceeded {max_subdivisions} subdivisions near r={r:g}")
            rm = 0.5 * (out_r[-1] + r)
            stack.append((r, v))
            stack.append((rm, np.asarray(evaluate(rm), dtype=complex)))
            continue
        out_r.append(r)
        out_v.append(adj)
    return np.array(out_r), np.array(out_v)


def log_trace(tp: TorusParams, rows: Sequence, theta: float, rgrid: Sequence[float],
              cfg: SeriesConfig = DEFAULT_CONFIG, functional: str = "integral"):
    """Continuous complex logs along the ray of ``sum_J w_J Phi_J`` for each
    row.  ``functional`` is ``"integral"`` (log of the equivariant integral)
    or ``"norm"`` (log of the max-norm; imaginary part zero)."""
    rows = list(rows)

    def evaluate(r):
        cols = evaluate_solutions(tp, rows, ray_logq(r, theta, tp.m), cfg)
        if functional == "integral":
            return np.array([c.integral_log for c in cols])
        if functional == "norm":
            return np.array([c.logmag for c in cols])
        raise ValueError(f"unknown functional {functional!r}")

    return continuous_logs(evaluate, rgrid)


# -------------------------------------------------------------- asymptotics


def zeta(m: int, n: int) -> complex:
    return cmath.exp(2j * math.pi * n / m)


@dataclass(frozen=True)
class FitResult:
    c: complex
    n: int
    zeta: complex
    log_coeff: complex
    const: complex
    residual: float

    @property
    def rel_error(self) -> float:
        return abs(self.c - self.zeta) / abs(self.zeta)


def asymptotic_fit(samples: Sequence, theta: float, m: int, check: bool = True) -> FitResult:
    """Least-squares fit ``log value ~ m c r e^{-2 pi i theta} + a log r + b``.

    ``samples`` are ``(r, complex log)`` pairs whose imaginary parts are
    continuous in r (see :func:`continuous_logs`).  Returns the fitted
    ``c``, the nearest root of unity ``zeta_m^n`` and the max residual.
    """
    pts = sorted((float(r), complex(v)) for r, v in samples)
    if len(pts) < 8:
        raise ValueError("asymptotic_fit needs at least 8 samples")
    rs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if rs[-1] < 2 * rs[0]:
        raise ValueError("samples must span at least a factor 2 in r")
    if not np.all(np.isfinite(ys)):
        raise ValueError("non-finite log samples")
    rot = cmath.exp(-2j * math.pi * theta)
    A = np.stack([m * rs * rot, np.log(rs), np.ones_like(rs)], axis=1).astype(complex)
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = float(np.max(np.abs(A @ coef - ys)))
    c = complex(coef[0])
    n = int(np.argmin([abs(c - zeta(m, k)) for k in range(m)]))
    result = FitResult(c, n, zeta(m, n), complex(coef[1]), complex(coef[2]), resid)
    if check and resid > 0.05 * abs(m * c * rs[-1]):
        raise PoorFit(f"fit residual {resid:.3g} too large (pre-asymptotic data?)")
    return result


def fit_solutions(tp: TorusParams, rows: Sequence, theta: float, rgrid: Sequence[float],
                  cfg: SeriesConfig = DEFAULT_CONFIG) -> list:
    """Asymptotic fit of every row's solution along the ray."""
    grid, logs = log_trace(tp, rows, theta, rgrid, cfg)
    return [asymptotic_fit(list(zip(grid, logs[:, i])), theta, tp.m) for i in range(logs.shape[1])]


def growth_rate(k: KClass, theta: float, rgrid: Sequence[float], tp: TorusParams,
                cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    """``max (log |Phi(k)| / r)`` over the last third of the grid."""
    if k.is_zero():
        return -math.inf
    rgrid = np.asarray(rgrid, dtype=float)
    if np.any(np.diff(rgrid) <= 0):
        raise ValueError("grid must be increasing")
    tail = rgrid[len(rgrid) - max(1, len(rgrid) // 3):]
    rates = []
    for r in tail:
        col = evaluate_solutions(tp, [k], ray_logq(r, theta, tp.m), cfg)[0]
        rates.append(col.logmag.real / r)
    return float(max(rates))
