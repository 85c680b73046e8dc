"""Central charges along rays and the diagnostics built on them.

Along ``t = r e^{-2 pi i theta}`` every object E of a collection has central
charge ``Z_t(E) = integral of Phi_t(Ch E)``.  Its continuous logarithm gives the
mass ``M = |Z|`` and the phase ``phi = Im log Z / pi``; gap conditions on the
phases decide whether the collection glues to a stability condition, and the
normalised log-ratios test quasi-convergence.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import qde
from .errors import GapViolation, PlanInfeasible
from .mutation import Collection, is_admissible, rotated_roots
from .rings import EvalTuple, KClass, TorusParams, knorm
from .series import DEFAULT_CONFIG, SeriesConfig, evaluate_solutions

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PathConfig:
    theta: float
    r_min: float
    r_max: float
    tp: TorusParams
    samples: int = 256
    s_convention: str = "half"
    series: SeriesConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise ValueError("need 0 < r_min < r_max")
        if self.samples < 16:
            raise ValueError("samples must be at least 16")
        if self.s_convention not in ("half", "direct"):
            raise ValueError("s_convention must be 'half' or 'direct'")

    def grid(self) -> np.ndarray:
        return np.geomspace(self.r_min, self.r_max, self.samples)

    def eval_tuple(self) -> EvalTuple:
        """The stability tuple whose induced parameter point is ``tp.z``."""
        scale = 2.0 if self.s_convention == "half" else 1.0
        return EvalTuple(tuple(scale * z for z in self.tp.z))


# ---------------------------------------------------------- central charges


@dataclass(frozen=True)
class CentralCharge:
    """``Z = exp(log)``; the log is kept because ``|Z|`` grows like ``e^{m r}``."""

    log: complex

    @property
    def value(self) -> complex:
        return cmath.exp(self.log) if math.isfinite(self.log.real) else 0j


def central_charge(k: KClass, r: float, theta: float, tp: TorusParams,
                   cfg: SeriesConfig = DEFAULT_CONFIG) -> CentralCharge:
    """Equivariant integral of the solution attached to ``k`` at ``t = r e^{-2 pi i theta}``."""
    col = evaluate_solutions(tp, [k], qde.ray_logq(r, theta, tp.m), cfg)[0]
    return CentralCharge(complex(col.integral_log))


# ------------------------------------------------------------------ traces


@dataclass(frozen=True)
class PhaseTrace:
    """Continuous logs of central charges; row = radius, column = object."""

    r: np.ndarray
    labels: tuple
    logz: np.ndarray

    @classmethod
    def from_phases(cls, r, labels, phi, log_mass=None) -> "PhaseTrace":
        """Build a trace from phases (and optional log-masses) directly."""
        phi = np.asarray(phi, dtype=float)
        lm = np.zeros_like(phi) if log_mass is None else np.asarray(log_mass, dtype=float)
        return cls(np.asarray(r, dtype=float), tuple(labels), lm + 1j * math.pi * phi)

    @property
    def log_mass(self) -> np.ndarray:
        return self.logz.real

    @property
    def mass(self) -> np.ndarray:
        return np.exp(self.logz.real)

    @property
    def phi(self) -> np.ndarray:
        return self.logz.imag / math.pi

    @property
    def z(self) -> np.ndarray:
        return np.exp(self.logz)

    @property
    def p(self) -> np.ndarray:
        return gluing_shift(self.phi)

    def index_of(self, r: float) -> int:
        return int(np.argmin(np.abs(self.r - r)))

    def csv_rows(self) -> list:
        rows = []
        Z, lm, ph, p = self.z, self.log_mass, self.phi, self.p
        for a, r in enumerate(self.r):
            for b, lab in enumerate(self.labels):
                rows.append([r, lab, Z[a, b].real, Z[a, b].imag, lm[a, b], ph[a, b], int(p[a, b])])
        return rows


def gluing_shift(phi):
    """Integers ``p`` with ``phi + p`` in ``(0, 1]``."""
    return 1 - np.ceil(np.asarray(phi, dtype=float)).astype(int)


def phase_trace(c: Collection | Sequence[KClass], path: PathConfig) -> PhaseTrace:
    """Trace ``log Z`` of each object over the grid of ``path``, bisecting
    grid intervals until no phase moves by 1/2 or more between samples."""
    if isinstance(c, Collection):
        ks, labels = c.kclasses, tuple(o.label for o in c.objects)
    else:
        ks = list(c)
        labels = tuple(k.label() for k in ks)
    grid, logs = qde.log_trace(path.tp, ks, path.theta, path.grid(), path.series)
    return PhaseTrace(grid, labels, logs)


# ------------------------------------------------------------------- gaps


def gap_holds(phi_row: np.ndarray) -> np.ndarray:
    """Per adjacent pair: ``ceil(phi_i) < phi_{i+1}``."""
    return np.ceil(phi_row[:-1]) < phi_row[1:]


def gap_report(trace: PhaseTrace):
    """Smallest grid radius from which the gap condition holds at every later
    sample (``None`` if it fails at the last sample) and the per-sample table
    ``(r, holds per pair, phi_{i+1} - ceil(phi_i) per pair)``."""
    phi = trace.phi
    holds = np.array([gap_holds(row) for row in phi]).reshape(len(trace.r), -1)
    margins = np.array([row[1:] - np.ceil(row[:-1]) for row in phi]).reshape(len(trace.r), -1)
    ok = holds.all(axis=1)
    r_star = None
    if ok[-1]:
        bad = np.where(~ok)[0]
        first = bad[-1] + 1 if len(bad) else 0
        r_star = float(trace.r[first])
    table = [(float(r), [bool(h) for h in hrow], [float(x) for x in mrow])
             for r, hrow, mrow in zip(trace.r, holds, margins)]
    return r_star, table


@dataclass(frozen=True)
class GluingEntry:
    label: str
    p: int
    phase: float

    @property
    def descriptor(self) -> str:
        return f"{self.label}*Rep(T)[{self.p}]"


def gluing_data(trace: PhaseTrace, r: float) -> list:
    """Shifts ``p_i`` at the sample nearest ``r`` and the ordered factors of
    the glued decomposition."""
    i = trace.index_of(r)
    phi = trace.phi[i]
    holds = gap_holds(phi)
    if not holds.all():
        j = int(np.where(~holds)[0][0])
        raise GapViolation(f"ceil(phi_{j}) = {math.ceil(phi[j])} >= phi_{j + 1} = {phi[j + 1]:.6g} "
                           f"at r = {trace.r[i]:.6g}")
    p = gluing_shift(phi)
    return [GluingEntry(lab, int(pi), float(f)) for lab, pi, f in zip(trace.labels, p, phi)]


def sod_descriptor(entries: Sequence[GluingEntry]) -> str:
    return "<" + ", ".join(e.descriptor for e in entries) + ">"


# ---------------------------------------------------------- quasi-convergence


@dataclass(frozen=True)
class EstimatorResult:
    values: np.ndarray
    tail: complex
    predicted: complex | None

    @property
    def tail_error(self) -> float | None:
        return None if self.predicted is None else abs(self.tail - self.predicted)


def squash(l):
    """``l / (1 + |l|)``; bounded by 1 in modulus."""
    l = np.asarray(l, dtype=complex)
    return l / (1.0 + np.abs(l))


def quasi_convergence_estimator(trace: PhaseTrace, i: int, j: int, theta: float | None = None,
                                sigma: Sequence[int] | None = None, m: int | None = None) -> EstimatorResult:
    """Normalised average logarithm of object ``i`` relative to object ``j``.

    ``l = (log M_i - log M_j) + i pi (phi_i - phi_j)``.  With ``theta``,
    ``sigma`` and ``m`` the predicted limit direction
    ``e^{-2 pi i theta}(zeta^{sigma_i} - zeta^{sigma_j})`` is returned scaled
    to modulus 1.
    """
    l = trace.logz[:, i] - trace.logz[:, j]
    vals = squash(l)
    pred = None
    if theta is not None and sigma is not None and m is not None:
        v = rotated_roots(theta, m)
        d = v[sigma[i]] - v[sigma[j]]
        pred = complex(d / abs(d)) if abs(d) > 0 else 0j
    return EstimatorResult(vals, complex(vals[-1]), pred)


# ------------------------------------------------------------------ support


DEFAULT_TWISTS = "unit"


def twist_sample(m: int) -> list:
    """``0`` and ``+-e_i``."""
    out = [(0,) * m]
    for i in range(m):
        for sgn in (1, -1):
            w = [0] * m
            w[i] = sgn
            out.append(tuple(w))
    return out


def support_ratio(c: Collection, trace: PhaseTrace, s: EvalTuple, tp: TorusParams,
                  twists: Sequence[Sequence[int]] | None = None) -> np.ndarray:
    """``C(r) = max_{E, w} ||E (x) 1^w|| / |Z(E (x) 1^w)|`` on the trace grid.

    Twisting multiplies the central charge by ``exp(2 pi i <w, z>)``.
    """
    twists = twist_sample(tp.m) if twists is None else [tuple(w) for w in twists]
    z = tp.zarr
    logc = np.full(len(trace.r), -np.inf)
    for b, obj in enumerate(c.objects):
        for w in twists:
            k = obj.kclass.tensor_twist(w)
            num = knorm(k, s)
            if num == 0:
                continue
            log_twist = (2j * math.pi * np.dot(np.array(w, dtype=float), z)).real
            val = math.log(num) - (trace.log_mass[:, b] + log_twist)
            logc = np.maximum(logc, val)
    return np.exp(logc)


# ------------------------------------------------------- geometric start (m=3)


@dataclass(frozen=True)
class GeometricStartPlan:
    reading: str
    theta: float
    sigma: tuple
    u: tuple
    epsilon: float
    mu: float
    mu_prime: float
    delta_prime: float
    delta: float
    beta: tuple
    e_bound: float
    e_max: tuple
    checks: dict
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "reading": self.reading, "theta": self.theta, "sigma": list(self.sigma),
            "u": list(self.u), "epsilon": self.epsilon, "mu": self.mu,
            "mu_prime": self.mu_prime, "delta_prime": self.delta_prime, "delta": self.delta,
            "beta": list(self.beta), "e_bound": self.e_bound, "e_max": list(self.e_max),
            "checks": dict(self.checks), "violations": list(self.violations),
        }


def _constants(u, reading):
    """epsilon, mu, mu' for sorted imaginary parts ``u``."""
    umax = max(abs(x) for x in u)
    eps = math.pi / (16.0 * umax)
    k = eps / math.pi
    gaps = [u[i + 1] - u[i] for i in range(len(u) - 1)]
    if reading == "literal":
        mu_p = min(min(k * u[i + 1] - u[i] for i in range(2)), u[0])
        mu = min(min(k * u[i] - u[i + 1] for i in range(2)), u[2])
    else:
        mu_p = k * min(min(gaps), abs(u[0]))
        mu = -k * max(max(gaps), abs(u[2]))
    return eps, mu, mu_p


def _plan_for(dp, imlog, rgrid, u, eps, mu, mu_p, reading, r_max):
    """Every check of the scheduler at a candidate ``delta'``."""
    k = len(u)
    interp = [lambda r, c=c: np.interp(r, rgrid, imlog[:, c]) for c in range(k)]
    if reading == "literal":
        beta = [0.5 + j - u[j] / (math.pi * dp) for j in range(k)]
        offset = [0.0] * k
    else:
        beta = [math.pi * (j + 0.5) - float(interp[j](dp)) for j in range(k)]
        offset = [float(interp[j](dp)) - 3 * dp * u[j] for j in range(k)]

    def phi(j, r):
        return (interp[j](r) + beta[j]) / math.pi

    def model(j, r):
        return (3 * np.asarray(r) * u[j] + beta[j] + offset[j]) / math.pi

    delta = dp - eps
    tail = rgrid[rgrid > dp]
    if len(tail) == 0:
        tail = np.array([r_max])
    e_max = [float(np.max(np.abs(phi(j, tail) - model(j, tail)))) for j in range(k)]
    bound = min(-mu / 4, mu_p / 4) if mu < 0 < mu_p else 0.0

    checks, bad = {}, []

    def record(name, ok, detail):
        checks[name] = "PASS" if ok else "FAIL"
        if not ok:
            bad.append(f"{name}: {detail}")

    record("mu_range", -0.5 < mu < 0 < mu_p < 0.5, f"mu={mu:.6g}, mu'={mu_p:.6g}")
    record("delta_positive", delta > 0, f"delta={delta:.6g}")
    for j in range(k):
        record(f"e_bound[{j}]", e_max[j] < bound, f"sup e_{j} = {e_max[j]:.3g} >= {bound:.3g}")
    win = np.linspace(delta - eps, delta + eps, 65)[1:-1]
    for j in range(k):
        vals = phi(j, win)
        ok = bool(np.all((vals > j) & (vals < j + 1)))
        record(f"window[{j}]", ok, f"phi_{j} spans [{vals.min():.6g}, {vals.max():.6g}] near delta")
    for j in range(k - 1):
        d0 = abs(float(phi(j + 1, delta) - phi(j, delta)))
        record(f"gap_at_delta[{j}]", d0 < 1, f"|phi_{j + 1} - phi_{j}| = {d0:.6g} at delta")
        far = np.concatenate([[dp + eps + 1e-9], rgrid[rgrid > dp + eps]])
        far = far[far <= r_max]
        dfar = np.abs(phi(j + 1, far) - phi(j, far))
        record(f"gap_beyond[{j}]", bool(np.all(dfar > 1)), f"min |phi_{j + 1} - phi_{j}| = "
               f"{float(dfar.min()) if len(dfar) else math.nan:.6g} beyond delta'+epsilon")
    span = np.concatenate([[delta], rgrid[(rgrid > delta) & (rgrid <= r_max)]])
    for j in range(k - 1):
        lhs = np.ceil(phi(j, span))
        ok = bool(np.all(lhs < phi(j + 1, span)))
        record(f"ceil_gap[{j}]", ok, f"ceil(phi_{j}) >= phi_{j + 1} somewhere on [delta, r_max]")
    return beta, e_max, bound, checks, bad


def geometric_start_plan(trace: PhaseTrace, sigma: Sequence[int], theta: float,
                         reading: str = "consistent", strict: bool = False) -> GeometricStartPlan:
    """Constants and checks placing the start of the m = 3 path at a point
    where all phases sit in consecutive unit windows.

    ``trace`` must belong to a sorted collection with growth labels ``sigma``.
    ``reading="literal"`` uses the constants exactly as typeset;
    ``"consistent"`` uses the reading under which the linear-phase model
    satisfies every inequality (see the README).  Candidates for ``delta'``
    run over the grid; the first one meeting every check wins, otherwise the
    one with fewest failures.  Failures are listed in ``violations``; with
    ``strict=True`` the first one raises :class:`PlanInfeasible`.
    """
    if reading not in ("literal", "consistent"):
        raise ValueError("reading must be 'literal' or 'consistent'")
    sigma = tuple(int(x) for x in sigma)
    m = 3
    if len(sigma) != m or trace.logz.shape[1] != m:
        raise ValueError("the geometric start is defined for m = 3 collections only")
    ok, margin = is_admissible(theta, m)
    if not ok:
        raise ValueError(f"theta={theta} is not admissible (margin {margin:.3g})")
    u = tuple(float(rotated_roots(theta, m)[s].imag) for s in sigma)
    eps, mu, mu_p = _constants(u, reading)
    rgrid = trace.r
    imlog = trace.logz.imag
    r_max = float(rgrid[-1])
    candidates = [float(r) for r in rgrid if r - 2 * eps >= rgrid[0] and r > eps and r + eps < r_max]
    if not candidates:
        raise PlanInfeasible("grid too short for any delta' candidate")
    best = None
    for dp in candidates:
        beta, e_max, bound, checks, bad = _plan_for(dp, imlog, rgrid, u, eps, mu, mu_p, reading, r_max)
        if best is None or len(bad) < len(best[-1]):
            best = (dp, beta, e_max, bound, checks, bad)
        if not bad:
            break
    dp, beta, e_max, bound, checks, bad = best
    if bad:
        log.info("geometric start: %d violated inequalities at delta'=%g", len(bad), dp)
    plan = GeometricStartPlan(reading, float(theta), sigma, u, eps, mu, mu_p, dp, dp - eps,
                              tuple(float(b) for b in beta), float(bound), tuple(e_max),
                              checks, tuple(bad))
    if strict and bad:
        raise PlanInfeasible(bad[0])
    return plan


def linear_phase_trace(u: Sequence[float], rgrid: Sequence[float], labels=None) -> PhaseTrace:
    """Synthetic trace with ``Im log Z_j = 3 r u_j`` exactly (zero log-mass)."""
    r = np.asarray(rgrid, dtype=float)
    imlog = np.stack([3 * r * uj for uj in u], axis=1)
    labels = labels or tuple(f"E{j}" for j in range(len(u)))
    return PhaseTrace(r, tuple(labels), 1j * imlog)
