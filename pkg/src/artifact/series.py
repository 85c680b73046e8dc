"""Residue-series evaluation of the Jackson-integral solutions.

For each fixed point J the solution ``Phi_J`` is the residue sum of the
master function at ``t = z_J + k``, ``k >= 0``::

    Phi_J|_I = pref * sum_k (-1)^k / k! * (e^{-i pi m} q)^{z_J + k}
               * prod_{i != J} Gamma(z_i - z_J - k) * prod_{i != I} (z_i - z_J - k)

with ``pref = exp(i pi sum z)``.  Combinations ``sum_J w_J Phi_J`` are
evaluated first in double precision by the compiled kernel; when the
cancellation between terms (or between the ``Phi_J``) leaves fewer than the
required number of bits the evaluation is repeated in multiprecision
arithmetic with enough bits to absorb the loss.  Results are returned as a
unit-max-norm direction plus a log-magnitude so that huge values never
materialize in double precision.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from . import _kernels
from .errors import NoConvergence
from .rings import KClass, TorusParams, character_values, euler_denominators

log = logging.getLogger(__name__)

PRECISIONS = ("double", "dd")
_DOUBLE_ACCEPT = 1e-11
_LOG2E = 1.0 / math.log(2.0)


@dataclass(frozen=True)
class SeriesConfig:
    tol: float = 1e-12
    max_terms: int = 500
    precision: str = "double"
    guard_bits: int = 64
    max_bits: int = 1 << 15

    def __post_init__(self):
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie in (0, 1)")
        if self.max_terms < 10:
            raise ValueError("max_terms must be at least 10")
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision must be one of {PRECISIONS}")

    def to_json(self) -> dict:
        return {"tol": self.tol, "max_terms": self.max_terms, "precision": self.precision}


DEFAULT_CONFIG = SeriesConfig()


@dataclass(frozen=True)
class Column:
    """A cohomology-valued solution at one point, stored without overflow."""

    direction: np.ndarray
    logmag: complex
    integral_log: complex
    bits: int
    nterms: int

    def values(self) -> np.ndarray:
        if self.logmag.real == -math.inf:
            return np.zeros_like(self.direction)
        return np.exp(self.logmag) * self.direction

    def integral(self) -> complex:
        if self.integral_log.real == -math.inf:
            return 0j
        return complex(np.exp(self.integral_log))

    @property
    def is_zero(self) -> bool:
        return self.logmag.real == -math.inf


def _pack(values: np.ndarray, integral: complex, bits: int, nterms: int) -> Column:
    amax = float(np.max(np.abs(values)))
    if amax == 0.0:
        return Column(np.zeros_like(values), complex(-math.inf), complex(-math.inf), bits, nterms)
    ilog = complex(np.log(integral)) if integral != 0 else complex(-math.inf)
    return Column(values / amax, complex(math.log(amax)), ilog, bits, nterms)


class _MPCoefficients:
    """q-independent series coefficients of every ``Phi_J|_I`` at a fixed
    precision, extended on demand."""

    def __init__(self, tp: TorusParams):
        self.tp = tp
        self.ctx = mpmath.MPContext()
        self.prec = 0
        self.coef = None  # coef[J][k][I]
        self.logmax = None  # logmax[J][k] = log max_I |coef[J][k][I]|
        self._c = None

    def _build(self, prec: int):
        ctx = self.ctx
        ctx.prec = prec
        m = self.tp.m
        z = [ctx.mpc(v.real, v.imag) for v in self.tp.z]
        pref = ctx.exp(ctx.mpc(0, 1) * ctx.pi * ctx.fsum(z))
        self.z = z
        self.base0 = []
        for J in range(m):
            b = pref
            for i in range(m):
                if i != J:
                    b *= ctx.gamma(z[i] - z[J])
            self.base0.append(b)
        self.prec = prec
        self.coef = [[] for _ in range(m)]
        self.logmax = [[] for _ in range(m)]
        self._c = [ctx.mpf(1) for _ in range(m)]

    def ensure(self, prec: int, K: int):
        if prec > self.prec:
            self._build(max(prec, int(self.prec * 1.25)))
        ctx = self.ctx
        m = self.tp.m
        z = self.z
        for J in range(m):
            rows = self.coef[J]
            while len(rows) < K:
                k = len(rows)
                t = z[J] + k
                c = self._c[J]
                row = []
                for I in range(m):
                    w = self.base0[J] * c
                    for i in range(m):
                        if i != I:
                            w *= z[i] - t
                    row.append(w)
                rows.append(row)
                amax = max(abs(v) for v in row)
                self.logmax[J].append(float(ctx.log(amax)) if amax != 0 else -math.inf)
                den = ctx.mpf(k + 1)
                for i in range(m):
                    if i != J:
                        den *= z[i] - z[J] - (k + 1)
                self._c[J] = -c / den

    def required_terms(self, a_re: float, bits: int, max_terms: int) -> int:
        """Smallest K such that every omitted term is below ``2^-bits`` times
        the largest retained term, for every J."""
        K = 16
        thresh = bits / _LOG2E
        while True:
            self.ensure(self.prec or bits, K)
            ok = True
            for J in range(self.tp.m):
                lm = np.array(self.logmax[J][:K]) + a_re * np.arange(K)
                peak = int(np.argmax(lm))
                tail = lm[-4:]
                if peak >= K - 4 or np.max(tail) > lm[peak] - thresh:
                    ok = False
                    break
            if ok:
                return K
            if K >= max_terms:
                raise NoConvergence(
                    f"Jackson series needs more than max_terms={max_terms} terms at this |q|"
                )
            K = min(max_terms, int(K * 1.5) + 8)


@lru_cache(maxsize=64)
def _mp_cache(tp: TorusParams) -> _MPCoefficients:
    return _MPCoefficients(tp)


def _mp_weights(ctx, cache: _MPCoefficients, row) -> list:
    """Weights of one row at the working precision of ``ctx``.

    K-classes are expanded exactly (their characters are recomputed from the
    integer data); plain arrays are taken as exact complex numbers.
    """
    m = cache.tp.m
    if isinstance(row, KClass):
        z = cache.z
        w = row.twist_vector(m)
        tw = ctx.exp(2j * ctx.pi * ctx.fsum(w[i] * z[i] for i in range(m)))
        out = []
        for J in range(m):
            acc = ctx.mpc(0)
            for n, c in row.terms().items():
                acc += c * ctx.exp(-2j * ctx.pi * n * z[J])
            out.append(acc * tw)
        return out
    return [ctx.mpc(v.real, v.imag) for v in row]


def _eval_mp(tp: TorusParams, rows: list, logq: complex, cfg: SeriesConfig,
             start_bits: int) -> list:
    cache = _mp_cache(tp)
    m = tp.m
    a = complex(logq) - 1j * math.pi * m
    dens = euler_denominators(tp)
    inv_den_max = math.log2(float(np.max(1 / np.abs(dens))))
    zs = tp.zarr
    bits = start_bits
    pending = list(range(len(rows)))
    out: list = [None] * len(rows)
    while pending:
        cache.ensure(bits + 32, 16)
        K = cache.required_terms(a.real, bits + 16, cfg.max_terms)
        cache.ensure(bits + 32, K)
        ctx = cache.ctx
        ctx.prec = bits + 32
        am = ctx.mpc(a.real, a.imag)
        x = ctx.exp(am)
        # S[J][I] = exp(z_J a) * sum_k coef[J][k][I] x^k
        S = []
        for J in range(m):
            ez = ctx.exp(cache.z[J] * am)
            coef = cache.coef[J]
            srow = []
            for I in range(m):
                acc = ctx.mpc(0)
                for k in range(K - 1, -1, -1):
                    acc = acc * x + coef[k][I]
                srow.append(acc * ez)
            S.append(srow)
        logmax = [float(np.max(np.array(cache.logmax[J][:K]) + a.real * np.arange(K)))
                  for J in range(m)]
        dens_mp = [ctx.mpc(d.real, d.imag) for d in dens]
        still = []
        for idx in pending:
            wm = _mp_weights(ctx, cache, rows[idx])
            nz = [J for J in range(m) if wm[J] != 0]
            if not nz:
                out[idx] = _pack(np.zeros(m, dtype=complex), 0j, bits, K)
                continue
            vals = [ctx.fsum(wm[J] * S[J][I] for J in nz) for I in range(m)]
            integ = ctx.fsum(vals[I] / dens_mp[I] for I in range(m))
            top = max(logmax[J] + (zs[J] * a).real + float(ctx.log(abs(wm[J]))) for J in nz) * _LOG2E
            vmax = max(abs(v) for v in vals)
            if vmax == 0:
                lost = float(bits)
            else:
                lost = top - float(ctx.log(vmax, 2))
                if integ != 0:
                    lost += max(0.0, float(ctx.log(vmax / abs(integ), 2)) + inv_den_max)
                else:
                    lost = float(bits)
            if bits - lost >= cfg.guard_bits:
                direction = np.array([complex(v / vmax) for v in vals])
                logmag = complex(float(ctx.log(vmax)))
                ilog = complex(ctx.log(integ)) if integ != 0 else complex(-math.inf)
                out[idx] = Column(direction, logmag, ilog, bits, K)
            else:
                still.append((idx, lost))
        if still:
            worst = max(lost for _, lost in still)
            new_bits = int(max(2 * bits, worst + cfg.guard_bits + 32))
            if new_bits > cfg.max_bits:
                raise NoConvergence(f"precision escalation exceeded {cfg.max_bits} bits")
            log.debug("escalating Jackson series from %d to %d bits", bits, new_bits)
            bits = new_bits
        pending = [idx for idx, _ in still]
    return out


def evaluate_solutions(tp: TorusParams, rows, logq: complex,
                       cfg: SeriesConfig = DEFAULT_CONFIG) -> list:
    """Evaluate the solutions ``sum_J w_J * Phi_J`` for each row.

    A row is either a :class:`KClass` (weights = its character at the fixed
    points, recomputed exactly at whatever precision is needed) or a length-m
    array of complex weights taken as exact.  ``logq`` is the coordinate on
    the universal cover.  Returns one :class:`Column` per row.
    """
    if isinstance(rows, KClass):
        rows = [rows]
    elif isinstance(rows, np.ndarray):
        rows = list(np.atleast_2d(rows))
    else:
        rows = [r if isinstance(r, KClass) else np.asarray(r, dtype=complex) for r in rows]
    for r in rows:
        if not isinstance(r, KClass) and r.shape != (tp.m,):
            raise ValueError(f"weight rows need {tp.m} entries")
    results: list = [None] * len(rows)
    escalate = []
    if cfg.precision == "double":
        z = tp.zarr
        dens = euler_denominators(tp)
        for idx, row in enumerate(rows):
            w = character_values(row, tp) if isinstance(row, KClass) else row
            vals, maxterm, nterms, converged, tail = _kernels.jackson_apply(
                z, w, complex(logq), cfg.tol, cfg.max_terms)
            if not converged:
                raise NoConvergence(
                    f"Jackson series did not converge in {cfg.max_terms} terms (|q| too large)")
            vmax = float(np.max(np.abs(vals))) if np.all(np.isfinite(vals)) else math.nan
            if not math.isfinite(vmax) or not math.isfinite(maxterm):
                escalate.append(idx)
                continue
            if maxterm == 0.0:
                results[idx] = _pack(vals, 0j, 53, nterms)
                continue
            err = 8e-17 * math.sqrt(nterms) * maxterm + tail
            integ = complex(np.sum(vals / dens))
            ierr = err * float(np.sum(1 / np.abs(dens)))
            if vmax > 0 and err <= _DOUBLE_ACCEPT * vmax and ierr <= _DOUBLE_ACCEPT * abs(integ):
                results[idx] = _pack(vals, integ, 53, nterms)
            else:
                escalate.append(idx)
        start = 128
    else:
        escalate = list(range(len(rows)))
        start = 106
    if escalate:
        mp_cols = _eval_mp(tp, [rows[i] for i in escalate], logq, cfg, start)
        for idx, col in zip(escalate, mp_cols):
            results[idx] = col
    return results


def jackson_values_double(tp: TorusParams, J: int, logq: complex, cfg: SeriesConfig = DEFAULT_CONFIG):
    """Raw double-precision ``Phi_J`` values (0-based J) with the truncation
    estimate; no escalation."""
    w = np.zeros(tp.m, dtype=complex)
    w[J] = 1.0
    vals, maxterm, nterms, converged, tail = _kernels.jackson_apply(
        tp.zarr, w, complex(logq), cfg.tol, cfg.max_terms)
    if not converged:
        raise NoConvergence(f"Jackson series did not converge in {cfg.max_terms} terms")
    return vals, tail, nterms
