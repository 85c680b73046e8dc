"""Pure-Python reference versions of the hot kernels.

Every function here has a compiled twin in ``_ckernels.pyx`` with the same
signature and semantics; the package picks one at import time.
"""

import cmath
import math

import numpy as np

LANCZOS_G = 7.0
LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
# B_2k / (2k (2k - 1)), k = 1..8
STIRLING_COEF = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
# The Lanczos sum cancels badly for large |z|; past this radius the
# asymptotic series is both shorter and more accurate.
STIRLING_RADIUS = 8.0


def cgamma(z):
    """Complex Gamma function, Lanczos (g=7, n=9) with reflection; Stirling
    series for ``|z| >= 8``."""
    z = complex(z)
    if z.real < 0.5:
        s = cmath.sin(math.pi * z)
        if s == 0:
            return complex(math.inf, 0.0)
        return math.pi / (s * cgamma(1.0 - z))
    if abs(z) >= STIRLING_RADIUS:
        w = 1.0 / z
        w2 = w * w
        acc = 0.0
        for c in STIRLING_COEF:
            acc += c * w
            w *= w2
        return cmath.exp((z - 0.5) * cmath.log(z) - z + _HALF_LOG_2PI + acc)
    z -= 1.0
    x = LANCZOS_COEF[0]
    for i in range(1, 9):
        x += LANCZOS_COEF[i] / (z + i)
    t = z + LANCZOS_G + 0.5
    return _SQRT_2PI * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def jackson_apply(z, weights, logq, tol, max_terms):
    """Sum ``sum_J weights[J] * Phi_J`` at the fixed points in double precision.

    Returns ``(values, maxterm, nterms, converged, tail)`` where ``maxterm`` is
    the largest single-term modulus seen (used for cancellation accounting)
    and ``tail`` estimates the truncation error.
    """
    z = [complex(v) for v in z]
    weights = [complex(v) for v in weights]
    m = len(z)
    a = complex(logq) - 1j * math.pi * m
    ea = cmath.exp(a)
    pref = cmath.exp(1j * math.pi * sum(z))
    acc = [0j] * m
    comp = [0j] * m
    maxterm = 0.0
    nterms = 0
    converged = True
    tail = 0.0
    kpeak = abs(ea) ** (1.0 / m)
    prefix = [0j] * (m + 1)
    suffix = [0j] * (m + 1)
    for J in range(m):
        if weights[J] == 0:
            continue
        base = weights[J] * pref * cmath.exp(z[J] * a)
        for i in range(m):
            if i != J:
                base *= cgamma(z[i] - z[J])
        jmax = 0.0
        small = 0
        k = 0
        done = False
        while k < max_terms:
            t = z[J] + k
            prefix[0] = 1.0
            for i in range(m):
                prefix[i + 1] = prefix[i] * (z[i] - t)
            suffix[m] = 1.0
            for i in range(m - 1, -1, -1):
                suffix[i] = suffix[i + 1] * (z[i] - t)
            tmax = 0.0
            for I in range(m):
                term = base * prefix[I] * suffix[I + 1]
                # Kahan-compensated accumulation
                y = term - comp[I]
                s = acc[I] + y
                comp[I] = (s - acc[I]) - y
                acc[I] = s
                at = abs(term)
                if at > tmax:
                    tmax = at
            if tmax > jmax:
                jmax = tmax
            k += 1
            if k > kpeak + 2 and tmax <= tol * jmax:
                small += 1
                if small >= 2:
                    ratio = abs(ea) / (k ** m)
                    tail = max(tail, tmax * ratio / max(1e-300, 1.0 - min(ratio, 0.5)))
                    done = True
                    break
            else:
                small = 0
            den = 1.0 + 0j
            for i in range(m):
                if i != J:
                    den *= z[i] - z[J] - k
            base = -base * ea / (k * den)
        nterms = max(nterms, k)
        if not done:
            converged = False
        if jmax > maxterm:
            maxterm = jmax
    return np.array(acc, dtype=complex), maxterm, nterms, converged, tail


def _companion_last(coefs, q, m):
    col = list(coefs)
    col[0] = col[0] + q
    return col


def _deriv(Y, r, m, theta, coefs, zero_conn):
    m_rows = len(Y)
    ncol = len(Y[0])
    if zero_conn:
        return [[0j] * ncol for _ in range(m_rows)]
    q = cmath.exp(m * (math.log(r) - 2j * math.pi * theta))
    last = _companion_last(coefs, q, m)
    fac = m / r
    out = [[0j] * ncol for _ in range(m_rows)]
    for j in range(ncol):
        top = Y[m - 1][j]
        out[0][j] = fac * last[0] * top
        for i in range(1, m):
            out[i][j] = fac * (Y[i - 1][j] + last[i] * top)
    return out


# Dormand-Prince 5(4)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


def _hadamard_ratio(Y):
    A = np.array(Y, dtype=complex)
    if A.shape[0] != A.shape[1]:
        return 1.0
    norms = np.prod(np.linalg.norm(A, axis=0))
    if norms == 0:
        return 0.0
    return float(abs(np.linalg.det(A)) / norms)


def dp45_extend(Y0, lnorm0, r0, r1, theta, coefs, rtol, hmin_rel, lo, hi, zero_conn):
    """Integrate ``dY/dr = (m/r) C(q(r)) Y`` from ``r0`` to ``r1``.

    ``Y0`` is an (m, k) complex array of coefficient columns in the monomial
    basis and ``lnorm0`` their complex log-scales.  Columns are rescaled into
    ``lnorm`` whenever their max-norm leaves ``[lo, hi]``.

    Returns ``(Y, lnorm, naccept, nreject, min_hadamard, status)``; status 0
    is success and 1 means the step fell below ``hmin_rel * r``.
    """
    Y = [[complex(v) for v in row] for row in np.asarray(Y0)]
    lnorm = [complex(v) for v in lnorm0]
    m = len(Y)
    ncol = len(Y[0])
    coefs = [complex(c) for c in coefs]
    r = float(r0)
    h = min(0.01 * max(r, 1.0), r1 - r0)
    naccept = nreject = 0
    min_had = _hadamard_ratio(Y)
    status = 0
    while r < r1:
        if r + h > r1:
            h = r1 - r
        K = []
        for st in range(7):
            Yst = [row[:] for row in Y]
            for p in range(st):
                a = _A[st][p]
                if a == 0.0:
                    continue
                Kp = K[p]
                for i in range(m):
                    for j in range(ncol):
                        Yst[i][j] += h * a * Kp[i][j]
            K.append(_deriv(Yst, r + _C[st] * h, m, theta, coefs, zero_conn))
        Ynew = [row[:] for row in Y]
        err = 0.0
        for i in range(m):
            for j in range(ncol):
                incr = 0j
                e = 0j
                for st in range(7):
                    incr += _B[st] * K[st][i][j]
                    e += _E[st] * K[st][i][j]
                Ynew[i][j] += h * incr
                sc = rtol * max(1.0, abs(Y[i][j]), abs(Ynew[i][j]))
                ratio = abs(h * e) / sc
                if ratio > err:
                    err = ratio
        if err <= 1.0:
            r += h
            Y = Ynew
            naccept += 1
            for j in range(ncol):
                nrm = max(abs(Y[i][j]) for i in range(m))
                if nrm > 0 and (nrm < lo or nrm > hi):
                    for i in range(m):
                        Y[i][j] /= nrm
                    lnorm[j] += math.log(nrm)
            had = _hadamard_ratio(Y)
            if had < min_had:
                min_had = had
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            nreject += 1
            h *= max(0.2, 0.9 * err ** -0.2)
        if h < hmin_rel * r and r < r1:
            status = 1
            break
    return np.array(Y, dtype=complex), np.array(lnorm, dtype=complex), naccept, nreject, min_had, status
