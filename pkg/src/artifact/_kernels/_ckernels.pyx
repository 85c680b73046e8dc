# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Mirrors ``_pykernels`` function by function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, pow, sqrt, M_PI

cnp.import_array()

cdef extern from "<complex.h>" nogil:
    double complex cexp(double complex)
    double complex clog(double complex)
    double complex csin(double complex)
    double cabs(double complex)
    double creal(double complex)

cdef double LANCZOS_G = 7.0
cdef double[9] LANCZOS_COEF = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
]
cdef double SQRT_2PI = 2.5066282746310002
cdef double HALF_LOG_2PI = 0.91893853320467274
cdef double[8] STIRLING_COEF = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
]
cdef double STIRLING_RADIUS = 8.0
cdef double complex I1 = 1j


cdef double complex _cgamma(double complex z) nogil:
    cdef double complex s, x, t
    cdef int i
    if creal(z) < 0.5:
        s = csin(M_PI * z)
        if s == 0:
            return 1.0 / 0.0
        return M_PI / (s * _cgamma(1.0 - z))
    cdef double complex w, w2, acc
    if cabs(z) >= STIRLING_RADIUS:
        w = 1.0 / z
        w2 = w * w
        acc = 0
        for i in range(8):
            acc = acc + STIRLING_COEF[i] * w
            w = w * w2
        return cexp((z - 0.5) * clog(z) - z + HALF_LOG_2PI + acc)
    z = z - 1.0
    x = LANCZOS_COEF[0]
    for i in range(1, 9):
        x = x + LANCZOS_COEF[i] / (z + i)
    t = z + LANCZOS_G + 0.5
    return SQRT_2PI * cexp((z + 0.5) * clog(t) - t) * x


def cgamma(z):
    """Complex Gamma function, Lanczos (g=7, n=9) with reflection; Stirling
    series for ``|z| >= 8``."""
    return complex(_cgamma(complex(z)))


def jackson_apply(z, weights, logq, double tol, int max_terms):
    cdef double complex[::1] zz = np.ascontiguousarray(z, dtype=complex)
    cdef double complex[::1] ww = np.ascontiguousarray(weights, dtype=complex)
    cdef Py_ssize_t m = zz.shape[0]
    cdef double complex a = complex(logq) - I1 * M_PI * m
    cdef double complex ea = cexp(a)
    cdef double complex pref, base, t, term, y, s, den, zsum = 0
    cdef double maxterm = 0.0, jmax, tmax, at, kpeak, ratio, tail = 0.0
    cdef int nterms = 0, k, small
    cdef bint converged = True, done
    cdef Py_ssize_t i, J, Ii
    acc_arr = np.zeros(m, dtype=complex)
    comp_arr = np.zeros(m, dtype=complex)
    pre_arr = np.zeros(m + 1, dtype=complex)
    suf_arr = np.zeros(m + 1, dtype=complex)
    cdef double complex[::1] acc = acc_arr
    cdef double complex[::1] comp = comp_arr
    cdef double complex[::1] prefix = pre_arr
    cdef double complex[::1] suffix = suf_arr
    for i in range(m):
        zsum = zsum + zz[i]
    pref = cexp(I1 * M_PI * zsum)
    kpeak = pow(cabs(ea), 1.0 / m)
    for J in range(m):
        if ww[J] == 0:
            continue
        base = ww[J] * pref * cexp(zz[J] * a)
        for i in range(m):
            if i != J:
                base = base * _cgamma(zz[i] - zz[J])
        jmax = 0.0
        small = 0
        k = 0
        done = False
        while k < max_terms:
            t = zz[J] + k
            prefix[0] = 1.0
            for i in range(m):
                prefix[i + 1] = prefix[i] * (zz[i] - t)
            suffix[m] = 1.0
            for i in range(m - 1, -1, -1):
                suffix[i] = suffix[i + 1] * (zz[i] - t)
            tmax = 0.0
            for Ii in range(m):
                term = base * prefix[Ii] * suffix[Ii + 1]
                y = term - comp[Ii]
                s = acc[Ii] + y
                comp[Ii] = (s - acc[Ii]) - y
                acc[Ii] = s
                at = cabs(term)
                if at > tmax:
                    tmax = at
            if tmax > jmax:
                jmax = tmax
            k += 1
            if k > kpeak + 2 and tmax <= tol * jmax:
                small += 1
                if small >= 2:
                    ratio = cabs(ea) / pow(k, m)
                    at = tmax * ratio / max(1e-300, 1.0 - min(ratio, 0.5))
                    if at > tail:
                        tail = at
                    done = True
                    break
            else:
                small = 0
            den = 1.0
            for i in range(m):
                if i != J:
                    den = den * (zz[i] - zz[J] - k)
            base = -base * ea / (k * den)
        if k > nterms:
            nterms = k
        if not done:
            converged = False
        if jmax > maxterm:
            maxterm = jmax
    return acc_arr, maxterm, nterms, bool(converged), tail


cdef void _deriv(double complex[:, ::1] Y, double r, Py_ssize_t m, double theta,
                 double complex[::1] coefs, bint zero_conn,
                 double complex[:, ::1] out) nogil:
    cdef Py_ssize_t ncol = Y.shape[1], i, j
    cdef double complex q, top
    cdef double fac
    if zero_conn:
        for i in range(m):
            for j in range(ncol):
                out[i, j] = 0
        return
    q = cexp(m * (log(r) - 2.0 * I1 * M_PI * theta))
    fac = m / r
    for j in range(ncol):
        top = Y[m - 1, j]
        out[0, j] = fac * (coefs[0] + q) * top
        for i in range(1, m):
            out[i, j] = fac * (Y[i - 1, j] + coefs[i] * top)


cdef double[7][7] DP_A = [
    [0, 0, 0, 0, 0, 0, 0],
    [1.0 / 5, 0, 0, 0, 0, 0, 0],
    [3.0 / 40, 9.0 / 40, 0, 0, 0, 0, 0],
    [44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0, 0],
    [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0, 0],
    [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0, 0],
    [35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0],
]
cdef double[7] DP_C = [0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0]
cdef double[7] DP_B = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0]
cdef double[7] DP_E = [71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                       -17253.0 / 339200, 22.0 / 525, -1.0 / 40]


cdef double _hadamard_ratio(double complex[:, ::1] Y, double complex[:, ::1] work):
    """|det Y| / prod ||col||, by Gaussian elimination with partial pivoting."""
    cdef Py_ssize_t n = Y.shape[0], i, j, k, p
    cdef double nrm, prod = 1.0, best
    cdef double complex piv, f, tmp, det = 1.0
    if Y.shape[1] != n:
        return 1.0
    for j in range(n):
        nrm = 0.0
        for i in range(n):
            nrm += cabs(Y[i, j]) ** 2
        prod *= sqrt(nrm)
    if prod == 0:
        return 0.0
    for i in range(n):
        for j in range(n):
            work[i, j] = Y[i, j]
    for k in range(n):
        p = k
        best = cabs(work[k, k])
        for i in range(k + 1, n):
            if cabs(work[i, k]) > best:
                best = cabs(work[i, k])
                p = i
        if best == 0:
            return 0.0
        if p != k:
            for j in range(n):
                tmp = work[k, j]
                work[k, j] = work[p, j]
                work[p, j] = tmp
            det = -det
        piv = work[k, k]
        det = det * piv
        for i in range(k + 1, n):
            f = work[i, k] / piv
            for j in range(k, n):
                work[i, j] = work[i, j] - f * work[k, j]
    return cabs(det) / prod


def dp45_extend(Y0, lnorm0, double r0, double r1, double theta, coefs,
                double rtol, double hmin_rel, double lo, double hi, bint zero_conn):
    Y_arr = np.array(Y0, dtype=complex, order="C", copy=True)
    ln_arr = np.array(lnorm0, dtype=complex, copy=True)
    cdef double complex[:, ::1] Y = Y_arr
    cdef double complex[::1] lnorm = ln_arr
    cdef double complex[::1] cf = np.ascontiguousarray(coefs, dtype=complex)
    cdef Py_ssize_t m = Y.shape[0], ncol = Y.shape[1], i, j, st, p
    K_arr = np.zeros((7, m, ncol), dtype=complex)
    cdef double complex[:, :, ::1] K = K_arr
    cdef double complex[:, ::1] Yst = np.zeros((m, ncol), dtype=complex)
    cdef double complex[:, ::1] Ynew = np.zeros((m, ncol), dtype=complex)
    cdef double complex[:, ::1] work = np.zeros((m, m), dtype=complex)
    cdef double r = r0, h, err, sc, ratio, nrm, had, min_had, fac, aval
    cdef double complex incr, e
    cdef int naccept = 0, nreject = 0, status = 0
    h = min(0.01 * max(r, 1.0), r1 - r0)
    min_had = _hadamard_ratio(Y, work)
    while r < r1:
        if r + h > r1:
            h = r1 - r
        for st in range(7):
            for i in range(m):
                for j in range(ncol):
                    Yst[i, j] = Y[i, j]
            for p in range(st):
                aval = DP_A[st][p]
                if aval == 0.0:
                    continue
                for i in range(m):
                    for j in range(ncol):
                        Yst[i, j] = Yst[i, j] + h * aval * K[p, i, j]
            _deriv(Yst, r + DP_C[st] * h, m, theta, cf, zero_conn, K[st])
        err = 0.0
        for i in range(m):
            for j in range(ncol):
                incr = 0
                e = 0
                for st in range(7):
                    incr = incr + DP_B[st] * K[st, i, j]
                    e = e + DP_E[st] * K[st, i, j]
                Ynew[i, j] = Y[i, j] + h * incr
                sc = rtol * max(1.0, max(cabs(Y[i, j]), cabs(Ynew[i, j])))
                ratio = cabs(h * e) / sc
                if ratio > err:
                    err = ratio
        if err <= 1.0:
            r += h
            for i in range(m):
                for j in range(ncol):
                    Y[i, j] = Ynew[i, j]
            naccept += 1
            for j in range(ncol):
                nrm = 0.0
                for i in range(m):
                    if cabs(Y[i, j]) > nrm:
                        nrm = cabs(Y[i, j])
                if nrm > 0 and (nrm < lo or nrm > hi):
                    for i in range(m):
                        Y[i, j] = Y[i, j] / nrm
                    lnorm[j] = lnorm[j] + log(nrm)
            had = _hadamard_ratio(Y, work)
            if had < min_had:
                min_had = had
            if err == 0:
                fac = 5.0
            else:
                fac = min(5.0, max(0.2, 0.9 * pow(err, -0.2)))
            h *= fac
        else:
            nreject += 1
            h *= max(0.2, 0.9 * pow(err, -0.2))
        if h < hmin_rel * r and r < r1:
            status = 1
            break
    return Y_arr, ln_arr, naccept, nreject, min_had, status
