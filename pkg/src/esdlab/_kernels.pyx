# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Householder Hessenberg reduction, complex shifted QR
eigenvalue iteration, and partially pivoted LU log-determinant.

Signatures mirror :mod:`esdlab._pykernels` exactly; :mod:`esdlab._backend`
picks one at import.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, fabs, hypot

cnp.import_array()

cdef double EPS = np.finfo(np.float64).eps
cdef double SAFMIN = np.finfo(np.float64).tiny


cdef inline double cabs_(double complex z) nogil:
    return hypot(z.real, z.imag)


cdef inline double complex conj_(double complex z) nogil:
    return z.conjugate()


def hessenberg_inplace(double complex[:, ::1] H):
    """Reduce ``H`` to upper Hessenberg form by Householder similarity."""
    cdef Py_ssize_t n = H.shape[0]
    cdef Py_ssize_t k, i, j
    cdef double scale, xnorm, ax0, vnorm2, tau
    cdef double complex x0, phase, alpha, acc
    cdef double complex[::1] v = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] u = np.zeros(n, dtype=np.complex128)
    with nogil:
        for k in range(n - 2):
            scale = 0.0
            for i in range(k + 1, n):
                scale = max(scale, fabs(H[i, k].real), fabs(H[i, k].imag))
            if scale == 0.0:
                continue
            xnorm = 0.0
            for i in range(k + 1, n):
                v[i] = H[i, k] / scale
                xnorm += v[i].real * v[i].real + v[i].imag * v[i].imag
            xnorm = sqrt(xnorm)
            x0 = v[k + 1]
            ax0 = cabs_(x0)
            if ax0 > 0.0:
                phase = x0 / ax0
            else:
                phase = 1.0
            alpha = -phase * xnorm
            v[k + 1] = x0 - alpha
            vnorm2 = 0.0
            for i in range(k + 1, n):
                vnorm2 += v[i].real * v[i].real + v[i].imag * v[i].imag
            if vnorm2 == 0.0:
                continue
            tau = 2.0 / vnorm2
            # H[k+1:, k+1:] <- (I - tau v v^H) H[k+1:, k+1:]
            for j in range(k + 1, n):
                u[j] = 0.0
            for i in range(k + 1, n):
                acc = conj_(v[i])
                for j in range(k + 1, n):
                    u[j] = u[j] + acc * H[i, j]
            for i in range(k + 1, n):
                acc = tau * v[i]
                for j in range(k + 1, n):
                    H[i, j] = H[i, j] - acc * u[j]
            # H[:, k+1:] <- H[:, k+1:] (I - tau v v^H)
            for j in range(k + 1, n):
                u[j] = conj_(v[j])
            for i in range(n):
                acc = 0.0
                for j in range(k + 1, n):
                    acc = acc + H[i, j] * v[j]
                acc = acc * tau
                for j in range(k + 1, n):
                    H[i, j] = H[i, j] - acc * u[j]
            H[k + 1, k] = alpha * scale
            for i in range(k + 2, n):
                H[i, k] = 0.0


cdef inline bint _negligible(double complex[:, ::1] H, Py_ssize_t k,
                             Py_ssize_t lo, Py_ssize_t hi, double smlnum) nogil:
    cdef double s = cabs_(H[k, k - 1])
    cdef double tst = cabs_(H[k - 1, k - 1]) + cabs_(H[k, k])
    if tst == 0.0:
        if k - 2 >= lo:
            tst += cabs_(H[k - 1, k - 2])
        if k + 1 <= hi:
            tst += cabs_(H[k + 1, k])
    return s <= smlnum or s <= EPS * tst


def hqr_eigenvalues(double complex[:, ::1] H, Py_ssize_t max_sweeps):
    """Eigenvalues of the upper Hessenberg ``H`` (overwritten).

    Returns ``(eigenvalues, sweeps, converged, residual)`` where ``residual``
    is the largest subdiagonal modulus discarded at a deflation (or left
    standing when the sweep cap is hit).
    """
    cdef Py_ssize_t n = H.shape[0]
    cdef double complex[::1] w = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] cs_s = np.zeros(max(n, 1), dtype=np.complex128)
    cdef double[::1] cs_c = np.zeros(max(n, 1), dtype=np.float64)
    cdef Py_ssize_t hi = n - 1
    cdef Py_ssize_t lo, k, i, j, top
    cdef Py_ssize_t sweeps = 0, its = 0
    cdef bint converged = True
    cdef double residual = 0.0
    cdef double smlnum = SAFMIN * (n / EPS)
    cdef double c, r, aa, ab
    cdef double complex a, b, cc, d, sigma, half, disc, mu1, mu2, s, sc, t1, t2
    with nogil:
        while hi >= 0:
            if hi == 0:
                w[0] = H[0, 0]
                break
            lo = hi
            while lo > 0:
                if _negligible(H, lo, 0, hi, smlnum):
                    residual = max(residual, cabs_(H[lo, lo - 1]))
                    H[lo, lo - 1] = 0.0
                    break
                lo -= 1
            if lo == hi:
                w[hi] = H[hi, hi]
                hi -= 1
                its = 0
                continue
            if sweeps >= max_sweeps:
                converged = False
                for k in range(lo + 1, hi + 1):
                    residual = max(residual, cabs_(H[k, k - 1]))
                for k in range(hi + 1):
                    w[k] = H[k, k]
                break
            if its > 0 and its % 10 == 0:
                sigma = H[hi, hi] + 0.75 * cabs_(H[hi, hi - 1])
            else:
                a = H[hi - 1, hi - 1]
                b = H[hi - 1, hi]
                cc = H[hi, hi - 1]
                d = H[hi, hi]
                half = 0.5 * (a - d)
                disc = (half * half + b * cc) ** 0.5
                mu1 = 0.5 * (a + d) + disc
                mu2 = 0.5 * (a + d) - disc
                if cabs_(mu1 - d) <= cabs_(mu2 - d):
                    sigma = mu1
                else:
                    sigma = mu2
            for k in range(lo, hi + 1):
                H[k, k] = H[k, k] - sigma
            for k in range(lo, hi):
                a = H[k, k]
                b = H[k + 1, k]
                aa = cabs_(a)
                ab = cabs_(b)
                r = hypot(aa, ab)
                if r == 0.0:
                    c = 1.0
                    s = 0.0
                elif aa == 0.0:
                    c = 0.0
                    s = conj_(b) / ab
                else:
                    c = aa / r
                    s = (a / aa) * conj_(b) / r
                cs_c[k] = c
                cs_s[k] = s
                sc = -conj_(s)
                for j in range(k, hi + 1):
                    t1 = H[k, j]
                    t2 = H[k + 1, j]
                    H[k, j] = c * t1 + s * t2
                    H[k + 1, j] = sc * t1 + c * t2
                H[k + 1, k] = 0.0
            for k in range(lo, hi):
                c = cs_c[k]
                s = cs_s[k]
                sc = conj_(s)
                top = k + 1
                for i in range(lo, top + 1):
                    t1 = H[i, k]
                    t2 = H[i, k + 1]
                    H[i, k] = c * t1 + sc * t2
                    H[i, k + 1] = -s * t1 + c * t2
            for k in range(lo, hi + 1):
                H[k, k] = H[k, k] + sigma
            sweeps += 1
            its += 1
    return np.asarray(w), int(sweeps), bool(converged), float(residual)


def lu_log_abs_det(double complex[:, ::1] A):
    """Row-pivoted LU on ``A`` (overwritten).

    Returns ``(log|det|, singular)``; ``singular`` is set when a pivot
    modulus falls below ``n * eps * max_row_norm``.
    """
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j, k, p
    cdef double rownorm, maxrow = 0.0, best, m, tol, total = 0.0
    cdef double complex piv, f, tmp
    cdef bint singular = False
    with nogil:
        for i in range(n):
            rownorm = 0.0
            for j in range(n):
                rownorm += A[i, j].real * A[i, j].real + A[i, j].imag * A[i, j].imag
            maxrow = max(maxrow, sqrt(rownorm))
        tol = n * EPS * maxrow
        for k in range(n):
            p = k
            best = cabs_(A[k, k])
            for i in range(k + 1, n):
                m = cabs_(A[i, k])
                if m > best:
                    best = m
                    p = i
            if best < tol or best == 0.0:
                singular = True
                break
            if p != k:
                for j in range(n):
                    tmp = A[k, j]
                    A[k, j] = A[p, j]
                    A[p, j] = tmp
            piv = A[k, k]
            total += log(best)
            for i in range(k + 1, n):
                f = A[i, k] / piv
                if f.real == 0.0 and f.imag == 0.0:
                    continue
                for j in range(k + 1, n):
                    A[i, j] = A[i, j] - f * A[k, j]
                A[i, k] = 0.0
    if singular:
        return float("-inf"), True
    return float(total), False
