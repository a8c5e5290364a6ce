"""Pure-Python (numpy-vectorized) versions of the compiled kernels.

Same signatures and in-place semantics as ``_kernels.pyx``; used when the
extension is not built or ``ESDLAB_PURE_PYTHON=1`` is set.
"""

import numpy as np

EPS = np.finfo(np.float64).eps
SAFMIN = np.finfo(np.float64).tiny


def hessenberg_inplace(H):
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k]
        scale = np.max(np.abs(np.concatenate([x.real, x.imag])))
        if scale == 0.0:
            continue
        v = x / scale
        xnorm = np.sqrt(np.sum(v.real ** 2 + v.imag ** 2))
        x0 = v[0]
        phase = x0 / abs(x0) if abs(x0) > 0.0 else 1.0
        alpha = -phase * xnorm
        v[0] = x0 - alpha
        vnorm2 = np.sum(v.real ** 2 + v.imag ** 2)
        if vnorm2 == 0.0:
            continue
        tau = 2.0 / vnorm2
        sub = H[k + 1:, k + 1:]
        sub -= np.outer(tau * v, v.conj() @ sub)
        cols = H[:, k + 1:]
        cols -= np.outer(tau * (cols @ v), v.conj())
        H[k + 1, k] = alpha * scale
        H[k + 2:, k] = 0.0


def _negligible(H, k, lo, hi, smlnum):
    s = abs(H[k, k - 1])
    tst = abs(H[k - 1, k - 1]) + abs(H[k, k])
    if tst == 0.0:
        if k - 2 >= lo:
            tst += abs(H[k - 1, k - 2])
        if k + 1 <= hi:
            tst += abs(H[k + 1, k])
    return s <= smlnum or s <= EPS * tst


def hqr_eigenvalues(H, max_sweeps):
    n = H.shape[0]
    w = np.zeros(n, dtype=np.complex128)
    cs_c = np.zeros(max(n, 1))
    cs_s = np.zeros(max(n, 1), dtype=np.complex128)
    hi = n - 1
    sweeps = its = 0
    converged = True
    residual = 0.0
    smlnum = SAFMIN * (n / EPS)
    while hi >= 0:
        if hi == 0:
            w[0] = H[0, 0]
            break
        lo = hi
        while lo > 0:
            if _negligible(H, lo, 0, hi, smlnum):
                residual = max(residual, abs(H[lo, lo - 1]))
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
            sub = np.abs(np.diag(H[lo:hi + 1, lo:hi + 1], -1))
            residual = max(residual, float(sub.max()))
            w[:hi + 1] = np.diag(H)[:hi + 1]
            break
        if its > 0 and its % 10 == 0:
            sigma = H[hi, hi] + 0.75 * abs(H[hi, hi - 1])
        else:
            a, b = H[hi - 1, hi - 1], H[hi - 1, hi]
            c, d = H[hi, hi - 1], H[hi, hi]
            half = 0.5 * (a - d)
            disc = np.sqrt(half * half + b * c)
            mu1 = 0.5 * (a + d) + disc
            mu2 = 0.5 * (a + d) - disc
            sigma = mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2
        idx = np.arange(lo, hi + 1)
        H[idx, idx] -= sigma
        for k in range(lo, hi):
            a, b = H[k, k], H[k + 1, k]
            aa, ab = abs(a), abs(b)
            r = np.hypot(aa, ab)
            if r == 0.0:
                c, s = 1.0, 0.0
            elif aa == 0.0:
                c, s = 0.0, np.conj(b) / ab
            else:
                c, s = aa / r, (a / aa) * np.conj(b) / r
            cs_c[k], cs_s[k] = c, s
            t1 = H[k, k:hi + 1].copy()
            t2 = H[k + 1, k:hi + 1]
            H[k, k:hi + 1] = c * t1 + s * t2
            H[k + 1, k:hi + 1] = -np.conj(s) * t1 + c * t2
            H[k + 1, k] = 0.0
        for k in range(lo, hi):
            c, s = cs_c[k], cs_s[k]
            t1 = H[lo:k + 2, k].copy()
            t2 = H[lo:k + 2, k + 1]
            H[lo:k + 2, k] = c * t1 + np.conj(s) * t2
            H[lo:k + 2, k + 1] = -s * t1 + c * t2
        H[idx, idx] += sigma
        sweeps += 1
        its += 1
    return w, sweeps, converged, residual


def lu_log_abs_det(A):
    n = A.shape[0]
    maxrow = float(np.max(np.sqrt(np.sum(np.abs(A) ** 2, axis=1)))) if n else 0.0
    tol = n * EPS * maxrow
    total = 0.0
    for k in range(n):
        col = np.abs(A[k:, k])
        p = k + int(np.argmax(col))
        best = col[p - k]
        if best < tol or best == 0.0:
            return float("-inf"), True
        if p != k:
            A[[k, p]] = A[[p, k]]
        total += np.log(best)
        f = A[k + 1:, k] / A[k, k]
        A[k + 1:, k + 1:] -= np.outer(f, A[k, k + 1:])
        A[k + 1:, k] = 0.0
    return float(total), False
