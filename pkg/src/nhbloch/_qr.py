"""Compiled kernels for the dense complex eigensolver.

All routines work on ``complex128`` arrays and never call LAPACK. They are
jitted with numba and release the GIL so that independent matrices can be
decomposed from several threads.
"""

import numpy as np
from numba import njit

ULP = np.finfo(np.float64).eps
SAFMIN = np.finfo(np.float64).tiny
RADIX = 2.0

# status codes returned by hessenberg_qr
QR_OK = 0
QR_STUCK = 1


@njit(cache=True, nogil=True)
def _cabs1(z):
    return abs(z.real) + abs(z.imag)


@njit(cache=True, nogil=True)
def _swap(a, perm, i, j):
    if i == j:
        return
    n = a.shape[0]
    for r in range(n):
        tmp = a[r, i]
        a[r, i] = a[r, j]
        a[r, j] = tmp
    for c in range(n):
        tmp = a[i, c]
        a[i, c] = a[j, c]
        a[j, c] = tmp
    tmp_p = perm[i]
    perm[i] = perm[j]
    perm[j] = tmp_p


@njit(cache=True, nogil=True)
def balance(a):
    """Permute and scale ``a`` in place.

    Returns ``(ilo, ihi, perm, scale)`` such that on exit
    ``a == D^-1 P^T A P D`` where ``P`` reorders indices by ``perm`` and
    ``D = diag(scale)`` acts on the permuted ordering. Rows/columns outside
    ``ilo..ihi`` carry isolated eigenvalues on the diagonal.
    """
    n = a.shape[0]
    perm = np.arange(n)
    scale = np.ones(n)
    ilo = 0
    ihi = n - 1

    # push rows with zero off-diagonal part (within 0..ihi) to the bottom
    found = True
    while found and ihi > 0:
        found = False
        for j in range(ihi, -1, -1):
            isolated = True
            for i in range(ihi + 1):
                if i != j and a[j, i] != 0.0:
                    isolated = False
                    break
            if isolated:
                _swap(a, perm, j, ihi)
                ihi -= 1
                found = True
                break

    # push columns with zero off-diagonal part (within ilo..ihi) to the left
    found = True
    while found and ilo < ihi:
        found = False
        for j in range(ilo, ihi + 1):
            isolated = True
            for i in range(ilo, ihi + 1):
                if i != j and a[i, j] != 0.0:
                    isolated = False
                    break
            if isolated:
                _swap(a, perm, j, ilo)
                ilo += 1
                found = True
                break

    sqrdx = RADIX * RADIX
    noconv = True
    while noconv:
        noconv = False
        for i in range(ilo, ihi + 1):
            c = 0.0
            r = 0.0
            for j in range(ilo, ihi + 1):
                if j != i:
                    c += _cabs1(a[j, i])
                    r += _cabs1(a[i, j])
            if c == 0.0 or r == 0.0:
                continue
            g = r / RADIX
            f = 1.0
            s = c + r
            while c < g:
                f *= RADIX
                c *= sqrdx
            g = r * RADIX
            while c >= g:
                f /= RADIX
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                noconv = True
                scale[i] *= f
                g = 1.0 / f
                for j in range(n):
                    a[i, j] *= g
                for j in range(n):
                    a[j, i] *= f
    return ilo, ihi, perm, scale


@njit(cache=True, nogil=True)
def hessenberg(a):
    """Reduce ``a`` to upper Hessenberg form in place with Householder
    reflections. Only the similarity is applied; no reflectors are kept."""
    n = a.shape[0]
    for k in range(n - 2):
        norm2 = 0.0
        for i in range(k + 1, n):
            norm2 += a[i, k].real ** 2 + a[i, k].imag ** 2
        xnorm = np.sqrt(norm2)
        if xnorm == 0.0:
            continue
        x0 = a[k + 1, k]
        ax0 = abs(x0)
        if ax0 == 0.0:
            phase = 1.0 + 0.0j
        else:
            phase = x0 / ax0
        alpha = -phase * xnorm
        v = a[k + 1:, k].copy()
        v[0] -= alpha
        vnorm2 = 0.0
        for i in range(v.shape[0]):
            vnorm2 += v[i].real ** 2 + v[i].imag ** 2
        if vnorm2 == 0.0:
            continue
        beta = 2.0 / vnorm2
        # left: A[k+1:, k:] -= beta v (v^H A[k+1:, k:])
        for j in range(k, n):
            s = 0.0j
            for i in range(v.shape[0]):
                s += np.conj(v[i]) * a[k + 1 + i, j]
            s *= beta
            for i in range(v.shape[0]):
                a[k + 1 + i, j] -= v[i] * s
        # right: A[:, k+1:] -= beta (A[:, k+1:] v) v^H
        for r in range(n):
            s = 0.0j
            for i in range(v.shape[0]):
                s += a[r, k + 1 + i] * v[i]
            s *= beta
            for i in range(v.shape[0]):
                a[r, k + 1 + i] -= s * np.conj(v[i])
        a[k + 1, k] = alpha
        for i in range(k + 2, n):
            a[i, k] = 0.0j


@njit(cache=True, nogil=True)
def hessenberg_qr(h, max_sweeps):
    """Eigenvalues of an upper Hessenberg matrix by implicitly shifted QR.

    Single complex Wilkinson shifts with exceptional shifts after 10 and 20
    stagnant sweeps on the same block. ``h`` is overwritten.

    Returns ``(eigenvalues, status, lo, hi, sweeps)``; on ``QR_STUCK`` the
    block ``lo..hi`` failed to deflate within ``max_sweeps`` total sweeps.
    """
    n = h.shape[0]
    w = np.zeros(n, dtype=np.complex128)
    smlnum = SAFMIN * (n / ULP)
    ihi = n - 1
    total = 0
    while ihi >= 0:
        its = 0
        while True:
            # locate a negligible subdiagonal entry
            l = ihi
            while l > 0:
                sub = _cabs1(h[l, l - 1])
                if sub <= smlnum:
                    break
                tst = _cabs1(h[l - 1, l - 1]) + _cabs1(h[l, l])
                if tst == 0.0:
                    if l - 2 >= 0:
                        tst += abs(h[l - 1, l - 2].real)
                    if l + 1 <= ihi:
                        tst += abs(h[l + 1, l].real)
                if sub <= ULP * tst:
                    ab = max(sub, _cabs1(h[l - 1, l]))
                    ba = min(sub, _cabs1(h[l - 1, l]))
                    aa = max(_cabs1(h[l, l]), _cabs1(h[l - 1, l - 1] - h[l, l]))
                    bb = min(_cabs1(h[l, l]), _cabs1(h[l - 1, l - 1] - h[l, l]))
                    s = aa + ab
                    if ba * (ab / s) <= max(smlnum, ULP * (bb * (aa / s))):
                        break
                    # Equal diagonals make bb vanish; dropping the entry then
                    # moves the eigenvalues by at most sqrt(ab * ba).
                    if ba * ab <= (ULP * tst) ** 2:
                        break
                l -= 1
            if l > 0:
                h[l, l - 1] = 0.0j
            if l == ihi:
                w[ihi] = h[ihi, ihi]
                ihi -= 1
                break
            if total >= max_sweeps:
                return w, QR_STUCK, l, ihi, total
            its += 1
            total += 1

            if its == 10:
                shift = 0.75 * abs(h[l + 1, l].real) + h[l, l]
            elif its == 20:
                shift = 0.75 * abs(h[ihi, ihi - 1].real) + h[ihi, ihi]
            else:
                a11 = h[ihi - 1, ihi - 1]
                a12 = h[ihi - 1, ihi]
                a21 = h[ihi, ihi - 1]
                a22 = h[ihi, ihi]
                half = 0.5 * (a11 - a22)
                disc = np.sqrt(half * half + a12 * a21)
                mu1 = a22 - half + disc
                mu2 = a22 - half - disc
                # eigenvalue of the trailing 2x2 closer to a22
                if abs(mu1 - a22) <= abs(mu2 - a22):
                    shift = mu1
                else:
                    shift = mu2

            x = h[l, l] - shift
            y = h[l + 1, l]
            for k in range(l, ihi):
                if k > l:
                    x = h[k, k - 1]
                    y = h[k + 1, k - 1]
                ax = abs(x)
                r = np.sqrt(ax * ax + abs(y) ** 2)
                if r == 0.0:
                    continue
                if ax == 0.0:
                    c = 0.0
                    sn = 1.0 + 0.0j
                else:
                    c = ax / r
                    sn = (x / ax) * np.conj(y) / r
                jstart = k - 1 if k > l else l
                for j in range(jstart, ihi + 1):
                    t1 = h[k, j]
                    t2 = h[k + 1, j]
                    h[k, j] = c * t1 + sn * t2
                    h[k + 1, j] = -np.conj(sn) * t1 + c * t2
                if k > l:
                    h[k + 1, k - 1] = 0.0j
                iend = min(k + 2, ihi)
                for i in range(l, iend + 1):
                    t1 = h[i, k]
                    t2 = h[i, k + 1]
                    h[i, k] = c * t1 + np.conj(sn) * t2
                    h[i, k + 1] = -sn * t1 + c * t2
    return w, QR_OK, 0, 0, total


@njit(cache=True, nogil=True)
def lu_shifted(a, lam, eps3):
    """LU factorisation with partial pivoting of ``a - lam I``.

    Pivots smaller than ``eps3`` are replaced by ``eps3`` so the factors can
    be used for inverse iteration at an (almost) exact eigenvalue.
    """
    n = a.shape[0]
    lu = a.copy()
    for i in range(n):
        lu[i, i] -= lam
    piv = np.arange(n)
    for k in range(n):
        p = k
        best = abs(lu[k, k])
        for i in range(k + 1, n):
            v = abs(lu[i, k])
            if v > best:
                best = v
                p = i
        if p != k:
            for j in range(n):
                tmp = lu[k, j]
                lu[k, j] = lu[p, j]
                lu[p, j] = tmp
            tmp_p = piv[k]
            piv[k] = piv[p]
            piv[p] = tmp_p
        if abs(lu[k, k]) < eps3:
            lu[k, k] = eps3
        inv = 1.0 / lu[k, k]
        for i in range(k + 1, n):
            lu[i, k] *= inv
            f = lu[i, k]
            if f != 0.0:
                for j in range(k + 1, n):
                    lu[i, j] -= f * lu[k, j]
    return lu, piv


@njit(cache=True, nogil=True)
def lu_solve(lu, piv, b):
    n = lu.shape[0]
    x = np.empty(n, dtype=np.complex128)
    for i in range(n):
        x[i] = b[piv[i]]
    for i in range(n):
        s = x[i]
        for j in range(i):
            s -= lu[i, j] * x[j]
        x[i] = s
    for i in range(n - 1, -1, -1):
        s = x[i]
        for j in range(i + 1, n):
            s -= lu[i, j] * x[j]
        x[i] = s / lu[i, i]
    return x


@njit(cache=True, nogil=True)
def inverse_iteration(a, lam, x0, eps3, iters):
    """Approximate eigenvector of ``a`` for eigenvalue ``lam``.

    Returns the iterate with the largest growth ``||y|| / ||x||``, i.e. the
    smallest residual. Near a defective eigenvalue further steps drift
    towards the Jordan direction and the residual grows again.
    """
    lu, piv = lu_shifted(a, lam, eps3)
    x = x0 / np.sqrt(np.sum(x0.real ** 2 + x0.imag ** 2))
    best = x.copy()
    growth = 0.0
    for _ in range(iters):
        y = lu_solve(lu, piv, x)
        nrm = np.sqrt(np.sum(y.real ** 2 + y.imag ** 2))
        if nrm == 0.0 or not np.isfinite(nrm):
            break
        x = y / nrm
        if nrm > growth:
            growth = nrm
            best = x.copy()
    return best
