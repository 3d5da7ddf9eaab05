"""Symmetric tridiagonal eigensolvers for ``H = A^T A``.

Two paths are provided.  Well-scaled matrices go to LAPACK through
``scipy.linalg.eigh_tridiagonal``.  Graded matrices (q-families whose
entries grow like ``q^-x``) lose every small eigenvalue to rounding there,
so they are solved from the bidiagonal factor instead: bisection on the
stationary qd transform for eigenvalues and a twisted factorization for
eigenvectors.  Both of those are accurate relative to each eigenvalue, not
relative to the norm of ``H``.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .hamiltonian import sqrt_product

EPS = np.finfo(float).eps
#: the factor path is used when eps * |H| * size exceeds this fraction of the first gap
GRADED_RTOL = 1e-10
#: bisection treats anything below this as zero
FLOOR = 1e-290
MAX_BISECTION_STEPS = 400


def negative_count(b, d, sigma):
    """Number of eigenvalues of ``A^T A`` below each shift in ``sigma``.

    ``b = B(0..W)`` and ``d = D(0..W)`` define the factor through
    ``A = diag(sqrt b) - superdiag(sqrt d[1:])``.  The pivots of
    ``A^T A - sigma`` are formed as ``b_i + t_i`` with
    ``t_{i+1} = t_i d_{i+1} / pivot_i - sigma``, which never subtracts two
    large diagonal entries.
    """
    sigma = np.asarray(sigma, dtype=float)
    t = -sigma
    count = np.zeros(sigma.shape, dtype=np.int64)
    last = len(b) - 1
    tiny = np.finfo(float).tiny
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for i in range(last + 1):
            pivot = b[i] + t
            pivot = np.where(pivot == 0.0, -tiny, pivot)
            count += pivot < 0
            if i < last:
                t = t * (d[i + 1] / pivot) - sigma
    return count


def gershgorin_upper(b, d):
    off = sqrt_product(b[:-1], d[1:])
    radius = np.zeros(len(b))
    radius[:-1] += off
    radius[1:] += off
    return float(np.max(b + d + radius))


def bisect_eigenvalues(b, d, indices):
    """Eigenvalues ``lambda_k`` (ascending index ``k``) to full relative precision.

    Midpoints are geometric, so an eigenvalue of size ``1e-30`` next to a
    norm of ``1e+200`` costs a few dozen steps rather than hundreds.
    """
    b = np.asarray(b, dtype=float)
    d = np.asarray(d, dtype=float)
    idx = np.asarray(indices, dtype=np.int64)
    lo = np.zeros(idx.shape)
    hi = np.full(idx.shape, gershgorin_upper(b, d) * (1 + 8 * EPS))
    for _ in range(MAX_BISECTION_STEPS):
        done = (hi - lo <= 2 * EPS * hi) | (hi <= FLOOR)
        if np.all(done):
            break
        mid = np.sqrt(np.maximum(lo, FLOOR) * hi)
        below = negative_count(b, d, mid) <= idx
        lo = np.where(below & ~done, mid, lo)
        hi = np.where(~below & ~done, mid, hi)
    return np.where(hi <= FLOOR, 0.0, 0.5 * (lo + hi))


def twisted_eigenvectors(b, d, lam):
    """Unit eigenvectors for the eigenvalues ``lam`` via twisted factorizations.

    ``A^T A = L diag(b) L^T`` with ``L`` unit lower bidiagonal.  A stationary
    transform from the top and a progressive one from the bottom meet at the
    twist index where the diagonal of the inverse is largest; the vector is
    then two bidiagonal back-substitutions.  Columns are signed so that the
    first entry is positive, even when it underflows to zero.
    """
    b = np.asarray(b, dtype=float)
    d = np.asarray(d, dtype=float)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    n = len(b)
    if n == 1:
        return np.ones((1, lam.size))
    tiny = np.finfo(float).tiny
    ab = -sqrt_product(b[:-1], d[1:])
    l = ab / b[:-1]
    dl2 = d[1:]
    s = np.empty((n, lam.size))
    p = np.empty((n, lam.size))
    lplus = np.empty((n - 1, lam.size))
    uminus = np.empty((n - 1, lam.size))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        sv = -lam
        for i in range(n - 1):
            s[i] = sv
            piv = b[i] + sv
            piv = np.where(piv == 0.0, tiny, piv)
            lplus[i] = ab[i] / piv
            sv = lplus[i] * l[i] * sv - lam
        s[n - 1] = sv
        pv = b[n - 1] - lam
        p[n - 1] = pv
        for i in range(n - 2, -1, -1):
            piv = dl2[i] + pv
            piv = np.where(piv == 0.0, tiny, piv)
            t = b[i] / piv
            uminus[i] = l[i] * t
            pv = pv * t - lam
            p[i] = pv
        gamma = np.abs(s + p + lam)
    gamma = np.where(np.isfinite(gamma), gamma, np.inf)
    twist = np.argmin(gamma, axis=0)
    z = np.zeros((n, lam.size))
    cols = np.arange(lam.size)
    z[twist, cols] = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n - 2, -1, -1):
            z[i] = np.where(i < twist, -lplus[i] * z[i + 1], z[i])
        for i in range(n - 1):
            z[i + 1] = np.where(i >= twist, -uminus[i] * z[i], z[i + 1])
    z = np.nan_to_num(z, nan=0.0, posinf=0.0, neginf=0.0)
    z /= np.linalg.norm(z, axis=0)
    # sign of z[0] from the signs of the factors, which survive when z[0] underflows
    below = np.arange(n - 1)[:, None] < twist[None, :]
    head_sign = np.where(below, np.sign(-lplus), 1.0).prod(axis=0)
    return z * np.where(head_sign < 0, -1.0, 1.0)


def largest_eigenvalue(b, d):
    """Spectral radius of ``A^T A`` (absolute accuracy is all that is needed)."""
    n = len(b)
    diag = b + d
    off = -sqrt_product(b[:-1], d[1:])
    try:
        w = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(n - 1, n - 1))
    except LinAlgError:
        return float(bisect_eigenvalues(b, d, [n - 1])[0])
    return float(w[-1])


def is_graded(b, d):
    """True when rounding at the scale of ``|H|`` swamps the first excitation."""
    n = len(b)
    if n < 2:
        return False
    diag = b + d
    off = -sqrt_product(b[:-1], d[1:])
    try:
        w = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, 1))
    except LinAlgError:
        # LAPACK bisection gives up on extreme grading
        return True
    norm = float(max(np.abs(diag).max(), np.abs(off).max(initial=0.0)))
    return EPS * norm * n > GRADED_RTOL * abs(w[1])


def tridiagonal_eigen(b, d, count=None, vectors=True, accurate=None):
    """Lowest ``count`` eigenpairs of ``A^T A``; returns ``(values, vectors, solver)``.

    ``accurate=None`` picks the factor path for graded input; pass a bool to
    force a path.  Vector columns have a positive first entry.
    """
    b = np.asarray(b, dtype=float)
    d = np.asarray(d, dtype=float)
    n = len(b)
    count = n if count is None else int(min(count, n))
    if accurate is None:
        accurate = is_graded(b, d)
    if accurate:
        lam = bisect_eigenvalues(b, d, np.arange(count))
        vec = twisted_eigenvectors(b, d, lam) if vectors else None
        return lam, vec, "qd-bisection"
    diag = b + d
    off = -sqrt_product(b[:-1], d[1:])
    if count == n:
        out = eigh_tridiagonal(diag, off, eigvals_only=not vectors, lapack_driver="stev")
        solver = "stev"
    else:
        out = eigh_tridiagonal(diag, off, eigvals_only=not vectors, select="i", select_range=(0, count - 1))
        solver = "stebz"
    if not vectors:
        return out, None, solver
    lam, vec = out
    vec = vec * np.where(vec[0] < 0, -1.0, 1.0)
    return lam, vec, solver


def eigenvalue_uncertainty(lam, solver):
    """Absolute error bound per eigenvalue for the given solver.

    qd-bisection is accurate relative to each eigenvalue; the LAPACK paths
    are accurate relative to the largest one.
    """
    lam = np.asarray(lam, dtype=float)
    if solver == "qd-bisection":
        return 4 * EPS * np.abs(lam)
    return len(lam) * EPS * max(np.abs(lam).max(initial=0.0), np.finfo(float).tiny) * np.ones_like(lam)
