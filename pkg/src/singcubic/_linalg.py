"""Small dense linear-algebra helpers shared by the subproblem solvers."""

import numpy as np
import scipy.linalg
from scipy.linalg.lapack import dpotrf

# pivot threshold factor for declaring a shifted matrix not positive definite
CHOL_EPS = 2.0 * np.sqrt(2.22e-16)


def shifted_cholesky(H, lam, eps=CHOL_EPS):
    """Lower Cholesky factor of ``H + lam*I``, or None if it is not safely PD.

    A factorization whose smallest pivot ``L_ii**2`` is at most
    ``eps * trace(H + lam*I)`` counts as failed.
    """
    A = H + lam * np.eye(H.shape[0])
    tr = float(np.trace(A))
    if not np.isfinite(tr) or tr <= 0.0:
        return None
    L, info = dpotrf(A, lower=1, clean=1, overwrite_a=0)
    if info != 0:
        return None
    if float(np.min(np.diag(L))) ** 2 <= eps * tr:
        return None
    return L


def chol_solve(L, b):
    return scipy.linalg.cho_solve((L, True), b, check_finite=False)


def forward_solve(L, b):
    return scipy.linalg.solve_triangular(L, b, lower=True, check_finite=False)


def canonical_sign(v):
    """Flip ``v`` so that its first non-negligible entry is positive."""
    tol = 1e-12 * float(np.max(np.abs(v)))
    nz = np.flatnonzero(np.abs(v) > tol)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def sym_eigh(H):
    """Eigenvalues (ascending) and eigenvectors with canonicalized signs."""
    evals, U = np.linalg.eigh(H)
    for k in range(U.shape[1]):
        U[:, k] = canonical_sign(U[:, k])
    return evals, U


def larger_root(b, c):
    """Larger real root of x^2 + b x + c = 0 with c <= 0."""
    disc = b * b - 4.0 * c
    s = np.sqrt(max(disc, 0.0))
    if b > 0:
        return -2.0 * c / (b + s) if b + s > 0 else 0.0
    return 0.5 * (-b + s)
