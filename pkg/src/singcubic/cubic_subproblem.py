"""Exact solver for the cubic-regularized quadratic model

    min_d  g^T d + 1/2 d^T H d + (sigma/3) ||d||^3.

A global minimizer is characterized by a multiplier ``lam = sigma ||d||``
with ``(H + lam I) d = -g`` and ``H + lam I`` positive semidefinite. The
solver brackets ``lam`` with Gershgorin bounds and runs a safeguarded
Newton-type iteration on the secular function

    phi(lam) = 1/||d(lam)|| - sigma/lam,

classifying each trial multiplier as L (phi < 0, ``lam`` too small), G
(phi > 0, too large) or N (``H + lam I`` not positive definite). When the
bracket collapses, the hard case is finished from an eigendecomposition of H
by moving along the eigenvector of the smallest eigenvalue.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._linalg import (
    CHOL_EPS,
    chol_solve,
    forward_solve,
    larger_root,
    shifted_cholesky,
    sym_eigh,
)

DEFAULT_TOL = 0.1
DEFAULT_MAX_ITERS = 100


class Status(str, enum.Enum):
    SECULAR_CONVERGED = "secular_converged"
    HARD_CASE = "hard_case"
    INTERIOR_ZERO = "interior_zero"
    MAX_ITERS = "max_iters"


@dataclass
class SubproblemResult:
    d: np.ndarray
    lam: float
    iters: int
    status: Status


def cubic_model(g, H, sigma, d):
    """Model value relative to the origin (the constant term is omitted)."""
    nd = float(np.linalg.norm(d))
    return float(g @ d + 0.5 * d @ (H @ d)) + sigma / 3.0 * nd**3


def gershgorin_bounds(H):
    """Interval ``(G_l, G_u)`` containing every eigenvalue of symmetric H."""
    H = np.asarray(H, dtype=float)
    diag = np.diag(H)
    radius = np.sum(np.abs(H), axis=1) - np.abs(diag)
    return float(np.min(diag - radius)), float(np.max(diag + radius))


def lambda_interval(g, H, sigma):
    """Bracket ``[lower, upper]`` for the optimal multiplier.

    The upper end is the larger root of ``x^2 + G_l x - ||g|| sigma`` and the
    lower end the larger root of ``x^2 + G_u x - ||g|| sigma``, both clipped
    at zero; the lower end is also raised to ``-min_i H_ii``.
    """
    H = np.asarray(H, dtype=float)
    G_l, G_u = gershgorin_bounds(H)
    gs = float(np.linalg.norm(g)) * sigma
    lam_1 = larger_root(G_l, -gs)
    lam_2 = larger_root(G_u, -gs)
    lower = max(0.0, -float(np.min(np.diag(H))), lam_2)
    upper = max(0.0, lam_1)
    # both ends bound the same root; guard against rounding inversions
    return min(lower, upper), upper


def secular_phi(lam, d_norm, sigma):
    """``1/||d|| - sigma/lam``: negative means lam is too small."""
    if lam <= 0 or d_norm <= 0:
        raise ValueError("secular function needs lam > 0 and ||d|| > 0")
    return 1.0 / d_norm - sigma / lam


def secular_update(lam, d_norm, w_norm, sigma):
    """Newton-type multiplier update, or None if the step is not real.

    Solves ``a x^2 + b x + e = 0`` with ``a = ||w||^2/||d||^3``,
    ``b = 1/||d|| + a lam`` and ``e = lam/||d|| - sigma``, where
    ``w = L^{-1} d``, and returns ``lam`` plus its larger root.
    """
    if lam <= 0 or d_norm <= 0 or w_norm <= 0:
        raise ValueError("secular update needs positive lam, ||d|| and ||w||")
    a = w_norm**2 / d_norm**3
    b = 1.0 / d_norm + a * lam
    e = lam / d_norm - sigma
    disc = b * b - 4.0 * a * e
    if disc < 0 or not math.isfinite(disc):
        return None
    # b > 0, so this is the cancellation-free form of (-b + sqrt(disc)) / 2a
    return lam + (-2.0 * e) / (b + math.sqrt(disc))


def hard_case_correction(d, u, lam, sigma):
    """Return ``d + alpha u`` with ``||d + alpha u|| = lam/sigma``.

    ``alpha`` is the smaller root of ``x^2 + 2 u^T d x + d^T d - (lam/sigma)^2``.
    """
    d = np.asarray(d, dtype=float)
    u = np.asarray(u, dtype=float)
    ud = float(u @ d)
    r = lam / sigma
    disc = ud * ud - float(d @ d) + r * r
    if disc < 0:
        if disc < -1e-12 * max(1.0, r * r):
            raise ArithmeticError("hard-case correction has no real root; ||d|| exceeds lam/sigma")
        disc = 0.0
    alpha = -ud - math.sqrt(disc)
    return d + alpha * u


def _interpolate(lower, upper):
    return max(math.sqrt(lower * upper), lower + 0.01 * (upper - lower))


def _collapsed(lower, upper):
    return upper - lower <= 1e-12 * max(1.0, upper)


def _eigen_finish(g, H, sigma, upper, iters):
    """Finish from the eigendecomposition once the bracket has collapsed.

    Handles the hard case (g has no weight on the bottom eigenspace and the
    step must be completed along it) as well as near-hard instances whose
    multiplier lies too close to ``-lambda_min(H)`` for a Cholesky test to
    resolve; the latter are solved by a bracketed root search in the
    eigenbasis.
    """
    evals, U = sym_eigh(H)
    gt = U.T @ g
    gnorm = float(np.linalg.norm(g))
    lam0 = max(0.0, -float(evals[0]))
    u_p = U[:, 0]
    scale = max(1.0, float(np.max(np.abs(evals))))
    bottom = evals <= evals[0] + 1e-12 * scale
    if gnorm == 0.0 and lam0 == 0.0:
        return SubproblemResult(np.zeros_like(g), 0.0, iters, Status.INTERIOR_ZERO)

    def d_of(lam, mask):
        coef = np.zeros_like(gt)
        coef[mask] = -gt[mask] / (evals[mask] + lam)
        return U @ coef

    mask = np.ones_like(bottom)
    if lam0 > 0 and float(np.linalg.norm(gt[bottom])) <= 1e-10 * max(1.0, gnorm):
        mask = ~bottom
        d = d_of(lam0, mask)
        if float(np.linalg.norm(d)) <= lam0 / sigma:
            d = hard_case_correction(d, u_p, lam0, sigma)
            return SubproblemResult(d, lam0, iters, Status.HARD_CASE)

    def psi(lam):
        return float(np.linalg.norm(d_of(lam, mask))) - lam / sigma

    lo = lam0
    if not np.all(evals[mask] + lo > 0) or psi(lo) <= 0:
        step = 1e-2 * max(1.0, lam0)
        while psi(lam0 + step) <= 0 and step > 1e-300:
            step *= 0.1
        lo = lam0 + step
    hi = max(upper, lo + 1.0)
    while psi(hi) > 0:
        hi *= 2.0
    lam = brentq(psi, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return SubproblemResult(d_of(lam, mask), lam, iters, Status.SECULAR_CONVERGED)


def solve_cubic(g, H, sigma, lambda_warm=0.0, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS, rng=None):
    """Globally minimize ``g^T d + 1/2 d^T H d + sigma/3 ||d||^3``.

    Parameters
    ----------
    g, H : ndarray
        Model gradient (p,) and symmetric Hessian (p, p).
    sigma : float
        Cubic weight, > 0.
    lambda_warm : float
        Multiplier from the previous solve; reused if it lies inside the
        current bracket, otherwise a point of the bracket is drawn uniformly.
    tol : float
        Acceptance threshold on ``|phi(lam)|``.
    max_iters : int
        Cap on secular iterations.
    rng : numpy.random.Generator, optional
        Source for the random restart; defaults to a generator seeded with 0.
    """
    g = np.asarray(g, dtype=float)
    H = np.asarray(H, dtype=float)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if H.shape != (g.size, g.size):
        raise ValueError("H must be square and match g")
    if rng is None:
        rng = np.random.default_rng(0)

    lower, upper = lambda_interval(g, H, sigma)
    if not np.any(g) or upper == 0.0:
        return _eigen_finish(g, H, sigma, upper, 0)

    if lower <= lambda_warm <= upper:
        lam = float(lambda_warm)
    else:
        lam = float(rng.uniform(lower, upper))

    last = None
    L = None
    for it in range(1, max_iters + 1):
        if L is None and lam > 0:
            L = shifted_cholesky(H, lam, CHOL_EPS)
        if L is None:
            # lam is in N
            lower = max(lower, lam)
            lam = _interpolate(lower, upper)
            if _collapsed(lower, upper):
                return _eigen_finish(g, H, sigma, upper, it)
            continue

        d = chol_solve(L, -g)
        d_norm = float(np.linalg.norm(d))
        phi = secular_phi(lam, d_norm, sigma)
        last = (d, lam)
        if abs(phi) <= tol and cubic_model(g, H, sigma, d) <= 0.0:
            return SubproblemResult(d, lam, it, Status.SECULAR_CONVERGED)

        w_norm = float(np.linalg.norm(forward_solve(L, d)))
        # w can underflow when lam is huge
        lam_plus = secular_update(lam, d_norm, w_norm, sigma) if w_norm > 0 else None
        L = None
        if phi < 0:
            # lam is in L
            lower = lam
            if lam_plus is None or lam_plus >= upper:
                lam = _interpolate(lower, upper)
            else:
                lam = lam_plus
        else:
            # lam is in G
            upper = lam
            if lam_plus is not None and lam_plus > 0:
                L = shifted_cholesky(H, lam_plus, CHOL_EPS)
                if L is not None:
                    lam = lam_plus
                    continue
                lower = max(lower, lam_plus)
            lam = _interpolate(lower, upper)
        if _collapsed(lower, upper):
            return _eigen_finish(g, H, sigma, upper, it)

    if last is None:
        return SubproblemResult(np.zeros_like(g), lam, max_iters, Status.MAX_ITERS)
    return SubproblemResult(last[0], last[1], max_iters, Status.MAX_ITERS)
