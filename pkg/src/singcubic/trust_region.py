"""Moré–Sorensen solver for min g^T d + 1/2 d^T H d subject to ||d|| <= radius."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._linalg import chol_solve, forward_solve, shifted_cholesky, sym_eigh
from .cubic_subproblem import gershgorin_bounds, hard_case_correction


@dataclass
class TrustRegionResult:
    d: np.ndarray
    lam: float
    iters: int
    hard_case: bool = False


def quadratic_model(g, H, d):
    return float(g @ d + 0.5 * d @ (H @ d))


def _eigen_solve(g, H, radius):
    evals, U = sym_eigh(H)
    gt = U.T @ g
    lam0 = max(0.0, -float(evals[0]))
    scale = max(1.0, float(np.max(np.abs(evals))))
    bottom = evals <= evals[0] + 1e-12 * scale
    singular = evals[0] <= 1e-12 * scale

    def d_of(lam, mask):
        coef = np.zeros_like(gt)
        coef[mask] = -gt[mask] / (evals[mask] + lam)
        return U @ coef

    mask = np.ones_like(bottom)
    if not singular:
        d = d_of(0.0, mask)
        if np.linalg.norm(d) <= radius:
            return TrustRegionResult(d, 0.0, 0)
    elif float(np.linalg.norm(gt[bottom])) <= 1e-10 * max(1.0, float(np.linalg.norm(g))):
        mask = ~bottom
        d = d_of(lam0, mask)
        if np.linalg.norm(d) <= radius:
            return TrustRegionResult(hard_case_correction(d, U[:, 0], radius, 1.0), lam0, 0, True)

    def psi(lam):
        return float(np.linalg.norm(d_of(lam, mask))) - radius

    lo = lam0
    if not np.all(evals[mask] + lo > 0) or psi(lo) <= 0:
        step = 1e-2 * max(1.0, lam0)
        while psi(lam0 + step) <= 0 and step > 1e-300:
            step *= 0.1
        lo = lam0 + step
    hi = max(lo, float(np.linalg.norm(g)) / radius + scale)
    while psi(hi) > 0:
        hi *= 2.0
    lam = brentq(psi, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return TrustRegionResult(d_of(lam, mask), lam, 0)


def solve_trust_region(g, H, radius, tol=1e-10, max_iters=100):
    """Nearly exact trust-region step.

    Newton iteration on ``1/radius - 1/||d(lam)||`` with
    ``d(lam) = -(H + lam I)^{-1} g``, safeguarded by a bracket from
    Gershgorin bounds. Falls back to an eigendecomposition when the bracket
    collapses (hard case) or the iteration does not converge.
    """
    g = np.asarray(g, dtype=float)
    H = np.asarray(H, dtype=float)
    if radius <= 0:
        raise ValueError("radius must be positive")
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0.0:
        return _eigen_solve(g, H, radius)

    L = shifted_cholesky(H, 0.0)
    if L is not None:
        d = chol_solve(L, -g)
        if np.linalg.norm(d) <= radius:
            return TrustRegionResult(d, 0.0, 1)

    G_l, G_u = gershgorin_bounds(H)
    lower = max(0.0, -float(np.min(np.diag(H))), gnorm / radius - G_u)
    upper = max(0.0, gnorm / radius - G_l)
    lam = max(lower, math.sqrt(lower * upper), lower + 0.01 * (upper - lower))
    for it in range(1, max_iters + 1):
        L = shifted_cholesky(H, lam) if lam > 0 else None
        if L is None:
            lower = max(lower, lam)
        else:
            d = chol_solve(L, -g)
            dn = float(np.linalg.norm(d))
            if abs(dn - radius) <= tol * radius:
                return TrustRegionResult(d, lam, it)
            wn = float(np.linalg.norm(forward_solve(L, d)))
            if dn > radius:
                lower = lam
            else:
                upper = lam
            lam_new = lam + (dn / wn) ** 2 * (dn - radius) / radius
            if lower < lam_new < upper:
                lam = lam_new
                continue
        if upper - lower <= 1e-12 * max(1.0, upper):
            break
        lam = max(math.sqrt(lower * upper), lower + 0.01 * (upper - lower))
    res = _eigen_solve(g, H, radius)
    res.iters = it
    return res
