"""Finite-sum objectives: F(w) = (1/n) * sum_i f_i(w).

Every objective evaluates the mean of its components over an index set
together with the gradient and a dense Hessian. Logistic regression comes in
two flavours, an L2-regularized (convex) one and one with the rational
penalty ``alpha * beta w^2 / (1 + beta w^2)`` (nonconvex).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit


class Regularizer(str, enum.Enum):
    L2 = "l2"
    RATIONAL = "rational"


class FiniteSumObjective:
    """Base class for F(w) = (1/n) sum_i f_i(w) with dense derivatives.

    Subclasses implement :meth:`_evaluate`; the public entry points check the
    index set and return averages over it.
    """

    n: int
    p: int

    def evaluate(self, w, idx=None, hessian=True):
        """Return ``(value, gradient, hessian)`` averaged over ``idx``.

        ``idx`` is an array of 0-based component indices, or None for all of
        them. The Hessian is None when ``hessian`` is False.
        """
        w = np.asarray(w, dtype=float)
        if w.shape != (self.p,):
            raise ValueError(f"expected a point of shape ({self.p},), got {w.shape}")
        return self._evaluate(w, self._check_idx(idx), hessian)

    def value(self, w, idx=None):
        return self.evaluate(w, idx, hessian=False)[0]

    def gradient(self, w, idx=None):
        return self.evaluate(w, idx, hessian=False)[1]

    def hessian(self, w, idx=None):
        return self.evaluate(w, idx, hessian=True)[2]

    def _check_idx(self, idx):
        if idx is None:
            return None
        idx = np.asarray(idx, dtype=np.intp).ravel()
        if idx.size == 0:
            raise ValueError("index set must be nonempty")
        if idx.min() < 0 or idx.max() >= self.n:
            raise ValueError(f"component index out of range [0, {self.n})")
        return idx

    def _evaluate(self, w, idx, hessian):
        raise NotImplementedError


def regularizer_eval(kind, alpha, beta, w):
    """Value, gradient and Hessian diagonal of the separable penalty."""
    kind = Regularizer(kind)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    w = np.asarray(w, dtype=float)
    if kind is Regularizer.L2:
        return 0.5 * alpha * float(w @ w), alpha * w, np.full_like(w, alpha)
    if beta <= 0:
        raise ValueError("beta must be positive for the rational penalty")
    bw2 = beta * w * w
    q = 1.0 + bw2
    value = alpha * float(np.sum(bw2 / q))
    grad = 2.0 * alpha * beta * w / q**2
    hdiag = 2.0 * alpha * beta * (1.0 - 3.0 * bw2) / q**3
    return value, grad, hdiag


class LogisticProblem(FiniteSumObjective):
    """Binary logistic regression with an L2 or rational penalty.

    Parameters
    ----------
    X : (n, p) array or scipy sparse matrix
        Feature rows.
    y : (n,) array
        Labels in {0, 1}.
    kind : Regularizer or str
        ``"l2"`` for ``alpha/2 ||w||^2``, ``"rational"`` for
        ``alpha * sum_j beta w_j^2 / (1 + beta w_j^2)``.
    alpha, beta : float
        Penalty weight and rational-penalty shape.

    The penalty is added in full to every component average, so the mean
    over all singletons equals the evaluation over the whole data set.
    """

    def __init__(self, X, y, kind=Regularizer.L2, alpha=1e-3, beta=1.0):
        self.X = sp.csr_matrix(X, dtype=float) if sp.issparse(X) else np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float).ravel()
        if self.X.ndim != 2 or self.X.shape[0] != self.y.size:
            raise ValueError("X must be (n, p) with one label per row")
        if not np.all((self.y == 0) | (self.y == 1)):
            raise ValueError("labels must lie in {0, 1}")
        self.kind = Regularizer(kind)
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.kind is Regularizer.RATIONAL and beta <= 0:
            raise ValueError("beta must be positive for the rational penalty")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.n, self.p = self.X.shape

    def _rows(self, idx):
        if idx is None:
            return self.X, self.y
        return self.X[idx], self.y[idx]

    def _evaluate(self, w, idx, hessian):
        X, y = self._rows(idx)
        m = y.size
        z = np.asarray(X @ w).ravel()
        # log(1 + e^z) - y z is the per-example negative log-likelihood
        loss = float(np.sum(np.logaddexp(0.0, z) - y * z)) / m
        s = expit(z)
        grad = np.asarray(X.T @ (s - y)).ravel() / m

        rv, rg, rh = regularizer_eval(self.kind, self.alpha, self.beta, w)
        H = None
        if hessian:
            weights = s * (1.0 - s) / m
            if sp.issparse(X):
                H = (X.T @ X.multiply(weights[:, None])).toarray()
            else:
                H = X.T @ (X * weights[:, None])
            H = 0.5 * (H + H.T)
            H[np.diag_indices_from(H)] += rh
        return loss + rv, grad + rg, H


class QuadraticSum(FiniteSumObjective):
    """Components f_i(x) = 0.5 ||x - a_i||^2; the minimizer is mean(a_i)."""

    def __init__(self, centers):
        self.A = np.atleast_2d(np.asarray(centers, dtype=float))
        self.n, self.p = self.A.shape

    def _evaluate(self, w, idx, hessian):
        A = self.A if idx is None else self.A[idx]
        diff = w - A
        value = 0.5 * float(np.mean(np.einsum("ij,ij->i", diff, diff)))
        grad = w - A.mean(axis=0)
        H = np.eye(self.p) if hessian else None
        return value, grad, H


@dataclass(frozen=True)
class DerivativeReport:
    grad_error: float
    hess_error: float
    step: float


def _rel_error(approx, exact):
    scale = max(float(np.max(np.abs(exact))), 1e-12)
    return float(np.max(np.abs(approx - exact))) / scale


def finite_diff_check(obj, w, h=1e-6, idx=None):
    """Compare analytic derivatives against central differences.

    Coordinate ``j`` is perturbed by ``h * (1 + |w_j|)``. Gradient entries
    are differenced from values; Hessian columns (Hessian-vector products
    with the unit vectors) from gradients. Errors are max-abs deviations
    relative to the largest analytic entry.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    w = np.asarray(w, dtype=float)
    _, g, H = obj.evaluate(w, idx, hessian=True)
    fd_g = np.empty_like(g)
    fd_H = np.empty_like(H)
    for j in range(w.size):
        hj = h * (1.0 + abs(w[j]))
        e = np.zeros_like(w)
        e[j] = hj
        fp, gp, _ = obj.evaluate(w + e, idx, hessian=False)
        fm, gm, _ = obj.evaluate(w - e, idx, hessian=False)
        fd_g[j] = (fp - fm) / (2.0 * hj)
        fd_H[:, j] = (gp - gm) / (2.0 * hj)
    return DerivativeReport(_rel_error(fd_g, g), _rel_error(fd_H, H), h)
