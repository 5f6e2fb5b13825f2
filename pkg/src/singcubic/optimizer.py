"""SingCubic: cyclic incremental Newton with cubic regularization.

A second-order model is kept for every component (batch) of the finite sum,
each expanded around the point where that component was last evaluated (its
anchor). The average of these models is an ordinary quadratic in x,

    c + (x - x_k)^T g + 1/2 (x - x_k)^T H (x - x_k),

whose coefficients are maintained incrementally from per-component sums, so
refreshing one component costs O(p^2) on top of its own evaluation. Each
iteration minimizes the quadratic plus ``sigma/3 ||d||^3``, accepts or
rejects the step by the ratio of actual to predicted decrease, adapts sigma,
and refreshes the next component at the (possibly unchanged) iterate.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .cubic_subproblem import DEFAULT_MAX_ITERS, DEFAULT_TOL, Status, solve_cubic
from .data import make_batches
from .trace import DivergenceError, IterationTrace, WorkCounter

log = logging.getLogger(__name__)

# rho value for steps whose predicted decrease is not positive
REJECT = -math.inf


class Sampling(str, enum.Enum):
    CYCLIC = "cyclic"
    RANDOM = "random"


@dataclass
class OptimizerConfig:
    eta1: float = 0.1
    eta2: float = 0.9
    gamma1: float = 2.0
    gamma2: float = 2.0
    sigma0: float = 1.0
    sigma_floor: float = 1e-16
    grad_tol: float = 1e-6
    batch_frac: float = 0.001
    max_epochs: float = 10.0
    max_iters: int | None = None
    sampling: Sampling = Sampling.CYCLIC
    seed: int = 0
    subproblem_tol: float = DEFAULT_TOL
    subproblem_max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self):
        self.sampling = Sampling(self.sampling)
        if not 0 < self.eta1 <= self.eta2 < 1:
            raise ValueError("need 0 < eta1 <= eta2 < 1")
        if self.gamma1 <= 1 or self.gamma2 <= 1:
            raise ValueError("gamma1 and gamma2 must exceed 1")
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        if not 0 < self.batch_frac <= 1:
            raise ValueError("batch_frac must lie in (0, 1]")


def compute_rho(f_old, f_new, m_step, m_zero=None):
    """Actual over predicted decrease; REJECT if the prediction is degenerate.

    The predicted decrease is ``m_zero - m_step`` where ``m_zero`` is the
    model value at zero displacement (``f_old`` by default). SingCubic passes
    its model constant ``c_k``, which differs from ``F(x_k)`` while some
    component models are stale.
    """
    denom = (f_old if m_zero is None else m_zero) - m_step
    if not denom > 1e-14 * max(1.0, abs(f_old)):
        return REJECT
    return (f_old - f_new) / denom


def update_sigma(rho, sigma, cfg=None):
    cfg = cfg or OptimizerConfig()
    if rho >= cfg.eta2:
        return max(sigma / cfg.gamma2, cfg.sigma_floor)
    if rho < cfg.eta1:
        return cfg.gamma1 * sigma
    return sigma


@dataclass
class ModelStore:
    """Per-component second-order data and the aggregate model at ``x``.

    Row ``i`` of the per-component arrays belongs to batch ``batches[i]``;
    ``weights[i] = len(batches[i]) / n`` so that weighted sums are averages
    over all n samples even when the last batch is short.
    """

    batches: list
    weights: np.ndarray
    anchors: np.ndarray  # (m, p) points x_{k_i}
    values: np.ndarray  # f^i
    grads: np.ndarray  # g^i
    hessians: np.ndarray  # H^i, (m, p, p)
    u: np.ndarray  # g^i . x_{k_i}
    v: np.ndarray  # H^i x_{k_i}
    wq: np.ndarray  # x_{k_i}^T H^i x_{k_i}
    sum_H: np.ndarray
    sum_gv: np.ndarray  # sum_i w_i (g^i - v^i)
    sum_fuw: float  # sum_i w_i (f^i - u^i + w^i / 2)
    x: np.ndarray
    H: np.ndarray = None
    g: np.ndarray = None
    c: float = 0.0
    cursor: int = 0

    @property
    def n_components(self):
        return len(self.batches)


def _component(obj, x, batch):
    f, g, H = obj.evaluate(x, batch, hessian=True)
    v = H @ x
    return f, g, H, float(g @ x), v, float(x @ v)


def _refresh_aggregates(store):
    x = store.x
    store.H = store.sum_H.copy()
    store.g = store.sum_gv + store.sum_H @ x
    store.c = float(store.g @ x - 0.5 * x @ (store.sum_H @ x) + store.sum_fuw)


def init_store(obj, x0, batch_frac, shuffle=False, seed=None, counter=None):
    """Evaluate every component at ``x0`` and build the aggregate model."""
    if not 0 < batch_frac <= 1:
        raise ValueError("batch size cannot exceed n: batch_frac must lie in (0, 1]")
    x0 = np.array(x0, dtype=float)
    batches = make_batches(obj.n, batch_frac, shuffle=shuffle, seed=seed)
    m, p = len(batches), obj.p
    store = ModelStore(
        batches=batches,
        weights=np.array([len(b) for b in batches], dtype=float) / obj.n,
        anchors=np.tile(x0, (m, 1)),
        values=np.empty(m),
        grads=np.empty((m, p)),
        hessians=np.empty((m, p, p)),
        u=np.empty(m),
        v=np.empty((m, p)),
        wq=np.empty(m),
        sum_H=np.zeros((p, p)),
        sum_gv=np.zeros(p),
        sum_fuw=0.0,
        x=x0,
    )
    for i, batch in enumerate(batches):
        f, g, H, u, v, wq = _component(obj, x0, batch)
        store.values[i], store.grads[i], store.hessians[i] = f, g, H
        store.u[i], store.v[i], store.wq[i] = u, v, wq
        if counter is not None:
            counter.charge(len(batch), len(batch))
    w = store.weights
    store.sum_H = np.einsum("i,ijk->jk", w, store.hessians)
    store.sum_gv = w @ (store.grads - store.v)
    store.sum_fuw = float(w @ (store.values - store.u + 0.5 * store.wq))
    _refresh_aggregates(store)
    return store


def refresh_component(store, j, x_new, obj, counter=None):
    """Re-evaluate component ``j`` at ``x_new`` and update the aggregates."""
    x_new = np.array(x_new, dtype=float)
    batch = store.batches[j]
    f, g, H, u, v, wq = _component(obj, x_new, batch)
    w = store.weights[j]
    store.sum_H += w * (H - store.hessians[j])
    store.sum_gv += w * ((g - v) - (store.grads[j] - store.v[j]))
    store.sum_fuw += w * ((f - u + 0.5 * wq) - (store.values[j] - store.u[j] + 0.5 * store.wq[j]))
    store.values[j], store.grads[j], store.hessians[j] = f, g, H
    store.u[j], store.v[j], store.wq[j] = u, v, wq
    store.anchors[j] = x_new
    store.x = x_new
    if counter is not None:
        counter.charge(len(batch), len(batch))
    _refresh_aggregates(store)
    return store


def rebuild_aggregates(store, x=None):
    """Recompute ``(H, g, c)`` at ``x`` by summing the per-component models.

    Each component model ``f^i + (x - a_i)^T g^i + 1/2 (x - a_i)^T H^i (x - a_i)``
    is evaluated directly around its anchor ``a_i``, without the running sums.
    """
    x = store.x if x is None else np.asarray(x, dtype=float)
    w = store.weights
    diff = x - store.anchors
    Hd = np.einsum("ijk,ik->ij", store.hessians, diff)
    H = np.einsum("i,ijk->jk", w, store.hessians)
    g = w @ (store.grads + Hd)
    c = float(w @ (store.values + np.einsum("ij,ij->i", store.grads, diff) + 0.5 * np.einsum("ij,ij->i", diff, Hd)))
    return H, g, c


def model_value(store, d, sigma):
    """Cubic-regularized model at displacement ``d`` from ``store.x``."""
    d = np.asarray(d, dtype=float)
    nd = float(np.linalg.norm(d))
    return store.c + float(store.g @ d) + 0.5 * float(d @ (store.H @ d)) + sigma / 3.0 * nd**3


def singcubic_run(obj, x0, cfg=None, callback=None):
    """Minimize ``obj`` from ``x0``; return the final point and its trace.

    Stops once the effective-epoch budget (or ``cfg.max_iters``) is spent, or
    when ``||grad F(x_k)|| <= cfg.grad_tol`` at the end of a sweep over the
    components. ``callback(record, x, store)`` runs after every iteration.

    The full objective at trial points (needed for the acceptance ratio) and
    the gradient norm reported in the trace are monitoring quantities and
    are not charged as component evaluations.
    """
    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(cfg.seed)
    counter = WorkCounter(obj.n)
    trace = IterationTrace("singcubic")

    x = np.array(x0, dtype=float)
    store = init_store(obj, x, cfg.batch_frac, counter=counter)
    m = store.n_components
    f_cur, grad_cur, _ = obj.evaluate(x, hessian=False)
    if not math.isfinite(f_cur):
        raise DivergenceError("objective is not finite at the starting point", trace)
    gnorm = float(np.linalg.norm(grad_cur))
    sigma = cfg.sigma0
    lam = 0.0

    k = 0
    while True:
        if counter.epochs >= cfg.max_epochs or (cfg.max_iters is not None and k >= cfg.max_iters):
            break
        if k % m == 0 and gnorm <= cfg.grad_tol:
            break

        res = solve_cubic(
            store.g,
            store.H,
            sigma,
            lambda_warm=lam,
            tol=cfg.subproblem_tol,
            max_iters=cfg.subproblem_max_iters,
            rng=rng,
        )
        accepted = False
        if res.status is Status.MAX_ITERS:
            rho = REJECT
        else:
            lam = res.lam
            m_step = model_value(store, res.d, sigma)
            x_trial = x + res.d
            f_new, grad_new, _ = obj.evaluate(x_trial, hessian=False)
            if not math.isfinite(f_new):
                raise DivergenceError(f"non-finite objective at iteration {k + 1}", trace)
            rho = compute_rho(f_cur, f_new, m_step, store.c)
            if rho >= cfg.eta1:
                accepted = True
                x, f_cur = x_trial, f_new
                gnorm = float(np.linalg.norm(grad_new))
        sigma = update_sigma(rho, sigma, cfg)

        if cfg.sampling is Sampling.CYCLIC:
            j = store.cursor
            store.cursor = (store.cursor + 1) % m
        else:
            j = int(rng.integers(m))
        refresh_component(store, j, x, obj, counter)

        k += 1
        rec = counter.record(k, f_cur, gnorm, sigma, rho, accepted)
        trace.append(rec)
        if callback is not None:
            callback(rec, x, store)
        log.debug("iter %d F=%.10g |g|=%.3g sigma=%.3g rho=%.3g", k, f_cur, gnorm, sigma, rho)
    return x, trace
