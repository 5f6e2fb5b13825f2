"""Reference optimizers: SGD, SAGA, sub-sampled cubic regularization and TR.

All runners share the trace schema of :func:`singcubic.optimizer.singcubic_run`
and charge 1/n of an effective epoch per component gradient and per
component Hessian evaluation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .cubic_subproblem import DEFAULT_MAX_ITERS, DEFAULT_TOL, Status, cubic_model, solve_cubic
from .data import make_batches
from .optimizer import REJECT, compute_rho
from .trace import DivergenceError, IterationTrace, WorkCounter
from .trust_region import quadratic_model, solve_trust_region


class Growth(str, enum.Enum):
    CONSTANT = "constant"
    GEOMETRIC = "geometric"


DEFAULT_LR = {"sgd": 0.1, "saga": 0.01}


@dataclass
class BaselineConfig:
    lr: float | None = None  # None picks DEFAULT_LR for the method
    batch_frac: float = 0.001
    sigma0: float = 0.01
    radius0: float = 1.0
    eta1: float = 0.1
    eta2: float = 0.9
    increase: float = 2.0
    decrease: float = 2.0
    sigma_floor: float = 1e-16
    grad_sample_frac: float = 0.05
    hess_sample_frac: float = 0.05
    growth: Growth = Growth.CONSTANT
    growth_factor: float = 1.5
    sampling: str = "random"  # SAGA component order: "random" or "cyclic"
    max_epochs: float = 10.0
    max_iters: int | None = None
    grad_tol: float = 1e-6
    seed: int = 0
    subproblem_tol: float = DEFAULT_TOL
    subproblem_max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self):
        self.growth = Growth(self.growth)
        if self.lr is not None and self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if not 0 < self.batch_frac <= 1:
            raise ValueError("batch_frac must lie in (0, 1]")
        if not (0 < self.grad_sample_frac <= 1 and 0 < self.hess_sample_frac <= 1):
            raise ValueError("sample fractions must lie in (0, 1]")
        if self.sampling not in ("random", "cyclic"):
            raise ValueError("sampling must be 'random' or 'cyclic'")


def _budget_left(cfg, counter, k):
    if counter.epochs >= cfg.max_epochs:
        return False
    return cfg.max_iters is None or k < cfg.max_iters


def _monitor(obj, x, k, trace):
    f, g, _ = obj.evaluate(x, hessian=False)
    if not (math.isfinite(f) and np.all(np.isfinite(x))):
        raise DivergenceError(f"non-finite iterate or objective at iteration {k}", trace)
    return f, float(np.linalg.norm(g))


def sgd_run(obj, x0, cfg=None, callback=None):
    """Minibatch SGD with a constant step; batches drawn with replacement."""
    cfg = cfg or BaselineConfig()
    lr = cfg.lr if cfg.lr is not None else DEFAULT_LR["sgd"]
    rng = np.random.default_rng(cfg.seed)
    counter = WorkCounter(obj.n)
    trace = IterationTrace("sgd")
    b = max(1, math.ceil(cfg.batch_frac * obj.n))
    x = np.array(x0, dtype=float)
    _, gnorm = _monitor(obj, x, 0, trace)
    k = 0
    while _budget_left(cfg, counter, k) and gnorm > cfg.grad_tol:
        idx = rng.integers(0, obj.n, size=b)
        x = x - lr * obj.gradient(x, idx)
        counter.charge(grads=b)
        k += 1
        f, gnorm = _monitor(obj, x, k, trace)
        rec = counter.record(k, f, gnorm, None, None, True)
        trace.append(rec)
        if callback is not None:
            callback(rec, x)
    return x, trace


def saga_run(obj, x0, cfg=None, callback=None):
    """SAGA over the batch partition with a table of component gradients.

    The table starts with every component gradient at ``x0`` (one epoch of
    work). A step on component j is
    ``x -= lr * (m w_j (grad_j(x) - table_j) + mean(table))`` where ``w_j``
    is the batch's share of the samples and ``m`` the number of batches;
    for equal batches ``m w_j = 1`` and this is the textbook update.
    """
    cfg = cfg or BaselineConfig()
    lr = cfg.lr if cfg.lr is not None else DEFAULT_LR["saga"]
    rng = np.random.default_rng(cfg.seed)
    counter = WorkCounter(obj.n)
    trace = IterationTrace("saga")
    batches = make_batches(obj.n, cfg.batch_frac)
    m = len(batches)
    weights = np.array([len(b) for b in batches], dtype=float) / obj.n
    x = np.array(x0, dtype=float)
    table = np.empty((m, obj.p))
    for j, batch in enumerate(batches):
        table[j] = obj.gradient(x, batch)
        counter.charge(grads=len(batch))
    table_mean = weights @ table
    _, gnorm = _monitor(obj, x, 0, trace)
    k = 0
    while _budget_left(cfg, counter, k) and gnorm > cfg.grad_tol:
        j = k % m if cfg.sampling == "cyclic" else int(rng.integers(m))
        gj = obj.gradient(x, batches[j])
        counter.charge(grads=len(batches[j]))
        delta = gj - table[j]
        x = x - lr * (m * weights[j] * delta + table_mean)
        table[j] = gj
        table_mean = table_mean + weights[j] * delta
        k += 1
        f, gnorm = _monitor(obj, x, k, trace)
        rec = counter.record(k, f, gnorm, None, None, True)
        trace.append(rec)
        if callback is not None:
            callback(rec, x, table, table_mean)
    return x, trace


def _sample(rng, n, size):
    if size >= n:
        return None
    return np.sort(rng.choice(n, size=size, replace=False))


def scr_run(obj, x0, cfg=None, callback=None):
    """Sub-sampled adaptive cubic regularization.

    Gradient and Hessian are averaged over independent uniform samples of
    sizes ``grad_sample_frac * n`` and ``hess_sample_frac * n`` (growing by
    ``growth_factor`` per iteration under geometric growth). With both
    fractions equal to 1 this is adaptive cubic-regularized Newton with
    exact derivatives; no random numbers are drawn for sampling then.
    """
    cfg = cfg or BaselineConfig()
    rng = np.random.default_rng(cfg.seed)
    counter = WorkCounter(obj.n)
    trace = IterationTrace("scr")
    n = obj.n
    size_g = float(max(1, math.ceil(cfg.grad_sample_frac * n)))
    size_h = float(max(1, math.ceil(cfg.hess_sample_frac * n)))

    x = np.array(x0, dtype=float)
    f_cur, gfull, _ = obj.evaluate(x, hessian=False)
    if not math.isfinite(f_cur):
        raise DivergenceError("objective is not finite at the starting point", trace)
    gnorm = float(np.linalg.norm(gfull))
    sigma = cfg.sigma0
    lam = 0.0
    k = 0
    while _budget_left(cfg, counter, k) and gnorm > cfg.grad_tol:
        sg, sh = min(n, math.ceil(size_g)), min(n, math.ceil(size_h))
        S_g, S_h = _sample(rng, n, sg), _sample(rng, n, sh)
        if S_g is None and S_h is None:
            _, g, H = obj.evaluate(x, hessian=True)
        else:
            g = obj.gradient(x, S_g)
            H = obj.hessian(x, S_h)
        counter.charge(sg, sh)

        res = solve_cubic(g, H, sigma, lam, cfg.subproblem_tol, cfg.subproblem_max_iters, rng)
        accepted = False
        if res.status is Status.MAX_ITERS:
            rho = REJECT
        else:
            lam = res.lam
            m_step = f_cur + cubic_model(g, H, sigma, res.d)
            x_trial = x + res.d
            f_new, g_new, _ = obj.evaluate(x_trial, hessian=False)
            if not math.isfinite(f_new):
                raise DivergenceError(f"non-finite objective at iteration {k + 1}", trace)
            rho = compute_rho(f_cur, f_new, m_step)
            if rho >= cfg.eta1:
                accepted = True
                x, f_cur = x_trial, f_new
                gnorm = float(np.linalg.norm(g_new))
        if rho >= cfg.eta2:
            sigma = max(sigma / cfg.decrease, cfg.sigma_floor)
        elif rho < cfg.eta1:
            sigma = cfg.increase * sigma

        if cfg.growth is Growth.GEOMETRIC:
            size_g = min(n, size_g * cfg.growth_factor)
            size_h = min(n, size_h * cfg.growth_factor)
        k += 1
        rec = counter.record(k, f_cur, gnorm, sigma, rho, accepted)
        trace.append(rec)
        if callback is not None:
            callback(rec, x)
    return x, trace


def tr_run(obj, x0, cfg=None, callback=None):
    """Trust-region Newton with exact gradient and Hessian.

    The radius doubles after a very successful step (rho >= eta2) and halves
    after an unsuccessful one (rho < eta1). Derivatives are re-evaluated only
    after the iterate moves. The trace ``sigma`` column holds the radius.
    """
    cfg = cfg or BaselineConfig()
    counter = WorkCounter(obj.n)
    trace = IterationTrace("tr")
    x = np.array(x0, dtype=float)
    radius = cfg.radius0
    f_cur, g, H = obj.evaluate(x, hessian=True)
    counter.charge(obj.n, obj.n)
    if not math.isfinite(f_cur):
        raise DivergenceError("objective is not finite at the starting point", trace)
    gnorm = float(np.linalg.norm(g))
    k = 0
    while _budget_left(cfg, counter, k) and gnorm > cfg.grad_tol:
        res = solve_trust_region(g, H, radius)
        pred = -quadratic_model(g, H, res.d)
        x_trial = x + res.d
        f_new = obj.value(x_trial)
        if not math.isfinite(f_new):
            raise DivergenceError(f"non-finite objective at iteration {k + 1}", trace)
        rho = (f_cur - f_new) / pred if pred > 1e-14 * max(1.0, abs(f_cur)) else REJECT
        accepted = rho >= cfg.eta1
        if rho >= cfg.eta2:
            radius *= cfg.increase
        elif rho < cfg.eta1:
            radius /= cfg.decrease
        k += 1
        if accepted:
            x = x_trial
            f_cur, g, H = obj.evaluate(x, hessian=True)
            counter.charge(obj.n, obj.n)
            gnorm = float(np.linalg.norm(g))
        rec = counter.record(k, f_cur, gnorm, radius, rho, accepted)
        trace.append(rec)
        if callback is not None:
            callback(rec, x)
    return x, trace
