"""Experiment protocol: build a problem, run one optimizer, report, compare."""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass

import numpy as np

from .baselines import BaselineConfig, saga_run, scr_run, sgd_run, tr_run
from .data import load_libsvm, normalize_labels, parse_label_mapping, scale_features, synth_quadratic
from .objective import LogisticProblem, Regularizer
from .optimizer import OptimizerConfig, singcubic_run
from .trace import DivergenceError, read_csv, write_csv

log = logging.getLogger(__name__)

ALGORITHMS = ("singcubic", "scr", "tr", "sgd", "saga")
PROBLEMS = ("convex", "nonconvex", "quadratic")


@dataclass
class ExperimentConfig:
    algo: str
    problem: str = "convex"
    dataset: str | None = None
    fmt: str = "libsvm"
    labels: str | None = None
    n_features: int | None = None
    scale_features: bool = False
    alpha: float = 1e-3
    beta: float = 1.0
    synth_n: int = 50
    synth_p: int = 10
    epochs: float = 10.0
    batch_frac: float = 0.001
    sigma0: float = 0.01
    lr: float | None = None
    eps_tol: float = 0.1
    grad_tol: float = 1e-6
    sample_frac: float = 0.05
    hess_sample_frac: float | None = None
    growth: str = "constant"
    sampling: str = "cyclic"
    seed: int = 1
    out: str | None = None
    record_time: bool = False

    def validate(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}; choose from {', '.join(ALGORITHMS)}")
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}; choose from {', '.join(PROBLEMS)}")
        if self.problem != "quadratic":
            if not self.dataset:
                raise ValueError(f"problem {self.problem!r} needs --dataset")
            if not os.path.exists(self.dataset):
                raise ValueError(f"dataset not found: {self.dataset}")
            if self.fmt != "libsvm":
                raise ValueError(f"unsupported format {self.fmt!r}")
        if self.epochs <= 0:
            raise ValueError("epoch budget must be positive")


def build_problem(cfg):
    """Return ``(objective, x0, minimizer_or_None)`` for an experiment."""
    if cfg.problem == "quadratic":
        obj, xstar = synth_quadratic(cfg.synth_n, cfg.synth_p, seed=cfg.seed)
        return obj, np.zeros(obj.p), xstar
    ds = load_libsvm(cfg.dataset, n_features=cfg.n_features)
    mapping = parse_label_mapping(cfg.labels) if cfg.labels else None
    ds = normalize_labels(ds, mapping)
    if cfg.scale_features:
        ds = scale_features(ds)
    kind = Regularizer.L2 if cfg.problem == "convex" else Regularizer.RATIONAL
    obj = LogisticProblem(ds.X, ds.y, kind=kind, alpha=cfg.alpha, beta=cfg.beta)
    return obj, np.zeros(obj.p), None


def run_algorithm(cfg, obj, x0, callback=None):
    if cfg.algo == "singcubic":
        ocfg = OptimizerConfig(
            sigma0=cfg.sigma0,
            grad_tol=cfg.grad_tol,
            batch_frac=cfg.batch_frac,
            max_epochs=cfg.epochs,
            sampling=cfg.sampling,
            seed=cfg.seed,
            subproblem_tol=cfg.eps_tol,
        )
        return singcubic_run(obj, x0, ocfg, callback)
    bcfg = BaselineConfig(
        lr=cfg.lr,
        batch_frac=cfg.batch_frac,
        sigma0=cfg.sigma0,
        grad_sample_frac=cfg.sample_frac,
        hess_sample_frac=cfg.hess_sample_frac if cfg.hess_sample_frac is not None else cfg.sample_frac,
        growth=cfg.growth,
        max_epochs=cfg.epochs,
        grad_tol=cfg.grad_tol,
        seed=cfg.seed,
        subproblem_tol=cfg.eps_tol,
    )
    runner = {"scr": scr_run, "tr": tr_run, "sgd": sgd_run, "saga": saga_run}[cfg.algo]
    return runner(obj, x0, bcfg, callback)


def run_experiment(cfg):
    """Run one configured experiment.

    Writes the trace CSV to ``cfg.out`` (if set) and returns
    ``(trace, summary)``. On divergence the partial trace is written before
    the :class:`DivergenceError` propagates.
    """
    cfg.validate()
    obj, x0, xstar = build_problem(cfg)
    log.info("%s on %s problem: n=%d p=%d", cfg.algo, cfg.problem, obj.n, obj.p)
    t0 = time.perf_counter()
    try:
        x, trace = run_algorithm(cfg, obj, x0)
    except DivergenceError as err:
        if cfg.out and err.trace is not None:
            write_csv(err.trace, cfg.out, include_time=cfg.record_time)
        raise
    wall = time.perf_counter() - t0
    if cfg.out:
        write_csv(trace, cfg.out, include_time=cfg.record_time)

    f, g, H = obj.evaluate(x, hessian=True)
    summary = {
        "algorithm": cfg.algo,
        "problem": cfg.problem,
        "n": obj.n,
        "p": obj.p,
        "iterations": len(trace),
        "effective_epochs": trace[-1].effective_epochs if len(trace) else 0.0,
        "final_objective": f,
        "grad_norm": float(np.linalg.norm(g)),
        "min_hessian_eigenvalue": float(np.linalg.eigvalsh(H)[0]),
        "wall_time_s": wall,
    }
    if xstar is not None:
        summary["distance_to_minimizer"] = float(np.linalg.norm(x - xstar))
    return trace, summary


def _step_values(epochs, values, grid):
    # value of the last record at or before each grid point; None before the first
    epochs = np.asarray(epochs, dtype=float)
    pos = np.searchsorted(epochs, grid, side="right") - 1
    return [values[i] if i >= 0 else None for i in pos]


def compare_runs(paths, labels=None, points=101):
    """Align several trace files on a common effective-epoch grid.

    Returns ``(grid, columns, best)`` where ``columns[label]`` lists the
    objective in effect at each grid point and ``best[label]`` is the lowest
    objective in that trace.
    """
    if len(paths) < 2:
        raise ValueError("compare_runs needs at least two trace files")
    if labels is None:
        labels = []
        for path in paths:
            stem = os.path.splitext(os.path.basename(str(path)))[0]
            label, k = stem, 2
            while label in labels:
                label, k = f"{stem}_{k}", k + 1
            labels.append(label)
    traces = [read_csv(p) for p in paths]
    last = max((t["effective_epochs"][-1] for t in traces if t["effective_epochs"]), default=0.0)
    grid = np.linspace(0.0, last, points)
    columns, best = {}, {}
    for label, t in zip(labels, traces):
        columns[label] = _step_values(t["effective_epochs"], t["objective"], grid)
        best[label] = min(t["objective"]) if t["objective"] else None
    return grid, columns, best


def format_comparison(grid, columns, best):
    def fmt(v):
        return "" if v is None else format(v, ".17g")

    labels = list(columns)
    lines = [",".join(["effective_epochs", *labels])]
    for i, e in enumerate(grid):
        lines.append(",".join([fmt(float(e)), *(fmt(columns[lb][i]) for lb in labels)]))
    lines.append(",".join(["best", *(fmt(best[lb]) for lb in labels)]))
    return "\n".join(lines) + "\n"
