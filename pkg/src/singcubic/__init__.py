"""Incremental cubic-regularized Newton optimization for finite sums."""

from .baselines import BaselineConfig, Growth, saga_run, scr_run, sgd_run, tr_run
from .cubic_subproblem import (
    Status,
    SubproblemResult,
    cubic_model,
    gershgorin_bounds,
    hard_case_correction,
    lambda_interval,
    secular_phi,
    secular_update,
    solve_cubic,
)
from .data import Dataset, LibSVMParseError, load_libsvm, make_batches, normalize_labels, parse_libsvm, synth_quadratic
from .objective import (
    DerivativeReport,
    FiniteSumObjective,
    LogisticProblem,
    QuadraticSum,
    Regularizer,
    finite_diff_check,
    regularizer_eval,
)
from .optimizer import (
    REJECT,
    ModelStore,
    OptimizerConfig,
    Sampling,
    compute_rho,
    init_store,
    model_value,
    rebuild_aggregates,
    refresh_component,
    singcubic_run,
    update_sigma,
)
from .trace import DivergenceError, IterationRecord, IterationTrace, emit_csv, read_csv, write_csv
from .trust_region import solve_trust_region

__version__ = "0.1.0"
