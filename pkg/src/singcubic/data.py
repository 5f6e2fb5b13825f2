"""Data sets in LIBSVM sparse text format, batching and synthetic problems."""

from __future__ import annotations

import gzip
import io
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .objective import QuadraticSum

# label maps for the two benchmark sets: a9a uses {-1, +1}, covertype {1, 2}
A9A_LABELS = {-1.0: 0, 1.0: 1}
COVTYPE_LABELS = {1.0: 0, 2.0: 1}


class LibSVMParseError(ValueError):
    def __init__(self, message, line, column=None):
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Dataset:
    """Sparse feature rows (CSR, 0-based columns) with one label per row."""

    X: sp.csr_matrix
    y: np.ndarray
    source: str = ""

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]


def _token_column(line, token_index):
    # 1-based character column where the token_index-th whitespace token starts
    pos = 0
    for k, tok in enumerate(line.split()):
        pos = line.index(tok, pos)
        if k == token_index:
            return pos + 1
        pos += len(tok)
    return None


def parse_libsvm(stream, n_features=None, source=""):
    """Parse ``label idx:val idx:val ...`` lines into a :class:`Dataset`.

    Indices are 1-based and strictly ascending within a line. Blank lines
    and ``#`` comments are skipped. The feature count is the largest index
    seen unless ``n_features`` is given, in which case larger indices are
    an error.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    labels = []
    indptr = [0]
    indices = []
    values = []
    max_idx = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0]
        parts = line.split()
        if not parts:
            continue
        try:
            label = float(parts[0])
        except ValueError:
            raise LibSVMParseError(f"bad label {parts[0]!r}", lineno, _token_column(line, 0)) from None
        if not math.isfinite(label):
            raise LibSVMParseError(f"bad label {parts[0]!r}", lineno, _token_column(line, 0))
        prev = 0
        for k, tok in enumerate(parts[1:], start=1):
            i, sep, v = tok.partition(":")
            try:
                if not sep:
                    raise ValueError
                idx = int(i)
                val = float(v)
            except ValueError:
                raise LibSVMParseError(f"malformed token {tok!r}", lineno, _token_column(line, k)) from None
            if not math.isfinite(val):
                raise LibSVMParseError(f"non-finite value in {tok!r}", lineno, _token_column(line, k))
            if idx <= prev:
                raise LibSVMParseError(
                    f"index {idx} is not ascending (previous {prev})" if idx > 0 else f"index {idx} must be >= 1",
                    lineno,
                    _token_column(line, k),
                )
            prev = idx
            indices.append(idx - 1)
            values.append(val)
        max_idx = max(max_idx, prev)
        labels.append(label)
        indptr.append(len(indices))
    if not labels:
        raise LibSVMParseError("no data rows", 1)
    p = max_idx
    if n_features is not None:
        if max_idx > n_features:
            raise ValueError(f"feature index {max_idx} exceeds n_features={n_features}")
        p = n_features
    X = sp.csr_matrix(
        (np.asarray(values, dtype=float), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(labels), p),
    )
    return Dataset(X, np.asarray(labels, dtype=float), source)


def load_libsvm(path, n_features=None):
    """Read a LIBSVM file; names ending in ``.gz`` are decompressed."""
    path = str(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        return parse_libsvm(fh, n_features=n_features, source=path)


def _fmt_number(x):
    return str(int(x)) if float(x).is_integer() else format(float(x), ".17g")


def to_libsvm(ds):
    """Serialize a data set back to LIBSVM text."""
    X = ds.X.tocsr()
    out = []
    for r in range(X.shape[0]):
        lo, hi = X.indptr[r], X.indptr[r + 1]
        toks = [_fmt_number(ds.y[r])]
        toks += [f"{j + 1}:{_fmt_number(v)}" for j, v in zip(X.indices[lo:hi], X.data[lo:hi])]
        out.append(" ".join(toks))
    return "\n".join(out) + "\n"


def parse_label_mapping(text):
    """``"-1:0,1:1"`` -> ``{-1.0: 0, 1.0: 1}``."""
    mapping = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        src, sep, dst = item.rpartition(":")
        if not sep:
            raise ValueError(f"bad label mapping entry {item!r}; expected 'from:to'")
        mapping[float(src)] = int(float(dst))
    return mapping


def infer_label_mapping(y):
    """Identity for {0,1}, the a9a map for {-1,1}, the covertype map for {1,2}."""
    values = set(np.unique(y).tolist())
    for known in ({0.0: 0, 1.0: 1}, A9A_LABELS, COVTYPE_LABELS):
        if values <= set(known):
            return dict(known)
    raise ValueError(f"cannot infer a binary label mapping for values {sorted(values)}")


def normalize_labels(ds, mapping=None):
    """Remap labels into {0, 1}; every label value must be covered."""
    if mapping is None:
        mapping = infer_label_mapping(ds.y)
    mapping = {float(k): int(v) for k, v in mapping.items()}
    if any(v not in (0, 1) for v in mapping.values()):
        raise ValueError("label mapping targets must be 0 or 1")
    unmapped = sorted(set(np.unique(ds.y).tolist()) - set(mapping))
    if unmapped:
        raise ValueError(f"labels without a mapping: {unmapped}")
    y = np.array([mapping[v] for v in ds.y.tolist()], dtype=float)
    return replace(ds, y=y)


def scale_features(ds):
    """Divide every column by its largest absolute entry (zero columns kept)."""
    X = ds.X.tocsc(copy=True)
    colmax = np.asarray(abs(X).max(axis=0).todense()).ravel()
    colmax[colmax == 0] = 1.0
    X = (X @ sp.diags(1.0 / colmax)).tocsr()
    return replace(ds, X=X)


def make_batches(n, batch_frac, shuffle=False, seed=None):
    """Partition ``range(n)`` into contiguous batches of ``ceil(batch_frac*n)``.

    The last batch may be smaller. With ``shuffle`` the indices are permuted
    by a generator seeded with ``seed`` before partitioning.
    """
    if not 0 < batch_frac <= 1:
        raise ValueError("batch_frac must lie in (0, 1]")
    b = max(1, math.ceil(batch_frac * n))
    order = np.arange(n)
    if shuffle:
        order = np.random.default_rng(seed).permutation(n)
    return [order[i : i + b] for i in range(0, n, b)]


def synth_quadratic(n, p, seed=0):
    """Random ``f_i(x) = 0.5 ||x - a_i||^2`` and its minimizer ``mean(a_i)``."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    A = np.random.default_rng(seed).standard_normal((n, p))
    return QuadraticSum(A), A.mean(axis=0)
