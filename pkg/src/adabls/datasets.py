"""Dataset ingestion and seeded synthetic instances.

LIBSVM text files use 1-based feature indices; in memory every index is
0-based and rows live in a CSR matrix.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .errors import ParseError
from .trace import format_float

__all__ = [
    "SparseDataset",
    "parse_libsvm",
    "load_libsvm",
    "serialize_libsvm",
    "load_dense",
    "save_dense",
    "synth_logistic",
    "synth_linear_inverse",
    "synth_ratings",
    "DATA_DIR_ENV",
    "resolve_data_dir",
]

DATA_DIR_ENV = "ADABLS_DATA_DIR"

_LABELS = {-1.0: 0.0, 0.0: 0.0, 1.0: 1.0}


@dataclass(frozen=True)
class SparseDataset:
    X: sp.csr_matrix
    labels: np.ndarray

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    @property
    def rows(self):
        """Each row as a list of ``(index, value)`` pairs, 0-based."""
        X = self.X
        return [list(zip(X.indices[X.indptr[i]:X.indptr[i + 1]].tolist(),
                         X.data[X.indptr[i]:X.indptr[i + 1]].tolist()))
                for i in range(self.n)]

    def __eq__(self, other):
        if not isinstance(other, SparseDataset):
            return NotImplemented
        return (self.X.shape == other.X.shape
                and np.array_equal(self.X.indptr, other.X.indptr)
                and np.array_equal(self.X.indices, other.X.indices)
                and np.array_equal(self.X.data, other.X.data)
                and np.array_equal(self.labels, other.labels))


def parse_libsvm(stream, n_features=None):
    """Parse ``label idx:val idx:val ...`` lines.

    Labels -1 and +1 map to 0 and 1; 0 and 1 pass through. Blank lines and
    ``#`` comments are skipped. ``n_features`` widens the matrix beyond the
    largest index seen.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    data, indices, indptr, labels = [], [], [0], []
    width = 0
    for lineno, line in enumerate(stream, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            raw = float(tokens[0])
        except ValueError:
            raise ParseError(f"non-numeric label {tokens[0]!r}", lineno) from None
        if raw not in _LABELS:
            raise ParseError(f"label {tokens[0]!r} is not one of -1, 0, +1", lineno)
        labels.append(_LABELS[raw])
        last = 0
        for tok in tokens[1:]:
            idx, sep, val = tok.partition(":")
            if not sep:
                raise ParseError(f"malformed feature {tok!r}", lineno)
            try:
                j = int(idx)
                v = float(val)
            except ValueError:
                raise ParseError(f"malformed feature {tok!r}", lineno) from None
            if j < 1:
                raise ParseError(f"feature index {j} is not positive", lineno)
            if j <= last:
                raise ParseError(f"feature index {j} does not increase", lineno)
            last = j
            indices.append(j - 1)
            data.append(v)
        width = max(width, last)
        indptr.append(len(indices))
    if n_features is not None:
        if n_features < width:
            raise ValueError(f"n_features={n_features} but index {width} was seen")
        width = n_features
    X = sp.csr_matrix((np.array(data, dtype=float), np.array(indices, dtype=np.int64),
                       np.array(indptr, dtype=np.int64)), shape=(len(labels), width))
    return SparseDataset(X, np.array(labels, dtype=float))


def load_libsvm(path, n_features=None):
    with open(path) as fh:
        return parse_libsvm(fh, n_features)


def serialize_libsvm(dataset):
    out = []
    for label, row in zip(dataset.labels, dataset.rows):
        feats = " ".join(f"{j + 1}:{format_float(v)}" for j, v in row)
        out.append(f"{int(label)} {feats}".rstrip())
    return "\n".join(out) + ("\n" if out else "")


def load_dense(path):
    """Comma-delimited matrix, one row per line."""
    return np.loadtxt(path, delimiter=",", ndmin=2)


def save_dense(path, M):
    np.savetxt(path, np.asarray(M), delimiter=",", fmt="%.17g")


def resolve_data_dir(override=None):
    if override:
        return Path(override)
    env = os.environ.get(DATA_DIR_ENV)
    return Path(env) if env else Path.cwd() / "data"


def synth_logistic(n, d, seed, scale=1.0):
    """Gaussian features with labels drawn from ``sigmoid(a_i w*)``.

    ``w*`` has i.i.d. ``N(0, scale^2 / d)`` entries; ``scale=0`` plants
    ``w* = 0``. Returns ``(dataset, w_star)``.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, d))
    w = scale * rng.standard_normal(d) / math.sqrt(d)
    labels = (rng.random(n) < expit(A @ w)).astype(float)
    return SparseDataset(sp.csr_matrix(A), labels), w


def synth_linear_inverse(n, d, sparsity, noise, seed):
    """``y = A x* + e`` with ``A`` i.i.d. ``N(0, 1/n)``.

    ``x*`` has ``sparsity`` nonzero standard-normal entries at random
    positions and ``e`` is Gaussian with standard deviation ``noise``.
    Returns ``(A, y, x_star)``.
    """
    if not 0 <= sparsity <= d:
        raise ValueError("sparsity must lie in [0, d]")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, d)) / math.sqrt(n)
    x = np.zeros(d)
    support = rng.choice(d, size=sparsity, replace=False)
    x[support] = rng.standard_normal(sparsity)
    y = A @ x + noise * rng.standard_normal(n)
    return A, y, x


def synth_ratings(m, n, density, seed):
    """Sparse ratings-like matrix: integer ratings 1..5 at random cells, zeros elsewhere."""
    rng = np.random.default_rng(seed)
    mask = rng.random((m, n)) < density
    return np.where(mask, rng.integers(1, 6, size=(m, n)), 0).astype(float)
