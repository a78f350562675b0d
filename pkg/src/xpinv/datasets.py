"""Dataset ingestion: Boston housing CSV, MNIST IDX files, synthetic problems.

Bundled copies live under ``data/`` at the repository root: the housing CSV
(rows ordered so the first 333 form the training split) and MNIST in the
canonical IDX ubyte format (training file truncated to the first 3,000
samples, full 10,000-digit test file).
"""

from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    InsufficientSamplesError,
    LabelOutOfRangeError,
    ParseError,
    SchemaMismatchError,
    TruncatedFileError,
)
from .learn import RegressionProblem
from .mapping import build_design_matrix

BOSTON_COLUMNS = ("CRIM", "ZN", "INDUS", "CHAS", "NOX", "RM", "AGE", "DIS",
                  "RAD", "TAX", "PTRATIO", "B", "LSTAT", "MEDV")
BOSTON_ROWS = 506
BOSTON_TRAIN = 333

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def default_data_dir():
    """data/ directory at the repository root (next to src/)."""
    return Path(__file__).resolve().parents[2] / "data"


@dataclass(frozen=True)
class BostonDataset:
    """506 houses, 13 attributes, prices in dollars.

    The first ``n_train`` rows (333 by default) are the training split.
    """

    features: np.ndarray
    prices: np.ndarray
    n_train: int = BOSTON_TRAIN

    def __post_init__(self):
        if self.features.shape != (BOSTON_ROWS, 13) or self.prices.shape != (BOSTON_ROWS,):
            raise SchemaMismatchError(
                f"expected {BOSTON_ROWS} rows x 13 attributes, got {self.features.shape}"
            )
        if not 0 < self.n_train < BOSTON_ROWS:
            raise ValueError("n_train must split the dataset in two nonempty parts")

    @property
    def train_indices(self):
        return np.arange(self.n_train)

    @property
    def test_indices(self):
        return np.arange(self.n_train, BOSTON_ROWS)

    def design_matrix(self, indices=None):
        """[1, attributes] rows for the given indices (all rows by default)."""
        idx = np.arange(BOSTON_ROWS) if indices is None else indices
        return np.hstack([np.ones((len(idx), 1)), self.features[idx]])

    def split(self):
        """(X_train, y_train, X_test, y_test) design matrices and prices."""
        tr, te = self.train_indices, self.test_indices
        return (self.design_matrix(tr), self.prices[tr],
                self.design_matrix(te), self.prices[te])


def load_boston(path, n_train=BOSTON_TRAIN):
    """Parse the 14-column housing CSV; prices convert from k$ to dollars.

    The header row is optional (auto-detected). Any wrong row/column count
    raises SchemaMismatchError; a bad field raises ParseError with its
    1-based row and column.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    rows = []
    with open(path, newline="") as f:
        for lineno, rec in enumerate(csv.reader(f), start=1):
            if not rec:
                continue
            if lineno == 1 and any(_not_numeric(v) for v in rec):
                if len(rec) != 14:
                    raise SchemaMismatchError(
                        f"header has {len(rec)} columns, expected 14"
                    )
                continue
            if len(rec) != 14:
                raise SchemaMismatchError(
                    f"row {lineno} has {len(rec)} columns, expected 14"
                )
            vals = []
            for colno, v in enumerate(rec, start=1):
                try:
                    vals.append(float(v))
                except ValueError:
                    raise ParseError(
                        f"cannot parse {v!r} at row {lineno}, column {colno}",
                        row=lineno, col=colno,
                    ) from None
            rows.append(vals)
    if len(rows) != BOSTON_ROWS:
        raise SchemaMismatchError(f"expected {BOSTON_ROWS} data rows, got {len(rows)}")
    arr = np.asarray(rows, dtype=np.float64)
    return BostonDataset(features=arr[:, :13], prices=arr[:, 13] * 1000.0,
                         n_train=n_train)


def save_boston(dataset: BostonDataset, path):
    """Write the dataset back to the 14-column CSV schema (prices in k$)."""
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(BOSTON_COLUMNS)
        for feats, price in zip(dataset.features, dataset.prices):
            wr.writerow([repr(v) for v in feats] + [repr(price / 1000.0)])


def _not_numeric(s):
    try:
        float(s)
        return False
    except ValueError:
        return True


@dataclass(frozen=True)
class MnistSubset:
    """Down-sampled digit images: rows of length 196 in [0, 1], labels 0-9."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.images.ndim != 2 or self.images.shape[0] != self.labels.shape[0]:
            raise SchemaMismatchError("images and labels disagree on sample count")
        if np.any(self.images < 0.0) or np.any(self.images > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")


def _read_idx(path, expect_magic, n_dims):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    with open(path, "rb") as f:
        gzipped = f.read(2) == b"\x1f\x8b"
    with (gzip.open if gzipped else open)(path, "rb") as f:
        raw = f.read()
    header = 4 * (1 + n_dims)
    if len(raw) < header:
        raise BadMagicError(f"{path.name}: file shorter than the IDX header")
    fields = struct.unpack(">" + "I" * (1 + n_dims), raw[:header])
    if fields[0] != expect_magic:
        raise BadMagicError(
            f"{path.name}: magic 0x{fields[0]:08x}, expected 0x{expect_magic:08x}"
        )
    dims = fields[1:]
    need = int(np.prod(dims))
    body = np.frombuffer(raw, np.uint8, offset=header)
    if body.size < need:
        raise TruncatedFileError(
            f"{path.name}: expected {need} payload bytes, got {body.size}"
        )
    return body[:need].reshape(dims)


def downsample_2x2(images):
    """Mean-pool 2x2 blocks; preserves the image mean exactly."""
    n, r, c = images.shape
    if r % 2 or c % 2:
        raise SchemaMismatchError(f"image size {r}x{c} is not 2x2 poolable")
    return images.reshape(n, r // 2, 2, c // 2, 2).mean(axis=(2, 4))


def load_mnist(images_path, labels_path, limit=None):
    """Decode IDX ubyte images and labels into a down-sampled subset.

    Pixels normalize to [0, 1] and 28x28 images pool to 14x14 (flattened
    row-major to length 196). ``limit`` keeps only the first samples, e.g.
    the 3,000 used for training.
    """
    imgs = _read_idx(images_path, IDX_IMAGES_MAGIC, 3)
    labels = _read_idx(labels_path, IDX_LABELS_MAGIC, 1)
    if imgs.shape[0] != labels.shape[0]:
        raise SchemaMismatchError(
            f"{imgs.shape[0]} images but {labels.shape[0]} labels"
        )
    if np.any(labels > 9):
        raise LabelOutOfRangeError(
            f"label {int(labels[np.argmax(labels > 9)])} outside 0-9"
        )
    if limit is not None:
        imgs, labels = imgs[:limit], labels[:limit]
    small = downsample_2x2(imgs.astype(np.float64) / 255.0)
    return MnistSubset(images=small.reshape(len(small), -1),
                       labels=labels.astype(np.int64))


def synth_linear(n, w_true, noise_sd=0.0, seed=0):
    """Random univariate polynomial regression problem with known weights.

    Abscissas are uniform on [0, 5]; the design matrix is [1, x, ..., x^d]
    with d = len(w_true) - 1; targets are X w_true plus Gaussian noise.
    """
    w_true = np.asarray(w_true, dtype=np.float64)
    if n <= len(w_true):
        raise InsufficientSamplesError(
            f"need more than {len(w_true)} samples, got {n}"
        )
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, 5.0, n)
    X = build_design_matrix(xs, degree=max(1, len(w_true) - 1), include_bias=True)
    y = X @ w_true + rng.normal(0.0, noise_sd, n) if noise_sd > 0 else X @ w_true
    return RegressionProblem(X=X, y=y)


def synth_blobs(n_per_class=10, separation=3.0, spread=0.4, seed=0):
    """Two linearly separable Gaussian blobs in the positive quadrant.

    Returns (points, labels) with points of shape (2 n, 2); blob centers sit
    ``separation`` apart along a random direction, ``spread`` standard
    deviation each, shifted so all coordinates stay positive.
    """
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    d = np.array([np.cos(theta), np.sin(theta)])
    c0 = rng.uniform(1.0, 3.0, 2)
    c1 = c0 + separation * d
    p0 = c0 + rng.normal(0.0, spread, (n_per_class, 2))
    p1 = c1 + rng.normal(0.0, spread, (n_per_class, 2))
    pts = np.vstack([p0, p1])
    pts -= np.minimum(pts.min(axis=0), 0.0)[None, :]
    labels = np.concatenate([np.zeros(n_per_class, int), np.ones(n_per_class, int)])
    return pts, labels
