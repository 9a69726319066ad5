"""Principal component analysis for small numeric feature matrices.

The covariance (divisor ``n - 1``) is diagonalized with cyclic Jacobi
rotations, which is exact and tuning-free for the few dozen features this is
meant for. Each component's largest-magnitude entry is made positive so the
output is unique up to ties in the spectrum.
"""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError

JACOBI_TOL = 1e-12
MAX_SWEEPS = 100


@dataclass(frozen=True, eq=False)
class DataMatrix:
    values: np.ndarray
    col_names: tuple = ()

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError("data matrix must be two-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("data matrix contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        names = tuple(self.col_names) or tuple(f"x{i}" for i in range(arr.shape[1]))
        if len(names) != arr.shape[1]:
            raise ValidationError(f"{len(names)} column names for {arr.shape[1]} columns")
        object.__setattr__(self, "col_names", names)

    @property
    def rows(self):
        return self.values.shape[0]

    @property
    def cols(self):
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class PcaResult:
    components: np.ndarray      # (cols, k), orthonormal columns
    eigenvalues: np.ndarray     # (k,), descending
    explained_ratio: np.ndarray  # (k,)
    mean: np.ndarray
    scale: np.ndarray           # per-feature divisor; ones unless standardized
    spectrum: np.ndarray = field(default=None)  # every eigenvalue, descending

    @property
    def k(self):
        return self.components.shape[1]


def _offdiag_norm(a):
    off = a - np.diag(np.diag(a))
    return math.sqrt(float(np.sum(off * off)))


def jacobi_eigh(matrix, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    """Eigenvalues and eigenvectors (as columns) of a symmetric matrix.

    Sweeps rotate away every off-diagonal entry in row-major order until the
    off-diagonal Frobenius norm drops below ``tol * max(1, ||A||_F)``.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0))):
        raise DomainError("jacobi_eigh needs a square symmetric matrix")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    limit = tol * max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        if _offdiag_norm(a) < limit:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = float(a[q, q] - a[p, p])
                if abs(diff) > 1e150 * abs(2.0 * apq):
                    # theta**2 (or theta itself) would overflow; first-order tangent
                    t = float(apq) / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J, applied to columns then rows
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        if _offdiag_norm(a) >= limit:
            raise RuntimeError("Jacobi iteration did not converge")
    return np.diag(a).copy(), v


def covariance(values):
    centered = values - values.mean(axis=0)
    return centered.T @ centered / (values.shape[0] - 1)


def _fix_signs(vectors):
    out = vectors.copy()
    for j in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, j])))
        if out[i, j] < 0:
            out[:, j] = -out[:, j]
    return out


def pca(data, k=None, standardize=False):
    if not isinstance(data, DataMatrix):
        data = DataMatrix(data)
    if data.rows < 2:
        raise ValidationError("PCA needs at least two observations")
    k = data.cols if k is None else k
    if not 1 <= k <= data.cols:
        raise DomainError(f"k must be in [1, {data.cols}], got {k}")
    x = data.values
    mean = x.mean(axis=0)
    scale = np.ones(data.cols)
    if standardize:
        std = x.std(axis=0, ddof=1)
        scale = np.where(std > 0, std, 1.0)
    evals, evecs = jacobi_eigh(covariance((x - mean) / scale))
    order = sorted(range(len(evals)), key=lambda i: (-evals[i], i))
    evals = np.maximum(evals[order], 0.0)
    evecs = _fix_signs(evecs[:, order])
    total = float(evals.sum())
    ratio = evals / total if total > 0 else np.zeros_like(evals)
    return PcaResult(
        components=evecs[:, :k],
        eigenvalues=evals[:k],
        explained_ratio=ratio[:k],
        mean=mean,
        scale=scale,
        spectrum=evals,
    )


def project(data, result):
    if not isinstance(data, DataMatrix):
        data = DataMatrix(data)
    if data.cols != result.components.shape[0]:
        raise DomainError(f"data has {data.cols} columns, PCA was fit on {result.components.shape[0]}")
    scores = ((data.values - result.mean) / result.scale) @ result.components
    return DataMatrix(scores, tuple(f"PC{i + 1}" for i in range(result.k)))


def inverse_project(scores, result):
    values = scores.values if isinstance(scores, DataMatrix) else np.asarray(scores, dtype=float)
    return values @ result.components.T * result.scale + result.mean


def read_matrix_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValidationError(f"{path}: empty CSV")
    header, body = rows[0], rows[1:]
    try:
        values = [[float(c) for c in r] for r in body]
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if any(len(r) != len(header) for r in values):
        raise ValidationError(f"{path}: ragged rows")
    return DataMatrix(np.array(values, dtype=float).reshape(len(values), len(header)), tuple(header))


def write_matrix_csv(matrix, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(matrix.col_names)
        for row in matrix.values.tolist():
            w.writerow([repr(v) for v in row])
