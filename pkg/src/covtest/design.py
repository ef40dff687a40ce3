"""Design matrices, active sets and the linear algebra the path needs.

Everything downstream consumes either a :class:`DesignMatrix` or a plain
2-D array; :func:`as_array` accepts both.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import InputError, SingularityError

DEFAULT_RANK_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DesignMatrix:
    """An ``n x p`` predictor matrix plus the preprocessing applied to it.

    Parameters
    ----------
    values : ndarray, shape (n, p)
        The (possibly centered / standardized) predictors.
    column_means : ndarray, shape (p,)
        Means removed by :func:`center`; zeros when uncentered.
    response_mean : float
        Mean removed from the response by :func:`center`.
    column_scales : ndarray, shape (p,)
        Norms divided out by :func:`standardize`; ones otherwise.
    """

    values: np.ndarray
    column_means: np.ndarray = None
    response_mean: float = 0.0
    centered: bool = False
    standardized: bool = False
    column_scales: np.ndarray = None
    names: tuple = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InputError(f"design must be 2-D, got shape {values.shape}")
        n, p = values.shape
        if n < 2 or p < 1:
            raise InputError(f"design needs n >= 2 and p >= 1, got {values.shape}")
        _check_finite(values, "X")
        object.__setattr__(self, "values", _frozen(values))
        means = np.zeros(p) if self.column_means is None else self.column_means
        scales = np.ones(p) if self.column_scales is None else self.column_scales
        object.__setattr__(self, "column_means", _frozen(means))
        object.__setattr__(self, "column_scales", _frozen(scales))
        names = self.names
        if names is None:
            names = tuple(f"x{j}" for j in range(p))
        if len(names) != p:
            raise InputError(f"{len(names)} names for {p} columns")
        object.__setattr__(self, "names", tuple(names))

    @property
    def shape(self):
        return self.values.shape

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    def to_original_scale(self, beta):
        """Map coefficients fitted on standardized columns back to raw units."""
        return np.asarray(beta, dtype=float) / self.column_scales


@dataclass(frozen=True)
class ActiveSet:
    """Ordered active indices with the sign of each coefficient."""

    indices: tuple = ()
    signs: tuple = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        sg = tuple(int(s) for s in self.signs)
        if len(idx) != len(sg):
            raise InputError("indices and signs differ in length")
        if len(set(idx)) != len(idx):
            raise InputError(f"duplicate active indices {idx}")
        if any(s not in (-1, 1) for s in sg):
            raise InputError(f"signs must be +-1, got {sg}")
        if any(i < 0 for i in idx):
            raise InputError(f"negative active index in {idx}")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "signs", sg)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, j):
        return j in self.indices

    @property
    def sign_vector(self):
        return np.asarray(self.signs, dtype=float)

    def add(self, j, s):
        return ActiveSet(self.indices + (j,), self.signs + (s,))

    def remove(self, j):
        pos = self.indices.index(j)
        return ActiveSet(self.indices[:pos] + self.indices[pos + 1:],
                         self.signs[:pos] + self.signs[pos + 1:])

    def sign_of(self, j):
        return self.signs[self.indices.index(j)]


def as_array(X):
    """Return the raw ``ndarray`` behind ``X``."""
    if isinstance(X, DesignMatrix):
        return X.values
    return np.asarray(X, dtype=float)


def _check_finite(a, label):
    bad = np.argwhere(~np.isfinite(a))
    if bad.size:
        where = tuple(int(i) for i in bad[0])
        raise InputError(f"non-finite entry in {label} at index {where}")


def center(X, y):
    """Remove column means from ``X`` and the mean from ``y``.

    Returns
    -------
    design : DesignMatrix
        Centered design with the removed means recorded.
    y_centered : ndarray
    """
    Xa = np.asarray(as_array(X), dtype=float)
    y = np.asarray(y, dtype=float)
    if Xa.ndim != 2:
        raise InputError(f"X must be 2-D, got shape {Xa.shape}")
    if y.shape != (Xa.shape[0],):
        raise InputError(f"y has shape {y.shape}, expected ({Xa.shape[0]},)")
    if Xa.shape[0] < 2:
        raise InputError("need at least two observations")
    _check_finite(Xa, "X")
    _check_finite(y, "y")
    means = Xa.mean(axis=0)
    ybar = float(y.mean())
    prev = X if isinstance(X, DesignMatrix) else None
    design = DesignMatrix(
        Xa - means,
        column_means=means if prev is None else prev.column_means + means,
        response_mean=ybar,
        centered=True,
        standardized=False if prev is None else prev.standardized,
        column_scales=None if prev is None else prev.column_scales,
        names=None if prev is None else prev.names,
    )
    return design, y - ybar


def standardize(X):
    """Scale every column to unit Euclidean norm."""
    dm = X if isinstance(X, DesignMatrix) else DesignMatrix(X)
    norms = np.linalg.norm(dm.values, axis=0)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise InputError(f"column {int(zero[0])} is identically zero")
    return DesignMatrix(
        dm.values / norms,
        column_means=dm.column_means,
        response_mean=dm.response_mean,
        centered=dm.centered,
        standardized=True,
        column_scales=dm.column_scales * norms,
        names=dm.names,
    )


def _active_qr(X, A):
    Xa = as_array(X)
    idx = list(A.indices if isinstance(A, ActiveSet) else A)
    XA = Xa[:, idx]
    Q, R = np.linalg.qr(XA)
    if idx:
        d = np.abs(np.diag(R))
        bad = np.flatnonzero(d <= DEFAULT_RANK_TOL * max(d.max(), np.finfo(float).tiny))
        if bad.size:
            raise SingularityError(
                f"active columns are rank deficient at column {idx[bad[0]]}",
                index=idx[bad[0]])
    return Q, R


def project_residual(X, A, v):
    """Return ``(I - P_A) v``, the part of ``v`` orthogonal to ``span(X_A)``."""
    v = np.asarray(v, dtype=float)
    if len(A) == 0:
        return v.copy()
    Q, _ = _active_qr(X, A)
    return v - Q @ (Q.T @ v)


def pinv_transpose_apply(X, A):
    """Return ``(X_A^T)^+ s_A = X_A (X_A^T X_A)^{-1} s_A``."""
    if len(A) == 0:
        return np.zeros(as_array(X).shape[0])
    Q, R = _active_qr(X, A)
    z = solve_triangular(R, A.sign_vector, trans="T")
    return Q @ z


def rank_guard(X, A, tol=DEFAULT_RANK_TOL):
    """True iff ``X_A`` has full column rank at relative tolerance ``tol``."""
    idx = list(A.indices if isinstance(A, ActiveSet) else A)
    if not idx:
        return True
    Xa = as_array(X)
    if len(idx) > Xa.shape[0]:
        return False
    sv = np.linalg.svd(Xa[:, idx], compute_uv=False)
    return bool(sv[-1] > tol * sv[0])


class UpdatableQR:
    """Thin QR factorization ``X_A = Q R`` with column append and delete.

    Columns are appended with two passes of classical Gram-Schmidt and
    removed with Givens rotations, so each update costs ``O(n |A|)``.
    """

    def __init__(self, n, tol=DEFAULT_RANK_TOL):
        self.n = n
        self.tol = tol
        self.Q = np.empty((n, 0))
        self.R = np.empty((0, 0))

    @property
    def size(self):
        return self.R.shape[0]

    def append(self, x, index=None):
        x = np.asarray(x, dtype=float)
        m = self.size
        xnorm = np.linalg.norm(x)
        if m >= self.n or xnorm == 0.0:
            raise SingularityError(f"cannot add column {index}: rank limit", index=index)
        r = self.Q.T @ x
        q = x - self.Q @ r
        r2 = self.Q.T @ q
        q -= self.Q @ r2
        r += r2
        rho = np.linalg.norm(q)
        scale = max(xnorm, np.abs(np.diag(self.R)).max() if m else 0.0)
        if rho <= self.tol * scale:
            raise SingularityError(
                f"column {index} is numerically dependent on the active set "
                f"(residual {rho:.3g} vs scale {scale:.3g})", index=index)
        R = np.zeros((m + 1, m + 1))
        R[:m, :m] = self.R
        R[:m, m] = r
        R[m, m] = rho
        self.R = R
        self.Q = np.column_stack([self.Q, q / rho])

    def delete(self, pos):
        """Drop the column at position ``pos`` and retriangularize."""
        R = np.delete(self.R, pos, axis=1)
        Q = self.Q.copy()
        m = R.shape[0]
        for i in range(pos, m - 1):
            a, b = R[i, i], R[i + 1, i]
            h = np.hypot(a, b)
            if h == 0.0:
                continue
            c, s = a / h, b / h
            rows = R[[i, i + 1], i:]
            R[i, i:] = c * rows[0] + s * rows[1]
            R[i + 1, i:] = -s * rows[0] + c * rows[1]
            qi, qj = Q[:, i].copy(), Q[:, i + 1].copy()
            Q[:, i] = c * qi + s * qj
            Q[:, i + 1] = -s * qi + c * qj
        self.R = np.triu(R[:m - 1, :])
        self.Q = Q[:, :m - 1]

    def solve_gram(self, b):
        """Return ``(X_A^T X_A)^{-1} b``."""
        z = solve_triangular(self.R, b, trans="T")
        return solve_triangular(self.R, z)

    def lstsq(self, v):
        """Least-squares coefficients of ``v`` on the active columns."""
        return solve_triangular(self.R, self.Q.T @ v)


def read_csv(path, header=True, response=None, delimiter=","):
    """Load a numeric CSV into ``(X, y, predictor_names, response_name)``.

    ``response`` names the response column (a header name, or an integer
    index when there is no header); it defaults to the last column.
    Ragged rows and unparseable cells raise :class:`InputError`.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    if not rows:
        raise InputError(f"{path}: empty file")
    names = None
    if header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(rows[0]) if names is None else len(names)
    data = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InputError(f"{path}: row {i + 1 + bool(header)} has {len(row)} fields, expected {width}")
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise InputError(f"{path}: cannot parse {cell!r} at row {i + 1 + bool(header)}, column {j + 1}") from None
    if names is None:
        names = [f"x{j}" for j in range(width)]
    if response is None:
        col = width - 1
    elif isinstance(response, str) and response in names:
        col = names.index(response)
    else:
        try:
            col = int(response)
        except (TypeError, ValueError):
            raise InputError(f"{path}: no response column named {response!r}") from None
        if not -width <= col < width:
            raise InputError(f"{path}: response column {col} out of range")
        col %= width
    if width < 2:
        raise InputError(f"{path}: need at least one predictor and a response")
    _check_finite(data, "CSV data")
    keep = [j for j in range(width) if j != col]
    return data[:, keep], data[:, col], [names[j] for j in keep], names[col]
