"""Exact lasso solution path by the LARS homotopy.

The path is traced from ``lambda = inf`` downwards. At each knot the next
value is the larger of the joining time of an inactive variable and the
leaving time of an active one; see :func:`compute_path`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .design import ActiveSet, DesignMatrix, UpdatableQR, as_array
from .exceptions import DegeneracyError, InputError, NumericalError, OutOfRangeError

JOIN = "join"
LEAVE = "leave"

TIE_RTOL = 1e-12
_RESIDUAL_RTOL = 1e-12


@dataclass(frozen=True)
class PathEvent:
    """One knot of the path.

    ``sign`` is the sign on entry for a join, and the sign the variable
    held before its coefficient hit zero for a leave. ``coefficients`` is
    the full length-``p`` solution at the knot.
    """

    k: int
    lam: float
    kind: str
    variable: int
    sign: int
    active_before: ActiveSet
    active_after: ActiveSet
    coefficients: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class LassoPath:
    """Knots of the lasso path in decreasing order.

    ``complete`` is true when the path was followed all the way down to
    ``lambda = 0``; only then is ``0`` a valid value for the knot after the
    last event. ``terminal_coefficients`` is the solution at
    ``terminal_lambda``.
    """

    events: tuple
    lambda_max: float
    terminal_lambda: float
    n: int
    p: int
    terminal_coefficients: np.ndarray = field(repr=False)
    complete: bool = True
    notes: tuple = ()

    def __len__(self):
        return len(self.events)

    @property
    def knots(self):
        return np.array([e.lam for e in self.events])

    @property
    def joins(self):
        return [e for e in self.events if e.kind == JOIN]

    def event(self, k):
        """Event at knot ``k`` (1-based, as in ``lambda_k``)."""
        if not 1 <= k <= len(self.events):
            raise InputError(f"knot {k} not on a path with {len(self.events)} knots")
        return self.events[k - 1]

    def next_lambda(self, k):
        """Value of ``lambda_{k+1}``; raises if the path stops before it."""
        if k < len(self.events):
            return self.events[k].lam
        if k == len(self.events) and self.complete:
            return 0.0
        raise InputError(f"knot {k + 1} was not computed; extend max_steps")

    def next_coefficients(self, k):
        """Solution at ``lambda_{k+1}``."""
        if k < len(self.events):
            return self.events[k].coefficients
        self.next_lambda(k)
        return self.terminal_coefficients


def _default_cap(X, n, p):
    centered = isinstance(X, DesignMatrix) and X.centered
    return min(p, n - 1 if centered else n)


def compute_path(X, y, max_steps=None, lambda_min=0.0):
    """Compute the lasso path of ``y`` on ``X``.

    Parameters
    ----------
    X : DesignMatrix or array, shape (n, p)
    y : array, shape (n,)
    max_steps : int, optional
        Maximum number of knots (joins plus leaves) to record. By default
        the path runs until the active set saturates and no coefficient
        can leave before ``lambda_min``.
    lambda_min : float
        Stop once the next knot would fall at or below this value.

    Returns
    -------
    LassoPath

    Raises
    ------
    DegeneracyError
        Two candidate knots agree to relative precision ``1e-12``.
    SingularityError
        A joining column is numerically dependent on the active set.
    """
    Xa = as_array(X)
    y = np.asarray(y, dtype=float)
    if Xa.ndim != 2 or y.shape != (Xa.shape[0],):
        raise InputError(f"shape mismatch: X {Xa.shape}, y {y.shape}")
    if not np.all(np.isfinite(y)):
        raise InputError(f"non-finite response at index {int(np.flatnonzero(~np.isfinite(y))[0])}")
    if lambda_min < 0:
        raise InputError("lambda_min must be nonnegative")
    n, p = Xa.shape
    cap = _default_cap(X, n, p)
    limit = max_steps if max_steps is not None else 50 * (p + 1)
    ynorm = np.linalg.norm(y)

    fac = UpdatableQR(n)
    A = ActiveSet()
    lam = math.inf
    events = []
    just_joined = None
    just_left = None
    b = d = np.empty(0)
    complete = True

    while True:
        if len(events) >= limit:
            if max_steps is None:
                raise NumericalError(f"path did not terminate within {limit} knots")
            complete = False
            break
        idx = list(A.indices)
        if idx:
            sA = A.sign_vector
            b = fac.lstsq(y)
            d = fac.solve_gram(sA)
            resid = y - fac.Q @ (fac.Q.T @ y)
            w = Xa[:, idx] @ d
        else:
            b = d = np.empty(0)
            resid = y
            w = None
        ceiling = lam * (1.0 - TIE_RTOL)
        cands = []

        if len(idx) < cap and np.linalg.norm(resid) > _RESIDUAL_RTOL * ynorm:
            num = Xa.T @ resid
            a = Xa.T @ w if w is not None else np.zeros(p)
            inactive = np.ones(p, dtype=bool)
            inactive[idx] = False
            for s in (1, -1):
                den = s - a
                with np.errstate(divide="ignore", invalid="ignore"):
                    val = num / den
                ok = inactive & np.isfinite(val) & (val > lambda_min) & (val < ceiling)
                if just_left is not None and just_left[1] == s:
                    ok[just_left[0]] = False
                for j in np.flatnonzero(ok):
                    cands.append((float(val[j]), JOIN, int(j), s))

        if idx:
            with np.errstate(divide="ignore", invalid="ignore"):
                val = b / d
            ok = np.isfinite(val) & (d != 0) & (val > lambda_min) & (val < ceiling)
            if just_joined is not None:
                ok[idx.index(just_joined)] = False
            for pos in np.flatnonzero(ok):
                cands.append((float(val[pos]), LEAVE, idx[pos], A.signs[pos]))

        if not cands:
            break
        cands.sort(key=lambda c: c[0], reverse=True)
        new_lam, kind, j, s = cands[0]
        if len(cands) > 1 and cands[1][0] >= new_lam * (1.0 - TIE_RTOL):
            raise DegeneracyError(
                f"knot tie at lambda={new_lam:.17g} between "
                f"{cands[0][1]} of {cands[0][2]} and {cands[1][1]} of {cands[1][2]}")

        coefs = np.zeros(p)
        if idx:
            coefs[idx] = b - new_lam * d
        if kind == JOIN:
            fac.append(Xa[:, j], index=j)
            A_new = A.add(j, s)
            coefs[j] = 0.0
            just_joined, just_left = j, None
        else:
            fac.delete(idx.index(j))
            A_new = A.remove(j)
            coefs[j] = 0.0
            just_joined, just_left = None, (j, s)
        coefs.flags.writeable = False
        events.append(PathEvent(len(events) + 1, new_lam, kind, j, s, A, A_new, coefs))
        A = A_new
        lam = new_lam

    notes = []
    if complete:
        terminal = float(lambda_min)
        term_coefs = np.zeros(p)
        if len(A):
            b = fac.lstsq(y)
            d = fac.solve_gram(A.sign_vector)
            term_coefs[list(A.indices)] = b - terminal * d
        complete = terminal == 0.0
    else:
        terminal = lam
        term_coefs = events[-1].coefficients.copy()
    term_coefs.flags.writeable = False
    if events:
        lambda_max = events[0].lam
    else:
        lambda_max = float(np.abs(Xa.T @ y).max())
        if lambda_max <= lambda_min:
            notes.append("response has no correlation with any predictor above lambda_min; path is empty")
    return LassoPath(tuple(events), lambda_max, terminal, n, p, term_coefs, complete, tuple(notes))


def _closed_form(Xa, y, A, lam):
    idx = list(A.indices)
    Q, R = np.linalg.qr(Xa[:, idx])
    z = Q.T @ y - lam * solve_triangular(R, A.sign_vector, trans="T")
    return solve_triangular(R, z)


def solution_at(path, X, y, lam):
    """Lasso coefficients at ``lam`` from the path's active sets.

    Inside a segment the active set and signs are fixed, so the solution is
    ``(X_A^T X_A)^{-1} (X_A^T y - lam * s_A)`` on ``A`` and zero elsewhere.
    """
    lam = float(lam)
    if lam < path.terminal_lambda * (1.0 - TIE_RTOL) or lam < 0:
        raise OutOfRangeError(
            f"lambda={lam:g} is below the end of the computed path ({path.terminal_lambda:g})")
    beta = np.zeros(path.p)
    if not path.events or lam >= path.events[0].lam:
        return beta
    knots = path.knots
    # segment k covers (lambda_{k+1}, lambda_k]; searchsorted on the reversed knots
    k = len(knots) - int(np.searchsorted(knots[::-1], lam, side="left"))
    A = path.events[k - 1].active_after
    if len(A):
        beta[list(A.indices)] = _closed_form(as_array(X), np.asarray(y, float), A, lam)
    return beta


def reduced_solution(X, A, y, lam):
    """Lasso solution using only the columns in ``A``, in the order of ``A``."""
    idx = list(A.indices if isinstance(A, ActiveSet) else A)
    if not idx:
        return np.zeros(0)
    sub = as_array(X)[:, idx]
    path = compute_path(sub, y, lambda_min=lam)
    return solution_at(path, sub, y, lam)


@dataclass(frozen=True)
class KKTReport:
    """Per-variable stationarity check of a candidate lasso solution.

    ``residuals[j]`` is ``X_j^T r - lam * sign(beta_j)`` for nonzero
    coefficients and the slack ``lam - |X_j^T r|`` for zero ones.
    """

    residuals: np.ndarray
    active: np.ndarray
    violations: np.ndarray
    max_violation: float

    @property
    def ok(self):
        return self.violations.size == 0


def kkt_report(X, y, beta, lam, tol=1e-6):
    Xa = as_array(X)
    beta = np.asarray(beta, dtype=float)
    grad = Xa.T @ (np.asarray(y, float) - Xa @ beta)
    active = beta != 0
    res = np.where(active, grad - lam * np.sign(beta), lam - np.abs(grad))
    excess = np.where(active, np.abs(res), np.maximum(-res, 0.0))
    return KKTReport(res, active, np.flatnonzero(excess > tol), float(excess.max(initial=0.0)))


def write_path_csv(path, fh):
    """Write one row per knot: k, lambda, kind, variable, sign, active_size."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["k", "lambda", "kind", "variable", "sign", "active_size"])
    for e in path.events:
        w.writerow([e.k, f"{e.lam:.17g}", e.kind, e.variable, e.sign, len(e.active_after)])


def write_coefficients_csv(path, fh, names=None):
    """Wide table of the solution at every knot (and at the terminal lambda)."""
    names = names or [f"x{j}" for j in range(path.p)]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["k", "lambda", *names])
    for e in path.events:
        w.writerow([e.k, f"{e.lam:.17g}", *(f"{v:.17g}" for v in e.coefficients)])
    if path.complete or not path.events:
        w.writerow(["terminal", f"{path.terminal_lambda:.17g}",
                    *(f"{v:.17g}" for v in path.terminal_coefficients)])
