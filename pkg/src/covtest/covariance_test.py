"""Covariance test statistics along the lasso path and their p-values.

For the variable ``j`` entering at knot ``lambda_k`` with active set ``A``
just before the knot, the statistic is the drop

    T_k = (<y, X beta(lambda_{k+1})> - <y, X_A beta_A~(lambda_{k+1})>) / sigma^2

where ``beta_A~`` is the lasso fit that uses the columns ``A`` only. When the
reduced fit keeps the signs ``s_A`` down to ``lambda_{k+1}`` the statistic
collapses to ``C * lambda_k * (lambda_k - lambda_{k+1}) / sigma^2`` (the knot
form), which needs no extra path computation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .design import ActiveSet, as_array, pinv_transpose_apply
from .exceptions import InputError, SignConditionError, SingularityError
from .lasso_path import JOIN, LEAVE, compute_path, reduced_solution

DEFINITION = "definition"
KNOT = "knot"
SIGMA_KNOWN = "known"
SIGMA_ESTIMATED = "estimated_full_model"


@dataclass(frozen=True)
class ExpScale:
    """Exponential law with mean ``scale``."""

    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise InputError(f"Exp scale must be positive, got {self.scale}")

    def sf(self, t):
        return np.exp(-np.asarray(t, float) / self.scale)

    def ppf(self, q):
        return -self.scale * np.log1p(-np.asarray(q, float))

    def __str__(self):
        return f"Exp({self.scale:g})"


@dataclass(frozen=True)
class FTwo:
    """F distribution with 2 numerator and ``df2`` denominator degrees of freedom."""

    df2: float

    def __post_init__(self):
        if not self.df2 >= 1:
            raise InputError(f"F denominator df must be >= 1, got {self.df2}")

    def sf(self, t):
        m = self.df2
        return np.exp(-m / 2.0 * np.log1p(2.0 * np.asarray(t, float) / m))

    def ppf(self, q):
        m = self.df2
        return m / 2.0 * np.expm1(-2.0 / m * np.log1p(-np.asarray(q, float)))

    def __str__(self):
        return f"F(2,{self.df2:g})"


@dataclass(frozen=True)
class ChiSq1:
    """Chi-squared law with one degree of freedom."""

    def sf(self, t):
        return special.erfc(np.sqrt(np.asarray(t, float) / 2.0))

    def ppf(self, q):
        return stats.chi2.ppf(q, 1)

    def __str__(self):
        return "ChiSq(1)"


def p_value(statistic, law):
    """Survival probability of ``statistic`` under ``law``."""
    if statistic < 0:
        raise InputError(f"statistic must be nonnegative, got {statistic}")
    return float(law.sf(statistic))


@dataclass(frozen=True)
class CovTestResult:
    """Covariance test for one entry along the path.

    ``step`` is the knot index ``k``; ``lambda_next`` is ``lambda_{k+1}``.
    ``next_is_leave`` flags steps whose next knot deletes a variable, for
    which the definition form is always used. For elastic-net runs
    ``scaled_statistic`` holds ``(1 + gamma) * statistic``.
    """

    step: int
    variable: int
    sign: int
    lambda_k: float
    lambda_next: float
    statistic: float
    scaling_C: float
    form: str
    sign_condition_held: bool
    null_law: object
    p_value: float
    sigma_source: str
    sigma2: float
    next_is_leave: bool = False
    gamma: float = 0.0
    scaled_statistic: float = None
    scaled_p_value: float = None


def scaling_factor(X, A, j, s):
    """``C = ||(X_{A+j}^T)^+ s_{A+j} - (X_A^T)^+ s_A||^2``."""
    A = A if isinstance(A, ActiveSet) else ActiveSet(*A)
    if j in A:
        raise InputError(f"variable {j} is already active")
    grown = pinv_transpose_apply(X, A.add(j, s))
    base = pinv_transpose_apply(X, A)
    C = float(np.sum((grown - base) ** 2))
    if not C > 0:
        raise SingularityError(f"scaling factor vanished for variable {j}", index=j)
    return C


def _sign_violation(X, A, y, lambda_next):
    """Index of the first active coordinate that loses its sign, or None."""
    if len(A) == 0:
        return None
    Xa = as_array(X)
    idx = list(A.indices)
    ls = np.linalg.lstsq(Xa[:, idx], y, rcond=None)[0]
    if np.array_equal(np.sign(ls), A.sign_vector):
        return None
    reduced = reduced_solution(Xa, A, y, lambda_next)
    bad = np.flatnonzero(np.sign(reduced) != A.sign_vector)
    return None if bad.size == 0 else idx[bad[0]]


def sign_condition_holds(X, A, y, lambda_k, lambda_next):
    """Whether the lasso on ``X_A`` keeps signs ``A.signs`` at ``lambda_next``.

    ``lambda_k`` is accepted for symmetry with the knot form; the check only
    needs the end of the interval because the reduced fit has signs ``s_A``
    at ``lambda_k`` by continuity.
    """
    if lambda_next > lambda_k:
        raise InputError("lambda_next must not exceed lambda_k")
    return _sign_violation(X, A, np.asarray(y, float), lambda_next) is None


def _entry(path, k):
    e = path.event(k)
    if e.kind != JOIN:
        raise InputError(f"knot {k} removes variable {e.variable}; only entries are tested")
    return e


def _finish(T, sigma2):
    T = T / sigma2
    # roundoff can leave a hair below zero when the two fits nearly coincide
    if -1e-9 < T < 0:
        T = 0.0
    return T


def statistic_definition(X, y, path, k, sigma2):
    """Covariance statistic at knot ``k`` computed from the two lasso fits."""
    if not sigma2 > 0:
        raise InputError("sigma2 must be positive")
    y = np.asarray(y, float)
    e = _entry(path, k)
    lam_next = path.next_lambda(k)
    Xa = as_array(X)
    full = y @ (Xa @ path.next_coefficients(k))
    A = e.active_before
    part = 0.0
    if len(A):
        part = y @ (Xa[:, list(A.indices)] @ reduced_solution(Xa, A, y, lam_next))
    return _finish(full - part, sigma2), lam_next


def statistic_knot_form(X, y, path, k, sigma2):
    """Knot form ``C * lambda_k * (lambda_k - lambda_{k+1}) / sigma^2``.

    Raises
    ------
    SignConditionError
        The reduced fit changes sign before ``lambda_{k+1}``; use
        :func:`statistic_definition` instead.
    """
    if not sigma2 > 0:
        raise InputError("sigma2 must be positive")
    e = _entry(path, k)
    lam_next = path.next_lambda(k)
    bad = _sign_violation(X, e.active_before, np.asarray(y, float), lam_next)
    if bad is not None:
        raise SignConditionError(
            f"reduced solution changes sign at variable {bad} before lambda_{k + 1}", index=bad)
    C = scaling_factor(X, e.active_before, e.variable, e.sign)
    return C * e.lam * (e.lam - lam_next) / sigma2, C


def estimate_sigma_full(X, y):
    """Residual mean square ``||y - X b_LS||^2 / (n - p)`` of the full model."""
    Xa = as_array(X)
    n, p = Xa.shape
    if n <= p:
        raise InputError(
            f"cannot estimate sigma^2 from the full least-squares fit with n={n} <= p={p}; "
            "supply a known sigma instead")
    coef, _, rank, _ = np.linalg.lstsq(Xa, y, rcond=None)
    if rank < p:
        raise SingularityError(f"design has rank {rank} < p={p}")
    r = np.asarray(y, float) - Xa @ coef
    return float(r @ r) / (n - p)


def _test_step(X, y, path, k, sigma2, law, source):
    e = path.event(k)
    lam_next = path.next_lambda(k)
    next_leave = k < len(path) and path.events[k].kind == LEAVE
    held = _sign_violation(X, e.active_before, y, lam_next) is None
    C = scaling_factor(X, e.active_before, e.variable, e.sign)
    if held and not next_leave:
        T = C * e.lam * (e.lam - lam_next) / sigma2
        form = KNOT
    else:
        T, _ = statistic_definition(X, y, path, k, sigma2)
        form = DEFINITION
    return CovTestResult(
        step=k, variable=e.variable, sign=e.sign, lambda_k=e.lam, lambda_next=lam_next,
        statistic=T, scaling_C=C, form=form, sign_condition_held=held,
        null_law=law, p_value=p_value(T, law), sigma_source=source, sigma2=sigma2,
        next_is_leave=next_leave)


def test_sequence(X, y, sigma2="estimate", max_steps=None, exp_scales=None, path=None):
    """Covariance test for every entry along the path.

    Parameters
    ----------
    sigma2 : float or "estimate"
        Known error variance (p-values from Exp(1)), or ``"estimate"`` to
        plug in :func:`estimate_sigma_full` (p-values from F(2, n - p)).
    max_steps : int, optional
        Number of knots to test; the path is computed one knot further.
    exp_scales : sequence of float, optional
        Per-entry Exp scale overriding 1, e.g. ``[1, 1/2, 1/3]`` for the
        orthogonal global-null ladder. Ignored when sigma is estimated.
    path : LassoPath, optional
        Precomputed path of ``y`` on ``X``.
    """
    y = np.asarray(y, float)
    Xa = as_array(X)
    n, p = Xa.shape
    if isinstance(sigma2, str):
        if sigma2 != "estimate":
            raise InputError(f"sigma2 must be a number or 'estimate', got {sigma2!r}")
        s2 = estimate_sigma_full(X, y)
        if not s2 > 0:
            raise InputError("estimated sigma^2 is zero: y lies in the column span of X")
        source = SIGMA_ESTIMATED
        laws = lambda i: FTwo(n - p)
    else:
        s2 = float(sigma2)
        if not s2 > 0:
            raise InputError("sigma2 must be positive")
        source = SIGMA_KNOWN
        laws = lambda i: ExpScale(exp_scales[i] if exp_scales is not None and i < len(exp_scales) else 1.0)
    if path is None:
        path = compute_path(X, y, max_steps=None if max_steps is None else max_steps + 1)
    last = len(path) if max_steps is None else min(max_steps, len(path))
    out = []
    for e in path.events[:last]:
        if e.kind != JOIN:
            continue
        if e.k == len(path) and not path.complete:
            break
        out.append(_test_step(X, y, path, e.k, s2, laws(len(out)), source))
    return out


# keep pytest from collecting the public name when it is imported into tests
test_sequence.__test__ = False
