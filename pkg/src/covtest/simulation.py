"""Seeded Monte Carlo harness for null distributions, power and QQ data.

Every replication draws from its own Philox stream keyed by
``(seed, replication)``, so results do not depend on the order or the
number of threads the replications run on.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .covariance_test import ChiSq1, ExpScale, FTwo, estimate_sigma_full, test_sequence
from .design import DesignMatrix, UpdatableQR, as_array, center, standardize
from .exceptions import InputError, SingularityError

CORRELATIONS = ("orthogonal", "equal_data", "equal_population", "ar1", "block")
ALPHA = 0.05


@dataclass(frozen=True)
class SimulationConfig:
    """One simulation cell.

    ``beta_spec`` lists ``(index, value)`` pairs of the true coefficients;
    ``step_to_test`` counts entries (joins), so with ``k`` strong signals the
    first truly null entry is step ``k + 1``.
    """

    n: int = 100
    p: int = 10
    correlation: str = "equal_data"
    rho: float = 0.0
    beta_spec: tuple = ()
    sigma: float = 1.0
    replications: int = 500
    seed: int = 0
    step_to_test: int = 1
    estimate_sigma: bool = False

    def __post_init__(self):
        if self.correlation not in CORRELATIONS:
            raise InputError(f"unknown correlation {self.correlation!r}; choose from {CORRELATIONS}")
        if not abs(self.rho) < 1:
            raise InputError(f"|rho| must be < 1, got {self.rho}")
        if self.n < 2 or self.p < 1:
            raise InputError(f"need n >= 2 and p >= 1, got n={self.n}, p={self.p}")
        if self.correlation in ("orthogonal", "equal_data") and self.p > self.n:
            raise InputError(f"{self.correlation} design needs p <= n, got p={self.p} > n={self.n}")
        if self.correlation == "equal_data" and self.p >= self.n:
            raise InputError("equal data correlation needs p < n so that columns can be centered")
        if self.correlation != "orthogonal":
            try:
                np.linalg.cholesky(_correlation_matrix(self.correlation, self.p, self.rho))
            except np.linalg.LinAlgError:
                raise InputError(
                    f"rho={self.rho} gives an indefinite {self.correlation} correlation matrix "
                    f"for p={self.p}") from None
        spec = tuple((int(i), float(v)) for i, v in self.beta_spec)
        idx = [i for i, _ in spec]
        if len(set(idx)) != len(idx) or any(not 0 <= i < self.p for i in idx):
            raise InputError(f"beta indices must be distinct and in [0, {self.p}), got {idx}")
        object.__setattr__(self, "beta_spec", spec)
        if self.sigma < 0:
            raise InputError("sigma must be nonnegative")
        if self.step_to_test < 1:
            raise InputError("step_to_test must be >= 1")
        if self.replications < 1:
            raise InputError("replications must be >= 1")
        if self.estimate_sigma and self.p >= self.n:
            raise InputError("estimating sigma^2 needs n > p")

    @property
    def beta(self):
        b = np.zeros(self.p)
        for i, v in self.beta_spec:
            b[i] = v
        return b

    @property
    def support(self):
        return frozenset(i for i, v in self.beta_spec if v != 0)

    @property
    def reference_law(self):
        return FTwo(self.n - self.p) if self.estimate_sigma else ExpScale(1.0)


@dataclass(frozen=True)
class NullSummary:
    """Monte Carlo summary of a statistic, in the layout of the null tables."""

    mean: float
    variance: float
    tail_prob: float
    se_mean: float
    se_variance: float
    se_tail: float
    discarded_fraction: float
    q95_reference: float
    replications_used: int
    statistics: np.ndarray = field(repr=False, default=None)
    config: SimulationConfig = field(repr=False, default=None)


def replication_rng(seed, *key):
    """Independent Philox generator for replication ``key`` of ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def strong_signal(p, sigma=1.0, multiple=6.0):
    """Coefficient size ``multiple * sigma * sqrt(2 log p)``."""
    return multiple * sigma * math.sqrt(2.0 * math.log(p))


def _correlation_matrix(kind, p, rho):
    if kind in ("equal_data", "equal_population"):
        return (1 - rho) * np.eye(p) + rho * np.ones((p, p))
    if kind == "ar1":
        j = np.arange(p)
        return rho ** np.abs(j[:, None] - j[None, :])
    if kind == "block":
        S = np.zeros((p, p))
        h = p // 2
        for sl in (slice(0, h), slice(h, p)):
            m = sl.stop - sl.start
            S[sl, sl] = (1 - rho) * np.eye(m) + rho * np.ones((m, m))
        return S
    raise InputError(f"no correlation matrix for {kind!r}")


def gen_design(config, rng=None):
    """Draw a centered, unit-norm design for ``config``.

    The orthogonal design with ``p == n`` cannot be centered and is returned
    as an orthogonal matrix without centering.
    """
    rng = replication_rng(config.seed) if rng is None else rng
    n, p, kind = config.n, config.p, config.correlation
    if kind == "orthogonal":
        Z = rng.standard_normal((n, p))
        if p < n:
            Z -= Z.mean(axis=0)
        Q, _ = np.linalg.qr(Z)
        return DesignMatrix(Q, centered=p < n, standardized=True)
    if kind == "equal_data":
        Z = rng.standard_normal((n, p))
        Z -= Z.mean(axis=0)
        Q, _ = np.linalg.qr(Z)
        L = np.linalg.cholesky(_correlation_matrix(kind, p, config.rho))
        X = Q @ L.T
        return DesignMatrix(X, centered=True, standardized=True)
    L = np.linalg.cholesky(_correlation_matrix(kind, p, config.rho))
    X = rng.standard_normal((n, p)) @ L.T
    dm, _ = center(X, np.zeros(n))
    return standardize(dm)


def gen_response(X, beta_spec, sigma, rng):
    """``y = X beta + sigma * eps`` with ``eps`` standard normal from ``rng``.

    ``rng`` may be a Generator or an integer seed.
    """
    if not isinstance(rng, np.random.Generator):
        rng = replication_rng(int(rng))
    Xa = as_array(X)
    beta = np.zeros(Xa.shape[1])
    for i, v in beta_spec:
        beta[i] = v
    return Xa @ beta + sigma * rng.standard_normal(Xa.shape[0])


def _entries(X, y, sigma2, steps):
    """Covariance test results for the first ``steps`` entries."""
    max_steps = steps
    while True:
        res = test_sequence(X, y, sigma2, max_steps=max_steps)
        if len(res) >= steps or max_steps > 4 * steps + X.shape[1]:
            return res
        max_steps += steps - len(res)


def _replicate(config, rep, steps):
    rng = replication_rng(config.seed, rep)
    X = gen_design(config, rng)
    y = gen_response(X, config.beta_spec, config.sigma, rng)
    sigma2 = "estimate" if config.estimate_sigma else config.sigma ** 2
    res = _entries(X, y, sigma2, max(steps))
    values = np.array([res[s - 1].statistic if s <= len(res) else np.nan for s in steps])
    k = len(config.support)
    discarded = k > 0 and {r.variable for r in res[:k]} != config.support
    return values, discarded


def _run(fn, reps, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(reps)))
    return [fn(r) for r in range(reps)]


def step_statistics(config, steps, threads=1):
    """Statistics at several entry steps for every replication.

    Returns
    -------
    values : ndarray, shape (replications, len(steps))
    discarded : ndarray of bool
        Replications in which the first ``k`` entries are not exactly the
        true support (always False without true signals).
    """
    steps = tuple(steps)
    out = _run(lambda r: _replicate(config, r, steps), config.replications, threads)
    values = np.array([v for v, _ in out]).reshape(len(out), len(steps))
    return values, np.array([d for _, d in out], dtype=bool)


def summarize(samples, q95, discarded_fraction=0.0, config=None):
    """Mean, variance and tail probability with Monte Carlo standard errors.

    ``se_variance`` uses the delta-method form ``sqrt((m4 - s^4) / N)`` with
    ``m4`` the fourth central moment.
    """
    x = np.asarray(samples, dtype=float)
    x = x[np.isfinite(x)]
    N = x.size
    if N < 2:
        raise InputError("need at least two usable replications")
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    m4 = float(np.mean((x - mean) ** 4))
    tail = float(np.mean(x > q95))
    return NullSummary(
        mean=mean, variance=var, tail_prob=tail,
        se_mean=math.sqrt(var / N),
        se_variance=math.sqrt(max(m4 - var ** 2, 0.0) / N),
        se_tail=math.sqrt(tail * (1 - tail) / N),
        discarded_fraction=float(discarded_fraction),
        q95_reference=float(q95), replications_used=N,
        statistics=x, config=config)


def null_table(config, threads=1):
    """Null summary of the statistic at ``config.step_to_test``.

    Replications where the truly active variables did not enter first are
    dropped and counted in ``discarded_fraction``.
    """
    values, discarded = step_statistics(config, (config.step_to_test,), threads)
    kept = values[~discarded, 0]
    q95 = float(config.reference_law.ppf(1 - ALPHA))
    return summarize(kept, q95, discarded.mean(), config)


@dataclass(frozen=True)
class StepwiseResult:
    """Forward stepwise entries with drop-in-RSS tests.

    ``statistics`` are the drops divided by sigma^2 (or by the full-model
    residual mean square when sigma is estimated).
    """

    order: tuple
    rss_drops: np.ndarray
    statistics: np.ndarray
    p_values: np.ndarray
    law: str
    sigma2: float


def forward_stepwise(X, y, steps, sigma2="estimate"):
    """Greedy forward selection maximizing the drop in RSS at each step.

    With known ``sigma2`` the p-values are chi-squared(1) tail areas; with
    ``"estimate"`` they come from F(1, n - p) using the full-model residual
    mean square.
    """
    Xa = as_array(X)
    y = np.asarray(y, float)
    n, p = Xa.shape
    if not 1 <= steps <= min(n - 1, p):
        raise InputError(f"steps must be in [1, {min(n - 1, p)}], got {steps}")
    if isinstance(sigma2, str):
        s2 = estimate_sigma_full(Xa, y)
        law = f"F(1,{n - p})"
        sf = lambda t: stats.f.sf(t, 1, n - p)
    else:
        s2 = float(sigma2)
        law = "ChiSq(1)"
        sf = lambda t: float(ChiSq1().sf(t))
    fac = UpdatableQR(n)
    chosen = []
    drops = []
    r = y.copy()
    col_norm2 = np.sum(Xa ** 2, axis=0)
    for _ in range(steps):
        Z = Xa - fac.Q @ (fac.Q.T @ Xa)
        z2 = np.sum(Z ** 2, axis=0)
        ok = z2 > 1e-20 * np.maximum(col_norm2, 1e-300)
        ok[chosen] = False
        if not ok.any():
            raise SingularityError("no remaining column is independent of the selected set")
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = np.where(ok, (Z.T @ r) ** 2 / z2, -np.inf)
        j = int(np.argmax(gain))
        fac.append(Xa[:, j], index=j)
        chosen.append(j)
        drops.append(float(gain[j]))
        r = y - fac.Q @ (fac.Q.T @ y)
    drops = np.array(drops)
    statistics = drops / s2
    return StepwiseResult(tuple(chosen), drops, statistics,
                          np.array([sf(t) for t in statistics]), law, s2)


def stepwise_statistics(config, step=None, threads=1, key=()):
    """Known-sigma drop-in-RSS statistic at ``step`` for every replication."""
    step = config.step_to_test if step is None else step

    def one(rep):
        rng = replication_rng(config.seed, *key, rep)
        X = gen_design(config, rng)
        y = gen_response(X, config.beta_spec, config.sigma, rng)
        return forward_stepwise(X, y, step, config.sigma ** 2).statistics[step - 1]

    return np.array(_run(one, config.replications, threads))


@dataclass(frozen=True)
class PowerPoint:
    effect: float
    covtest_exp_rate: float
    covtest_exp_se: float
    lasso_calibrated_rate: float
    lasso_calibrated_se: float
    stepwise_calibrated_rate: float
    stepwise_calibrated_se: float
    stepwise_chisq_rate: float
    stepwise_chisq_se: float


@dataclass(frozen=True)
class PowerCurve:
    """Rejection rates over an effect-size grid.

    ``lasso_cutpoint`` and ``stepwise_cutpoint`` are the 95% quantiles of
    the null simulation; ``null_stepwise_chisq_rate`` is the type I error of
    the naive chi-squared(1) test for forward stepwise at the null.
    """

    points: tuple
    lasso_cutpoint: float
    stepwise_cutpoint: float
    exp_cutpoint: float
    chisq_cutpoint: float
    null_stepwise_chisq_rate: float
    effect_index: int


def _rate(x):
    x = np.asarray(x, dtype=float)
    m = float(x.mean())
    return m, math.sqrt(m * (1 - m) / x.size)


def power_curve(config, effect_sizes, effect_index=None, threads=1):
    """Power of the covariance test and forward stepwise over ``effect_sizes``.

    The coefficient at ``effect_index`` (by default the first index not in
    ``config.beta_spec``) is set to each effect size in turn; the other
    entries of ``beta_spec`` stay fixed. Both procedures are tested at
    ``config.step_to_test``. Null cutpoints come from an independent
    simulation with the effect set to zero.
    """
    effects = [float(e) for e in effect_sizes]
    if not effects:
        raise InputError("effect-size grid is empty")
    fixed = dict(config.beta_spec)
    if effect_index is None:
        effect_index = next(i for i in range(config.p) if i not in fixed)
    step = config.step_to_test

    def cell(effect, key):
        spec = dict(fixed)
        spec[effect_index] = effect
        cfg = SimulationConfig(**{**config.__dict__, "beta_spec": tuple(spec.items()),
                                  "seed": config.seed})

        def one(rep):
            rng = replication_rng(cfg.seed, key, rep)
            X = gen_design(cfg, rng)
            y = gen_response(X, cfg.beta_spec, cfg.sigma, rng)
            res = _entries(X, y, cfg.sigma ** 2, step)
            T = res[step - 1].statistic if len(res) >= step else 0.0
            R = forward_stepwise(X, y, step, cfg.sigma ** 2).statistics[step - 1]
            return T, R

        out = np.array(_run(one, cfg.replications, threads))
        return out[:, 0], out[:, 1]

    null_T, null_R = cell(0.0, 0)
    lasso_cut = float(np.quantile(null_T, 1 - ALPHA))
    fs_cut = float(np.quantile(null_R, 1 - ALPHA))
    exp_cut = float(ExpScale(1.0).ppf(1 - ALPHA))
    chisq_cut = float(ChiSq1().ppf(1 - ALPHA))
    points = []
    for g, effect in enumerate(effects, start=1):
        T, R = cell(effect, g)
        points.append(PowerPoint(effect, *_rate(T > exp_cut), *_rate(T > lasso_cut),
                                 *_rate(R > fs_cut), *_rate(R > chisq_cut)))
    return PowerCurve(tuple(points), lasso_cut, fs_cut, exp_cut, chisq_cut,
                      float(np.mean(null_R > chisq_cut)), effect_index)


def qq_data(samples, law):
    """Pairs of (theoretical, empirical) quantiles at positions ``(i - 0.5) / N``."""
    x = np.sort(np.asarray(samples, dtype=float))
    N = x.size
    if N < 2:
        raise InputError("need at least two samples")
    q = (np.arange(1, N + 1) - 0.5) / N
    return np.asarray(law.ppf(q), dtype=float), x


def order_statistic_gaps(p, replications, k=3, seed=0, chunk=None):
    """``V_i (V_i - V_{i+1})`` for the top ``k`` order statistics of ``p`` chi_1 draws.

    Returns an array of shape ``(replications, k)``. Draws are generated in
    chunks of replications to bound memory at about 64 MB.
    """
    if p < k + 1:
        raise InputError("need p > k")
    chunk = chunk or max(1, int(8e6 // p))
    out = np.empty((replications, k))
    done = 0
    block = 0
    while done < replications:
        m = min(chunk, replications - done)
        rng = replication_rng(seed, block)
        Z = np.abs(rng.standard_normal((m, p)))
        top = np.partition(Z, p - (k + 1), axis=1)[:, p - (k + 1):]
        V = -np.sort(-top, axis=1)
        out[done:done + m] = V[:, :k] * (V[:, :k] - V[:, 1:k + 1])
        done += m
        block += 1
    return out
