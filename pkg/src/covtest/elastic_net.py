"""Elastic net covariance test through an augmented lasso design.

With ridge weight ``gamma`` the elastic net on ``(X, y)`` is the lasso on
``X~ = [X; sqrt(gamma) I]`` and ``y~ = (y, 0)``. The zero padding of ``y~``
means ``<y~, X~ b> = <y, X b>``, so the lasso covariance statistic on the
augmented problem is exactly the elastic-net statistic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .covariance_test import ExpScale, p_value, test_sequence
from .design import as_array
from .exceptions import InputError


@dataclass(frozen=True)
class ElasticNetProblem:
    X: object
    y: np.ndarray
    gamma: float = 0.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise InputError(f"gamma must be nonnegative, got {self.gamma}")


def augment(problem):
    """Return the ``(n + p) x p`` design and the zero-padded response."""
    if not problem.gamma >= 0:
        raise InputError(f"gamma must be nonnegative, got {problem.gamma}")
    X = as_array(problem.X)
    p = X.shape[1]
    X_aug = np.vstack([X, np.sqrt(problem.gamma) * np.eye(p)])
    y_aug = np.concatenate([np.asarray(problem.y, float), np.zeros(p)])
    return X_aug, y_aug


def enet_test_sequence(problem, sigma2, max_steps=None):
    """Covariance tests along the elastic-net path.

    Each result carries the raw statistic ``T_k`` (and its Exp(1) p-value)
    plus ``scaled_statistic = (1 + gamma) T_k`` with its own Exp(1)
    p-value; which to trust off the orthogonal case is left to the caller.
    With ``gamma == 0`` the plain lasso problem is solved directly, so the
    output is identical to :func:`covtest.covariance_test.test_sequence`.
    """
    if problem.gamma == 0:
        return test_sequence(problem.X, problem.y, sigma2, max_steps=max_steps)
    if isinstance(sigma2, str):
        raise InputError("the elastic-net test needs a known sigma^2")
    X_aug, y_aug = augment(problem)
    factor = 1.0 + problem.gamma
    out = []
    for r in test_sequence(X_aug, y_aug, sigma2, max_steps=max_steps):
        scaled = factor * r.statistic
        out.append(replace(r, gamma=problem.gamma, scaled_statistic=scaled,
                           scaled_p_value=p_value(scaled, ExpScale(1.0))))
    return out
