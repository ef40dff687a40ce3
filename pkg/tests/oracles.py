"""Independent reference solvers used to pin down expected values.

Nothing here touches the homotopy code: the lasso comes from cyclic
coordinate descent run to a tiny duality gap, the elastic net from
accelerated proximal gradient, and the scaling factor from dense solves.
"""

import numpy as np


def soft(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def lasso_gap(X, y, beta, lam):
    r = y - X @ beta
    primal = 0.5 * r @ r + lam * np.abs(beta).sum()
    g = np.abs(X.T @ r).max(initial=0.0)
    theta = r * min(1.0, lam / g) if g > 0 else r
    dual = 0.5 * y @ y - 0.5 * (y - theta) @ (y - theta)
    return primal - dual


def lasso_cd(X, y, lam, beta0=None, gap_tol=1e-12, max_sweeps=200000):
    """Minimize ``0.5 ||y - X b||^2 + lam ||b||_1`` by cyclic coordinate descent.

    Stops when the duality gap falls below ``gap_tol * max(1, ||y||^2)`` and
    a sweep moves no coordinate by more than 1e-14.
    """
    X = np.asarray(X, float)
    y = np.asarray(y, float)
    p = X.shape[1]
    beta = np.zeros(p) if beta0 is None else np.array(beta0, float)
    sq = (X ** 2).sum(axis=0)
    r = y - X @ beta
    tol = gap_tol * max(1.0, y @ y)
    for sweep in range(max_sweeps):
        delta = 0.0
        for j in range(p):
            if sq[j] == 0:
                continue
            old = beta[j]
            new = soft(old + X[:, j] @ r / sq[j], lam / sq[j])
            if new != old:
                r -= X[:, j] * (new - old)
                beta[j] = new
                delta = max(delta, abs(new - old))
        if delta < 1e-14 or sweep % 10 == 9:
            if lasso_gap(X, y, beta, lam) <= tol and delta < 1e-12:
                return beta
    raise RuntimeError("coordinate descent did not converge")


def enet_prox_grad(X, y, lam, gamma, gap_tol=1e-10, max_iter=500000):
    """FISTA for ``0.5 ||y - X b||^2 + lam ||b||_1 + gamma/2 ||b||^2``.

    Convergence is judged by the duality gap of the equivalent lasso on the
    augmented design ``[X; sqrt(gamma) I]``.
    """
    X = np.asarray(X, float)
    y = np.asarray(y, float)
    p = X.shape[1]
    Xt = np.vstack([X, np.sqrt(gamma) * np.eye(p)])
    yt = np.concatenate([y, np.zeros(p)])
    L = np.linalg.norm(X, 2) ** 2 + gamma
    beta = z = np.zeros(p)
    t = 1.0
    for it in range(max_iter):
        grad = X.T @ (X @ z - y) + gamma * z
        nxt = soft(z - grad / L, lam / L)
        t_next = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        z = nxt + (t - 1) / t_next * (nxt - beta)
        beta, t = nxt, t_next
        if it % 50 == 0 and lasso_gap(Xt, yt, beta, lam) <= gap_tol * max(1.0, y @ y):
            return beta
    raise RuntimeError("proximal gradient did not converge")


def lasso_on_support(X, y, idx, signs, lam):
    """Closed-form lasso fit for a fixed active set via the normal equations."""
    XA = X[:, idx]
    return np.linalg.solve(XA.T @ XA, XA.T @ y - lam * np.asarray(signs, float))


def scaling_gram(X, idx, signs, j, s):
    """``s' G_{A+j}^{-1} s - s_A' G_A^{-1} s_A`` with dense inverses."""
    full = list(idx) + [j]
    sf = np.asarray(list(signs) + [s], float)
    G = X[:, full].T @ X[:, full]
    val = sf @ np.linalg.solve(G, sf)
    if idx:
        sa = np.asarray(signs, float)
        GA = X[:, idx].T @ X[:, idx]
        val -= sa @ np.linalg.solve(GA, sa)
    return val


def scaling_ratio(X, idx, signs, j, s):
    """``(s - X_j' (X_A')^+ s_A)^2 / (X_j' (I - P_A) X_j)``."""
    xj = X[:, j]
    if not idx:
        return 1.0 / (xj @ xj)
    XA = X[:, idx]
    G = XA.T @ XA
    u = XA @ np.linalg.solve(G, np.asarray(signs, float))
    proj = XA @ np.linalg.solve(G, XA.T @ xj)
    return (s - xj @ u) ** 2 / (xj @ (xj - proj))
