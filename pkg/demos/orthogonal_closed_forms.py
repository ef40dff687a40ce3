"""
Orthogonal designs: knots, soft thresholding and the statistic
==============================================================

With orthonormal columns the lasso path is explicit. The knots are the
sorted values of |X^T y|, the solution is soft thresholding, and the
covariance statistic at step k is |U_(k)| (|U_(k)| - |U_(k+1)|) / sigma^2.
"""

import numpy as np

from covtest import compute_path, solution_at, test_sequence

rng = np.random.default_rng(0)
Q, _ = np.linalg.qr(rng.standard_normal((12, 5)))
U = np.array([-4.0, 2.0, 0.5, -1.0, 3.0])
y = Q @ U

# the path visits the variables in order of |U|
path = compute_path(Q, y)
for e in path.events:
    print(f"knot {e.k}: lambda={e.lam:.3f} {e.kind} x{e.variable} sign {e.sign:+d}")

# any interior lambda gives S_lambda(U)
lam = 1.5
print("solution at 1.5:", np.round(solution_at(path, Q, y, lam), 6))
print("soft threshold: ", np.sign(U) * np.maximum(np.abs(U) - lam, 0))

# covariance statistics match the order-statistic gaps
a = np.append(np.sort(np.abs(U))[::-1], 0.0)
for r, gap in zip(test_sequence(Q, y, sigma2=1.0), a[:-1] * (a[:-1] - a[1:])):
    print(f"step {r.step}: T={r.statistic:.4f}  closed form={gap:.4f}  p={r.p_value:.4f}")
