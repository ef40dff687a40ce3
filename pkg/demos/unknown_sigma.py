"""
Plugging in an estimate of sigma^2
==================================

When sigma^2 is unknown and n > p, the full least-squares residual mean
square gives F_1 = T_1 sigma^2 / sigma_hat^2, compared with F(2, n - p).
With n - p = 20 the F law has a heavier tail than Exp(1).
"""

import numpy as np

from covtest import ExpScale, FTwo, SimulationConfig, null_table

for rho in (0.0, 0.8):
    cfg = SimulationConfig(n=100, p=80, correlation="ar1", rho=rho,
                           replications=1000, seed=4, estimate_sigma=True)
    s = null_table(cfg)
    x = s.statistics
    print(f"rho={rho}: mean {x.mean():.3f} var {x.var(ddof=1):.3f} "
          f"95% quantile {np.quantile(x, 0.95):.3f}")
    for law in (ExpScale(), FTwo(20)):
        print(f"   P(F_1 > q95 of {law}) = {np.mean(x > law.ppf(0.95)):.3f}")
