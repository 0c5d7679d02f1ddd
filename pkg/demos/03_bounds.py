"""
Failure-probability bounds as the number of channels grows
==========================================================

All of the average-case bounds decay exponentially in the number of channels
``L``.  This script tabulates them for a 256-column dictionary and compares
the Gaussian norm tail with a Monte Carlo estimate.
"""

import numpy as np

from jointsparse import bounds as B
from jointsparse.montecarlo import empirical_bernstein_tail

N, k = 256, 4
alpha, theta, eps = 0.25, 0.5, 0.25

print(" L    A_L      l21(alpha=1/4)  thresh(theta=1/2)  somp(eps=1/4)")
for L in (1, 2, 4, 8, 16, 32, 64):
    p21 = B.l21_failure_bound(N, L, alpha).failure_probability
    pth = B.thresholding_failure_bound(N, L, theta).failure_probability
    pso = B.somp_failure_bound(N, k, L, eps).failure_probability
    print(f"{L:2d}  {B.a_l_constant(L):6.3f}   {p21:12.3e}   {pth:14.3e}   {pso:12.3e}")

# smallest alpha that keeps the mixed-norm bound below 1%
for L in (4, 16, 64):
    print(f"L = {L:2d}: alpha <= {B.min_alpha_for_failure(N, L, 0.01):.3f} gives failure <= 1%")

# the tail P(||Phi a||_2 >= u ||a||_2 A_L) against its bound
a = np.random.default_rng(0).standard_normal(8)
for L in (1, 4):
    for u in (1.5, 2.0):
        f = empirical_bernstein_tail(a, L, u, 100000, seed=L)
        print(f"L = {L}, u = {u}: empirical {f:.5f} <= bound {B.bernstein_tail(u, L):.5f}")
