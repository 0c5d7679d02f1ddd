"""
Certificates and the three recovery algorithms
==============================================

Draws a jointly sparse signal on a Dirac-Fourier dictionary, checks the
deterministic conditions for its support and runs mixed-norm minimization,
thresholding and SOMP on the measurements.
"""

import numpy as np

from jointsparse import (
    CoefficientModel,
    Support,
    analyze,
    dirac_fourier,
    dual_certificate_check,
    p_somp,
    p_thresholding,
    sample_coefficients,
    solve_l21,
)

A = dirac_fourier(32)
n, N = A.shape
k, L = 4, 3

# a random support and complex Gaussian coefficients on it
rng = np.random.default_rng(5)
S = Support.from_iterable(rng.choice(N, size=k, replace=False).tolist())
X = sample_coefficients(CoefficientModel.identity("ComplexGaussian", k), S, N, L, seed=5).entries
Y = A.entries @ X
print("support:", list(S))

# deterministic conditions for this support
report = analyze(A, S)
print(f"mu2 = {report.mu2:.3f}   delta(S) = {report.delta_S:.3f}   delta*(S) = {report.delta_star:.3f}")
print(f"max ||A_S^+ a_l||_1 = {report.pinv_l1_max:.3f}   (exact recovery condition: {report.erc_pass})")
print(f"max ||A_S^+ a_l||_2 = {report.pinv_l2_max:.3f}")

# the dual certificate depends on the signs of X, not only on S
cert = dual_certificate_check(A, X)
print(f"dual certificate passes: {cert.passed}")

# recovery
for name, res in (("l21", solve_l21(A, Y)), ("thresholding", p_thresholding(A, Y, k)),
                  ("somp", p_somp(A, Y, k))):
    err = np.linalg.norm(res.estimate.entries - X) / np.linalg.norm(X)
    print(f"{name:13s} support match = {res.recovered_support == S}   rel. error = {err:.1e}")
