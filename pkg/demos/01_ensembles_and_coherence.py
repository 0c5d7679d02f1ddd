"""
Measurement ensembles and their coherence
=========================================

Builds each of the five measurement ensembles and compares its coherence with
the Welch lower bound ``sqrt((N - n) / (n (N - 1)))``.  The two structured
dictionaries meet the bound, the random ones sit a few times above it.
"""

import math

from jointsparse import (
    alltop_gabor,
    bernoulli_ensemble,
    coherence,
    coherence_lower_bound,
    dirac_fourier,
    gaussian_ensemble,
    spherical_ensemble,
)

# Dirac-Fourier: identity next to the unitary DFT, coherence exactly 1/sqrt(n)
A = dirac_fourier(32)
print(f"Dirac-Fourier 32x64      mu = {coherence(A):.6f}   1/sqrt(n) = {1 / math.sqrt(32):.6f}")

# Alltop-Gabor: all time-frequency shifts of the Alltop window, n prime
G = alltop_gabor(29)
print(f"Alltop-Gabor 29x841      mu = {coherence(G):.6f}   1/sqrt(n) = {1 / math.sqrt(29):.6f}"
      f"   Welch = {coherence_lower_bound(29, 841):.6f}")

# random ensembles, seeded and reproducible; Gaussian columns are not renormalized,
# so its largest off-diagonal inner product can exceed 1
for name, make in (("spherical", spherical_ensemble), ("gaussian", gaussian_ensemble),
                   ("bernoulli", bernoulli_ensemble)):
    R = make(32, 256, 0)
    print(f"{name:10s} 32x256      mu = {coherence(R):.6f}   Welch = {coherence_lower_bound(32, 256):.6f}")

# the same seed always gives the same matrix
assert (spherical_ensemble(32, 256, 0).entries == spherical_ensemble(32, 256, 0).entries).all()
