#!/usr/bin/env python3
"""Demand-size distributions: max-normalized samples and the y**alpha law.

Real traffic matrices show a few large demands and many small ones. After
dividing by the largest demand, their empirical cdf is modeled well by
G(y) = y**alpha with a small alpha. Three facts demonstrated here:

1. For Beta(alpha, 1) draws, the cdf of a non-maximal draw divided by the
   sample maximum is exactly y**alpha, for every sample size n.
2. Sampling via inverse cdf plus max-normalization reproduces that law to
   KS distance well under 0.01 at n = 1e5.
3. The closed-form maximum-likelihood estimate recovers alpha from data.
"""

import numpy as np

from tmest import (
    BetaAlphaOne,
    PowerLawCdf,
    Uniform01,
    fit_alpha_mle,
    ks_distance,
    normalized_cdf_of_max_ratio,
    sample_normalized_power_law,
)

# 1. quadrature vs the closed form, across sample sizes
print("max-ratio cdf vs y**alpha (abs error):")
for alpha in (0.01154, 0.5, 2.0):
    src = BetaAlphaOne(alpha)
    worst = 0.0
    for n in (2, 5, 50):
        for y in np.linspace(0, 1, 41):
            worst = max(worst, abs(normalized_cdf_of_max_ratio(src, n, float(y)) - y**alpha))
    print(f"  alpha={alpha:<8} worst over n in (2,5,50): {worst:.2e}")

# uniform sources are the alpha = 1 case
g = normalized_cdf_of_max_ratio(Uniform01(), 3, 0.5)
print(f"uniform source, n=3: G(0.5) = {g:.6f} (alpha=1 power law)")

# 2. sampling fidelity
print("\nsampling fidelity at n=1e5:")
for alpha in (0.01, 0.5, 1.0):
    s = sample_normalized_power_law(10**5, alpha, seed=42)
    print(f"  alpha={alpha:<6} KS to y^alpha = {ks_distance(s, PowerLawCdf(alpha)):.4f}")

# 3. exponent recovery; the tiny exponents are the regime real networks show
for alpha in (0.0107, 0.01411, 0.3):
    s = sample_normalized_power_law(10**5, alpha, seed=7)
    a_hat = fit_alpha_mle(s)
    print(f"fitted alpha: true={alpha:<8} mle={a_hat:.5f} (rel err {abs(a_hat-alpha)/alpha:.1%})")

# what such traffic looks like: almost all demands are tiny fractions of the max
s = sample_normalized_power_law(2000, 0.0107, seed=1)
print(f"\nalpha=0.0107, 2000 demands: P(demand < 1% of max) = {np.mean(s < 0.01):.2%}")
