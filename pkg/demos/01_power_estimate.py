"""
Estimating power for a two-group equivalence test
=================================================

A planned trial compares two drug formulations whose responses are
normal with unequal variances.  We want the probability that the
Welch-based TOST procedure concludes equivalence at the planned group
sizes.
"""

import time

from bepower import DesignSpec, empirical_power, naive_power

# the anticipated design: mean difference -4 in response units, group
# SDs 18 and 15, equivalence limits +-19.2, one-sided level 0.05
spec = DesignSpec(mu_diff=-4.0, sigma1=18.0, sigma2=15.0,
                  delta_L=-19.2, delta_U=19.2, alpha=0.05)

# the mapped estimator never simulates raw data: each point of a
# randomized Sobol' sequence becomes the sufficient statistics of one
# trial, and power is the fraction landing in the rejection region
t0 = time.perf_counter()
p_mapped = empirical_power(spec, n1=20, n2=20, m=65536, seed=7)
t_mapped = time.perf_counter() - t0
print(f"mapped estimator:  power = {p_mapped:.4f}   ({t_mapped:.2f} s)")

# the naive route simulates full samples and runs both one-sided Welch
# tests on each; it is the slow reference the mapped route must match
t0 = time.perf_counter()
p_naive = naive_power(spec, n1=20, n2=20, m=65536, seed=7)
t_naive = time.perf_counter() - t0
print(f"naive simulation:  power = {p_naive:.4f}   ({t_naive:.2f} s)")

# with small groups, power collapses: at n = 3 per group the test
# almost never concludes equivalence even though it holds
print(f"power at n = 3:    {empirical_power(spec, 3, 3, 65536, seed=7):.4f}")

# replicate spread is where the Sobol' sequence earns its keep; at a
# fixed budget the mapped estimates barely move across seeds
for seed in (1, 2, 3):
    print(f"seed {seed}: mapped = "
          f"{empirical_power(spec, 20, 20, 1024, seed):.4f}, "
          f"pseudorandom = "
          f"{empirical_power(spec, 20, 20, 1024, seed, sampler='prng'):.4f}")
