"""Estimating the fused inverse by a Monte-Carlo chain.

Instead of multiplying channels analytically, sample one correction per
noisy layer, propagate the running product to the circuit start, reduce it
at the boundary, and tally signed occurrences.  Opposite-sign paths landing
on the same correction cancel in the tally; the surviving signed mass over
the number of paths is exactly the overhead reduction ratio.
"""

import numpy as np

from pmit import (
    InverseOptions,
    build_global_inverse,
    gate_depolarizing_noise,
    mcmc_global_estimate,
    pec_total_gamma,
    random_clifford_circuit,
)

circuit = random_clifford_circuit(3, 4, np.random.default_rng(11))
noise = gate_depolarizing_noise(circuit, 0.05)
analytic = build_global_inverse(circuit, noise, InverseOptions(xi_reduce=True))
print(f"analytic fused overhead: {analytic.gamma:.5f} "
      f"(local product {pec_total_gamma(circuit, noise):.5f})")

for n_samples in (1_000, 10_000, 100_000, 1_000_000):
    est = mcmc_global_estimate(circuit, noise, n_samples, np.random.default_rng(42))
    print(f"{n_samples:>9d} paths: interfering {est.interfering:>7d}  "
          f"ratio {est.gamma_ratio:.5f}  overhead estimate {est.gamma_estimate:.5f}")

est = mcmc_global_estimate(circuit, noise, 1_000_000, np.random.default_rng(42))
top = sorted(est.tallies.items(), key=lambda kv: -abs(kv[1]))[:5]
print("top tallied corrections:",
      ", ".join(f"{p.to_label()}:{v:+d}" for p, v in top))
