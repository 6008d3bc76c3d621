"""Decompose a pair amplitude into its natural mode pairs.

Any joint amplitude can be written as a sum over orthogonal mode pairs,
Phi(k1, k2) = sum_n sqrt(p_n) psi_n(k1) phi_n(k2). The weight spectrum
p_n tells you how entangled the pair is: a single dominant weight means
the state factorizes, a flat spectrum means many modes share the state.
The collision entropy H2 = -log2(sum p_n^2) and the participation number
kappa = 2**H2 condense that into one number each.

This script solves one regime on a coarse grid, prints the refinement
ladder the solver walked to reach its tolerance, and shows the top of
the converged spectrum.
"""

import numpy as np

from etmsim import ControlParams, GridSpec, converge_spectrum

PARAMS = ControlParams(
    T_I=1e-5,
    sigma_e=0.05,
    grid=GridSpec(n_points=96, q_points=257),
)


def main():
    spec = converge_spectrum(PARAMS, tol=0.05)
    print(f"T_I = {PARAMS.T_I:g}, sigma_e = {PARAMS.sigma_e:g}")
    print(f"converged: {spec.converged}")
    print()

    print("refinement ladder (kappa should settle down):")
    prev = None
    for step in spec.history:
        line = f"  n_points = {step.n_points:4d}  kappa = {step.kappa:.6f}"
        if prev is not None:
            change = abs(step.kappa - prev) / (0.5 * (step.kappa + prev))
            line += f"  change = {change:.2e}"
        print(line)
        prev = step.kappa
    print()

    print(f"H2 = {spec.h2:.6f} bits, kappa = {spec.kappa:.6f}")
    kept = spec.probs[: spec.n_modes]
    print(f"{spec.n_modes} modes above the weight floor; top 6:")
    for n, p in enumerate(kept[:6]):
        print(f"  p_{n} = {p:.6f}")
    print(f"cumulative weight of the top 6: {kept[:6].sum():.6f}")

    # kappa is exactly 2**H2, and the weights are a probability vector
    assert abs(spec.kappa - 2.0**spec.h2) < 1e-12
    assert abs(float(np.sum(spec.probs)) - 1.0) < 1e-9
    print()
    print("identities hold: kappa == 2**H2 and sum(p_n) == 1")


if __name__ == "__main__":
    main()
