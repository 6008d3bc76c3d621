"""Build two-electron pair amplitudes and look at their momentum structure.

Two beams passing a polariton-supporting film exchange momentum, which
correlates their longitudinal momenta. This script builds the joint
amplitude Phi(k1, k2) for two regimes, checks the normalization, and
compares the spread of |Phi| along the diagonal k1 = k2 against the
antidiagonal k1 = -k2. A ratio below one means the momenta are
anticorrelated (the pair prefers k1 ~ -k2).
"""

import os

import numpy as np

from etmsim import (
    ControlParams,
    GridSpec,
    amplitude_cross_section,
    build_amplitude,
    cross_section_extent,
    export_amplitude_csv,
)

OUT = os.path.join(os.path.dirname(__file__), "output")

REGIMES = {
    "long interaction, broad beams": ControlParams(
        T_I=1e-2, sigma_e=2.0, grid=GridSpec(n_points=200, q_points=257)
    ),
    "short interaction, narrow beams": ControlParams(
        T_I=1e-5, sigma_e=0.05, grid=GridSpec(n_points=200, q_points=257)
    ),
}


def main():
    os.makedirs(OUT, exist_ok=True)
    amps = {}
    for label, params in REGIMES.items():
        amp = build_amplitude(params)
        amps[label] = amp
        dk = amp.grid.spacing
        norm = np.sqrt(np.sum(np.abs(amp.values) ** 2) * dk * dk)
        print(f"{label}:")
        print(f"  T_I = {params.T_I:g}, sigma_e = {params.sigma_e:g}")
        print(f"  norm = {norm:.12f} (should be 1)")

        extents = {}
        for axis in ("diagonal", "antidiagonal"):
            coords, mags = amplitude_cross_section(amp, axis)
            extents[axis] = cross_section_extent(coords, mags)
            print(f"  {axis} half-max extent: {extents[axis]:.4f}")
        ratio = extents["diagonal"] / extents["antidiagonal"]
        tag = "anticorrelated" if ratio < 1 else "correlated"
        print(f"  diagonal/antidiagonal ratio = {ratio:.3f} ({tag})")

        stem = label.split(",")[0].replace(" ", "_")
        written = export_amplitude_csv(amp, os.path.join(OUT, f"{stem}.csv"))
        print(f"  wrote {', '.join(os.path.basename(p) for p in written)}")
        print()

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available, skipping the figure")
        return

    fig, axes = plt.subplots(1, len(amps), figsize=(9, 4), layout="constrained")
    for ax, (label, amp) in zip(axes, amps.items()):
        half = 3.0 * amp.params.sigma_e
        k = amp.grid.points
        sel = np.abs(k) <= half
        ax.pcolormesh(k[sel], k[sel], np.abs(amp.values)[np.ix_(sel, sel)])
        ax.set_title(label, fontsize=9)
        ax.set_xlabel("k2")
        ax.set_ylabel("k1")
        ax.set_aspect("equal")
    path = os.path.join(OUT, "pair_amplitude.png")
    fig.savefig(path, dpi=150)
    print(f"figure saved to {path}")


if __name__ == "__main__":
    main()
