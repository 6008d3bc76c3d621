"""Hand-assembled spectra with known mode content, shared across test files."""

import math

import numpy as np

from etmsim.params import MomentumGrid
from etmsim.schmidt import SchmidtSpectrum, collision_entropy


def symmetric_axis(half, n):
    return (np.arange(n) - 0.5 * (n - 1)) * (2.0 * half / (n - 1))


def hermite_gaussian_modes(sigma, n_points, n_modes, half=None):
    """Discretely orthonormal ladder built on a Gaussian of density std sigma."""
    half = half if half is not None else 8.0 * sigma
    k = symmetric_axis(half, n_points)
    dk = k[1] - k[0]
    base = np.exp(-(k**2) / (4.0 * sigma**2))
    columns = []
    for j in range(n_modes):
        v = base * k**j
        for prev in columns:
            v = v - prev * np.sum(prev * v) * dk
        v = v / math.sqrt(np.sum(v**2) * dk)
        columns.append(v)
    grid = MomentumGrid(points=k, spacing=dk, half_window=half)
    return grid, np.column_stack(columns)


def synthetic_spectrum(probs, sigma=2.0, n_points=401, half=None):
    """SchmidtSpectrum with Hermite-Gaussian modes and prescribed probabilities."""
    probs = np.asarray(probs, dtype=float)
    grid, modes = hermite_gaussian_modes(sigma, n_points, probs.size, half=half)
    h2 = collision_entropy(probs)
    return SchmidtSpectrum(
        probs=probs,
        modes_psi=modes,
        modes_phi=modes,
        h2=h2,
        kappa=2.0**h2,
        grid=grid,
        method="synthetic",
    )
