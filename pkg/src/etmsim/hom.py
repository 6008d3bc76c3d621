"""Two-electron coincidence at a balanced beam splitter.

For a Schmidt spectrum {p_n, phi_n} the coincidence probability against the
path difference delta (in units of the film wavelength) is

    P12(delta) = 1/2 + 1/2 sum_nm sqrt(p_n p_m) |I_nm(delta)|^2,

with mode overlaps I_nm(delta) = sum_k phi_n*(k) phi_m(k) e^{-i 2 pi k delta} dk
under the nonrecoil linearization of the electron dispersion (the remaining
k0-dependent phase is global and drops out of the modulus). The peak runs
from 1/2 (distinguishable) to 1 (δ = 0, fermionic antibunching).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .io import sidecar_path, write_csv, write_json
from .schmidt import SchmidtSpectrum

# modes below this probability are dropped from the double sum; the dropped
# weight is reported on the scan. Low enough that P12(0) stays within 1e-6
# of unity for every reachable spectrum.
MODE_CUT_DEFAULT = 1e-9


@dataclass(eq=False)
class CoincidenceScan:
    """Sampled coincidence curve with its summary numbers.

    ``fwhm`` is the full width at half of (peak - 1/2), by linear
    interpolation of the crossings on both sides of the peak (NaN when the
    scan range does not reach the half level). ``baseline`` is estimated
    from the largest-|delta| samples.
    """

    deltas: np.ndarray
    p12: np.ndarray
    fwhm: float
    baseline: float
    spectrum_ref: str
    truncated_weight: float
    kappa: float


def _kept(spec: SchmidtSpectrum, mode_cut: float):
    kept = spec.probs[: spec.n_modes]
    sel = kept > mode_cut
    truncated = float(spec.probs.sum() - kept[sel].sum())
    return spec.modes_phi[:, sel], kept[sel], truncated


def _phase_factors(k: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    return np.exp(-2j * math.pi * np.outer(k, deltas))


def _batched_overlaps(modes: np.ndarray, k: np.ndarray, deltas: np.ndarray, dk: float):
    """All I_nm(delta) at once: (M, M, D) tensor."""
    phases = _phase_factors(k, deltas)
    pairs = modes.conj()[:, :, None] * modes[:, None, :]
    return np.tensordot(pairs, phases, axes=([0], [0])) * dk


def overlap_integral(spec: SchmidtSpectrum, n: int, m: int, delta: float) -> complex:
    """Overlap I_nm(delta) of two paired modes under a path shift.

    At delta = 0 this is the Kronecker delta (orthonormality); |I_nn| <= 1
    everywhere; a Gaussian mode of momentum std sigma gives
    |I_nn| = exp(-(2 pi sigma delta)^2 / 2).
    """
    if not (0 <= n < spec.n_modes and 0 <= m < spec.n_modes):
        raise ValidationError(
            f"mode indices ({n}, {m}) out of range for {spec.n_modes} paired modes"
        )
    k = spec.grid.points
    dk = spec.grid.spacing
    phase = np.exp(-2j * math.pi * k * float(delta))
    return complex(
        np.sum(spec.modes_phi[:, n].conj() * spec.modes_phi[:, m] * phase) * dk
    )


def _spectrum_ref(spec: SchmidtSpectrum) -> str:
    bits = [f"kappa={spec.kappa:.9g}", f"n={spec.grid.n}", f"method={spec.method}"]
    if spec.params is not None:
        bits = [
            f"T_I={spec.params.T_I:.9g}",
            f"sigma_e={spec.params.sigma_e:.9g}",
        ] + bits
    return ";".join(bits)


def _fwhm_from_samples(deltas: np.ndarray, p12: np.ndarray) -> float:
    order = np.argsort(deltas)
    x, y = deltas[order], p12[order]
    peak_idx = int(np.argmax(y))
    level = 0.5 * (y[peak_idx] + 0.5)

    def cross(direction: int) -> float:
        i = peak_idx
        while 0 <= i + direction < y.size and y[i + direction] >= level:
            i += direction
        j = i + direction
        if j < 0 or j >= y.size:
            return math.nan
        frac = (y[i] - level) / (y[i] - y[j])
        return x[i] + frac * (x[j] - x[i])

    left = cross(-1)
    right = cross(+1)
    return float(right - left)


def coincidence_scan(
    spec: SchmidtSpectrum, deltas, mode_cut: float = MODE_CUT_DEFAULT
) -> CoincidenceScan:
    """Sample P12 over a list of path differences.

    Parameters
    ----------
    spec : SchmidtSpectrum
    deltas : array_like
        Path differences in film-wavelength units; must be nonempty and
        finite. Samples are evaluated in the given order.
    mode_cut : float
        Probability below which modes are dropped from the double sum;
        the dropped weight is reported as ``truncated_weight``.

    Returns
    -------
    CoincidenceScan
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0:
        raise ValidationError("deltas is empty; nothing to scan")
    if not np.all(np.isfinite(deltas)):
        raise ValidationError("deltas must be finite")

    modes, probs, truncated = _kept(spec, mode_cut)
    overlaps = _batched_overlaps(modes, spec.grid.points, deltas, spec.grid.spacing)
    w = np.sqrt(probs)
    weights = w[:, None] * w[None, :]
    p12 = 0.5 + 0.5 * np.einsum("nm,nmd->d", weights, np.abs(overlaps) ** 2)
    return assemble_scan(deltas, p12, _spectrum_ref(spec), truncated, spec.kappa)


def assemble_scan(
    deltas: np.ndarray,
    p12: np.ndarray,
    spectrum_ref: str,
    truncated_weight: float,
    kappa: float,
) -> CoincidenceScan:
    """Package sampled values with their width and baseline summaries."""
    tail = max(2, int(math.ceil(0.05 * deltas.size)))
    tail_idx = np.argsort(np.abs(deltas))[-tail:]
    baseline = float(np.mean(p12[tail_idx]))
    return CoincidenceScan(
        deltas=deltas,
        p12=p12,
        fwhm=_fwhm_from_samples(deltas, p12),
        baseline=baseline,
        spectrum_ref=spectrum_ref,
        truncated_weight=truncated_weight,
        kappa=kappa,
    )


def dominant_mode_std(spec: SchmidtSpectrum) -> float:
    """Momentum standard deviation of the dominant mode's density."""
    dk = spec.grid.spacing
    density = np.abs(spec.modes_phi[:, 0]) ** 2
    mean = float(np.sum(spec.grid.points * density) * dk)
    var = float(np.sum((spec.grid.points - mean) ** 2 * density) * dk)
    return math.sqrt(var)


def default_deltas(
    spec: SchmidtSpectrum, n_samples: int = 241, widths: float = 5.0
) -> np.ndarray:
    """Symmetric scan range covering ``widths`` reference peak widths.

    The reference width is the kappa = 1 closed form
    2 sqrt(ln 2) / (2 pi sigma) evaluated with the dominant mode's
    momentum std; ``n_samples`` is forced odd so delta = 0 is sampled.
    """
    if n_samples < 3:
        raise ValidationError(f"n_samples must be >= 3, got {n_samples}")
    n = n_samples if n_samples % 2 == 1 else n_samples + 1
    ref = 2.0 * math.sqrt(math.log(2.0)) / (2.0 * math.pi * dominant_mode_std(spec))
    half = widths * ref
    return (np.arange(n) - 0.5 * (n - 1)) * (2.0 * half / (n - 1))


def peak_width_vs_kappa(sweep) -> list:
    """Tabulate (kappa, fwhm) over spectra, sorted by kappa.

    ``sweep`` is a list of (ControlParams, SchmidtSpectrum) pairs; each
    spectrum is scanned over its own default range.
    """
    entries = list(sweep)
    if len(entries) < 2:
        raise ValidationError("need at least 2 spectra to tabulate width vs kappa")
    rows = []
    for _params, spec in entries:
        scan = coincidence_scan(spec, default_deltas(spec))
        rows.append((spec.kappa, scan.fwhm))
    rows.sort(key=lambda r: r[0])
    return rows


def export_scan_csv(scan: CoincidenceScan, path) -> list:
    """Write (delta_over_lambda_p, p12) rows plus a summary sidecar."""
    write_csv(
        path,
        ["delta_over_lambda_p", "p12"],
        zip((float(d) for d in scan.deltas), (float(p) for p in scan.p12)),
    )
    summary = {
        "kappa": scan.kappa,
        "fwhm": scan.fwhm,
        "baseline": scan.baseline,
        "truncated_weight": scan.truncated_weight,
        "spectrum_ref": scan.spectrum_ref,
    }
    meta = sidecar_path(path, suffix=".summary.json")
    write_json(meta, summary)
    return [str(path), meta]
