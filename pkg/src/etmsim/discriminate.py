"""Mode discrimination with shaped probes and counting tomography.

Each realization interferes one incoming temporal mode with a shaped probe
on a balanced splitter; the matched probe answers with a full peak
(P(0) = 1), an orthogonal one stays at the random level 1/2. Counting how
often each probe fires over many shots estimates the probability ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .hom import CoincidenceScan, assemble_scan, _spectrum_ref
from .io import write_json
from .params import MomentumGrid
from .schmidt import SchmidtSpectrum


@dataclass(eq=False)
class ProbeMode:
    """A shaped single-electron probe on the detection grid."""

    samples: np.ndarray
    label: str
    grid: MomentumGrid
    normalized: bool = field(default=False)

    @classmethod
    def from_samples(cls, samples, grid: MomentumGrid, label: str) -> "ProbeMode":
        """Normalize raw samples on their grid."""
        v = np.asarray(samples, dtype=complex)
        if v.shape != (grid.n,):
            raise ValidationError(
                f"probe samples have shape {v.shape}, expected ({grid.n},)"
            )
        norm = math.sqrt(float(np.sum(np.abs(v) ** 2)) * grid.spacing)
        if norm == 0.0:
            raise ValidationError(f"probe {label!r} is identically zero")
        return cls(samples=v / norm, label=label, grid=grid, normalized=True)

    def check_norm(self) -> float:
        total = float(np.sum(np.abs(self.samples) ** 2)) * self.grid.spacing
        if abs(total - 1.0) > 1e-10:
            raise ValidationError(
                f"probe {self.label!r} has squared norm {total!r}, "
                "expected 1 within 1e-10"
            )
        return total


def schmidt_probes(spec: SchmidtSpectrum, count: int) -> list:
    """The first ``count`` paired modes of a spectrum, as probes."""
    if not (1 <= count <= spec.n_modes):
        raise ValidationError(
            f"count must lie in [1, {spec.n_modes}] for this spectrum, got {count}"
        )
    return [
        ProbeMode(
            samples=spec.modes_phi[:, m].astype(complex),
            label=f"mode{m + 1}",
            grid=spec.grid,
            normalized=True,
        )
        for m in range(count)
    ]


@dataclass(eq=False)
class TomographyResult:
    """Counting-tomography estimates with their binomial uncertainties.

    ``estimates`` are per-probe firing frequencies; shots a probe cannot
    claim land in ``other_rate``, so estimates sum to 1 together with it.
    ``true_probs`` echoes the sampled ladder for comparison.
    """

    estimates: np.ndarray
    stderr: np.ndarray
    other_rate: float
    shots: int
    seed: int
    true_probs: np.ndarray
    true_other: float
    threshold: float
    labels: tuple


def _probe_response(spec: SchmidtSpectrum, probe: ProbeMode, n: int) -> float:
    dk = spec.grid.spacing
    overlap = complex(np.sum(spec.modes_phi[:, n].conj() * probe.samples) * dk)
    return 0.5 + 0.5 * abs(overlap) ** 2


def probe_coincidence(
    spec: SchmidtSpectrum, n: int, probe: ProbeMode, deltas
) -> CoincidenceScan:
    """Coincidence curve of incoming mode ``n`` against one probe.

    P(delta) = 1/2 + 1/2 |sum_k phi_n*(k) probe(k) e^{-i 2 pi k delta} dk|^2;
    unity at delta = 0 for the matched probe, flat 1/2 for an orthogonal one.
    """
    if not (0 <= n < spec.n_modes):
        raise ValidationError(
            f"mode index {n} out of range for {spec.n_modes} paired modes"
        )
    if probe.grid.n != spec.grid.n or not np.array_equal(
        probe.grid.points, spec.grid.points
    ):
        raise ValidationError(
            f"probe {probe.label!r} lives on a different grid "
            f"({probe.grid.n} points) than the spectrum ({spec.grid.n})"
        )
    probe.check_norm()
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0:
        raise ValidationError("deltas is empty; nothing to scan")
    if not np.all(np.isfinite(deltas)):
        raise ValidationError("deltas must be finite")

    k = spec.grid.points
    dk = spec.grid.spacing
    phases = np.exp(-2j * math.pi * np.outer(k, deltas))
    overlap = (spec.modes_phi[:, n].conj() * probe.samples) @ phases * dk
    p = 0.5 + 0.5 * np.abs(overlap) ** 2
    ref = f"{_spectrum_ref(spec)};incoming=mode{n + 1};probe={probe.label}"
    return assemble_scan(deltas, p, ref, 0.0, spec.kappa)


def run_tomography(
    spec: SchmidtSpectrum,
    probes,
    shots: int,
    seed: int,
    threshold: float = 0.25,
) -> TomographyResult:
    """Monte-Carlo mode counting against a probe bank.

    Per shot an incoming mode index is drawn with probability p_n,
    renormalized over the first M = len(probes) modes plus an "other"
    bucket holding the remaining weight. A probe claims the shot when its
    zero-delay peak fires, P(0) > 0.5 + threshold; with several firing the
    strongest response wins, with none the shot lands in "other". Each
    shot is claimed exactly once, so frequencies sum to 1. Counts are
    accumulated from a single multinomial draw, which makes the result
    independent of shot ordering and deterministic for a given seed.
    """
    probes = list(probes)
    if len(probes) == 0:
        raise ValidationError("need at least one probe")
    if int(shots) != shots or shots < 1:
        raise ValidationError(f"shots must be a positive integer, got {shots!r}")
    if not (0.0 < threshold < 0.5):
        raise ValidationError(f"threshold must lie in (0, 0.5), got {threshold!r}")
    m = len(probes)
    if m > spec.n_modes:
        raise ValidationError(
            f"{m} probes exceed the {spec.n_modes} paired modes of the spectrum"
        )
    for probe in probes:
        probe.check_norm()

    true_probs = spec.probs[:m].astype(float)
    other_true = float(max(spec.probs.sum() - true_probs.sum(), 0.0))
    pvec = np.concatenate([true_probs, [other_true]])
    pvec = pvec / pvec.sum()

    # responses of every sampled incoming mode against every probe; the
    # "other" bucket holds modes orthogonal to the probe bank and fires none
    fire_level = 0.5 + threshold
    assignment = np.full(m + 1, m)  # default: claimed by "other"
    for n in range(m):
        responses = np.array([_probe_response(spec, probe, n) for probe in probes])
        firing = responses > fire_level
        if np.any(firing):
            best = int(np.argmax(np.where(firing, responses, -np.inf)))
            assignment[n] = best

    rng = np.random.default_rng(seed)
    counts = rng.multinomial(int(shots), pvec)
    claimed = np.zeros(m + 1, dtype=np.int64)
    for category, claimed_by in enumerate(assignment):
        claimed[claimed_by] += counts[category]

    freq = claimed / float(shots)
    estimates = freq[:m]
    stderr = np.sqrt(estimates * (1.0 - estimates) / float(shots))
    return TomographyResult(
        estimates=estimates,
        stderr=stderr,
        other_rate=float(freq[m]),
        shots=int(shots),
        seed=int(seed),
        true_probs=true_probs,
        true_other=other_true,
        threshold=threshold,
        labels=tuple(p.label for p in probes),
    )


def export_tomography(result: TomographyResult, path) -> list:
    """Write a tomography result as a structured JSON record."""
    record = {
        "shots": result.shots,
        "seed": result.seed,
        "threshold": result.threshold,
        "other_rate": result.other_rate,
        "true_other": result.true_other,
        "modes": [
            {
                "label": result.labels[i],
                "estimate": float(result.estimates[i]),
                "stderr": float(result.stderr[i]),
                "true_p": float(result.true_probs[i]),
            }
            for i in range(len(result.labels))
        ],
    }
    write_json(path, record)
    return [str(path)]
