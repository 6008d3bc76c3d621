"""Schmidt decomposition of pair amplitudes into temporal-mode pairs.

The discretized amplitude Phi, scaled by the grid spacing, is a matrix whose
singular structure carries the entanglement: probabilities p_n are the
squared singular values of Phi*dk, psi_n/phi_n the per-electron mode
functions (orthonormal under sum |psi|^2 dk = 1). Two routes are provided,
a reduced-kernel eigendecomposition and a direct SVD, and they must agree;
tests hold them to 1e-8.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .amplitude import PairAmplitude, build_amplitude
from .errors import ContractViolation, NumericalError, ValidationError
from .io import write_csv
from .params import ControlParams, GridSpec, MomentumGrid

logger = logging.getLogger(__name__)

# probabilities at or below this floor are treated as numerically zero and
# carry no mode functions
P_FLOOR = 1e-12
# spacing below which two probabilities count as degenerate
DEGENERACY_GAP = 1e-10
# eigenvalues of the reduced kernels may round slightly negative; anything
# below this is a real problem
NEGATIVE_EIGENVALUE_LIMIT = -1e-12

METHODS = ("kernel-eig", "svd-oracle")


@dataclass
class RefinementStep:
    """One grid refinement during convergence: resolution and its kappa."""

    n_points: int
    kappa: float


@dataclass(eq=False)
class SchmidtSpectrum:
    """Result of one decomposition.

    ``probs`` holds every eigenvalue (descending, clipped at zero);
    ``modes_psi``/``modes_phi`` hold columns only for probabilities above
    the floor 1e-12. ``kappa`` is 2**h2 by construction. Instances are
    treated as immutable.
    """

    probs: np.ndarray
    modes_psi: np.ndarray
    modes_phi: np.ndarray
    h2: float
    kappa: float
    grid: MomentumGrid
    converged: bool = True
    history: tuple = ()
    degenerate_groups: tuple = ()
    method: str = "kernel-eig"
    spectra_gap: float = 0.0
    params: ControlParams | None = None

    @property
    def n_modes(self) -> int:
        return self.modes_psi.shape[1]


def collision_entropy(probs) -> float:
    """Collision (order-2 Renyi) entropy of a probability vector, in bits.

    [1] -> 0; uniform over m -> log2(m); [0.7, 0.2, 0.1] -> 0.8890.
    """
    p = np.asarray(probs, dtype=float)
    if p.size == 0:
        raise ValidationError("probability vector is empty")
    if np.any(p < 0):
        raise ValidationError("probabilities must be nonnegative")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-8:
        raise ValidationError(f"probabilities sum to {total!r}, expected 1 within 1e-8")
    return -math.log2(float(np.sum(p * p)))


def schmidt_number(probs) -> float:
    """Effective mode count 2**H2; equals 1/sum(p^2) up to rounding."""
    return 2.0 ** collision_entropy(probs)


def reduce_kernels(amp: PairAmplitude):
    """Single-electron reduced kernels (K1, K2) of a normalized amplitude.

    K1(k, k') = sum_k2 Phi(k, k2) Phi*(k', k2) dk and K2 likewise over the
    first argument. Both are Hermitian, positive semidefinite, and share
    their spectrum; trace(K) * dk = 1.
    """
    dk = amp.grid.spacing
    total = float(np.sum(np.abs(amp.values) ** 2)) * dk * dk
    if abs(total - 1.0) > 1e-8:
        raise ContractViolation(
            f"amplitude norm is {total!r}, expected 1 within 1e-8; "
            "pass a freshly built (normalized) amplitude"
        )
    work = _compact(amp.values)
    k1 = (work @ work.conj().T) * dk
    k2 = (work.T @ work.conj()) * dk
    return k1, k2


def _compact(values: np.ndarray) -> np.ndarray:
    # real-valued states (the default envelopes are real) decompose several
    # times faster through the real LAPACK paths
    if np.count_nonzero(values.imag) == 0:
        return np.ascontiguousarray(values.real)
    return values


def _canonical_phase(psi: np.ndarray, phi: np.ndarray):
    # fix the free per-mode phase so exports are reproducible across
    # LAPACK builds: largest-magnitude psi component is real positive
    if psi.shape[1] == 0:
        return psi, phi
    anchor = np.argmax(np.abs(psi), axis=0)
    vals = psi[anchor, np.arange(psi.shape[1])]
    mags = np.abs(vals)
    phase = np.where(mags > 0, vals / np.where(mags > 0, mags, 1.0), 1.0)
    return psi / phase[None, :], phi * phase[None, :]


def _pair_partners(
    probs: np.ndarray, partners: np.ndarray, targets: np.ndarray, dk: float
) -> np.ndarray:
    """Orient the K2 eigenbasis along the pairing targets, block by block.

    Within each (near-)degenerate block of probabilities the eigenbasis is
    arbitrary, so the targets are projected onto the block span and
    orthonormalized in descending-probability order. Nondegenerate blocks
    reduce to a pure phase fix. The result inherits machine-precision
    orthonormality from the eigenvectors at every probability level.
    """
    kept = probs.size
    phi = np.empty_like(partners)
    start = 0
    for stop in range(1, kept + 1):
        if stop < kept and probs[stop - 1] - probs[stop] <= DEGENERACY_GAP:
            continue
        block = partners[:, start:stop]
        coeff = block.conj().T @ targets[:, start:stop] * dk
        width = stop - start
        for j in range(width):
            c = coeff[:, j].copy()
            for prev in range(j):
                c -= coeff[:, prev] * np.vdot(coeff[:, prev], c)
            norm = np.linalg.norm(c)
            if norm == 0.0:
                raise NumericalError(
                    f"mode pairing target vanished in block {start}:{stop}; "
                    "cannot orient the partner basis"
                )
            coeff[:, j] = c / norm
        phi[:, start:stop] = block @ coeff
        start = stop
    return phi


def _degenerate_groups(probs: np.ndarray, kept: int) -> tuple:
    groups = []
    start = 0
    for i in range(1, kept + 1):
        if i == kept or probs[i - 1] - probs[i] > DEGENERACY_GAP:
            if i - start > 1:
                groups.append(tuple(range(start, i)))
            start = i
    return tuple(groups)


def schmidt_decompose(amp: PairAmplitude, method: str = "kernel-eig") -> SchmidtSpectrum:
    """Decompose a normalized amplitude into its temporal-mode spectrum.

    Parameters
    ----------
    amp : PairAmplitude
        Output of :func:`etmsim.amplitude.build_amplitude`.
    method : {"kernel-eig", "svd-oracle"}
        ``kernel-eig`` diagonalizes both reduced kernels and pairs the
        mode families through phi_n = (Phi^T psi_n*) dk / sqrt(p_n), which
        stays exact inside degenerate subspaces. ``svd-oracle`` reads the
        same data off the singular value decomposition of Phi*dk and is
        kept as an independent cross-check.

    Returns
    -------
    SchmidtSpectrum
    """
    if method not in METHODS:
        raise ValidationError(f"method must be one of {METHODS}, got {method!r}")
    dk = amp.grid.spacing
    n = amp.grid.n

    if method == "kernel-eig":
        k1, k2 = reduce_kernels(amp)
        w1, vecs1 = np.linalg.eigh(k1 * dk)
        w2, vecs2 = np.linalg.eigh(k2 * dk)
        worst = float(min(w1.min(), w2.min()))
        if worst < NEGATIVE_EIGENVALUE_LIMIT:
            raise NumericalError(
                f"reduced kernel produced eigenvalue {worst!r} below "
                f"{NEGATIVE_EIGENVALUE_LIMIT}; decomposition unreliable"
            )
        order = np.argsort(w1)[::-1]
        probs = np.clip(w1[order], 0.0, None)
        spectra_gap = float(np.max(np.abs(np.sort(w1) - np.sort(w2))))
        kept = int(np.count_nonzero(probs > P_FLOOR))
        psi = vecs1[:, order[:kept]] / math.sqrt(dk)
        partners = vecs2[:, np.argsort(w2)[::-1][:kept]] / math.sqrt(dk)
        work = _compact(amp.values)
        # pairing targets (Phi^T psi_n*) dk point along the true partner of
        # each psi_n with magnitude sqrt(p_n); they select orientation and
        # phase inside the K2 eigenbasis, which supplies the orthonormality
        targets = (work.T @ psi.conj()) * dk
        phi = _pair_partners(probs[:kept], partners, targets, dk)
    else:
        work = _compact(amp.values) * dk
        u, s, vh = np.linalg.svd(work)
        probs = s**2
        spectra_gap = 0.0
        kept = int(np.count_nonzero(probs > P_FLOOR))
        psi = u[:, :kept] / math.sqrt(dk)
        phi = vh[:kept].T / math.sqrt(dk)

    psi, phi = _canonical_phase(psi, phi)
    h2 = collision_entropy(probs)
    kappa = 2.0**h2
    return SchmidtSpectrum(
        probs=probs,
        modes_psi=psi,
        modes_phi=phi,
        h2=h2,
        kappa=kappa,
        grid=amp.grid,
        degenerate_groups=_degenerate_groups(probs, kept),
        method=method,
        spectra_gap=spectra_gap,
        params=amp.params,
    )


def converge_spectrum(
    params: ControlParams,
    tol: float = 0.05,
    method: str = "kernel-eig",
    max_points: int = 3200,
    growth: float = 1.5,
) -> SchmidtSpectrum:
    """Refine the momentum grid until kappa stabilizes.

    Starting from ``params.grid.n_points``, the grid is refined by the
    ``growth`` factor while the symmetric relative change of kappa between
    successive resolutions stays above ``tol``. The detection window is
    resolved once and held fixed. If the next refinement would exceed
    ``max_points`` the last spectrum is returned with ``converged=False``.

    Returns
    -------
    SchmidtSpectrum
        With ``history`` holding one :class:`RefinementStep` per solve.
    """
    if tol < 0:
        raise ValidationError(f"tol must be >= 0, got {tol!r}")
    if growth <= 1.0:
        raise ValidationError(f"growth must exceed 1, got {growth!r}")

    def solve(n_points: int) -> SchmidtSpectrum:
        p = ControlParams(
            T_I=params.T_I,
            sigma_e=params.sigma_e,
            chi=params.chi,
            grid=GridSpec(
                n_points=n_points,
                half_window=window,
                q_points=params.grid.q_points,
                q_half_window=params.grid.q_half_window,
            ),
        )
        return schmidt_decompose(build_amplitude(p), method=method)

    window = params.grid.half_window
    if window is None:
        window = 5.0 * params.sigma_e + 3.0 * params.chi.center

    n = params.grid.n_points
    spectrum = solve(n)
    history = [RefinementStep(n_points=n, kappa=spectrum.kappa)]
    logger.info("converge: n=%d kappa=%.8g", n, spectrum.kappa)
    converged = False
    while True:
        n_next = math.ceil(growth * n)
        if n_next > max_points:
            break
        refined = solve(n_next)
        history.append(RefinementStep(n_points=n_next, kappa=refined.kappa))
        change = abs(refined.kappa - spectrum.kappa) / (
            0.5 * (refined.kappa + spectrum.kappa)
        )
        logger.info(
            "converge: n=%d kappa=%.8g change=%.3e", n_next, refined.kappa, change
        )
        n, spectrum = n_next, refined
        if change <= tol:
            converged = True
            break

    spectrum.converged = converged
    spectrum.history = tuple(history)
    if not converged:
        logger.warning(
            "converge: stopped at n=%d without meeting tol=%g (cap %d points)",
            n,
            tol,
            max_points,
        )
    return spectrum


def export_spectrum_csv(spec: SchmidtSpectrum, path) -> list:
    """Write the probability ladder as (n, p_n) rows, 1-based."""
    write_csv(
        path,
        ["n", "p_n"],
        ((i + 1, float(p)) for i, p in enumerate(spec.probs)),
    )
    return [str(path)]


def export_modes_csv(spec: SchmidtSpectrum, path, mode_cut: float = 1e-6) -> list:
    """Write mode functions as columns (k, then re/im pairs per mode)."""
    keep = int(np.count_nonzero(spec.probs[: spec.n_modes] > mode_cut))
    header = ["k"]
    for i in range(keep):
        header += [
            f"psi{i + 1}_re",
            f"psi{i + 1}_im",
            f"phi{i + 1}_re",
            f"phi{i + 1}_im",
        ]

    def rows():
        for row in range(spec.grid.n):
            out = [float(spec.grid.points[row])]
            for i in range(keep):
                psi = complex(spec.modes_psi[row, i])
                phi = complex(spec.modes_phi[row, i])
                out += [psi.real, psi.imag, phi.real, phi.imag]
            yield out

    write_csv(path, header, rows())
    return [str(path)]
