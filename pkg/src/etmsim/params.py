"""Physical setup, dimensionless control parameters, and grid resolution.

Everything downstream works in dimensionless momentum units (momenta in units
of the film-mode wavenumber 2*pi/lambda_p, measured from the beam center).
The only physics that survives from the dimensional setup is the interaction
time parameter ``T_I = L * lambda_C / (beta * lambda_p**2)`` and the scale
``c_s = 2*pi*T_I`` of the sinc kernel argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ValidationError

# Compton wavelength of the electron, in nm.
COMPTON_WAVELENGTH_NM = 2.426e-3

CHI_KINDS = ("lorentzian-pair", "gaussian-pair", "flat-band")

# chi weight at the quadrature window edge, relative to its peak, above which
# an explicitly requested window is rejected.
EDGE_WEIGHT_LIMIT = 1e-6
# target for the automatically widened window (margin below the hard limit)
_EDGE_WEIGHT_TARGET = 1e-7
_WINDOW_GROWTH = 1.25
_MAX_WINDOW_GROWTH = 64.0


@dataclass
class PhysicalSetup:
    """Dimensional description of the beams and the film.

    Lengths are in nm; ``beta`` is the electron speed in units of c.
    Only ``L``, ``lambda_p``, ``beta`` and ``lambda_C`` enter the
    dimensionless reduction; the remaining fields document the geometry
    (``y0`` sets the evanescent decay scale used by :class:`ChiModel`).
    """

    L: float
    lambda_p: float
    beta: float
    lambda_C: float = COMPTON_WAVELENGTH_NM
    y0: float = 5.0
    sigma_y: float = 0.5
    sigma_x: float | None = None
    d: float = 1.0

    def __post_init__(self):
        if self.sigma_x is None:
            self.sigma_x = 2.0 * math.pi / self.lambda_p if self.lambda_p > 0 else 0.0
        problems = []
        for name in ("L", "lambda_p", "lambda_C", "y0", "sigma_y", "sigma_x", "d"):
            value = getattr(self, name)
            if not (value > 0):
                problems.append(f"{name} must be positive, got {value!r}")
        if not (0.0 < self.beta < 1.0):
            problems.append(f"beta must lie in (0, 1), got {self.beta!r}")
        if problems:
            raise ValidationError(problems)


def dimensionless_time(setup: PhysicalSetup) -> float:
    """Reduce a physical setup to the dimensionless interaction time.

    T_I = L * lambda_C / (beta * lambda_p**2), with T = L / v as the
    traversal time. Doubling beta halves T_I; T_I is linear in L.
    """
    return setup.L * setup.lambda_C / (setup.beta * setup.lambda_p**2)


def sinc_argument_scale(T_I: float) -> float:
    """Scale c_s of the kernel argument c_s * q * (k1 - k2).

    Equals 2*pi*T_I; T_I = 1/(2*pi) gives exactly 1. The 2*pi comes from
    expressing momenta in units of the film wavenumber 2*pi/lambda_p while
    time carries the recoil phase hbar*k^2*T/(2m) structure.
    """
    if not (T_I > 0):
        raise ValidationError(f"T_I must be positive, got {T_I!r}")
    return 2.0 * math.pi * T_I


@dataclass
class ChiModel:
    """Phenomenological film response chi(q), even in q by construction.

    ``kind`` selects the line shape:

    - ``lorentzian-pair``: Lorentzians of HWHM ``width`` at +-``center``
    - ``gaussian-pair``: Gaussians of std ``width`` at +-``center``
    - ``flat-band``: 1 where ||q| - center| <= width/2, else 0

    All shapes are multiplied by the evanescent weight
    exp(-4*pi*evanescent_scale*|q|) (beam height over film wavelength).
    """

    kind: str = "lorentzian-pair"
    center: float = 1.0
    width: float = 0.1
    evanescent_scale: float = 0.05

    def __post_init__(self):
        problems = []
        if self.kind not in CHI_KINDS:
            problems.append(
                f"kind must be one of {', '.join(CHI_KINDS)}; got {self.kind!r}"
            )
        if not (self.width > 0):
            problems.append(f"width must be positive, got {self.width!r}")
        if self.center < 0:
            problems.append(f"center must be >= 0, got {self.center!r}")
        if self.evanescent_scale < 0:
            problems.append(
                f"evanescent_scale must be >= 0, got {self.evanescent_scale!r}"
            )
        if problems:
            raise ValidationError(problems)

    def evaluate(self, q):
        """Evaluate chi on an array of dimensionless momenta."""
        q = np.asarray(q, dtype=float)
        aq = np.abs(q)
        if self.kind == "lorentzian-pair":
            g2 = self.width**2
            shape = g2 / ((q - self.center) ** 2 + g2) + g2 / (
                (q + self.center) ** 2 + g2
            )
        elif self.kind == "gaussian-pair":
            shape = np.exp(-((q - self.center) ** 2) / (2.0 * self.width**2)) + np.exp(
                -((q + self.center) ** 2) / (2.0 * self.width**2)
            )
        else:  # flat-band
            shape = np.where(np.abs(aq - self.center) <= 0.5 * self.width, 1.0, 0.0)
        return shape * np.exp(-4.0 * math.pi * self.evanescent_scale * aq)


@dataclass
class GridSpec:
    """Discretization knobs for the momentum grid and the q quadrature.

    ``half_window=None`` resolves to 5*sigma_e + 3*chi.center. With
    ``q_half_window=None`` the quadrature window starts at the floor
    3*chi.center + 5*chi.width and is widened geometrically until the
    coupling weight at the edge falls below 1e-7 of its peak; ``q_points``
    is scaled along with the window so the node density never drops below
    the requested one. The effective q node count is rounded up to odd so
    that q = 0 is always a node (the evanescent weight has a cusp there).
    """

    n_points: int = 800
    half_window: float | None = None
    q_points: int = 1024
    q_half_window: float | None = None

    def __post_init__(self):
        problems = []
        if int(self.n_points) != self.n_points or self.n_points < 8:
            problems.append(f"n_points must be an integer >= 8, got {self.n_points!r}")
        if int(self.q_points) != self.q_points or self.q_points < 9:
            problems.append(f"q_points must be an integer >= 9, got {self.q_points!r}")
        if self.half_window is not None and not (self.half_window > 0):
            problems.append(
                f"half_window must be positive when given, got {self.half_window!r}"
            )
        if self.q_half_window is not None and not (self.q_half_window > 0):
            problems.append(
                f"q_half_window must be positive when given, got {self.q_half_window!r}"
            )
        if problems:
            raise ValidationError(problems)
        self.n_points = int(self.n_points)
        self.q_points = int(self.q_points)


@dataclass(eq=False)
class MomentumGrid:
    """Uniform symmetric grid of dimensionless momenta."""

    points: np.ndarray
    spacing: float
    half_window: float

    @property
    def n(self) -> int:
        return self.points.size


@dataclass(eq=False)
class QuadratureGrid:
    """Trapezoid nodes and weights for the q integral, with diagnostics."""

    nodes: np.ndarray
    weights: np.ndarray
    half_window: float
    edge_weight_ratio: float

    @property
    def n(self) -> int:
        return self.nodes.size


@dataclass
class ControlParams:
    """Dimensionless control parameters of a single pair-amplitude build."""

    T_I: float
    sigma_e: float
    chi: ChiModel = field(default_factory=ChiModel)
    grid: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self):
        problems = []
        if not (self.T_I > 0):
            problems.append(f"T_I must be positive, got {self.T_I!r}")
        if not (self.sigma_e > 0):
            problems.append(f"sigma_e must be positive, got {self.sigma_e!r}")
        if problems:
            raise ValidationError(problems)


def _symmetric_axis(half_window: float, n: int) -> np.ndarray:
    # (i - (n-1)/2) is exact in binary floating point (integer or half-integer),
    # so paired nodes negate exactly and evenness checks hold bit-for-bit.
    spacing = 2.0 * half_window / (n - 1)
    return (np.arange(n) - 0.5 * (n - 1)) * spacing


def momentum_grid(params: ControlParams) -> MomentumGrid:
    """Resolve the detection-momentum grid for a parameter set."""
    spec = params.grid
    half = spec.half_window
    if half is None:
        half = 5.0 * params.sigma_e + 3.0 * params.chi.center
    pts = _symmetric_axis(half, spec.n_points)
    return MomentumGrid(points=pts, spacing=pts[1] - pts[0], half_window=half)


def _odd(n: int) -> int:
    return n if n % 2 == 1 else n + 1


def quadrature_grid(params: ControlParams) -> QuadratureGrid:
    """Resolve the q quadrature for a parameter set.

    Raises
    ------
    ConfigurationError
        If an explicitly requested window leaves more than 1e-6 of the
        peak coupling weight at its edge, or the automatic widening cannot
        reach its target within a factor 64 of the floor window.
    """
    chi = params.chi
    spec = params.grid
    floor = 3.0 * chi.center + 5.0 * chi.width

    def edge_ratio(window: float) -> float:
        probe = np.linspace(0.0, window, 2049)
        values = chi.evaluate(probe)
        peak = float(values.max())
        if peak <= 0.0:
            raise ConfigurationError(
                "coupling model evaluates to zero everywhere on "
                f"[0, {window!r}]; cannot place a quadrature window"
            )
        return float(chi.evaluate(np.array([window]))[0]) / peak

    if spec.q_half_window is not None:
        window = spec.q_half_window
        ratio = edge_ratio(window)
        if ratio > EDGE_WEIGHT_LIMIT:
            raise ConfigurationError(
                f"q_half_window={window!r} leaves edge weight {ratio:.3e} of peak "
                f"(limit {EDGE_WEIGHT_LIMIT:.0e}); widen the window"
            )
        n_q = _odd(spec.q_points)
    else:
        window = floor
        ratio = edge_ratio(window)
        while ratio > _EDGE_WEIGHT_TARGET:
            window *= _WINDOW_GROWTH
            if window > _MAX_WINDOW_GROWTH * floor:
                raise ConfigurationError(
                    "automatic quadrature window exceeded "
                    f"{_MAX_WINDOW_GROWTH:g} x the floor {floor!r} without the edge "
                    "weight dropping below target; coupling tail too heavy"
                )
            ratio = edge_ratio(window)
        n_q = _odd(int(math.ceil(spec.q_points * window / floor)))

    nodes = _symmetric_axis(window, n_q)
    dq = nodes[1] - nodes[0]
    weights = np.full(n_q, dq)
    weights[0] = 0.5 * dq
    weights[-1] = 0.5 * dq
    return QuadratureGrid(
        nodes=nodes, weights=weights, half_window=window, edge_weight_ratio=ratio
    )
