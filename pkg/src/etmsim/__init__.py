"""Temporal-mode analysis of correlated free-electron pairs.

Builds two-electron momentum pair amplitudes from a phenomenological film
coupling, decomposes them into electronic temporal modes, and predicts
coincidence dips and mode-discrimination experiments on top of the spectrum.
"""

__version__ = "0.1.0"

from .amplitude import (
    PairAmplitude,
    SingleElectronAmplitude,
    amplitude_cross_section,
    build_amplitude,
    cross_section_extent,
    export_amplitude_csv,
)
from .discriminate import (
    ProbeMode,
    TomographyResult,
    export_tomography,
    probe_coincidence,
    run_tomography,
    schmidt_probes,
)
from .errors import (
    ConfigurationError,
    ContractViolation,
    NumericalError,
    ValidationError,
)
from .hom import (
    CoincidenceScan,
    coincidence_scan,
    default_deltas,
    dominant_mode_std,
    export_scan_csv,
    overlap_integral,
    peak_width_vs_kappa,
)
from .params import (
    ChiModel,
    ControlParams,
    GridSpec,
    MomentumGrid,
    PhysicalSetup,
    QuadratureGrid,
    dimensionless_time,
    momentum_grid,
    quadrature_grid,
    sinc_argument_scale,
)
from .schmidt import (
    SchmidtSpectrum,
    collision_entropy,
    converge_spectrum,
    export_modes_csv,
    export_spectrum_csv,
    reduce_kernels,
    schmidt_decompose,
    schmidt_number,
)
from .sweep import (
    CutRow,
    SweepPlan,
    SweepRow,
    linear_axis,
    load_checkpoint,
    log_axis,
    point_key,
    run_heatmap,
    run_path_cut,
    write_cut_csv,
    write_heatmap_csv,
)

__all__ = [
    "ChiModel",
    "CoincidenceScan",
    "ConfigurationError",
    "ContractViolation",
    "ControlParams",
    "CutRow",
    "GridSpec",
    "MomentumGrid",
    "NumericalError",
    "PairAmplitude",
    "PhysicalSetup",
    "ProbeMode",
    "QuadratureGrid",
    "SchmidtSpectrum",
    "SingleElectronAmplitude",
    "SweepPlan",
    "SweepRow",
    "TomographyResult",
    "ValidationError",
    "__version__",
    "amplitude_cross_section",
    "build_amplitude",
    "coincidence_scan",
    "collision_entropy",
    "converge_spectrum",
    "cross_section_extent",
    "default_deltas",
    "dimensionless_time",
    "dominant_mode_std",
    "export_amplitude_csv",
    "export_modes_csv",
    "export_scan_csv",
    "export_spectrum_csv",
    "export_tomography",
    "linear_axis",
    "load_checkpoint",
    "log_axis",
    "momentum_grid",
    "overlap_integral",
    "peak_width_vs_kappa",
    "point_key",
    "probe_coincidence",
    "quadrature_grid",
    "reduce_kernels",
    "run_heatmap",
    "run_path_cut",
    "run_tomography",
    "schmidt_decompose",
    "schmidt_number",
    "schmidt_probes",
    "sinc_argument_scale",
    "write_cut_csv",
    "write_heatmap_csv",
]
