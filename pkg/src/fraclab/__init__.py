"""fraclab: a numerical laboratory for the fractional Laplacian.

The package evaluates (-Delta)^sigma through its hypersingular integral,
inverts it through Riesz potentials, measures tubular neighborhoods of the
compact sets the estimates live on, builds the cutoff and capacity test
families, and turns every quantitative estimate into a ledger whose verdict
is an inferred constant plus a stability flag. The hot kernels run compiled,
with a pure NumPy reference backend selected by FRACLAB_FORCE_REF=1.
"""

from ._kernels import backend_name
from ._version import __version__
from .config import COMMANDS, ExperimentConfig, config_from_dict, load_config, validate_config
from .cutoffs import (
    CapacitySequence,
    capacity_sequence,
    cutoff_from_descriptor,
    manifold_cutoff,
    point_cutoff,
    tube_bump,
    tube_cutoff,
)
from .errors import ConfigInvalid, FracLabError
from .fields import (
    BallIndicator,
    Bubble,
    Constant,
    Gaussian,
    MollifiedIndicator,
    Polynomial,
    PowerLaw,
    ScalarField,
    ShiftedPower,
    field_from_descriptor,
    product_fields,
    sum_fields,
    weighted_integral,
    weighted_l1_norm,
)
from .fraclap import (
    DEFAULT_SPEC,
    EvalResult,
    FracOrder,
    QuadratureSpec,
    energy_cross,
    frac_laplacian,
    frac_laplacian_radial,
    frac_order,
    normalization_constant,
    quadratic_energy,
)
from .oracle import bubble_constant, fourier_oracle, power_law_constant, riesz_constant
from .reports import PlotSeries, RunManifest, dumps_report, emit_plot_data, report_payload, write_report
from .riesz import (
    PotentialResult,
    build_potential_field,
    composed_kernel_value,
    riesz_kernel,
    riesz_potential,
)
from .sets import (
    CircleInR3,
    CompactSet,
    FinitePoints,
    Polyline,
    ProductCantor,
    Segment,
    Sphere,
    assouad_estimate,
    fit_lambda,
    set_from_descriptor,
    tube_boundary_area,
    tube_volume,
)
from .verify import (
    BootstrapPlan,
    DecayFit,
    LedgerReport,
    LedgerSample,
    bootstrap_exponents,
    bubble_identity_ledger,
    capacity_decay,
    decay_fit,
    distance_function_ledger,
    distance_power,
    power_law_ledger,
    removability_ledger,
    superharmonic_check,
    verify_cutoff_bound,
    verify_phi0_decay,
    verify_truncation_convergence,
    weighted_finiteness,
)

__all__ = [
    "__version__",
    "backend_name",
    "COMMANDS",
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
    "validate_config",
    "CapacitySequence",
    "capacity_sequence",
    "cutoff_from_descriptor",
    "manifold_cutoff",
    "point_cutoff",
    "tube_bump",
    "tube_cutoff",
    "ConfigInvalid",
    "FracLabError",
    "BallIndicator",
    "Bubble",
    "Constant",
    "Gaussian",
    "MollifiedIndicator",
    "Polynomial",
    "PowerLaw",
    "ScalarField",
    "ShiftedPower",
    "field_from_descriptor",
    "product_fields",
    "sum_fields",
    "weighted_integral",
    "weighted_l1_norm",
    "DEFAULT_SPEC",
    "EvalResult",
    "FracOrder",
    "QuadratureSpec",
    "energy_cross",
    "frac_laplacian",
    "frac_laplacian_radial",
    "frac_order",
    "normalization_constant",
    "quadratic_energy",
    "bubble_constant",
    "fourier_oracle",
    "power_law_constant",
    "riesz_constant",
    "PlotSeries",
    "RunManifest",
    "dumps_report",
    "emit_plot_data",
    "report_payload",
    "write_report",
    "PotentialResult",
    "build_potential_field",
    "composed_kernel_value",
    "riesz_kernel",
    "riesz_potential",
    "CircleInR3",
    "CompactSet",
    "FinitePoints",
    "Polyline",
    "ProductCantor",
    "Segment",
    "Sphere",
    "assouad_estimate",
    "fit_lambda",
    "set_from_descriptor",
    "tube_boundary_area",
    "tube_volume",
    "BootstrapPlan",
    "DecayFit",
    "LedgerReport",
    "LedgerSample",
    "bootstrap_exponents",
    "bubble_identity_ledger",
    "capacity_decay",
    "decay_fit",
    "distance_function_ledger",
    "distance_power",
    "power_law_ledger",
    "removability_ledger",
    "superharmonic_check",
    "verify_cutoff_bound",
    "verify_phi0_decay",
    "verify_truncation_convergence",
    "weighted_finiteness",
]
