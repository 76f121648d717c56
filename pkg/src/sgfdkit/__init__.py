"""2D elastic-wave staggered-grid finite-difference workbench.

Implements the classical (balanced) velocity-stress scheme and a mixed
operator-length (non-balanced) variant that pairs one length-M stencil
with unit-weight second-order stencils, together with the coefficient
optimization, dispersion analysis, stability analysis and benchmarking
machinery around them.
"""

from .coefficients import (
    FitBand,
    calibrate_fit_band,
    default_fit_band,
    export_coefficients,
    parse_coefficients,
    solve_balanced_space_domain,
    solve_space_domain,
    solve_time_space_domain,
    stencil_symbol,
    table1_coefficients,
    taylor_coefficients,
)
from .dispersion import (
    DispersionPoint,
    delta_balanced,
    delta_nonbalanced,
    mixed_error_balanced,
    mixed_error_nonbalanced,
    scan_curves,
)
from .errors import (
    CoefficientError,
    ConfigError,
    ModelError,
    NumericsError,
    SgfdError,
    StabilityError,
)
from .kernel import (
    SeismogramSet,
    SimulationResult,
    Stepper,
    apply_sponge,
    inject_source,
    ricker,
    run_simulation,
    step_balanced,
    step_nonbalanced,
    term_count_per_cell,
)
from .model import (
    ElasticModel,
    GridGeometry,
    SimulationConfig,
    SourceSpec,
    SpongeSpec,
    StencilCoefficients,
    WaveState,
    allocate_state,
    build_model,
)
from .modelio import homogeneous_model, layered_model, load_model, write_model
from .stability import StabilityReport, bound_balanced, bound_nonbalanced, check_config

__version__ = "0.1.0"
