"""Staggered finite-volume solver for the 1D compressible Euler equations.

The package discretizes the internal-energy form of the equations on a
MAC-staggered grid: density, internal energy and pressure live on the
cells, the velocity on the faces.  Two time discretizations are provided
(a semi-implicit pressure-correction scheme and a fully explicit
segregated scheme), together with the entropy diagnostics apparatus and
an exact Riemann solver used as verification oracle.
"""

from .errors import (
    CflViolation,
    ConfigurationError,
    DomainError,
    NumericalError,
    StagfvError,
    StepFailure,
)
from .grid import Grid, MeshMetrics, build_uniform_grid, mesh_metrics
from .state import (
    SchemeConfig,
    Stabilization,
    State,
    eos_energy_from_pressure,
    eos_pressure,
    init_riemann,
    sound_speed,
    totals,
)
from .flux import (
    FluxSet,
    assemble_mass_fluxes,
    dual_density,
    dual_mass_balance_residual,
    muscl_face_value,
    upwind_face_value,
)
from .entropy import (
    EntropyWeights,
    admissible_interval,
    entropy_cfl_dt,
    entropy_compatibility_residual,
    entropy_residual_field,
    eta,
    global_entropy,
    x_kl,
)
from .explicit_step import (
    ExpStepRecord,
    advective_dt_limit,
    corrective_source_explicit,
    stabilization_term,
    stable_dt_limit,
    step_explicit,
)
from .pressure_correction import (
    PcStepRecord,
    correction_solve,
    corrective_source_pc,
    predict_velocity,
    step_pc,
)
from .riemann import (
    PRESETS,
    RiemannPreset,
    RiemannSolution,
    convection_identity_check,
    exact_riemann,
    rankine_hugoniot_residual,
    sample_profile,
    solve_star,
)

__version__ = "0.1.0"

from .diagnostics import (
    DiagnosticsReport,
    RunAccumulator,
    discrete_norms,
    theorem_bound_audit,
)
from .driver import (
    RunConfig,
    RunReport,
    compute_error,
    parse_config,
    run_case,
    write_outputs,
)

__all__ = [name for name in dir() if not name.startswith("_")]
