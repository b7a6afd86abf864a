# numerics\__init__.py
from .errors import (
    SpmeError,
    ConfigurationError,
    ParameterError,
    DomainError,
    GridError,
    MixedOrientationError,
    ScenarioValidationError,
    PreconditionError,
    NumericalError,
    NumericalBlowupError,
    StagnationError,
)
from .numerics_config import NumericsConfig, run_timer
from .core import (
    Grid,
    ScalarField,
    SpeciesState,
    SupportSet,
    norm_field,
    mass,
    masses,
    support,
    support_distance,
    default_threshold,
    l1_difference,
)
from .barenblatt import (
    BarenblattProfile,
    coefficients,
    mass_constant,
    closed_form_mass,
    species_profile,
    species_state,
    total_mass,
)
from .report import DiagnosticsReport, SampleRecord, ErrorRow, ErrorTable
from .solver import (
    SolverConfig,
    SamplingPlan,
    DirichletBoundary,
    RunObserver,
    SampleContext,
    ContinuationResult,
    diffusivity,
    stable_dt,
    step,
    run,
    apply_cap,
    continuation_run,
)
from .selfsim import (
    RescaledState,
    EntropyRecord,
    to_selfsimilar,
    to_physical,
    equilibrium_state,
    equilibrium_distance,
    stable_dtau,
    step_theta,
    evolve,
    entropy,
    entropy_run,
    entropy_trace,
    dissipation_mismatch,
    entropy_increase,
)
from .diagnostics import (
    HarnackSample,
    waiting_time,
    support_sync_defect,
    ratio_defect,
    barenblatt_distance,
    lambda_rescale,
    harnack_quotient,
    harnack_sweep,
    cauchy_schwarz_slack,
    subsolution_residual,
    linf_decay_slope,
    support_retention,
    TraceRecorder,
    MassObserver,
    SupportObserver,
    InvariantObserver,
    RatioObserver,
    BarenblattObserver,
    DecayObserver,
)
from .travelling import (
    Orientation,
    TravellingWave,
    speed_from_coeffs,
    ode_residual,
    epsilon_scale,
    dirichlet_tw_run,
)
