__all__ = (
    "EXIT_CONFIG",
    "EXIT_FAILURE",
    "EXIT_NUMERICAL",
    "EXIT_OK",
    "BlobMarker",
    "CoherentPrep",
    "Command",
    "ConfigError",
    "EvolutionMethod",
    "ExcitationBlock",
    "GeaBranch",
    "HeraldError",
    "HeraldedOutcome",
    "HeraldingRun",
    "JointState",
    "NormalizationError",
    "NumericalError",
    "OutputFormat",
    "PhaseSpaceGrid",
    "PreconditionError",
    "Propagator",
    "QuadratureBasis",
    "QuadratureSlice",
    "QubitDensityMatrix",
    "QubitLabel",
    "RunConfig",
    "SuccessCurve",
    "SystemParams",
    "TargetState",
    "TruncationError",
    "UnresolvablePeakError",
    "WidthFitResult",
    "ZeroProbabilityOutcomeError",
    "__version__",
    "amplitude_series",
    "best_fidelity",
    "best_phase",
    "blob_markers",
    "block",
    "blurred_outcome",
    "branch_masses",
    "branches",
    "build_quadrature_basis",
    "coherent_coefficients",
    "conditional_state",
    "default_n_max",
    "default_phase_space_grid",
    "energy",
    "evolve",
    "evolve_analytic",
    "evolve_numeric",
    "fidelity_map",
    "fock_state",
    "gea_banacloche_state",
    "grid_convergence_delta",
    "hermite_functions",
    "ideal_width",
    "initial_state",
    "load_config_file",
    "local_maximum",
    "main",
    "measure_peak_width",
    "p_gg_trace",
    "phase_space_grid",
    "plateau_time",
    "predicted_phase",
    "project_field",
    "propagator",
    "q_function",
    "quadrature_mean_variance",
    "quadrature_slice",
    "reduce_to_qubits",
    "resolve_config",
    "revival_time",
    "run_command",
    "sample_outcome",
    "sample_shots",
    "success_by_phase",
    "success_probabilities",
    "success_probability",
    "tail_mass",
    "width_analysis",
)

from ._asymptotic import (
    BlobMarker,
    GeaBranch,
    blob_markers,
    branch_masses,
    branches,
    gea_banacloche_state,
    predicted_phase,
    revival_time,
)
from ._cli import (
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_NUMERICAL,
    EXIT_OK,
    main,
    run_command,
)
from ._config import (
    Command,
    OutputFormat,
    RunConfig,
    load_config_file,
    resolve_config,
)
from ._dynamics import (
    EvolutionMethod,
    ExcitationBlock,
    Propagator,
    amplitude_series,
    block,
    energy,
    evolve,
    evolve_analytic,
    evolve_numeric,
    propagator,
)
from ._errors import (
    ConfigError,
    HeraldError,
    NormalizationError,
    NumericalError,
    PreconditionError,
    TruncationError,
    UnresolvablePeakError,
    ZeroProbabilityOutcomeError,
)
from ._hilbert import (
    CoherentPrep,
    JointState,
    QubitLabel,
    SystemParams,
    coherent_coefficients,
    default_n_max,
    fock_state,
    initial_state,
    tail_mass,
)
from ._observables import (
    PhaseSpaceGrid,
    QuadratureBasis,
    QuadratureSlice,
    QubitDensityMatrix,
    build_quadrature_basis,
    default_phase_space_grid,
    hermite_functions,
    local_maximum,
    p_gg_trace,
    phase_space_grid,
    project_field,
    q_function,
    quadrature_mean_variance,
    quadrature_slice,
    reduce_to_qubits,
)
from ._protocol import (
    HeraldedOutcome,
    HeraldingRun,
    SuccessCurve,
    TargetState,
    WidthFitResult,
    best_fidelity,
    best_phase,
    blurred_outcome,
    conditional_state,
    fidelity_map,
    grid_convergence_delta,
    ideal_width,
    measure_peak_width,
    plateau_time,
    sample_outcome,
    sample_shots,
    success_by_phase,
    success_probabilities,
    success_probability,
    width_analysis,
)
from ._version import __version__
