"""Half-plane diffusions, Krein strings, and their boundary trace processes."""

from .errors import (
    BadParameter,
    DegenerateNormalization,
    IndexOne,
    InsufficientLocalTime,
    InsufficientSamples,
    InvalidMeasure,
    InvalidString,
    NonConvergent,
    NotSymmetric,
    OutOfDomain,
    QuadratureFailure,
    StringTraceError,
)
from .strings import (
    StringSpec,
    ValidationReport,
    a_mass,
    canonicalize,
    dump_spec,
    load_spec,
    spec_from_dict,
    spec_to_dict,
    validate_string,
)
from .ode import (
    ExponentSample,
    PhiSolution,
    SolverOptions,
    exponent,
    exponent_grid,
    krein_laplace_exponent,
    solve_phi,
)
from .rogers import (
    LevyTriplet,
    MuRepresentation,
    PropertyReport,
    StableTail,
    TableTail,
    ThetaRepresentation,
    ZeroTail,
    check_rogers_properties,
    complete_monotonicity_check,
    levy_khintchine,
    rogers_from_mu,
    rogers_from_theta,
    stable_levy_constants,
)
from .gallery import (
    GALLERY_NAMES,
    GalleryEntry,
    UNAVAILABLE,
    default_entries,
    make,
    reference_exponent,
)
from .simulate import (
    EnsembleResult,
    ExcursionPool,
    ExcursionRecord,
    LevyHistogram,
    PathRecord,
    SimConfig,
    TraceSample,
    empirical_cf,
    empirical_levy_measure,
    excursion_decompose,
    local_time_profile,
    run_ensemble,
    sample_path,
    trace,
    trace_ensemble,
)

__version__ = "0.1.0"
