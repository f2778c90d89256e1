"""Ablowitz-Ladik lattice: simulation, inverse scattering and long-time asymptotics."""

from .asymptotics import (
    PhaseFactors,
    PhaseGeometry,
    Prediction,
    PredictorParams,
    RegionTag,
    T_infinity,
    blaschke_T,
    classify_region,
    delta_eval,
    phase_factors,
    phase_re_at_eigenvalue,
    predict,
    saddle_points,
)
from .errors import (
    AmbiguousRegion,
    ArcCollision,
    AssumptionViolated,
    ConfigError,
    DegenerateEigenvalue,
    DegenerateFit,
    IDNLSError,
    NoPeak,
    NumericFailure,
    OutOfRange,
    PoleHit,
    SingularPoleSystem,
    TailOverflow,
    ZeroNormingConstant,
    ZeroSpectralParameter,
)
from .harness import (
    ComparisonRecord,
    ExperimentConfig,
    InitialData,
    PeakMeasurement,
    bs_plus_noise,
    collision_time,
    fit_power_law,
    gaussian,
    measure_phase_shift,
    predicted_phase_shift,
    run,
    split_at_collision,
    track_peak,
    track_series,
)
from .lattice import IntegratorConfig, LatticeState, conserved_product, integrate, norm_l1p, rhs, step
from .scattering import (
    ScatteringConfig,
    JostSolution,
    ScatteringData,
    compute_ab,
    evolve_scattering,
    find_eigenvalues,
    jost_solution,
    norming_constant,
    scatter,
    transfer_matrix,
)
from .solitons import (
    SolitonSpec,
    bright_soliton,
    bright_soliton_dt,
    build_three_site,
    soliton_center,
    synthesize_reflectionless,
)
from .spectral import EigenQuartet, omega, tw_velocity

__version__ = "0.1.0"
