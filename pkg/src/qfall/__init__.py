"""Quantum free-fall experiments with Gaussian and cat-state test masses.

The package drops nonclassical wavepackets through a uniform force field
and extracts time-of-flight statistics: mean crossing times from the
exact moment dynamics, semiclassical spreads with their state-dependent
enhancement factor, and operational arrival-time densities from the
probability current at a detector plane. Gravity and uniformly
accelerated frames are two parameterizations of the same linear
Hamiltonian, which makes equivalence-principle comparisons exact.
"""

from ._version import __version__
from .core import (
    DEFAULT_UNITS,
    GridField,
    MassPair,
    SpatialGrid,
    UnitSystem,
    boundary_probability,
    make_grid,
    norm,
)
from .errors import (
    BoundaryBreachError,
    ConfigurationError,
    DegenerateCrossingError,
    DegenerateStateError,
    DomainError,
    InfeasibleTargetError,
    NoCrossingError,
    ParseError,
    PreconditionError,
    SimulationError,
)
from .states import (
    CAT,
    GAUSSIAN,
    MomentSet,
    WavepacketSpec,
    analytic_moments,
    build_wavefunction,
    interference_gap,
    mixture_moments,
    normalization_constant,
    numeric_moments,
)
from .prepare import (
    MatchReport,
    PreparationTarget,
    check_matched,
    match_second_particle,
    velocity_bound,
)
from .evolve import (
    ACCELERATED_FRAME,
    GRAVITY,
    EvolutionResult,
    LinearPotentialParams,
    default_timestep,
    dump_snapshots,
    exact_wavefunction,
    moment_evolution,
    refine_timestep,
    split_step_evolve,
)
from .tof import (
    TofDistribution,
    crossing_time_from_moments,
    current_tof_distribution,
    distribution_distance,
    distribution_from_current,
    ehrenfest_tof,
    epsilon_factor,
    mean_crossing_time,
    semiclassical_sigma_tof,
)
from .experiments import (
    STATE_FAMILIES,
    ExperimentConfig,
    ExperimentReport,
    GridSettings,
    Particle,
    SolverSettings,
    SweepSettings,
    fit_power_law,
    plan_domain,
    run_decoherence_comparison,
    run_equivalence_test,
    run_galileo_pair,
    run_mass_sweep,
)
from .config import DEFAULT_CONFIG_TEXT, parse_config, parse_config_text
