"""Stochastic replicator dynamics of exponential learning in finite games.

The package is organized in four layers:

- ``games``: payoff tensors, dominance analysis, congestion/minority
  constructors with exact potentials, entropy and divergences.
- ``dynamics``: noise models and the drift/diffusion fields of the
  replicator variants, plus the score-to-strategy logit map.
- ``engine``: trajectory integrators (score space, simplex space,
  deterministic, discrete rounds), deterministic seeding, ensembles.
- ``analysis``: infinitesimal-generator probes, Lyapunov certificates,
  extinction-probability bounds, and trajectory statistics.

``cli`` exposes the same operations as a command-line tool.
"""

from .games import (
    GameDef,
    MixedProfile,
    EliminationRound,
    EliminationTrace,
    PotentialFn,
    SolverError,
    congestion_game,
    cross_entropy,
    dominates,
    entropy,
    find_dominator,
    game_from_json,
    game_to_json,
    is_strict_equilibrium,
    iterated_elimination,
    kl_divergence,
    minority_game,
    mixed_payoff,
    payoff_vector,
    pure_strategy_payoff,
    rosenthal_potential,
    strict_equilibria,
)

from .dynamics import (
    CONSTANT,
    OWN_PURE_VANISHING,
    RATE_ADJUSTED_VARIANTS,
    SINGLE_POPULATION_VARIANTS,
    STOCHASTIC_VARIANTS,
    VARIANTS,
    DynamicsSpec,
    NoiseModel,
    TangentField,
    eval_field,
    logit_map,
    score_field,
    stratonovich_drift_identity,
)
from .engine import (
    INTEGRATORS,
    DeterministicJob,
    DiscreteJob,
    EnsembleStats,
    ScoreJob,
    SimConfig,
    SimplexJob,
    SimulationError,
    StatSummary,
    Trajectory,
    ensemble_trajectories,
    run_ensemble,
    run_seed,
    simulate_deterministic,
    simulate_discrete,
    simulate_scores,
    simulate_simplex,
    trajectory_to_csv,
)
from .analysis import (
    LYAPUNOV_FAMILIES,
    AdjustedCoords,
    CoordinateField,
    ErfcBound,
    ExpLogitField,
    ExtinctionReport,
    GeneratorProbe,
    InverseYField,
    LinearCombinationField,
    LinearField,
    LyapunovReport,
    PotentialConditionReport,
    PotentialField,
    ScalarField,
    StabilityEstimate,
    StrategyExtinction,
    adjusted_coords,
    apply_generator,
    check_potential_condition,
    dominance_offset,
    erfc_bound,
    extinction_report,
    field_from_json,
    generator_consistency_probe,
    inverse_adjusted,
    kl_growth_slope,
    kl_series,
    l1_vertex_distance,
    lyapunov_certificate,
    potential_along,
    rate_adjusted_erfc_bound,
    sample_near_vertex,
    stability_probe,
    wilson_interval,
)

__version__ = "0.1.0"

__all__ = [
    "GameDef",
    "MixedProfile",
    "EliminationRound",
    "EliminationTrace",
    "PotentialFn",
    "SolverError",
    "congestion_game",
    "cross_entropy",
    "dominates",
    "entropy",
    "find_dominator",
    "game_from_json",
    "game_to_json",
    "is_strict_equilibrium",
    "iterated_elimination",
    "kl_divergence",
    "minority_game",
    "mixed_payoff",
    "payoff_vector",
    "pure_strategy_payoff",
    "rosenthal_potential",
    "strict_equilibria",
    "CONSTANT",
    "OWN_PURE_VANISHING",
    "RATE_ADJUSTED_VARIANTS",
    "SINGLE_POPULATION_VARIANTS",
    "STOCHASTIC_VARIANTS",
    "VARIANTS",
    "DynamicsSpec",
    "NoiseModel",
    "TangentField",
    "eval_field",
    "logit_map",
    "score_field",
    "stratonovich_drift_identity",
    "INTEGRATORS",
    "DeterministicJob",
    "DiscreteJob",
    "EnsembleStats",
    "ScoreJob",
    "SimConfig",
    "SimplexJob",
    "SimulationError",
    "StatSummary",
    "Trajectory",
    "ensemble_trajectories",
    "run_ensemble",
    "run_seed",
    "simulate_deterministic",
    "simulate_discrete",
    "simulate_scores",
    "simulate_simplex",
    "trajectory_to_csv",
    "LYAPUNOV_FAMILIES",
    "AdjustedCoords",
    "CoordinateField",
    "ErfcBound",
    "ExpLogitField",
    "ExtinctionReport",
    "GeneratorProbe",
    "InverseYField",
    "LinearCombinationField",
    "LinearField",
    "LyapunovReport",
    "PotentialConditionReport",
    "PotentialField",
    "ScalarField",
    "StabilityEstimate",
    "StrategyExtinction",
    "adjusted_coords",
    "apply_generator",
    "check_potential_condition",
    "dominance_offset",
    "erfc_bound",
    "extinction_report",
    "field_from_json",
    "generator_consistency_probe",
    "inverse_adjusted",
    "kl_growth_slope",
    "kl_series",
    "l1_vertex_distance",
    "lyapunov_certificate",
    "potential_along",
    "rate_adjusted_erfc_bound",
    "sample_near_vertex",
    "stability_probe",
    "wilson_interval",
    "__version__",
]
