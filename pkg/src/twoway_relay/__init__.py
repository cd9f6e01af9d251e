"""Amplify-and-forward two-way relay beamforming for multiple source pairs."""
from .channel import (
    ChannelSet,
    PairingMap,
    ScenarioConfig,
    db_to_linear,
    draw_channels,
    linear_to_db,
    load_config,
    make_pairing,
    parse_config,
    trial_rng,
)
from .estimators import GroupedMIRelayBeamformer, MIRelayBeamformer, MPRelayBeamformer
from .exceptions import ConfigError, ConsistencyError, DegenerateChannelError, InfeasibleError, SolverError
from .grouping import GroupingPlan, evaluate_grouping, partition, select_best, valid_group_counts
from .metrics import PerformanceReport, evaluate, pair_rates, rates, relay_power, sinr
from .mi import mi_beamformer, mi_beamformer_on_ray, scale_bisection, solve_mi
from .mp import assemble_socp, mp_beamformer, mp_beamformer_on_ray, solve_mp
from .reduction import RelayBeamformer, build_couplings, lift, reduce, unvec, vec

__version__ = "0.1.0"

__all__ = [
    "ChannelSet", "PairingMap", "ScenarioConfig", "db_to_linear", "draw_channels", "linear_to_db",
    "load_config", "make_pairing", "parse_config", "trial_rng",
    "GroupedMIRelayBeamformer", "MIRelayBeamformer", "MPRelayBeamformer",
    "ConfigError", "ConsistencyError", "DegenerateChannelError", "InfeasibleError", "SolverError",
    "GroupingPlan", "evaluate_grouping", "partition", "select_best", "valid_group_counts",
    "PerformanceReport", "evaluate", "pair_rates", "rates", "relay_power", "sinr",
    "mi_beamformer", "mi_beamformer_on_ray", "scale_bisection", "solve_mi",
    "assemble_socp", "mp_beamformer", "mp_beamformer_on_ray", "solve_mp",
    "RelayBeamformer", "build_couplings", "lift", "reduce", "unvec", "vec",
]
