"""Deterministic identification over a 1D diffusion-based Poisson channel.

Subpackages: `channel` (closed-form physics), `pde` (finite-difference
solver and particle validator), `codebook` (sphere-packing code
construction and bounds), `decoder` (distance decoder), `montecarlo`
(seeded error estimation and sweeps), `config`/`cli` (experiment front
end emitting CSV artifacts).
"""

from .channel import (AbsorbProb, ChannelParams, absorb_prob, channel_pmf,
                      concentration, peak_rate_time, sample_output)
from .codebook import (Codebook, CodebookError, CodeParams, generate_codebook,
                       load_codebook, min_hamming, num_codewords,
                       packing_count_lower_bound, save_codebook, sphere_radius,
                       type1_bound, type2_bound)
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .decoder import DecoderConfig, distance_stat, is_in_region, threshold
from .montecarlo import (ErrorReport, TrialPlan, ci_halfwidth, estimate_type1,
                         estimate_type2, evaluate, sweep_blocklength, sweep_time)
from .pde import (AbsorptionSeries, DiffusionGrid, GridConfig, absorbing_profile,
                  init_grid, profile_snapshots, rmse, run, simulate_particles, step)

__version__ = "1.0.0"

__all__ = [
    "AbsorbProb", "AbsorptionSeries", "ChannelParams", "Codebook",
    "CodebookError", "CodeParams", "ConfigError", "DecoderConfig",
    "DiffusionGrid", "ErrorReport", "ExperimentConfig", "GridConfig",
    "TrialPlan", "absorb_prob", "absorbing_profile", "channel_pmf",
    "ci_halfwidth", "concentration", "distance_stat", "estimate_type1",
    "estimate_type2", "evaluate", "generate_codebook", "init_grid",
    "is_in_region", "load_codebook", "load_config", "min_hamming",
    "num_codewords", "packing_count_lower_bound", "parse_config",
    "peak_rate_time", "profile_snapshots", "rmse", "run", "sample_output",
    "save_codebook", "simulate_particles", "sphere_radius", "step",
    "sweep_blocklength", "sweep_time", "threshold", "type1_bound",
    "type2_bound",
]
