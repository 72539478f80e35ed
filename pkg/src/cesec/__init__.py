"""Constant-envelope massive-MISO downlink simulator with AN-based secrecy."""

from .an_generator import (AnComponent, Scheme1Options, aggregate_an_at,
                           an_amplitude, an_power_target_from_eta,
                           cancel_antenna_power, combined_symbols,
                           scheme1_solve, scheme2_generate)
from .capacity import (CapacityResult, SystemParams, c_ce_lower_mc,
                       c_eve_closed, c_mf, c_sec_ce, c_sec_mf,
                       eve_upper_bound_scheme2, secrecy_mf_an_opt,
                       secrecy_scheme1_mc, secrecy_scheme2_mc)
from .ce_precoder import (DoughnutBounds, PrecodeOptions, PrecodeResult,
                          doughnut_bounds, precode, rotate_phases,
                          synthesize_noise_free, transmit_vector, wrap_phase)
from .channel import (ChannelVector, RngStream, derive_trial_stream,
                      sample_channel, stable_mix)
from .harness import (ConfigError, ResultRow, SweepConfig, SweepError,
                      cell_seed, emit_csv, emit_plot_script, load_config,
                      read_csv, run_sweep)
from .special_math import (gen_exp_integral, gen_exp_integral_scaled,
                           gen_exp_integral_scaled_sum, norm_1, norm_2,
                           norm_inf)

__version__ = "0.1.0"
