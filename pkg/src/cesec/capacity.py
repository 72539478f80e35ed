"""User, eavesdropper, and secrecy rates for the five transmission schemes.

Closed forms cover matched-filter precoding and the no-AN eavesdropper; the
constant-envelope user bound and everything involving AN are Monte-Carlo
estimates on counter-based trial streams.  Estimators that are compared
against each other draw the main channel first within each trial stream, so
identical (trials, seed) arguments mean identical channel ensembles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .an_generator import Scheme1Options, scheme1_solve, scheme2_generate
from .ce_precoder import PrecodeOptions, precode
from .channel import derive_trial_stream, sample_channel
from .special_math import (gen_exp_integral_scaled, gen_exp_integral_scaled_sum,
                           norm_1, norm_inf)

_LN2 = math.log(2.0)
_TWO_PI = 2.0 * math.pi

DEFAULT_ETA_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))


@dataclass(frozen=True)
class SystemParams:
    p_t: float              # total transmit power, linear
    sigma2: float           # receiver noise variance, linear
    n_t: int                # transmit antenna count
    eta: float = 0.5        # information-power allocation factor

    def __post_init__(self):
        if not (self.p_t > 0.0 and math.isfinite(self.p_t)):
            raise ValueError(f"p_t must be positive and finite, got {self.p_t}")
        if not (self.sigma2 > 0.0 and math.isfinite(self.sigma2)):
            raise ValueError(f"sigma2 must be positive and finite, got {self.sigma2}")
        if self.n_t < 1:
            raise ValueError(f"n_t must be >= 1, got {self.n_t}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must be in [0, 1], got {self.eta}")

    @property
    def snr(self) -> float:
        return self.p_t / self.sigma2

    @classmethod
    def from_snr_db(cls, n_t: int, snr_db: float, eta: float = 0.5) -> "SystemParams":
        return cls(p_t=10.0 ** (snr_db / 10.0), sigma2=1.0, n_t=n_t, eta=eta)


@dataclass(frozen=True)
class CapacityResult:
    value: float                        # bits per channel use
    estimator: str                      # closed_form | mc_lower_bound | mc_upper_bound
    trials: int = 0
    std_error: float = 0.0
    master_seed: int = 0
    diagnostics: dict = field(default_factory=dict)


def _closed(value: float, **diag) -> CapacityResult:
    return CapacityResult(value=value, estimator="closed_form", diagnostics=diag)


def c_mf(p: SystemParams) -> CapacityResult:
    """Ergodic user rate of matched-filter precoding (closed form)."""
    x = p.sigma2 / p.p_t
    return _closed(gen_exp_integral_scaled_sum(p.n_t, x) / _LN2)


def c_eve_closed(p: SystemParams) -> CapacityResult:
    """Ergodic eavesdropper rate without AN; one formula serves MF and CE."""
    x = p.sigma2 / p.p_t
    return _closed(gen_exp_integral_scaled(1, x) / _LN2)


def c_sec_mf(p: SystemParams) -> CapacityResult:
    """Matched-filter secrecy rate [c_mf - c_eve]+, closed form."""
    user = c_mf(p).value
    eve = c_eve_closed(p).value
    return _closed(max(user - eve, 0.0), user_bits=user, eve_bits=eve)


def _ce_rate_integrand(gains: np.ndarray, p: SystemParams) -> float:
    spread = norm_1(gains) ** 2 - norm_inf(gains) ** 2
    return math.log2(1.0 + p.snr * spread / (p.n_t * math.e))


def _mean_se(vals: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    return mean, se


def c_ce_lower_mc(p: SystemParams, trials: int, seed: int) -> CapacityResult:
    """Monte-Carlo lower bound on the constant-envelope user rate."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    vals = np.empty(trials)
    for t in range(trials):
        h = sample_channel(p.n_t, False, derive_trial_stream(seed, t))
        vals[t] = _ce_rate_integrand(h.gains, p)
    mean, se = _mean_se(vals)
    return CapacityResult(value=mean, estimator="mc_lower_bound", trials=trials,
                          std_error=se, master_seed=seed)


def c_sec_ce(p: SystemParams, trials: int, seed: int) -> CapacityResult:
    """Constant-envelope secrecy rate [CE user bound - closed eve rate]+."""
    user = c_ce_lower_mc(p, trials, seed)
    eve = c_eve_closed(p).value
    return CapacityResult(value=max(user.value - eve, 0.0),
                          estimator="mc_lower_bound", trials=trials,
                          std_error=user.std_error, master_seed=seed,
                          diagnostics={"user_bits": user.value, "eve_bits": eve})


def _draw_symbol(gen: np.random.Generator, gains: np.ndarray) -> complex:
    # information symbol at half the outer radius, uniform phase
    psi = math.pi - float(gen.uniform(0.0, _TWO_PI))
    radius = 0.5 * norm_1(gains) / math.sqrt(gains.size)
    return radius * complex(math.cos(psi), math.sin(psi))


def _ratio_bound(u_vals: np.ndarray, n_vals: np.ndarray,
                 sigma2: float) -> tuple[float, float]:
    """log2(1 + mean(U)/(mean(N) + sigma2)) with a delta-method std error."""
    u_bar = float(np.mean(u_vals))
    n_bar = float(np.mean(n_vals))
    value = math.log2(1.0 + u_bar / (n_bar + sigma2))
    t = u_vals.size
    if t < 2:
        return value, 0.0
    g_u = 1.0 / (_LN2 * (n_bar + sigma2 + u_bar))
    g_n = -u_bar / (_LN2 * (n_bar + sigma2) * (n_bar + sigma2 + u_bar))
    infl = g_u * (u_vals - u_bar) + g_n * (n_vals - n_bar)
    se = float(np.sqrt(np.sum(infl ** 2)) / t)
    return value, se


def eve_upper_bound_scheme2(p: SystemParams, trials: int, seed: int, *,
                            disable_an: bool = False,
                            leakage_exponent: str = "phi",
                            bound: str = "upper",
                            cancel_gain_floor: float = 1e-3,
                            precode_opts: PrecodeOptions | None = None) -> CapacityResult:
    """Eavesdropper capacity bound under scheme II, from MC power splitting.

    Per trial the full pipeline runs (channel draws, precoding, random-phase
    AN with cancellation) and the information and AN powers seen by the
    eavesdropper are accumulated; the bound is formed from the ratio of
    their ensemble means.  ``bound="lower"`` reassigns the cross power to
    the information side instead.  ``leakage_exponent="theta"`` measures the
    AN leakage with the signal phases in the exponent, kept for sensitivity
    comparisons.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if leakage_exponent not in ("phi", "theta"):
        raise ValueError("leakage_exponent must be 'phi' or 'theta'")
    if bound not in ("upper", "lower"):
        raise ValueError("bound must be 'upper' or 'lower'")
    n = p.n_t
    scale2 = p.p_t / n
    p_u = np.empty(trials)
    p_n = np.zeros(trials)
    p_tot = np.zeros(trials)
    low_h0 = 0
    precode_fails = 0
    for t in range(trials):
        gen = derive_trial_stream(seed, t).generator()
        h = sample_channel(n, True, gen)
        g = sample_channel(n, True, gen)
        p_u[t] = scale2 * float(np.sum(np.abs(g.gains) ** 2))
        if disable_an:
            continue
        u = _draw_symbol(gen, h.gains)
        pre = precode(u, h, opts=precode_opts, stream=gen)
        if not pre.converged:
            precode_fails += 1
        an = scheme2_generate(h, pre.phases, gen,
                              cancel_gain_floor=cancel_gain_floor)
        if an.low_cancel_gain:
            low_h0 += 1
        exps = an.phases if leakage_exponent == "phi" else pre.phases
        leak = complex(np.sum(g.gains * an.amplitudes * np.exp(1j * exps)))
        leak += g.cancel_gain * an.cancel_signal
        p_n[t] = scale2 * abs(leak) ** 2
        if bound == "lower":
            u_eve = complex(np.sum(g.gains * np.exp(1j * pre.phases)))
            p_tot[t] = scale2 * abs(u_eve + leak) ** 2
    if bound == "upper":
        value, se = _ratio_bound(p_u, p_n, p.sigma2)
    else:
        value, se = _ratio_bound(p_tot - p_n, p_n, p.sigma2)
    diag = {"low_h0_rate": low_h0 / trials,
            "mean_p_u": float(np.mean(p_u)),
            "mean_p_n_an": float(np.mean(p_n)),
            "precode_failure_rate": precode_fails / trials}
    return CapacityResult(value=value, estimator="mc_upper_bound", trials=trials,
                          std_error=se, master_seed=seed, diagnostics=diag)


def secrecy_scheme2_mc(p: SystemParams, trials: int, seed: int,
                       **eve_kwargs) -> CapacityResult:
    """Scheme II secrecy [CE user bound - eve upper bound]+ on shared draws.

    The user estimate and the eavesdropper estimate run on the same trial
    streams (common random numbers); AN cancels exactly at the user, so the
    user side is the plain constant-envelope bound.
    """
    user = c_ce_lower_mc(p, trials, seed)
    eve = eve_upper_bound_scheme2(p, trials, seed, **eve_kwargs)
    value = max(user.value - eve.value, 0.0)
    se = math.hypot(user.std_error, eve.std_error)
    diag = {"user_bits": user.value, "eve_bits": eve.value, **eve.diagnostics}
    return CapacityResult(value=value, estimator="mc_lower_bound", trials=trials,
                          std_error=se, master_seed=seed, diagnostics=diag)


def secrecy_scheme1_mc(p: SystemParams, opts: Scheme1Options, trials: int,
                       seed: int, *,
                       max_failure_rate: float = 0.2,
                       precode_opts: PrecodeOptions | None = None) -> CapacityResult:
    """Scheme I secrecy with both eavesdropper treatments.

    The headline value uses the empirically measured AN power at the
    eavesdropper (same splitting as scheme II, no cancel antenna).  The
    trivial treatment, which ignores the AN power entirely and reduces to
    the no-AN eavesdropper formula, is reported in the diagnostics.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = p.n_t
    scale2 = p.p_t / n
    user_vals = np.empty(trials)
    p_u = np.empty(trials)
    p_n = np.empty(trials)
    failures = 0
    for t in range(trials):
        gen = derive_trial_stream(seed, t).generator()
        h = sample_channel(n, False, gen)
        g = sample_channel(n, False, gen)
        user_vals[t] = _ce_rate_integrand(h.gains, p)
        u = _draw_symbol(gen, h.gains)
        pre = precode(u, h, opts=precode_opts, stream=gen)
        an = scheme1_solve(h, pre.phases, opts, gen)
        if not an.converged:
            failures += 1
        leak = complex(np.sum(g.gains * an.amplitudes * np.exp(1j * an.phases)))
        p_n[t] = scale2 * abs(leak) ** 2
        p_u[t] = scale2 * float(np.sum(np.abs(g.gains) ** 2))
    fail_rate = failures / trials
    if fail_rate > max_failure_rate:
        raise RuntimeError(
            f"scheme I solver failed on {failures}/{trials} trials "
            f"(rate {fail_rate:.3f} > {max_failure_rate}); "
            f"target={opts.an_power_target}, tolerance={opts.tolerance}, "
            f"max_iters={opts.max_iters}")
    user_mean, user_se = _mean_se(user_vals)
    eve_emp, eve_se = _ratio_bound(p_u, p_n, p.sigma2)
    eve_triv = c_eve_closed(p).value
    value = max(user_mean - eve_emp, 0.0)
    diag = {"user_bits": user_mean,
            "eve_bits": eve_emp,
            "eve_trivial_bits": eve_triv,
            "secrecy_trivial_bits": max(user_mean - eve_triv, 0.0),
            "solver_failure_rate": fail_rate,
            "mean_p_n_an": float(np.mean(p_n))}
    return CapacityResult(value=value, estimator="mc_lower_bound", trials=trials,
                          std_error=math.hypot(user_se, eve_se),
                          master_seed=seed, diagnostics=diag)


def secrecy_mf_an_opt(p: SystemParams, eta_grid=DEFAULT_ETA_GRID,
                      trials: int = 1000, seed: int = 0
                      ) -> tuple[CapacityResult, float]:
    """Matched-filter precoding with null-space AN, best power split on a grid.

    AN is isotropic over the (N_t - 1)-dimensional null space of the user
    channel with per-dimension power (1 - eta) P_T/(N_t - 1), so the user
    never sees it.  Because the projections |g w|^2 and ||g V||^2 do not
    depend on eta, one channel ensemble serves the whole grid.
    """
    if p.n_t < 2:
        raise ValueError("the AN null space is empty for n_t = 1")
    eta_grid = list(eta_grid)
    if not eta_grid:
        raise ValueError("eta grid must be non-empty")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = p.n_t
    h_pow = np.empty(trials)      # ||h||^2
    sig_pow = np.empty(trials)    # |g w|^2 along the beam
    an_pow = np.empty(trials)     # ||g V||^2 = ||g||^2 - |g w|^2
    for t in range(trials):
        gen = derive_trial_stream(seed, t).generator()
        h = sample_channel(n, False, gen).gains
        g = sample_channel(n, False, gen).gains
        hh = float(np.sum(np.abs(h) ** 2))
        beam = abs(complex(np.sum(g * np.conj(h)))) ** 2 / hh
        h_pow[t] = hh
        sig_pow[t] = beam
        an_pow[t] = float(np.sum(np.abs(g) ** 2)) - beam
    best = None
    for eta in eta_grid:
        user = np.log2(1.0 + eta * p.p_t * h_pow / p.sigma2)
        denom = (1.0 - eta) * p.p_t * an_pow / (n - 1) + p.sigma2
        eve = np.log2(1.0 + eta * p.p_t * sig_pow / denom)
        diff = user - eve
        mean, se = _mean_se(diff)
        if best is None or mean > best[0]:
            best = (mean, se, eta, float(np.mean(user)), float(np.mean(eve)))
    mean, se, eta_star, user_mean, eve_mean = best
    result = CapacityResult(value=max(mean, 0.0), estimator="mc_lower_bound",
                            trials=trials, std_error=se, master_seed=seed,
                            diagnostics={"best_eta": eta_star,
                                         "user_bits": user_mean,
                                         "eve_bits": eve_mean})
    return result, eta_star
