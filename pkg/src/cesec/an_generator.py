"""Artificial-noise construction under the per-antenna constant-envelope rule.

Every antenna adds an AN component beta_i exp(j phi_i) on top of its signal
phase exp(j theta_i).  Keeping the combined sample on the unit circle forces
beta_i = -2 cos(theta_i - phi_i), so only the AN phases are free.

Scheme I solves for phases that make the aggregate AN vanish at the user
while carrying a prescribed total AN power.  Scheme II draws the phases
uniformly at random and cancels the resulting user-side leakage with one
extra antenna that is exempt from the envelope constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelVector, _as_generator
from .special_math import norm_2

_TWO_PI = 2.0 * math.pi
_PI = math.pi

# fixed scan grid reused by every single-phase subproblem
_XI_GRID = np.linspace(-_PI, _PI, 33)[:-1]
_COS_G = np.cos(_XI_GRID)
_SIN_G = np.sin(_XI_GRID)
_COS2_G = np.cos(2.0 * _XI_GRID)
_SIN2_G = np.sin(2.0 * _XI_GRID)


def _wrap(x: float) -> float:
    m = math.fmod(x, _TWO_PI)
    if m > _PI:
        m -= _TWO_PI
    elif m <= -_PI:
        m += _TWO_PI
    return m


@dataclass(frozen=True)
class AnComponent:
    """Signed AN amplitudes and phases, plus the optional cancel-antenna signal.

    ``cancel_signal`` is scale-free: the sample actually transmitted by the
    extra antenna is sqrt(P_T/N_t) * cancel_signal, so the cancellation
    identity holds independently of the power level.
    """

    amplitudes: np.ndarray
    phases: np.ndarray
    cancel_signal: complex | None = None
    converged: bool = True
    invisibility_residual: float | None = None
    low_cancel_gain: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float)
        phs = np.asarray(self.phases, dtype=float)
        if amps.shape != phs.shape or amps.ndim != 1:
            raise ValueError("amplitudes and phases must be 1-D and equal length")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "phases", phs)


@dataclass(frozen=True)
class Scheme1Options:
    an_power_target: float
    penalty_weight: float | None = None   # None: 2/N_t
    tolerance: float = 1e-6               # on |sum h_i beta_i e^{j phi_i}| / ||h||_2
    max_iters: int = 400                  # total sweeps across restarts


def an_amplitude(theta_i, phi_i):
    """Envelope-preserving AN amplitude -2 cos(theta_i - phi_i)."""
    return -2.0 * np.cos(np.asarray(theta_i) - np.asarray(phi_i))


def an_power_target_from_eta(n_t: int, eta: float) -> float:
    """Total AN power N_t (1 - eta)/eta implied by the allocation split."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    return n_t * (1.0 - eta) / eta


def combined_symbols(theta, an: AnComponent) -> np.ndarray:
    """Unit-modulus per-antenna samples exp(j theta_i) + beta_i exp(j phi_i)."""
    theta = np.asarray(theta, dtype=float)
    return np.exp(1j * theta) + an.amplitudes * np.exp(1j * an.phases)


def aggregate_an_at(channel, an: AnComponent, p_t: float,
                    n_t: int | None = None) -> complex:
    """Aggregate AN sqrt(P_T/N_t) (sum c_i beta_i e^{j phi_i} + c_0 x_0).

    The cancel term enters only when both the channel's cancel gain and the
    AN's cancel signal are present.
    """
    gains = channel.gains if isinstance(channel, ChannelVector) else np.asarray(channel, dtype=complex)
    if gains.shape != an.phases.shape:
        raise ValueError(f"channel/AN length mismatch: {gains.shape} vs {an.phases.shape}")
    n = gains.size if n_t is None else n_t
    total = complex(np.sum(gains * an.amplitudes * np.exp(1j * an.phases)))
    cancel_gain = channel.cancel_gain if isinstance(channel, ChannelVector) else None
    if an.cancel_signal is not None and cancel_gain is not None:
        total += cancel_gain * an.cancel_signal
    return math.sqrt(p_t / n) * total


def cancel_antenna_power(an: AnComponent, p_t: float, n_t: int) -> float:
    """Extra radiated power (P_T/N_t) |x_0|^2 spent by the cancel antenna."""
    if an.cancel_signal is None:
        return 0.0
    return (p_t / n_t) * abs(an.cancel_signal) ** 2


def scheme2_generate(h: ChannelVector, theta, stream, *,
                     cancel_gain_floor: float = 1e-3) -> AnComponent:
    """Random-phase AN with exact single-antenna leakage cancellation.

    Phases are i.i.d. uniform on (-pi, pi].  The cancel signal is chosen so
    that the total aggregate AN at the user is exactly zero; draws with
    |h_0| below ``cancel_gain_floor`` are flagged (not resampled) because
    the cancel signal's power blows up as 1/|h_0|^2.
    """
    if h.cancel_gain is None or h.cancel_gain == 0:
        raise ValueError("scheme II requires a nonzero cancel-antenna gain h_0")
    theta = np.asarray(theta, dtype=float)
    if theta.shape != h.gains.shape:
        raise ValueError("phase/channel length mismatch")
    rng = _as_generator(stream)
    phi = _PI - rng.uniform(0.0, _TWO_PI, theta.size)
    beta = an_amplitude(theta, phi)
    leak = complex(np.sum(h.gains * beta * np.exp(1j * phi)))
    x0 = -leak / h.cancel_gain
    return AnComponent(amplitudes=beta, phases=phi, cancel_signal=x0,
                       low_cancel_gain=bool(abs(h.cancel_gain) < cancel_gain_floor))


def _min_trig2(a: float, b: float, c: float, d: float,
               xi_cur: float, f_cur: float) -> tuple[float, float]:
    """Minimize a cos(xi) + b sin(xi) + c cos(2 xi) + d sin(2 xi).

    Coarse scan on a fixed grid, then Newton steps on the derivative.  The
    current point is kept whenever neither candidate improves on it, so each
    coordinate move is non-increasing.
    """
    vals = a * _COS_G + b * _SIN_G + c * _COS2_G + d * _SIN2_G
    k = int(np.argmin(vals))
    xi = float(_XI_GRID[k])
    f_grid = float(vals[k])
    best_xi, best_f = xi, f_grid
    for _ in range(4):
        s, co = math.sin(xi), math.cos(xi)
        s2, c2 = math.sin(2 * xi), math.cos(2 * xi)
        grad = -a * s + b * co - 2 * c * s2 + 2 * d * c2
        hess = -a * co - b * s - 4 * c * c2 - 4 * d * s2
        if hess <= 0.0:
            break
        step = grad / hess
        xi -= step
        if abs(step) < 1e-13:
            break
    f_ref = (a * math.cos(xi) + b * math.sin(xi)
             + c * math.cos(2 * xi) + d * math.sin(2 * xi))
    if f_ref < best_f:
        best_xi, best_f = xi, f_ref
    if best_f < f_cur:
        return best_xi, best_f
    return xi_cur, f_cur


def scheme1_solve(h, theta, opts: Scheme1Options, stream) -> AnComponent:
    """Solve AN phases for invisibility at the user plus a power target.

    Minimizes |sum h_i cos(theta_i - phi_i) e^{j phi_i}|^2
    + w (sum beta_i^2 - target)^2 by cyclic coordinate descent with random
    restarts.  Each single-phase subproblem reduces to a degree-2
    trigonometric polynomial in xi = 2 phi_i - theta_i + arg h_i and is
    minimized directly.

    Success requires the AN leakage |sum h_i beta_i e^{j phi_i}| to fall
    below tolerance * ||h||_2 with the total AN power within 10% of the
    target; otherwise the best attempt is returned with ``converged=False``.
    """
    gains = h.gains if isinstance(h, ChannelVector) else np.asarray(h, dtype=complex)
    theta = np.asarray(theta, dtype=float)
    n = gains.size
    if n < 3:
        raise ValueError("scheme I needs at least 3 antennas")
    if theta.shape != gains.shape:
        raise ValueError("phase/channel length mismatch")
    target = float(opts.an_power_target)
    if target < 0.0 or target > 4.0 * n:
        raise ValueError(f"AN power target must lie in [0, 4 N_t] = [0, {4 * n}], got {target}")
    if opts.tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    if opts.max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    w = opts.penalty_weight if opts.penalty_weight is not None else 2.0 / n
    if w <= 0.0:
        raise ValueError("penalty weight must be positive")
    if target == 0.0:
        # quadrature phases are the exact zero-power solution; descent would
        # only crawl toward them along a quartically flat penalty
        phi_arr = np.asarray([_wrap(t + 0.5 * _PI) for t in theta])
        beta = an_amplitude(theta, phi_arr)
        leak = 2.0 * abs(np.sum(gains * np.cos(theta - phi_arr)
                                * np.exp(1j * phi_arr)))
        return AnComponent(amplitudes=beta, phases=phi_arr, converged=True,
                           invisibility_residual=float(leak))
    rng = _as_generator(stream)

    h_norm = norm_2(gains)
    rho = np.abs(gains)
    chi = np.angle(gains)
    mu = theta + chi
    cos_mu, sin_mu = np.cos(mu).tolist(), np.sin(mu).tolist()
    cos_2mu, sin_2mu = np.cos(2 * mu).tolist(), np.sin(2 * mu).tolist()
    half_sig = (0.5 * gains * np.exp(1j * theta)).tolist()
    rho_l = rho.tolist()
    theta_l = theta.tolist()
    chi_l = chi.tolist()
    gains_l = gains.tolist()

    leak_tol = opts.tolerance * h_norm
    power_slack = 0.1 * target + 1e-9 * n

    best_phi = None
    best_obj = math.inf
    sweeps_used = 0
    while sweeps_used < opts.max_iters:
        phi = (_PI - rng.uniform(0.0, _TWO_PI, n)).tolist()
        delta = theta - np.asarray(phi)
        beta2 = (4.0 * np.cos(delta) ** 2).tolist()
        term = (gains * np.cos(delta) * np.exp(1j * np.asarray(phi))).tolist()
        s_tot = sum(term)
        b_tot = sum(beta2)
        f_prev = math.inf
        stall = 0
        while sweeps_used < opts.max_iters:
            sweeps_used += 1
            for i in range(n):
                cc = s_tot - term[i] + half_sig[i]
                p0 = b_tot - beta2[i] + 2.0 - target
                a = rho_l[i] * cc.real + 4.0 * w * p0 * cos_mu[i]
                b = rho_l[i] * cc.imag + 4.0 * w * p0 * sin_mu[i]
                c = 2.0 * w * cos_2mu[i]
                d = 2.0 * w * sin_2mu[i]
                xi_cur = _wrap(2.0 * phi[i] - theta_l[i] + chi_l[i])
                f_cur = (a * math.cos(xi_cur) + b * math.sin(xi_cur)
                         + c * math.cos(2 * xi_cur) + d * math.sin(2 * xi_cur))
                xi_new, f_new = _min_trig2(a, b, c, d, xi_cur, f_cur)
                if xi_new == xi_cur:
                    continue
                phi_i = _wrap(0.5 * (xi_new + theta_l[i] - chi_l[i]))
                dlt = theta_l[i] - phi_i
                cdl = math.cos(dlt)
                t_new = gains_l[i] * cdl * complex(math.cos(phi_i), math.sin(phi_i))
                s_tot += t_new - term[i]
                term[i] = t_new
                b_new = 4.0 * cdl * cdl
                b_tot += b_new - beta2[i]
                beta2[i] = b_new
                phi[i] = phi_i
            s_tot = complex(np.sum(np.asarray(term)))
            b_tot = float(np.sum(np.asarray(beta2)))
            leak = 2.0 * abs(s_tot)
            if leak <= leak_tol and abs(b_tot - target) <= power_slack:
                phi_arr = np.asarray(phi)
                return AnComponent(amplitudes=an_amplitude(theta, phi_arr),
                                   phases=phi_arr, converged=True,
                                   invisibility_residual=leak)
            f_val = abs(s_tot) ** 2 + w * (b_tot - target) ** 2
            if f_val < best_obj:
                best_obj = f_val
                best_phi = list(phi)
            if f_val >= f_prev - 1e-15 * max(f_prev, 1.0):
                stall += 1
                if stall >= 3:
                    break
            else:
                stall = 0
            f_prev = f_val

    phi_arr = np.asarray(best_phi if best_phi is not None else phi)
    beta = an_amplitude(theta, phi_arr)
    leak = 2.0 * abs(np.sum(gains * np.cos(theta - phi_arr) * np.exp(1j * phi_arr)))
    return AnComponent(amplitudes=beta, phases=phi_arr, converged=False,
                       invisibility_residual=float(leak))
