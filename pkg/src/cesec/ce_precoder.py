"""Per-antenna constant-envelope precoding.

Maps an information symbol u to per-antenna phases so that the noise-free
received value (1/sqrt(N)) sum h_i exp(j theta_i) matches u.  The reachable
set of such values is an annulus ("doughnut") in the complex plane; its
outer radius is ||h||_1/sqrt(N) and its inner radius is bounded above by
||h||_inf/sqrt(N).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelVector, RngStream, _as_generator
from .special_math import norm_1, norm_inf

_TWO_PI = 2.0 * math.pi


def wrap_phase(angles):
    """Wrap angles into (-pi, pi]."""
    a = np.mod(np.asarray(angles, dtype=float), _TWO_PI)
    return np.where(a > math.pi, a - _TWO_PI, a)


def _as_gains(h) -> np.ndarray:
    if isinstance(h, ChannelVector):
        return h.gains
    arr = np.asarray(h, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("channel must be a non-empty 1-D complex vector")
    return arr


@dataclass(frozen=True)
class DoughnutBounds:
    outer: float
    inner_upper_bound: float


@dataclass(frozen=True)
class PrecodeOptions:
    tolerance: float = 1e-10      # on the squared residual
    max_sweeps: int = 200
    max_restarts: int = 5


@dataclass(frozen=True)
class PrecodeResult:
    phases: np.ndarray
    residual: float               # |u - (1/sqrt(N)) sum h_i e^{j theta_i}|^2
    iterations: int
    converged: bool


def doughnut_bounds(h) -> DoughnutBounds:
    """Outer radius and inner-radius upper bound of the reachable annulus."""
    gains = _as_gains(h)
    root_n = math.sqrt(gains.size)
    return DoughnutBounds(outer=norm_1(gains) / root_n,
                          inner_upper_bound=norm_inf(gains) / root_n)


def synthesize_noise_free(h, theta) -> complex:
    """(1/sqrt(N)) sum h_i exp(j theta_i)."""
    gains = _as_gains(h)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != gains.shape:
        raise ValueError(f"phase/channel length mismatch: {theta.shape} vs {gains.shape}")
    return complex(np.sum(gains * np.exp(1j * theta)) / math.sqrt(gains.size))


def rotate_phases(theta, psi: float) -> np.ndarray:
    """Shift every phase by psi; rotates the synthesized signal by exp(j psi)."""
    return wrap_phase(np.asarray(theta, dtype=float) + psi)


def transmit_vector(theta, p_t: float, n_t: int | None = None) -> np.ndarray:
    """Per-antenna transmit samples sqrt(P_T/N) exp(j theta_i)."""
    theta = np.asarray(theta, dtype=float)
    n = theta.size if n_t is None else n_t
    return math.sqrt(p_t / n) * np.exp(1j * theta)


def _cd_sweeps(c: np.ndarray, u: complex, theta0: np.ndarray,
               tol: float, max_sweeps: int):
    """Cyclic coordinate descent; each single-phase step is solved exactly.

    The optimal phase for antenna i aligns c_i e^{j theta_i} with the
    residual left by the other antennas, so the update needs no trig calls:
    contribution_i <- |c_i| * r / |r|.
    """
    n = c.size
    c_abs = np.abs(c).tolist()
    contrib = (c * np.exp(1j * theta0)).tolist()
    s = sum(contrib)
    uu = complex(u)
    sweeps = 0
    res = abs(uu - s) ** 2
    for sweeps in range(1, max_sweeps + 1):
        for i in range(n):
            r = uu - (s - contrib[i])
            ar = abs(r)
            if ar == 0.0:
                continue
            new = c_abs[i] * r / ar
            s += new - contrib[i]
            contrib[i] = new
        s = complex(np.sum(np.asarray(contrib)))   # kill accumulation drift
        res = abs(uu - s) ** 2
        if res <= tol:
            break
    contrib_arr = np.asarray(contrib)
    theta = wrap_phase(np.angle(contrib_arr) - np.angle(c))
    return theta, res, sweeps


def precode(u: complex, h, opts: PrecodeOptions | None = None,
            stream=None) -> PrecodeResult:
    """Find phases whose noise-free synthesis matches the symbol u.

    For |u| at or beyond the outer radius the aligned-phase maximizer is
    returned in closed form (it is provably optimal there); otherwise cyclic
    coordinate descent runs from random phase initializations drawn from
    ``stream`` until the squared residual meets ``opts.tolerance``.
    Infeasible targets yield ``converged=False`` with best-effort phases.
    """
    gains = _as_gains(h)
    if not (np.all(np.isfinite(gains)) and cmath.isfinite(u)):
        raise ValueError("precode inputs must be finite")
    opts = opts or PrecodeOptions()
    n = gains.size
    c = gains / math.sqrt(n)
    outer = float(np.sum(np.abs(c)))

    if abs(u) >= outer or n == 1:
        theta = wrap_phase(cmath.phase(u) - np.angle(gains))
        synth = synthesize_noise_free(gains, theta)
        res = abs(u - synth) ** 2
        return PrecodeResult(phases=theta, residual=res, iterations=0,
                             converged=res <= opts.tolerance)

    rng = _as_generator(stream if stream is not None else RngStream(0, 0))
    best = None
    total_sweeps = 0
    # The aligned configuration is exact on the outer boundary and a cheap
    # warm start elsewhere; random restarts follow if it stalls.
    aligned = wrap_phase(cmath.phase(u) - np.angle(gains))
    for attempt in range(opts.max_restarts + 1):
        theta0 = aligned if attempt == 0 else math.pi - rng.uniform(0.0, _TWO_PI, n)
        theta, res, sweeps = _cd_sweeps(c, u, theta0, opts.tolerance,
                                        opts.max_sweeps)
        total_sweeps += sweeps
        synth = synthesize_noise_free(gains, theta)
        res = abs(u - synth) ** 2
        if best is None or res < best[1]:
            best = (theta, res)
        if res <= opts.tolerance:
            return PrecodeResult(phases=theta, residual=res,
                                 iterations=total_sweeps, converged=True)
    theta, res = best
    return PrecodeResult(phases=theta, residual=res, iterations=total_sweeps,
                         converged=False)
