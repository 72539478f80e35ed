"""Reproducible i.i.d. Rayleigh channel sampling on counter-based streams.

Every random quantity in the simulator is drawn from a Philox stream keyed
by (master_seed, stream_index), so any result is a pure function of the
configuration and the seed no matter how trials are scheduled.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stable_mix(seed: int, *tokens) -> int:
    """Fold ints, floats, and strings into a 64-bit value, platform-stable.

    Used to derive sub-seeds (e.g. one per sweep cell) so that editing one
    grid entry never changes the seeds of the others.
    """
    state = _splitmix64(seed & _MASK64)
    for tok in tokens:
        if isinstance(tok, str):
            data = tok.encode("utf-8")
            state = _splitmix64(state ^ len(data))
            for off in range(0, len(data), 8):
                chunk = int.from_bytes(data[off:off + 8], "little")
                state = _splitmix64(state ^ chunk)
        elif isinstance(tok, (bool, int, np.integer)):
            state = _splitmix64(state ^ (int(tok) & _MASK64))
        elif isinstance(tok, float):
            bits = struct.unpack("<Q", struct.pack("<d", tok))[0]
            state = _splitmix64(state ^ bits)
        else:
            raise TypeError(f"cannot mix token of type {type(tok).__name__}")
    return state


@dataclass(frozen=True)
class RngStream:
    """Deterministic pseudo-random stream identified by (seed, index)."""

    master_seed: int
    stream_index: int

    def generator(self) -> np.random.Generator:
        key = np.array([self.master_seed & _MASK64,
                        self.stream_index & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def derive_trial_stream(master_seed: int, trial_index: int) -> RngStream:
    """Stream for one Monte-Carlo trial; independent across trial indices."""
    return RngStream(master_seed, trial_index)


def _as_generator(stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, RngStream):
        return stream.generator()
    raise TypeError(f"expected RngStream or numpy Generator, got {type(stream).__name__}")


@dataclass(frozen=True)
class ChannelVector:
    """Per-antenna complex gains for one receiver.

    ``cancel_gain`` is the gain from the extra (cancellation) antenna to the
    same receiver; it is present only when that antenna is part of the setup.
    """

    gains: np.ndarray
    cancel_gain: complex | None = None

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=complex)
        if gains.ndim != 1 or gains.size == 0:
            raise ValueError("channel gains must be a non-empty 1-D vector")
        if not np.all(np.isfinite(gains)):
            raise ValueError("channel gains must be finite")
        object.__setattr__(self, "gains", gains)

    @property
    def n_t(self) -> int:
        return int(self.gains.size)


def _draw_cscg(rng: np.random.Generator, count: int) -> np.ndarray:
    # circularly-symmetric complex Gaussian, unit total variance per entry
    raw = rng.standard_normal(2 * count)
    return (raw[0::2] + 1j * raw[1::2]) / np.sqrt(2.0)


def sample_channel(n: int, with_cancel_antenna: bool, stream) -> ChannelVector:
    """Draw an i.i.d. CN(0, 1) channel vector of length ``n``.

    Pass an ``RngStream`` for a standalone draw, or a numpy ``Generator`` to
    continue an existing stream (several draws within one trial).  The first
    2n variates are always the gains, so trial streams shared between
    estimators see identical main channels regardless of the cancel flag.
    """
    if n < 1:
        raise ValueError(f"antenna count must be >= 1, got {n}")
    rng = _as_generator(stream)
    gains = _draw_cscg(rng, n)
    cancel = complex(_draw_cscg(rng, 1)[0]) if with_cancel_antenna else None
    return ChannelVector(gains=gains, cancel_gain=cancel)
