"""Dendrite accumulation, synaptic-current dynamics, dopamine modulation,
and Poisson spike sources.

The per-step synaptic input of a neuron is the sum of the weights of all
pre-synaptic spikes delivered that step.  On the fixed-point backend the
weights are held at 12 fraction bits and the sum is requantised onto the
3-fraction-bit dendrite-accumulator grid before it enters the neuron.  The
synaptic current then decays exponentially:

    I_syn[t+dt] = alpha * I_syn[t] + (accumulated input)
    I[t]        = I_const + I_syn[t] * (1 + beta * delta_dop)

with alpha = 1 - dt/tau.  Poisson sources draw from counter-based random
streams keyed by (seed, source, step), so spike trains are reproducible
under any execution order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .fxp import (
    DA_FMT,
    ISYN_FMT,
    Q12,
    REG_FMT,
    WEIGHT_FMT,
    Fixed,
    FixedFormat,
    encode,
    mul_rescale,
    quantize_raw,
    sat_add,
    shl,
)
from .neuron import DT_MS

SYNAPTIC_TAU_MS = 15.0
CURRENT_FMT = ISYN_FMT


class WeightError(ValueError):
    """A nonzero weight that quantises to zero in the weight format."""


def encode_weight(weight: float, fmt: FixedFormat = WEIGHT_FMT) -> Fixed:
    encoded = encode(weight, fmt)
    if weight != 0.0 and encoded.raw == 0:
        raise WeightError(
            f"weight {weight} quantises to zero (below {fmt.lsb} resolution)"
        )
    return encoded


def alpha_factor(tau_ms: float = SYNAPTIC_TAU_MS, dt_ms: float = DT_MS) -> float:
    """Synaptic decay per step, 1 - dt/tau."""
    return 1.0 - dt_ms / tau_ms

def alpha_fixed(tau_ms: float = SYNAPTIC_TAU_MS, dt_ms: float = DT_MS) -> Fixed:
    return encode(alpha_factor(tau_ms, dt_ms), ISYN_FMT)


def accumulate(weights: Iterable[Fixed], fmt: FixedFormat = DA_FMT) -> Fixed:
    """Sum delivered weights and requantise onto the accumulator grid.

    Integer addition of the Q12 raws makes the result independent of
    delivery order; the requantisation rounds to nearest, ties away.
    """
    total = 0
    for w in weights:
        if w.fmt.frac_bits != Q12:
            raise ValueError(f"weights must carry {Q12} fraction bits, got {w.fmt}")
        total += w.raw
    return Fixed(int(quantize_raw(total, fmt)), fmt)


def isyn_step(i_syn: Fixed, alpha: Fixed, acc: Fixed) -> Fixed:
    """Decay the synaptic current and add the aligned accumulator value."""
    decayed = mul_rescale(alpha, i_syn, REG_FMT)
    aligned = shl(acc, Q12 - acc.fmt.frac_bits, REG_FMT)
    return Fixed(ISYN_FMT.saturate(decayed.raw + aligned.raw), ISYN_FMT)


def modulated_current(
    i_const: Fixed, i_syn: Fixed, beta: Fixed, delta_dop: Fixed
) -> Fixed:
    """Total input current: I_const + I_syn * (1 + beta * delta_dop)."""
    one = encode(1.0, REG_FMT)
    gain = sat_add(one, mul_rescale(beta, delta_dop, REG_FMT))
    modulated = mul_rescale(i_syn, gain, REG_FMT)
    return Fixed(CURRENT_FMT.saturate(modulated.raw + i_const.raw), CURRENT_FMT)


# ---------------------------------------------------------------------------
# Poisson spike sources
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoissonSource:
    """Independent per-neuron Bernoulli firing at rate*dt per step."""

    name: str
    rate_hz: float
    size: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if self.rate_hz < 0:
            raise ValueError(f"rate must be >= 0, got {self.rate_hz}")
        if self.size <= 0:
            raise ValueError(f"size must be positive, got {self.size}")
        if self.spike_probability(DT_MS) > 1.0:
            raise ValueError(f"rate {self.rate_hz} Hz exceeds one spike per step")

    def spike_probability(self, dt_ms: float = DT_MS) -> float:
        return self.rate_hz * dt_ms / 1000.0

    def spikes_at(self, step: int, seed: int, dt_ms: float = DT_MS) -> np.ndarray:
        """Indices of neurons firing this step.

        The draw is a pure function of (seed, stream_id, step, neuron index):
        a fresh counter-based generator is keyed per source and positioned at
        the step, so no sequential state is carried between calls.
        """
        p = self.spike_probability(dt_ms)
        if p == 0.0:
            return np.empty(0, dtype=np.int64)
        bitgen = np.random.Philox(
            key=np.array([seed, self.stream_id], dtype=np.uint64),
            counter=np.array([0, 0, 0, step], dtype=np.uint64),
        )
        draws = np.random.Generator(bitgen).random(self.size)
        return np.flatnonzero(draws < p)
