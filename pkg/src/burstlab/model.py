"""Adaptive exponential integrate-and-fire (aEIF) model definition.

Internal units are mV, ms, pA, nS, pF throughout, which close the membrane
equation dimensionally without conversion factors (nS * mV = pA,
pF * mV/ms = pA). Values quoted in nA elsewhere are converted to pA at the
boundary (0.66 nA -> 660 pA).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameterError, InvalidStateError

# Clamp for the exponent (V - V_T)/Delta_T. Any value >= 30 leaves spike
# timing unchanged at the step sizes used; 40 keeps exp() finite.
X_MAX = 40.0


@dataclass(frozen=True)
class NeuronParams:
    """Physiological constants of the aEIF neuron and its synapse model."""

    C: float = 281.0        # membrane capacitance (pF)
    g_L: float = 30.0       # leak conductance (nS)
    E_L: float = -70.6      # resting potential (mV)
    V_T: float = -50.4      # threshold potential (mV)
    Delta_T: float = 2.0    # slope factor (mV)
    tau_w: float = 20.0     # adaptation time constant (ms)
    a: float = 4.0          # subthreshold adaptation conductance (nS)
    b: float = 500.0        # spike-triggered adaptation increment (pA)
    V_r: float = -44.0      # reset potential (mV)
    I: float = 0.0          # injected current (pA)
    tau_g: float = 2.728    # synaptic time constant (ms)
    V_REV: float = 0.0      # synaptic reversal potential (mV)
    g_exc: float = 0.05     # synaptic conductance increment per spike (nS)
    V_peak: float = 20.0    # spike-detection cutoff (mV)

    def __post_init__(self):
        for name in ("C", "g_L", "Delta_T", "tau_w", "tau_g"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.g_exc < 0:
            raise InvalidParameterError(f"g_exc must be >= 0, got {self.g_exc}")
        if not self.V_peak > self.V_T:
            raise InvalidParameterError(
                f"V_peak ({self.V_peak} mV) must lie strictly above V_T ({self.V_T} mV)"
            )
        for name in self.__dataclass_fields__:
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")

    def with_overrides(self, **kwargs) -> "NeuronParams":
        """Return a copy with the given fields replaced (validated)."""
        unknown = set(kwargs) - set(self.__dataclass_fields__)
        if unknown:
            raise InvalidParameterError(f"unknown parameter(s): {sorted(unknown)}")
        return replace(self, **kwargs)


@dataclass(frozen=True)
class NeuronState:
    """Per-neuron dynamical variables."""

    V: float        # membrane potential (mV)
    w: float = 0.0  # adaptation current (pA)
    g: float = 0.0  # synaptic conductance (nS)

    def __post_init__(self):
        if not (math.isfinite(self.V) and math.isfinite(self.w) and math.isfinite(self.g)):
            raise InvalidStateError(f"non-finite state (V={self.V}, w={self.w}, g={self.g})")
        if self.g < 0:
            raise InvalidStateError(f"synaptic conductance must be >= 0, got g={self.g}")


def derivative(state: NeuronState, params: NeuronParams, g_sum_in: float = 0.0):
    """Vector field of the (coupled) aEIF neuron.

    ``g_sum_in`` is the summed synaptic conductance of presynaptic
    neighbors (nS); pass 0 for an isolated neuron, which reduces the
    coupled equations to the single-neuron ones exactly.

    Returns
    -------
    (dV, dw, dg) in mV/ms, pA/ms, nS/ms.
    """
    if not (math.isfinite(state.V) and math.isfinite(state.w) and math.isfinite(state.g)):
        raise InvalidStateError("derivative called with non-finite state")
    if g_sum_in < 0 or not math.isfinite(g_sum_in):
        raise InvalidStateError(f"g_sum_in must be finite and >= 0, got {g_sum_in}")
    p = params
    x = min((state.V - p.V_T) / p.Delta_T, X_MAX)
    dV = (
        -p.g_L * (state.V - p.E_L)
        + p.g_L * p.Delta_T * math.exp(x)
        - state.w
        + p.I
        + (p.V_REV - state.V) * g_sum_in
    ) / p.C
    dw = (p.a * (state.V - p.E_L) - state.w) / p.tau_w
    dg = -state.g / p.tau_g
    return dV, dw, dg


def apply_reset(state: NeuronState, params: NeuronParams, coupled: bool) -> NeuronState:
    """Discrete post-spike map: V -> V_r, w -> w + b, and (coupled runs
    only) g -> g + g_exc."""
    g = state.g + params.g_exc if coupled else state.g
    return NeuronState(V=params.V_r, w=state.w + params.b, g=g)


def nullclines(params: NeuronParams, V_samples) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the V- and w-nullclines of the isolated neuron.

    On the V-nullcline, dV/dt = 0 with no synaptic term:
    w = -g_L (V - E_L) + g_L Delta_T exp((V - V_T)/Delta_T) + I.
    On the w-nullcline, w = a (V - E_L). Both in pA.
    """
    p = params
    V = np.asarray(V_samples, dtype=float)
    if not np.all(np.isfinite(V)):
        raise InvalidStateError("V_samples must be finite")
    x = np.minimum((V - p.V_T) / p.Delta_T, X_MAX)
    w_vnull = -p.g_L * (V - p.E_L) + p.g_L * p.Delta_T * np.exp(x) + p.I
    w_wnull = p.a * (V - p.E_L)
    return w_vnull, w_wnull
