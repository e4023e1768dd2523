"""Full-network runs and the paired coupled/uncoupled protocol.

Every neuron integrates the coupled membrane equation with synaptic drive
(V_REV - V_i) * sum_j M_ij g_j; when neuron i spikes, its own conductance
g_i jumps by g_exc, raising the drive its neighbors receive. The uncoupled
replica of a run shares parameters, initial potentials and step size, but
uses an edge-free topology and skips the g_exc increment, so it equals N
independent single-neuron runs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .integrator import IntegratorConfig, SpikeTrain, Trajectory, integrate_arrays
from .model import NeuronParams
from .topology import Topology


@dataclass(frozen=True)
class NetworkRun:
    """One simulated network: inputs, per-neuron spike trains, final state."""

    topology: Topology
    params: NeuronParams
    initial_V: np.ndarray
    cfg: IntegratorConfig
    trains: tuple[SpikeTrain, ...]
    coupled: bool
    final_state: tuple[np.ndarray, np.ndarray, np.ndarray]
    trajectory: Trajectory | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.topology.n

    def spike_counts(self) -> np.ndarray:
        return np.array([len(tr) for tr in self.trains])


def simulate_network(topology: Topology, params: NeuronParams, initial_V,
                     cfg: IntegratorConfig, coupled: bool = True,
                     metadata: dict | None = None) -> NetworkRun:
    """Integrate all N neurons of the coupled system until t_end.

    ``initial_V`` holds each neuron's starting potential (mV); w and g start
    at 0 for every neuron. Starting potentials outside [E_L, V_T] are
    unconventional but dynamically legal, so they warn instead of erroring.
    """
    v0 = np.asarray(initial_V, dtype=float)
    if v0.shape != (topology.n,):
        raise InvalidParameterError(
            f"initial_V has {v0.size} entries for a topology of {topology.n} neurons")
    lo, hi = params.E_L, params.V_T
    if np.any(v0 < lo) or np.any(v0 > hi):
        outliers = np.nonzero((v0 < lo) | (v0 > hi))[0]
        warnings.warn(
            f"initial potentials of neurons {outliers.tolist()} lie outside "
            f"[E_L, V_T] = [{lo}, {hi}] mV", stacklevel=2)
    indptr, indices = topology.neighbor_arrays()
    trains, final, traj = integrate_arrays(
        v0, np.zeros(topology.n), np.zeros(topology.n),
        indptr, indices, params, cfg, coupled=coupled)
    meta = {"coupled": coupled, "topology_hash": topology.content_hash()}
    if topology.seed_used is not None:
        meta["topology_seed"] = topology.seed_used
    if metadata:
        meta.update(metadata)
    return NetworkRun(
        topology=topology, params=params, initial_V=v0, cfg=cfg,
        trains=tuple(SpikeTrain(i, t) for i, t in enumerate(trains)),
        coupled=coupled, final_state=final, trajectory=traj, metadata=meta)


def paired_run(topology: Topology, params: NeuronParams, initial_V,
               cfg: IntegratorConfig) -> tuple[NetworkRun, NetworkRun]:
    """The coupled run and its uncoupled replica, index-aligned for TD.

    Both runs share params, initial potentials and dt; the replica drops all
    edges and leaves g untouched at reset.
    """
    coupled = simulate_network(topology, params, initial_V, cfg, coupled=True)
    uncoupled = simulate_network(Topology.empty(topology.n), params, initial_V,
                                 cfg, coupled=False)
    return coupled, uncoupled
