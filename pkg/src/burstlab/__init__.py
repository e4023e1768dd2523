"""burstlab: aEIF network simulation, burst-synchronization metrics, and
spiking-hierarchy analysis."""

from .errors import (BurstlabError, ConfigError, EdgeListError,
                     InsufficientDataError, InvalidParameterError,
                     InvalidStateError, IrregularBurstError,
                     NoPrimaryError, NumericalBlowupError)
from .hierarchy import (HierarchyReport, PropagationGraph,
                        build_propagation_graph, detect_primary, grade_layers,
                        predict_order, verify_hierarchy)
from .integrator import (IntegratorConfig, SpikeTrain, Trajectory,
                         simulate_single, step)
from .metrics import (BURSTING, SPIKING, BurstSegmentation, LockedPhase,
                      SyncTrace, TDTrace, burst_delta, burst_td,
                      classify_firing, cv, cv_isi, delta_n, locked_phase,
                      network_burst_size, reference_td, segment_bursts,
                      stabilized_delta, td, td_all)
from .model import NeuronParams, NeuronState, apply_reset, derivative, nullclines
from .network import NetworkRun, paired_run, simulate_network
from .topology import (Topology, degree, is_connected, load_edge_list,
                       regular_ring, serialize, watts_strogatz)

__version__ = "0.1.0"

__all__ = [
    "BurstlabError", "ConfigError", "EdgeListError", "InsufficientDataError",
    "InvalidParameterError", "InvalidStateError", "IrregularBurstError",
    "NoPrimaryError", "NumericalBlowupError",
    "NeuronParams", "NeuronState", "apply_reset", "derivative", "nullclines",
    "IntegratorConfig", "SpikeTrain", "Trajectory", "simulate_single", "step",
    "Topology", "degree", "is_connected", "load_edge_list", "regular_ring",
    "serialize", "watts_strogatz",
    "NetworkRun", "paired_run", "simulate_network",
    "BURSTING", "SPIKING", "BurstSegmentation", "LockedPhase", "SyncTrace",
    "TDTrace", "burst_delta", "burst_td", "classify_firing", "cv", "cv_isi",
    "delta_n", "locked_phase", "network_burst_size", "reference_td",
    "segment_bursts", "stabilized_delta", "td", "td_all",
    "HierarchyReport", "PropagationGraph", "build_propagation_graph",
    "detect_primary", "grade_layers", "predict_order", "verify_hierarchy",
    "__version__",
]
