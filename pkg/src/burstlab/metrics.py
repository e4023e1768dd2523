"""Spike-train measurements: CV, burst segmentation, synchronization, TD.

Spike times are handled in ms; the synchronization parameter delta is
reported in seconds. For burst index n (1-based) and burst size K, the
synchronization parameter averages, over the K spike positions j, the
population standard deviation across neurons of t_{i, j+K(n-1)}, divided by
(N - 1). The standard deviation is computed exactly as
sqrt(E[t^2] - (E[t])^2), i.e. population (not sample) normalization; the
same convention is used for the CV of inter-spike intervals.

CV and burst segmentation skip the transient: spikes before 20% of the last
spike time are dropped, and the sequence is re-anchored at the first
inter-burst boundary so statistics start at a burst onset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (InsufficientDataError, InvalidParameterError,
                     IrregularBurstError)
from .integrator import SpikeTrain
from .network import NetworkRun

SPIKING = "spiking"
BURSTING = "bursting"
CV_BURSTING_THRESHOLD = 0.5
BURST_GAP_FACTOR = 3.0   # an ISI is an inter-burst gap iff ISI > factor * min(ISI)
TAU_SAME = 0.05          # co-spiking tolerance (ms)
TRIM_FRACTION = 0.2


def cv_isi(isis) -> float:
    """Coefficient of variation of an ISI sequence: population std / mean."""
    x = np.asarray(isis, dtype=float)
    if x.size < 2:
        raise InsufficientDataError(f"need >= 2 ISIs for a CV, got {x.size}")
    mean = x.mean()
    var = (x * x).mean() - mean * mean
    return float(np.sqrt(max(var, 0.0)) / mean)


def _trim_transient(times: np.ndarray) -> np.ndarray:
    """Drop spikes before 20% of the horizon, then re-anchor at a burst onset."""
    if times.size == 0:
        return times
    kept = times[times >= TRIM_FRACTION * times[-1]]
    if kept.size >= 3:
        isis = np.diff(kept)
        gaps = np.nonzero(isis > BURST_GAP_FACTOR * isis.min())[0]
        if gaps.size and kept.size - (gaps[0] + 1) >= 3:
            kept = kept[gaps[0] + 1:]
    return kept


def cv(train: SpikeTrain) -> float:
    """CV of the stabilized portion of a train (transient trimmed)."""
    kept = _trim_transient(train.times)
    if kept.size < 3:
        raise InsufficientDataError(
            f"need >= 3 spikes after transient trimming, got {kept.size}")
    return cv_isi(np.diff(kept))


def classify_firing(cv_value: float) -> str:
    """Spiking for CV < 0.5, bursting for CV >= 0.5 (closed boundary)."""
    if cv_value < 0 or not np.isfinite(cv_value):
        raise InvalidParameterError(f"CV must be finite and >= 0, got {cv_value}")
    return BURSTING if cv_value >= CV_BURSTING_THRESHOLD else SPIKING


@dataclass(frozen=True)
class BurstSegmentation:
    """Burst size K plus [start, stop) index ranges into the train's times
    for the complete stabilized bursts."""

    k: int
    bursts: tuple[tuple[int, int], ...]


def segment_bursts(train: SpikeTrain,
                   gap_factor: float = BURST_GAP_FACTOR) -> BurstSegmentation:
    """Split the stabilized ISI sequence at inter-burst gaps.

    A gap is an ISI exceeding ``gap_factor`` times the minimum stabilized
    ISI. A train whose ISIs never exceed that threshold is tonic: every gap
    separates bursts of one spike (K = 1). Segments touching the trimmed
    ends are discarded as potentially clipped; the remaining bursts must all
    hold the same spike count K, otherwise the burst pattern is irregular.
    """
    times = _trim_transient(train.times)
    if times.size < 3:
        raise InsufficientDataError(
            f"need >= 3 spikes after transient trimming, got {times.size}")
    offset = train.times.size - times.size
    isis = np.diff(times)
    gap_idx = np.nonzero(isis > gap_factor * isis.min())[0]
    if gap_idx.size == 0:
        bursts = tuple((offset + i, offset + i + 1) for i in range(times.size))
        return BurstSegmentation(k=1, bursts=bursts)
    starts = [0] + [int(i) + 1 for i in gap_idx]
    stops = [int(i) + 1 for i in gap_idx] + [times.size]
    segments = list(zip(starts, stops))
    if len(segments) >= 3:
        segments = segments[1:-1]
    counts = {e - s for s, e in segments}
    if len(counts) != 1:
        raise IrregularBurstError(
            f"per-burst spike counts vary: {sorted(counts)} (fixed K required)")
    return BurstSegmentation(
        k=counts.pop(),
        bursts=tuple((s + offset, e + offset) for s, e in segments))


def network_burst_size(run: NetworkRun) -> int:
    """Common spikes-per-burst count K across all neurons of a run."""
    ks = {segment_bursts(tr).k for tr in run.trains}
    if len(ks) != 1:
        raise IrregularBurstError(f"neurons disagree on burst size: {sorted(ks)}")
    return ks.pop()


def burst_delta(burst_times) -> float:
    """Synchronization parameter of one burst, from an (N, K) time matrix (ms).

    Averages over the K spike positions the across-neuron population
    standard deviation divided by (N - 1); returned in seconds.
    """
    t = np.asarray(burst_times, dtype=float)
    if t.ndim != 2 or t.shape[0] < 2:
        raise InvalidParameterError("burst matrix must be (N >= 2, K)")
    n = t.shape[0]
    mean = t.mean(axis=0)
    var = (t * t).mean(axis=0) - mean * mean
    std = np.sqrt(np.maximum(var, 0.0))
    return float(std.mean() / (n - 1)) * 1e-3


def _burst_matrix(run: NetworkRun, k: int, n: int) -> np.ndarray:
    if n < 1 or k < 1:
        raise InvalidParameterError(f"need k >= 1 and n >= 1, got k={k}, n={n}")
    lo, hi = k * (n - 1), k * n
    short = [tr.neuron_id for tr in run.trains if len(tr) < hi]
    if short:
        raise InsufficientDataError(
            f"neurons {short} have fewer than {hi} spikes (burst n={n}, K={k})")
    return np.stack([tr.times[lo:hi] for tr in run.trains])


def delta_n(run: NetworkRun, k: int, n: int) -> float:
    """Synchronization parameter of the n-th burst (1-based), in seconds."""
    return burst_delta(_burst_matrix(run, k, n))


@dataclass(frozen=True)
class SyncTrace:
    """delta(n) series (seconds) and, when certified, its stabilized value."""

    k: int
    delta_series: np.ndarray          # delta(n) at index n-1
    stabilized: float | None
    stabilized_at: int | None         # first burst index of the certification window
    diagnostic: str | None = None


def stabilized_delta(run: NetworkRun, k: int, window: int = 10,
                     eps_rel: float = 1e-3, eps_abs: float = 1e-6) -> SyncTrace:
    """delta(n) over all complete bursts plus its stabilized limit.

    Stabilization is certified when delta(n) over the last ``window`` bursts
    spreads by less than ``eps_rel`` relative to its mean, or by less than
    ``eps_abs`` seconds outright (near-zero case); the stabilized value is
    the window mean. An uncertified trace carries a diagnostic instead.
    """
    n_max = int(run.spike_counts().min()) // k
    if n_max < 30:
        raise InsufficientDataError(
            f"only {n_max} complete bursts; need >= 30 to judge stabilization")
    series = np.array([delta_n(run, k, n) for n in range(1, n_max + 1)])
    last = series[-window:]
    spread = float(last.max() - last.min())
    mean = float(last.mean())
    if spread < eps_abs or spread < eps_rel * abs(mean):
        return SyncTrace(k, series, stabilized=mean,
                         stabilized_at=n_max - window + 1)
    return SyncTrace(
        k, series, stabilized=None, stabilized_at=None,
        diagnostic=(f"delta(n) spread {spread:.3e} s over the last {window} "
                    f"bursts exceeds {eps_rel:.0e} relative / {eps_abs:.0e} s"))


@dataclass(frozen=True)
class TDTrace:
    """Per-spike coupled-minus-uncoupled time differences of one neuron (ms)."""

    neuron_id: int
    td_series: np.ndarray
    stabilized_td: float | None


def td(coupled: NetworkRun, uncoupled: NetworkRun, i: int,
       window: int = 30, tol: float = 0.02) -> TDTrace:
    """TD_i(k) = coupled spike time - uncoupled spike time, per spike index.

    The series covers the common index range of the two trains (the longer
    one is truncated). Stabilization is certified when the last ``window``
    values vary by less than ``tol`` ms; the stabilized value is their mean.
    """
    t1 = coupled.trains[i].times
    t2 = uncoupled.trains[i].times
    if t1.size == 0 or t2.size == 0:
        raise InsufficientDataError(f"neuron {i} has no spikes in one of the runs")
    m = min(t1.size, t2.size)
    series = t1[:m] - t2[:m]
    stabilized = None
    if m >= window:
        last = series[-window:]
        if float(last.max() - last.min()) < tol:
            stabilized = float(last.mean())
    return TDTrace(neuron_id=i, td_series=series, stabilized_td=stabilized)


def td_all(coupled: NetworkRun, uncoupled: NetworkRun, **kwargs) -> list[TDTrace]:
    return [td(coupled, uncoupled, i, **kwargs) for i in range(coupled.n)]


def burst_td(coupled: NetworkRun, uncoupled: NetworkRun, k: int,
             n: int = 1) -> np.ndarray:
    """Per-neuron mean TD over burst ``n``'s K spikes (ms)."""
    lo, hi = k * (n - 1), k * n
    out = np.empty(coupled.n)
    for i in range(coupled.n):
        series = td(coupled, uncoupled, i).td_series
        if series.size < hi:
            raise InsufficientDataError(
                f"neuron {i} has only {series.size} aligned spikes; burst {n} needs {hi}")
        out[i] = series[lo:hi].mean()
    return out


def reference_td(coupled: NetworkRun, uncoupled: NetworkRun, k: int,
                 n_bursts: int = 3) -> np.ndarray:
    """Per-neuron mean TD over the first ``n_bursts`` bursts (ms).

    This is the reference window for primary detection. A neuron that
    initiates the pattern fires its early bursts at its natural, uncoupled
    times (TD ~ 0 there), while every driven neuron is advanced by whole
    milliseconds from burst 2 at the latest, including far-from-initiator
    neurons whose first burst happens to be unperturbed. Later windows are
    unusable for the gate: once the lock tightens, the coupled network's
    period detaches from the free-running period and even initiators
    accumulate |TD| beyond any fixed threshold.
    """
    per_burst = [burst_td(coupled, uncoupled, k, n) for n in range(1, n_bursts + 1)]
    return np.mean(per_burst, axis=0)


@dataclass(frozen=True)
class LockedPhase:
    """Relative spike times and co-spiking structure of one stabilized burst."""

    n: int                               # burst index used (1-based)
    rel_times: np.ndarray                # (N, K), ms relative to the burst's first spike
    groups: tuple[tuple[int, ...], ...]  # co-spiking partition, in spiking order
    order: tuple[int, ...]               # neurons by first spike (ties by index)


def locked_phase(run: NetworkRun, k: int, n: int | None = None,
                 tau_same: float = TAU_SAME) -> LockedPhase:
    """Extract the locked phase of burst ``n`` (default: last complete burst).

    Neurons whose K corresponding spikes all coincide within ``tau_same`` ms
    of a group's first member are merged into one co-spiking group; the
    groups partition the network.
    """
    n_max = int(run.spike_counts().min()) // k
    if n_max < 1:
        raise InsufficientDataError("no complete burst available")
    if n is None:
        n = n_max
    mat = _burst_matrix(run, k, n)
    rel = mat - mat[:, 0].min()
    order = sorted(range(run.n), key=lambda i: (rel[i, 0], i))
    groups: list[list[int]] = []
    anchors: list[int] = []
    for i in order:
        if groups and np.all(np.abs(rel[i] - rel[anchors[-1]]) < tau_same):
            groups[-1].append(i)
        else:
            groups.append([i])
            anchors.append(i)
    return LockedPhase(
        n=n, rel_times=rel,
        groups=tuple(tuple(sorted(g)) for g in groups),
        order=tuple(order))
