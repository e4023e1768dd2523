import numpy as np
import pytest

import burstlab as bl
from burstlab.network import NetworkRun

# hand evaluations frozen before implementation:
# ISIs [1,1,4]: mean 2, population variance 2 -> CV = sqrt(2)/2
CV_114 = 0.7071067811865476
# spike times (0,0,3) across 3 neurons: popstd sqrt(2), /(N-1)=2, ms -> s
DELTA_003 = 0.7071067811865476e-3


def make_run(times_lists, n=None):
    """Synthetic NetworkRun carrying given spike times."""
    n = n or len(times_lists)
    trains = tuple(bl.SpikeTrain(i, np.asarray(t, dtype=float))
                   for i, t in enumerate(times_lists))
    z = np.zeros(n)
    return NetworkRun(
        topology=bl.Topology.empty(n), params=bl.NeuronParams(),
        initial_V=np.full(n, -70.6), cfg=bl.IntegratorConfig(dt=0.01, t_end=10.0),
        trains=trains, coupled=True, final_state=(z, z, z))


def test_cv_isi_hand_values():
    assert bl.cv_isi([1.0, 1.0, 4.0]) == pytest.approx(CV_114, rel=1e-12)
    assert bl.cv_isi([3.0, 3.0, 3.0]) == 0.0


def test_cv_isi_needs_two():
    with pytest.raises(bl.InsufficientDataError):
        bl.cv_isi([1.0])


def test_cv_invariant_under_shift_and_rescale(bursting_train):
    base = bl.cv(bursting_train)
    shifted = bl.SpikeTrain(0, bursting_train.times + 123.0)
    scaled = bl.SpikeTrain(0, bursting_train.times * 2.0)
    assert bl.cv(shifted) == pytest.approx(base, rel=1e-9)
    assert bl.cv(scaled) == pytest.approx(base, rel=1e-9)


def test_cv_bursting_neuron_exceeds_half(bursting_train):
    assert bl.cv(bursting_train) >= 0.5


def test_cv_insufficient_spikes():
    with pytest.raises(bl.InsufficientDataError):
        bl.cv(bl.SpikeTrain(0, [1.0, 2.0]))


def test_classify_boundary():
    assert bl.classify_firing(0.0) == bl.SPIKING
    assert bl.classify_firing(0.49) == bl.SPIKING
    assert bl.classify_firing(0.5) == bl.BURSTING
    with pytest.raises(bl.InvalidParameterError):
        bl.classify_firing(-0.1)


def test_segment_bursting_train(bursting_train):
    seg = bl.segment_bursts(bursting_train)
    assert seg.k == 3
    for start, stop in seg.bursts:
        assert stop - start == 3


def test_segment_tonic_is_one_per_burst():
    times = np.arange(100.0) * 25.0 + 10.0
    seg = bl.segment_bursts(bl.SpikeTrain(0, times))
    assert seg.k == 1


def test_segment_synthetic_pattern():
    # ISIs [2,2,20,2,2,20,...]: bursts of three split at every 20 ms gap
    times = []
    t = 0.0
    for _ in range(30):
        times += [t, t + 2.0, t + 4.0]
        t += 24.0
    seg = bl.segment_bursts(bl.SpikeTrain(0, times))
    assert seg.k == 3
    isis = np.diff(np.asarray(times))
    for start, stop in seg.bursts[:-1]:
        assert isis[stop - 1] == 20.0  # boundary sits at the long gap


def test_segment_irregular_counts_error():
    times = []
    t = 1000.0  # past any transient trim
    sizes = [3, 3, 2, 3, 4, 3, 2, 3]
    for size in sizes:
        for j in range(size):
            times.append(t + 2.0 * j)
        t += 40.0
    train = bl.SpikeTrain(0, np.array(times) - 900.0)
    with pytest.raises(bl.IrregularBurstError):
        bl.segment_bursts(train)


def test_network_burst_size(case_run):
    cpl, _ = case_run(1)
    assert bl.network_burst_size(cpl) == 3


def test_delta_hand_case_two_neurons():
    assert bl.burst_delta([[0.0], [2.0]]) == pytest.approx(1.0e-3, rel=1e-12)


def test_delta_hand_case_three_neurons():
    assert bl.burst_delta([[0.0], [0.0], [3.0]]) == pytest.approx(DELTA_003, rel=1e-12)


def test_delta_zero_for_identical_trains():
    run = make_run([[1.0, 2.0, 3.0]] * 4)
    assert bl.delta_n(run, 3, 1) == 0.0


def test_delta_indexing_matches_formula():
    # neuron trains long enough for two bursts of K=2
    run = make_run([[0.0, 1.0, 10.0, 11.0], [0.5, 1.5, 10.5, 11.5]])
    # burst 2 uses spikes 2,3: offsets 0.5 at both positions -> popstd 0.25
    assert bl.delta_n(run, 2, 2) == pytest.approx(0.25e-3, rel=1e-12)
    with pytest.raises(bl.InsufficientDataError):
        bl.delta_n(run, 2, 3)


def test_delta_shift_invariance():
    rng = np.random.Generator(np.random.PCG64(7))
    for _ in range(50):
        mat = rng.uniform(0.0, 50.0, size=(5, 3))
        shifted = mat + rng.uniform(-20, 20)
        assert bl.burst_delta(shifted) == pytest.approx(bl.burst_delta(mat),
                                                        rel=1e-9, abs=1e-15)


def test_delta_against_two_pass_oracle():
    # acceptance criterion 10 runs the full 1000-matrix sweep; spot-check here
    rng = np.random.Generator(np.random.PCG64(11))
    for _ in range(100):
        n = int(rng.integers(2, 9))
        k = int(rng.integers(1, 5))
        mat = rng.uniform(0.0, 100.0, size=(n, k))
        mean = mat.mean(axis=0)
        twopass = np.sqrt(((mat - mean) ** 2).mean(axis=0))
        expected = float(twopass.mean() / (n - 1)) * 1e-3
        assert bl.burst_delta(mat) == pytest.approx(expected, rel=1e-9)


def test_stabilized_delta_equal_pair(bursting_params):
    topo = bl.Topology(2, ((0, 1),))
    run = bl.simulate_network(topo, bursting_params, [-60.0, -60.0],
                              bl.IntegratorConfig(dt=0.01, t_end=6000.0))
    st = bl.stabilized_delta(run, bl.network_burst_size(run))
    assert st.stabilized == 0.0
    assert st.stabilized_at is not None


def test_stabilized_delta_requires_thirty_bursts():
    run = make_run([np.arange(10.0)] * 3)
    with pytest.raises(bl.InsufficientDataError):
        bl.stabilized_delta(run, 1)


def test_stabilized_delta_refuses_drifting_series():
    # spike offsets that grow linearly with burst index never certify
    base = np.arange(60.0) * 40.0
    drift = base + 0.2 * np.arange(60.0)
    run = make_run([base, drift])
    st = bl.stabilized_delta(run, 1)
    assert st.stabilized is None
    assert st.diagnostic is not None


def test_td_of_run_against_itself(case_run):
    cpl, _ = case_run(1)
    for i in range(7):
        tr = bl.td(cpl, cpl, i)
        assert np.all(tr.td_series == 0.0)
        assert tr.stabilized_td == 0.0


def test_td_truncates_to_common_range():
    a = make_run([[1.0, 2.0, 3.0, 4.0]])
    b = make_run([[1.5, 2.5]])
    tr = bl.td(a, b, 0)
    assert tr.td_series.size == 2
    assert np.allclose(tr.td_series, [-0.5, -0.5])


def test_td_no_spikes_error():
    a = make_run([[1.0]])
    b = make_run([[]])
    with pytest.raises(bl.InsufficientDataError):
        bl.td(a, b, 0)


def test_reference_td_window(case_run):
    cpl, unc = case_run(1)
    ref = bl.reference_td(cpl, unc, 3)
    first = bl.burst_td(cpl, unc, 3, n=1)
    assert ref.shape == first.shape == (7,)
    assert first[6] == 0.0  # the initiator's first burst is untouched


def test_locked_phase_symmetric_network(bursting_params, ring7):
    run = bl.simulate_network(ring7, bursting_params, [-65.0] * 7,
                              bl.IntegratorConfig(dt=0.01, t_end=2000.0))
    lp = bl.locked_phase(run, bl.network_burst_size(run))
    assert lp.groups == (tuple(range(7)),)


def test_locked_phase_partition_property(sw_sample_run):
    _, _, cpl, _ = sw_sample_run(9, 901)
    lp = bl.locked_phase(cpl, bl.network_burst_size(cpl))
    flat = sorted(v for g in lp.groups for v in g)
    assert flat == list(range(9))
    assert lp.rel_times.min() == 0.0


def test_locked_phase_case1_groups(case_run):
    cpl, _ = case_run(1, t_end=60000.0)
    lp = bl.locked_phase(cpl, 3)
    assert lp.groups == ((6,), (0, 5), (1, 4), (2, 3))
