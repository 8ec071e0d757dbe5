import numpy as np
import pytest

from meshsched.randomaccess import (
    Feedback,
    RaConfig,
    Splitter,
    capture_powers,
    combinatorial_feedback,
    metrics,
    run_crp,
    simulate_fcfs,
    simulate_pcfcfs,
    slot_feedback,
)


def _fbs(rows):
    return "".join(r[-1].value for r in rows)


def test_capture_powers():
    p1, p2 = capture_powers(RaConfig.table_8_1())
    assert p1 == pytest.approx(0.5012, abs=1e-4)
    assert p2 == pytest.approx(3.0131, abs=1e-4)


@pytest.mark.parametrize(
    "arrivals, capture, expected",
    [
        ([1.1, 1.3], True, "e0c1"),
        ([1.1, 1.3], False, "e0e11"),
        ([0.3, 0.6, 0.9, 1.5], True, "ee1c1"),
        ([0.3, 0.6, 0.9, 1.5], False, "ee1e11"),
    ],
)
def test_crp_traces(arrivals, capture, expected):
    rows, end = run_crp(arrivals, 0.0, 2.0, capture)
    assert _fbs(rows) == expected
    done = sum(r[-1] in (Feedback.SUCCESS, Feedback.CAPTURE) for r in rows)
    assert done == sum(a < end for a in arrivals)


def test_crp_hands_back_unresolved_tail():
    rows, end = run_crp([0.1, 0.2, 0.3], 0.0, 2.0)
    # 0.1 and 0.2 are resolved inside [0, 0.25); everything later goes back
    assert end == 0.25
    assert sum(r[-1] in (Feedback.SUCCESS, Feedback.CAPTURE) for r in rows) == 2


def test_combinatorial_feedback():
    assert combinatorial_feedback(0, 0, False) is Feedback.IDLE
    assert combinatorial_feedback(0, 1, True) is Feedback.SUCCESS
    assert combinatorial_feedback(1, 1, False) is Feedback.CAPTURE
    assert combinatorial_feedback(1, 1, False, capture=False) is Feedback.COLLISION
    assert combinatorial_feedback(0, 2, True) is Feedback.COLLISION
    assert combinatorial_feedback(2, 1, False) is Feedback.COLLISION


def test_slot_feedback_physical():
    cfg = RaConfig.table_8_1()
    p1, p2 = capture_powers(cfg)
    assert slot_feedback([], cfg) is Feedback.IDLE
    assert slot_feedback([(0.1, p1)], cfg) is Feedback.SUCCESS
    assert slot_feedback([(0.1, p2), (0.2, p1)], cfg) is Feedback.CAPTURE
    assert slot_feedback([(0.1, p2), (0.2, p2)], cfg) is Feedback.COLLISION
    assert slot_feedback([(0.1, p1), (0.2, p1)], cfg) is Feedback.COLLISION
    assert slot_feedback([(0.1, p2), (0.2, p1), (0.3, p1)], cfg) is Feedback.COLLISION


def test_splitter_rules():
    sp = Splitter(0.0, 2.0)
    assert not sp.update(Feedback.COLLISION, 5, 2.54)
    assert (sp.T, sp.phi, sp.tag) == (0.0, 1.0, "L")
    assert not sp.update(Feedback.IDLE, 6, 2.54)
    assert (sp.T, sp.phi, sp.tag) == (1.0, 0.5, "L")
    assert not sp.update(Feedback.CAPTURE, 7, 2.54)
    assert (sp.T, sp.phi, sp.tag, sp.post_capture) == (1.25, 0.25, "R", True)
    assert sp.update(Feedback.SUCCESS, 8, 2.54)
    assert sp.T == 1.5 and sp.phi == 2.54 and not sp.post_capture


def test_new_window_never_reaches_future():
    sp = Splitter(0.0, 1.0)
    assert sp.update(Feedback.IDLE, 1, 2.54)
    assert sp.T + sp.phi == 2.0


def test_config_validation():
    with pytest.raises(ValueError):
        RaConfig.table_8_1(lam=0.0)
    with pytest.raises(ValueError):
        RaConfig.table_8_1(warmup=-1)
    assert RaConfig.table_8_1().with_lambda(0.3).lam == 0.3


def test_metrics():
    m = metrics([0.0, 0.5, 1.2], [1, -1, 3], [1.0, 2.0, 3.0], tau=10)
    assert m.throughput == 0.2
    assert m.avg_delay == pytest.approx(((2 - 0.0) + (4 - 1.2)) / 2)
    assert m.avg_power == 2.0
    assert metrics([0.0], [-1], [0.0], 10).throughput is None


def test_short_run_with_physical_check():
    cfg = RaConfig.table_8_1(lam=0.5, tau=5000, warmup=100, seed=3)
    m = simulate_pcfcfs(cfg, trace=True, check_physical=True)
    assert m.throughput == pytest.approx(0.5, abs=0.05)
    assert len(m.trace) == 5099
    k, T, phi, tag, nl, nr, fb = m.trace[0].split()
    assert (k, T, phi, tag) == ("1", "0", "1", "R")
    f = simulate_fcfs(cfg, check_physical=True)
    assert f.avg_power < m.avg_power


def test_seed_determinism():
    cfg = RaConfig.table_8_1(lam=0.4, tau=3000, warmup=0, seed=9)
    a, b = simulate_pcfcfs(cfg), simulate_pcfcfs(cfg)
    assert (a.throughput, a.avg_delay, a.avg_power) == (b.throughput, b.avg_delay, b.avg_power)


def test_fcfs_single_packet_power():
    cfg = RaConfig.table_8_1(lam=0.01, tau=20000, warmup=0, seed=1)
    m = simulate_fcfs(cfg)
    # almost every packet goes through alone, at P1
    assert m.avg_power == pytest.approx(capture_powers(cfg)[0], rel=0.05)
    assert np.isfinite(m.avg_delay)


def test_crp_rejects_simultaneous_arrivals():
    with pytest.raises(ValueError):
        run_crp([0.5, 0.5], 0.0, 1.0)
