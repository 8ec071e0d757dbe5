import math

import numpy as np
import pytest
from scipy.optimize import minimize

from meshsched.gtbr import (
    GtbrSpec,
    effective_caps,
    entropy_table,
    flow_entropy,
    optimal_pmf,
    search_optimal_gtbr,
    stbr_utility,
)


@pytest.mark.parametrize("r0", [0, 1, 3, 7])
def test_single_slot_closed_form(r0):
    assert entropy_table(GtbrSpec((r0,), ())).utility == pytest.approx(math.log2(2 ** (r0 + 1) - 1), abs=1e-12)


@pytest.mark.parametrize("S, r, B, H", [(4, 3, 6, 20.04), (4, 4, 8, 25.08), (6, 2, 4, 23.00)])
def test_stbr_values(S, r, B, H):
    assert stbr_utility(S, r, B) == pytest.approx(H, abs=0.01)


def test_stbr_without_tokens():
    assert stbr_utility(4, 0, 0) == 0.0


def test_known_gtbr():
    assert entropy_table(GtbrSpec((6, 3, 3, 0), (6, 6, 6))).utility == pytest.approx(20.92, abs=0.01)


def test_effective_caps():
    assert effective_caps((6, 4, 2, 0), (6, 8, 7)) == (6, 8, 7)
    assert effective_caps((12, 0, 0, 0), (13, 13, 13)) == (12, 12, 12)
    assert effective_caps((0, 5, 5), (9, 3)) == (0, 3)


def test_caps_do_not_change_entropy():
    a = entropy_table(GtbrSpec((12, 0, 0, 0), (13, 13, 13)))
    b = entropy_table(GtbrSpec((12, 0, 0, 0), (12, 12, 12)))
    assert a.utility == b.utility


def test_last_slot_pmf_is_geometric():
    spec = GtbrSpec((2, 3), (2,))
    t = entropy_table(spec)
    p = optimal_pmf(spec, t, 1, 2).probs
    expected = 2.0 ** np.arange(6) / (2**6 - 1)
    assert np.allclose(p, expected, atol=1e-15)


def test_unreachable_state_rejected():
    spec = GtbrSpec((2, 3), (2,))
    t = entropy_table(spec)
    with pytest.raises(ValueError):
        optimal_pmf(spec, t, 1, 3)
    with pytest.raises(ValueError):
        optimal_pmf(spec, t, 0, 1)
    with pytest.raises(ValueError):
        t.h(1, 5)


def test_pmf_self_consistency():
    spec = GtbrSpec((6, 4, 2, 0), (6, 8, 7))
    t = entropy_table(spec)
    for k in range(spec.S):
        for u in range(t.mu[k] + 1):
            pmf = optimal_pmf(spec, t, k, u)
            assert pmf.probs.sum() == pytest.approx(1.0, abs=1e-12)
            assert flow_entropy(spec, t, k, u, pmf) == pytest.approx(t.h(k, u), rel=1e-9)


def _numeric_best(spec, k, u, nxt):
    """Maximise the flow entropy over the simplex by softmax parametrisation."""
    n = u + spec.r[k] + 1
    ells = np.arange(n)
    tail = np.array([nxt(ell) for ell in ells])

    def neg(z):
        p = np.exp(z - z.max())
        p /= p.sum()
        h = -(p * np.log2(np.clip(p, 1e-300, None))).sum()
        return -(h + (p * (ells + tail)).sum())

    return -minimize(neg, np.zeros(n), method="BFGS", options={"gtol": 1e-10}).fun


@pytest.mark.parametrize("r, B", [((2,), ()), ((3, 1), (2,)), ((1, 2), (1,)), ((4, 0), (3,))])
def test_closed_form_against_numeric_optimum(r, B):
    spec = GtbrSpec(r, B)
    t = entropy_table(spec)
    S = spec.S
    if S == 1:
        got = _numeric_best(spec, 0, 0, lambda ell: 0.0)
    else:
        inner = [_numeric_best(spec, 1, u, lambda ell: 0.0) for u in range(t.mu[1] + 1)]
        got = _numeric_best(spec, 0, 0, lambda ell: inner[min(r[0] - ell, B[0])])
    assert got == pytest.approx(t.utility, abs=1e-4)


def test_search_small_row():
    res = search_optimal_gtbr(4, 3, 7)
    assert ((6, 4, 2, 0), (6, 8, 7)) in res.ties
    assert res.h_g == pytest.approx(21.16, abs=0.01)
    assert res.h_s == pytest.approx(20.08, abs=0.01)
    assert res.gain_pct == pytest.approx(5.4, abs=0.2)
    assert res.ties == sorted(res.ties)
    spec, h = res
    assert entropy_table(spec).utility == pytest.approx(h, abs=1e-9)


def test_slack_check_small():
    res = search_optimal_gtbr(4, 2, 4, check_slack=True)
    assert res.slack_best is not None
    assert not res.slack_wins
    with pytest.raises(ValueError):
        search_optimal_gtbr(5, 2, 4, check_slack=True)


@pytest.mark.parametrize("S, r, B", [(4, 3, 5), (4, 3, 16), (7, 1, 2), (4, 7, 14), (0, 1, 2)])
def test_search_rejects(S, r, B):
    with pytest.raises(ValueError):
        search_optimal_gtbr(S, r, B)


def test_spec_validation():
    with pytest.raises(ValueError):
        GtbrSpec((1, 2), ())
    with pytest.raises(ValueError):
        GtbrSpec((-1,), ())
    with pytest.raises(ValueError):
        GtbrSpec((), ())
