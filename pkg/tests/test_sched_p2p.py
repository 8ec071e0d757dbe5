import numpy as np
import pytest

from meshsched.netgraph import Network, build_comm_graph, build_sinr_graph, gen_uniform_disk, gen_uniform_square
from meshsched.rfcore import ChannelGain, RadioParams, linear_to_db
from meshsched.sched_p2p import (
    ORACLE_MAX_EDGES,
    LinkSchedule,
    als,
    als_reuse_colors,
    brute_force_min_schedule,
    cfls,
    format_schedule,
    link_sinrs,
    parse_schedule,
    sgls,
    sgls_admissible,
    sgls_schedule,
    spatial_reuse,
    validate_schedule,
)

from conftest import SGLS_PICKS


def _db(xs):
    return [float(linear_to_db(x)) for x in xs]


def test_three_pair_sinrs(line_pairs):
    got = _db(link_sinrs(line_pairs, [(1, 2), (3, 4), (5, 6)]))
    assert got == pytest.approx([21.258, 18.424, 19.739], abs=0.005)


def test_two_pair_sinrs(two_pairs):
    both = _db(link_sinrs(two_pairs, [(1, 2), (3, 4)]))
    assert both == pytest.approx([20.911, 20.911], abs=0.005)
    alone = _db(link_sinrs(two_pairs, [(1, 2)]))
    assert alone == pytest.approx([32.041], abs=0.005)


def test_sgls_walkthrough(chain4):
    cg = build_comm_graph(chain4)
    s = sgls(chain4, build_sinr_graph(chain4, cg), np.random.default_rng(0), pick_order=SGLS_PICKS)
    assert s.slots == (((1, 2), (4, 3)), ((2, 3),), ((2, 1), (3, 4)), ((3, 2),))
    rep = validate_schedule(chain4, cg, s)
    assert rep.conflict_free and rep.spatial_reuse == 1.5
    sinrs = [x for slot in rep.slot_sinr_db if len(slot) == 2 for _, x in slot]
    assert sinrs == pytest.approx([20.854, 21.001, 20.866, 20.989], abs=0.005)


def test_oracle_on_chain(chain4):
    cg = build_comm_graph(chain4)
    best = brute_force_min_schedule(chain4, cg)
    assert best.num_colors == 4
    assert validate_schedule(chain4, cg, best).conflict_free


def test_oracle_limit(expt1_noint):
    net = gen_uniform_square(30, 200, expt1_noint, np.random.default_rng(0))
    cg = build_comm_graph(net)
    assert len(cg.edges) > ORACLE_MAX_EDGES
    with pytest.raises(ValueError):
        brute_force_min_schedule(net, cg)


def test_admission_rejects_shared_endpoint(chain4):
    sg = build_sinr_graph(chain4, build_comm_graph(chain4))
    assert not sgls_admissible(sg, [sg.index((1, 2))], sg.index((2, 3)))
    assert sgls_admissible(sg, [sg.index((1, 2))], sg.index((4, 3)))


@pytest.mark.parametrize("algo", [als, als_reuse_colors])
def test_arborical_is_total_and_primary_free(algo, six_net):
    cg = build_comm_graph(six_net)
    s = algo(six_net, cg)
    rep = validate_schedule(six_net, cg, s)
    assert not [v for v in rep.violations if v[0] != "not_comm_edge"]
    assert sorted(link for slot in s.slots for link in slot) == list(cg.edges)


def test_reuse_never_longer(expt1):
    rng = np.random.default_rng(3)
    for _ in range(10):
        net = gen_uniform_disk(60, 500, expt1, rng)
        cg = build_comm_graph(net)
        assert als_reuse_colors(net, cg).num_colors <= als(net, cg).num_colors


def test_secondary_conflicts_respected(six_net):
    # node 4 reaches receiver 2 over an interference edge
    cg = build_comm_graph(six_net)
    col = als_reuse_colors(six_net, cg).colors()
    assert col[(1, 2)] != col[(4, 3)]


def test_cfls_and_sgls_conflict_free(expt1):
    rng = np.random.default_rng(5)
    for _ in range(5):
        net = gen_uniform_disk(50, 500, expt1, rng)
        cg = build_comm_graph(net)
        for s in (cfls(net, cg, rng), sgls_schedule(net, cg, rng)):
            rep = validate_schedule(net, cg, s)
            assert rep.conflict_free
            assert rep.spatial_reuse == len(cg.edges) / s.num_colors


def test_validator_flags_problems(chain4):
    cg = build_comm_graph(chain4)
    bad = LinkSchedule((((1, 2), (2, 3)), ((1, 3),), ((1, 2),)))
    kinds = {k for k, _ in validate_schedule(chain4, cg, bad).violations}
    assert kinds == {"endpoint_clash", "not_comm_edge", "duplicate_edge", "missing_edge"}


def test_faded_validation(two_pairs):
    cg = build_comm_graph(two_pairs)
    s = LinkSchedule((((1, 2), (3, 4)),))
    ones = {(a, b): ChannelGain() for a in range(1, 5) for b in range(1, 5) if a != b}
    assert spatial_reuse(two_pairs, s, ones) == spatial_reuse(two_pairs, s)
    weak = dict(ones)
    weak[(1, 2)] = ChannelGain(0.01)
    assert spatial_reuse(two_pairs, s, weak) == 1.0


def test_schedule_text_roundtrip():
    s = LinkSchedule((((1, 2), (4, 3)), ((2, 3),)))
    assert format_schedule(s) == "1->2 4->3\n2->3\n"
    assert parse_schedule(format_schedule(s)) == ("p2p", s)
    kind, slots = parse_schedule("1->* 4->*\n# note\n2->*\n")
    assert kind == "p2mp" and slots == ((1, 4), (2,))


@pytest.mark.parametrize("text", ["1-2\n", "1->2 3->*\n", "a->b\n"])
def test_parse_schedule_rejects(text):
    with pytest.raises(ValueError):
        parse_schedule(text)


def test_from_colors_roundtrip():
    col = {(1, 2): 2, (2, 1): 1, (3, 4): 2}
    s = LinkSchedule.from_colors(col)
    assert s.colors() == col
    assert s.num_colors == 2


def test_coincident_nodes_fail_sinr():
    p = RadioParams.from_db(10, 4, -90, 20)
    net = Network(((0, 0), (50, 0), (90, 0), (50, 0)), p)
    assert link_sinrs(net, [(1, 2), (4, 3)])[0] == 0.0
