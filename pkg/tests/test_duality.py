import math

import numpy as np
import pytest

from detcond.contours import enumerate_contours_around
from detcond.duality import (DualMap, check_duality_pushforward,
                             estimate_contour_frequency, free_wired_gap,
                             is_q_contour, peierls_bound)
from detcond.graphs import build_box, builtin_graph
from detcond.model import self_dual_point


def test_dual_configuration_swaps_and_involutes():
    dm = DualMap(builtin_graph("grid2x2"))
    all_soft = np.zeros(4, dtype=bool)
    assert dm.dual_configuration(all_soft).all()
    rng = np.random.default_rng(1)
    for _ in range(20):
        kappa = rng.random(4) < 0.5
        back = dm.dual_configuration(dm.dual_configuration(kappa))
        assert np.array_equal(back, kappa)
        # hard counts are complementary
        assert kappa.sum() + dm.dual_configuration(kappa).sum() == 4


@pytest.mark.parametrize("name", ["grid2x2", "triangle"])
@pytest.mark.parametrize("q", [1.0, 2.0, 4.0, 16.0])
def test_pushforward_tv(name, q):
    g = builtin_graph(name)
    for p in (0.2, 0.5, self_dual_point(q)):
        assert check_duality_pushforward(g, p, q) <= 1e-10


def test_pushforward_tv_q1_exact():
    assert check_duality_pushforward(builtin_graph("grid2x2"), 0.3, 1.0) \
        <= 1e-14


def test_peierls_bound_values():
    assert peierls_bound(6, 1e20) == pytest.approx(0.04096)
    assert peierls_bound(6, 4.0 ** 8) == pytest.approx(256.0)     # q^(1/2) = 2^8
    assert peierls_bound(6, 1e4) == pytest.approx(409.6)          # vacuous
    # decreasing in length once 4 q^{-1/8} < 1
    q = 5e9
    assert peierls_bound(8, q) < peierls_bound(6, q)
    with pytest.raises(ValueError):
        peierls_bound(4, 10.0)


def _hexagon_and_box():
    box = build_box(2, 5)
    e = box.edge_at_coords((0, 0), (1, 0))
    gamma = enumerate_contours_around(e, 6, box)[0]
    return box, e, gamma


def test_is_q_contour_conditions():
    box, e, gamma = _hexagon_and_box()
    all_soft = np.zeros(box.m, dtype=bool)
    assert not is_q_contour(gamma, all_soft, box)   # interior face not hard
    # hard exactly on the interior requirement, soft on the crossed bonds
    crossed_ids, required_ids = gamma.resolve(box)
    kappa = np.zeros(box.m, dtype=bool)
    for i in required_ids:
        kappa[i] = True
    assert is_q_contour(gamma, kappa, box)
    # any crossed bond turning hard kills it
    kappa2 = kappa.copy()
    kappa2[crossed_ids[0]] = True
    assert not is_q_contour(gamma, kappa2, box)
    # hard bonds away from the contour are irrelevant
    far = box.edge_at_coords((4, 4), (4, 5))
    kappa3 = kappa.copy()
    kappa3[far] = True
    assert is_q_contour(gamma, kappa3, box)


def test_is_q_contour_matches_bruteforce_definition():
    box, e, _ = _hexagon_and_box()
    contours = enumerate_contours_around(e, 8, box)
    rng = np.random.default_rng(8)
    for _ in range(200):
        kappa = rng.random(box.m) < 0.5
        hard_of = {frozenset((box.embedding[u], box.embedding[v])): kappa[i]
                   for i, (u, v) in enumerate(box.edges)}
        for gamma in contours:
            direct = (all(not hard_of[b] for b in gamma.crossed)
                      and all(hard_of[b] for b in gamma.required_hard()))
            assert is_q_contour(gamma, kappa, box) == direct


def test_contour_frequency_q1_closed_form():
    box = build_box(2, 4)
    p = 0.35
    rep = estimate_contour_frequency(box, p, 1.0, 6, sweeps=40000, seed=3)
    row = rep["contours"][0]
    assert row["closed_form"] == pytest.approx(p * (1 - p) ** 6)
    # at q = 1 sweeps are iid product samples; binomial 3 sigma
    sigma = math.sqrt(row["closed_form"] * (1 - row["closed_form"]) / rep["sweeps"])
    assert abs(row["frequency"] - row["closed_form"]) <= 3 * sigma


def test_contour_frequency_requires_subcritical_p():
    box = build_box(2, 4)
    with pytest.raises(ValueError):
        estimate_contour_frequency(box, 0.9, 2.0, 6, sweeps=10)


def test_contour_frequency_reports_bounds():
    box = build_box(2, 4)
    q = 1e6
    rep = estimate_contour_frequency(box, self_dual_point(q), q, 6,
                                     sweeps=2000, seed=0)
    row = rep["contours"][0]
    assert row["bound"] == pytest.approx(peierls_bound(6, q))
    assert not row["exceeds_bound"]
    # truncated Peierls series from the enumerated counts
    assert rep["contour_counts"] == {6: 1}
    assert rep["sum_bound"] == pytest.approx(peierls_bound(6, q))


def test_contour_sum_bound_groups_lengths():
    from detcond.duality import contour_sum_bound
    box = build_box(2, 6)
    e = box.edge_at_coords((0, 0), (1, 0))
    contours = enumerate_contours_around(e, 8, box)
    q = 1e20
    total, counts = contour_sum_bound(contours, q)
    assert counts == {6: 1, 8: 8}
    assert total == pytest.approx(peierls_bound(6, q) + 8 * peierls_bound(8, q))
    assert total < 1.0      # non-vacuous at this q


def test_free_wired_gap_q1():
    rep = free_wired_gap(n=2, p=0.5, q=1.0, sweeps=4000, seeds=(0, 1, 2, 3))
    # both marginals are exactly 1/2 in distribution; gap is pure noise
    assert abs(rep["gap"]) <= 5 * rep["gap_stderr"] + 1e-9
    assert rep["marginal_sum"] == pytest.approx(1.0, abs=0.05)


def test_free_wired_gap_large_q_orders():
    q = 1e6
    rep = free_wired_gap(n=3, p=self_dual_point(q), q=q, sweeps=400,
                         seeds=(0, 1, 2))
    assert rep["free"]["marginal"] < 0.5 < rep["wired"]["marginal"]
    assert rep["gap"] > 0.0


def test_free_wired_gap_matches_enumeration_on_lambda1():
    # Lambda_1 is small enough to enumerate both boxes exactly
    from detcond.mcmc import central_edge
    from detcond.model import MeasureSpec, enumerate_distribution
    q = 16.0
    p = self_dual_point(q)
    rep = free_wired_gap(n=1, p=p, q=q, sweeps=4000, seeds=(0, 1, 2, 3))
    for tag, graph in (("free", build_box(2, 1)),
                       ("wired", build_box(2, 1, wired=True))):
        exact = enumerate_distribution(MeasureSpec(graph, p, q)).marginal(
            central_edge(graph))
        est = rep[tag]["marginal"]
        se = rep[tag]["stderr"]
        assert abs(est - exact) <= 3.5 * se


def test_gap_report_csv_format():
    from detcond.duality import gap_report_csv
    rep = free_wired_gap(n=1, p=0.5, q=2.0, sweeps=200, seeds=(0, 1))
    text = gap_report_csv(rep)
    lines = text.strip().splitlines()
    assert lines[0] == "n,p,q,bc,edge,estimate,stderr,sweeps,seed"
    assert len(lines) == 1 + 2 * 2 + 1
