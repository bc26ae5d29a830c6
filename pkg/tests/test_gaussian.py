import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detcond.gaussian import (GradientField, PinnedGaussianSampler,
                              conditional_kappa_given_eta, potential,
                              sample_field_given_kappa, two_layer_roundtrip)
from detcond.graphs import FiniteGraph, build_box, contract
from detcond.laplacian import Conductances, pair_gradient
from detcond.model import MeasureSpec, enumerate_distribution


def test_potential_values():
    assert potential(0.0, 0.3, 7.0) == pytest.approx(0.0)
    assert potential(1.7, 0.0, 9.0) == pytest.approx(0.5 * 1.7 ** 2)
    assert potential(1.0, 1.0, 4.0) == pytest.approx(2.0)


def test_potential_stable_for_huge_q():
    v = potential(10.0, 0.5, 1e20)
    assert math.isfinite(v)
    # the soft branch dominates: V ~ x^2/2 - ln(1-p)
    assert v == pytest.approx(50.0 - math.log(0.5))


@given(x=st.floats(-30, 30), p=st.floats(0.0, 1.0), q=st.floats(1.0, 1e12))
@settings(max_examples=200, deadline=None)
def test_potential_between_envelopes(x, p, q):
    # mixture of the two Gaussians lies between the pure branches
    v = potential(x, p, q)
    assert v <= 0.5 * q * x * x + 1e-9
    assert v >= 0.5 * x * x - math.log(2.0) - 1e-9


def test_conditional_kappa_values():
    assert conditional_kappa_given_eta(0.0, 0.37, 9.0) == pytest.approx(0.37)
    assert conditional_kappa_given_eta(3.1, 0.37, 1.0) == pytest.approx(0.37)
    got = conditional_kappa_given_eta(1.0, 0.5, 4.0)
    expected = math.exp(-2.0) / (math.exp(-2.0) + math.exp(-0.5))
    assert got == pytest.approx(expected)
    assert got == pytest.approx(0.18243, abs=5e-6)


def test_conditional_kappa_decreasing_in_eta_sq():
    etas = np.linspace(0.0, 5.0, 40)
    vals = conditional_kappa_given_eta(etas, 0.5, 4.0)
    assert np.all(np.diff(vals) <= 1e-15)


def _wired_star():
    # K_{1,4} with all leaves identified: 2 vertices, 4 parallel edges
    star = FiniteGraph(5, [(0, 1), (0, 2), (0, 3), (0, 4)], boundary=[1, 2, 3, 4])
    return contract(star, [1, 2, 3, 4], kind="vertices").graph


def test_star_center_variance():
    g = _wired_star()
    sampler = PinnedGaussianSampler(g, Conductances.all_soft(g, 2.0),
                                    pin=next(iter(g.boundary)))
    rng = np.random.default_rng(0)
    center = 1 - next(iter(g.boundary))
    phi = sampler.sample_phi(100_000, rng)
    var = phi[:, center].var()
    # pinned Laplacian is the scalar sum of conductances = 4
    sigma = 0.25 * math.sqrt(2.0 / 100_000)
    assert abs(var - 0.25) < 4 * sigma


def test_eta_mean_zero_and_antisymmetry_convention():
    g = build_box(2, 2, wired=True)
    sampler = PinnedGaussianSampler(g, Conductances.all_soft(g, 3.0))
    rng = np.random.default_rng(1)
    eta = sampler.sample_eta(50_000, rng)
    sd = eta.std(axis=0) / math.sqrt(eta.shape[0])
    assert np.all(np.abs(eta.mean(axis=0)) < 4 * sd)


@pytest.mark.parametrize("kappa_kind", ["soft", "hard", "checkerboard"])
def test_eta_covariance_matches_solver(kappa_kind):
    g = build_box(2, 2, wired=True)
    if kappa_kind == "soft":
        kappa = Conductances.all_soft(g, 4.0)
    elif kappa_kind == "hard":
        kappa = Conductances.all_hard(g, 4.0)
    else:
        hard = np.zeros(g.m, dtype=bool)
        for e, (u, v) in enumerate(g.edges):
            cu = g.embedding.get(u)
            if cu is not None and (cu[0] + cu[1]) % 2 == 0:
                hard[e] = True
        kappa = Conductances(4.0, hard)
    pin = next(iter(g.boundary))
    sampler = PinnedGaussianSampler(g, kappa, pin=pin)
    rng = np.random.default_rng(7)
    n = 100_000
    eta = sampler.sample_eta(n, rng)
    picks = [(0, 0), (0, 1), (2, 5), (3, 3), (1, 7)]
    for e1, e2 in picks:
        sample_cov = float(np.mean(eta[:, e1] * eta[:, e2]))
        exact = pair_gradient(g, kappa, e1, e2, pin=pin)
        v1 = pair_gradient(g, kappa, e1, e1, pin=pin)
        v2 = pair_gradient(g, kappa, e2, e2, pin=pin)
        sigma = math.sqrt((v1 * v2 + exact ** 2) / n)
        assert abs(sample_cov - exact) < 4 * sigma


def test_plaquette_condition_of_sampled_fields():
    g = build_box(2, 3, wired=True)
    sampler = PinnedGaussianSampler(g, Conductances.all_soft(g, 2.0))
    fields = sample_field_given_kappa(sampler, seed=3, count=50)
    for f in fields:
        assert f.plaquette_residual(g) <= 1e-10


def test_roundtrip_q1_is_bernoulli():
    g = build_box(2, 1, wired=True)
    rep = two_layer_roundtrip(g, 0.4, 1.0, sweeps=200, samples=20000, seed=0)
    assert rep["tv_distance"] < 0.02
    assert rep["curve_all_within_ci"]


def test_roundtrip_small_box():
    g = build_box(2, 1, wired=True)
    rep = two_layer_roundtrip(g, 0.5, 2.0, sweeps=500, samples=60000, seed=1)
    assert rep["tv_distance"] < 0.03
    assert rep["curve_all_within_ci"]
    # the curve starts at p for eta = 0
    assert conditional_kappa_given_eta(0.0, 0.5, 2.0) == pytest.approx(0.5)


def test_gradient_field_wrapper():
    g = build_box(2, 1, wired=True)
    sampler = PinnedGaussianSampler(g, Conductances.all_soft(g, 2.0))
    fields = sample_field_given_kappa(sampler, seed=0, count=3)
    assert len(fields) == 3
    assert isinstance(fields[0], GradientField)
    assert fields[0].eta.shape == (g.m,)
