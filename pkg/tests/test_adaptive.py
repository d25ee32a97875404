import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import phasetop as pt
from phasetop.adaptive import AdaptiveConfig, adaptive_loop, dorfler_mark
from phasetop.errors import ConfigError
from phasetop.fields import prolong_scalar
from phasetop.phasefield import optimize_on_mesh, volume_gap


def brute_force_minimum(eta, theta):
    total = math.fsum(eta)
    best = None
    n = len(eta)
    for k in range(n + 1):
        for combo in itertools.combinations(range(n), k):
            if math.fsum(eta[i] for i in combo) >= theta * total - 1e-15 * total:
                return k
    return n


# ---------------------------------------------------------------------------
# marking
# ---------------------------------------------------------------------------

def test_dorfler_examples():
    marked = dorfler_mark([9.0, 4.0, 4.0, 1.0], 0.5)
    assert marked.tolist() == [0]
    marked = dorfler_mark([9.0, 4.0, 4.0, 1.0], 1.0)
    assert marked.tolist() == [0, 1, 2, 3]
    assert dorfler_mark([0.0, 5.0, 0.0], 1.0).tolist() == [1]
    assert dorfler_mark([7.7], 0.3).tolist() == [0]
    assert dorfler_mark([0.0, 0.0], 0.9).size == 0


def test_dorfler_validation():
    with pytest.raises(ValueError):
        dorfler_mark([1.0, -2.0], 0.5)
    with pytest.raises(ValueError):
        dorfler_mark([1.0], 1.5)


def test_dorfler_bound_and_minimality_random(rng):
    for _ in range(60):
        n = int(rng.integers(1, 13))
        eta = rng.uniform(0.0, 1.0, n) ** 2
        if rng.random() < 0.2:
            eta[rng.integers(0, n)] = 0.0
        theta = float(rng.uniform(0.05, 1.0))
        marked = dorfler_mark(eta, theta)
        total = eta.sum()
        if total == 0:
            assert marked.size == 0
            continue
        assert eta[marked].sum() >= theta * total - 1e-12 * total
        assert marked.size == brute_force_minimum(list(eta), theta)


@given(st.lists(st.floats(0.0, 1e3), min_size=1, max_size=12),
       st.floats(0.01, 1.0))
@settings(max_examples=80, deadline=None)
def test_dorfler_bound_property(eta, theta):
    marked = dorfler_mark(eta, theta)
    total = math.fsum(eta)
    if total == 0.0:
        assert marked.size == 0
    else:
        assert math.fsum(eta[i] for i in marked) >= theta * total - 1e-12 * total


def test_dorfler_tie_break_deterministic():
    eta = [2.0, 2.0, 2.0, 2.0]
    assert dorfler_mark(eta, 0.5).tolist() == [0, 1]


# ---------------------------------------------------------------------------
# loop
# ---------------------------------------------------------------------------

def test_adaptive_config_validation():
    with pytest.raises(ConfigError):
        AdaptiveConfig(theta1=0.0)
    with pytest.raises(ConfigError):
        AdaptiveConfig(rounds=0)


def coarse_problem():
    import dataclasses
    prob = pt.benchmark("a")
    hyper = dataclasses.replace(prob.hyper, n_outer=5, m_inner=2)
    return dataclasses.replace(prob, hyper=hyper, default_target_h=0.23)


def test_single_round_equals_fixed_mesh_optimization():
    prob = coarse_problem()
    res = adaptive_loop(prob, AdaptiveConfig(rounds=1))
    mesh = prob.build_mesh()
    state = prob.optimizer_state()
    rho, u, hist = optimize_on_mesh(mesh, prob.initial_density(mesh), prob, state)
    assert res.mesh.n_vertices == mesh.n_vertices
    assert np.array_equal(res.rho.values, rho.values)
    assert np.array_equal(res.u.values, u.values)
    assert len(res.records) == 1


def test_adaptive_loop_growth_and_warm_start():
    prob = coarse_problem()
    recorded = []

    class Spy:
        def on_round(self, k, mesh, rho, u, report, history, record):
            recorded.append((k, mesh, rho, report, record))

    res = adaptive_loop(prob, AdaptiveConfig(rounds=4), sink=Spy())
    assert len(recorded) == 4
    verts = [rec.vertices for *_ , rec in recorded]
    assert all(b > a for a, b in zip(verts, verts[1:]))
    # marking bound holds on every logged round
    for k, mesh, rho, report, record in recorded[:-1]:
        t1, t2 = report.total1, report.total2
        eta = report.eta1_sq if t1 >= t2 else report.eta2_sq
        theta = 0.95
        marked = dorfler_mark(eta, theta)
        assert eta[marked].sum() >= theta * eta.sum() - 1e-12 * eta.sum()
    # warm starts preserve the volume gap across meshes exactly
    for (k0, mesh0, rho0, *_), (k1, mesh1, rho1, *_) in zip(recorded, recorded[1:]):
        carried = prolong_scalar(rho0, mesh1)
        g0 = volume_gap(rho0, prob.volume_target)
        g1 = volume_gap(carried, prob.volume_target)
        assert abs(g1 - g0) <= 1e-14 * max(1.0, abs(g0))


def test_vertex_budget_stop():
    prob = coarse_problem()
    res = adaptive_loop(prob, AdaptiveConfig(rounds=8, vertex_budget=200))
    assert res.stop_reason == "vertex budget reached"
    assert res.records[-1].vertices >= 200
    assert len(res.records) < 8


def test_estimator_tolerance_stop():
    prob = coarse_problem()
    res = adaptive_loop(prob, AdaptiveConfig(rounds=3, estimator_tol=1e30))
    assert res.stop_reason == "estimator tolerance reached"
    assert len(res.records) == 1


def test_uniform_mode_marks_everything():
    prob = coarse_problem()
    mesh0 = prob.build_mesh()
    res = adaptive_loop(prob, AdaptiveConfig(rounds=2, uniform=True))
    assert res.records[0].vertices == mesh0.n_vertices
    # a mark-all sweep bisects every element: elements double, vertices gain
    # one midpoint per split refinement edge
    assert res.mesh.n_triangles == 2 * mesh0.n_triangles
    assert res.records[1].vertices > 1.5 * res.records[0].vertices
