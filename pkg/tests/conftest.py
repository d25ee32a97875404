import dataclasses
import time

import numpy as np
import pytest

import phasetop as pt
from phasetop.runio import RunConfig, matched_uniform_target_h, run


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def bench_a():
    return pt.benchmark("a")


@pytest.fixture(scope="session")
def coarse_a_mesh(bench_a):
    return bench_a.build_mesh(0.3)


@pytest.fixture(scope="session")
def unit_square_mesh():
    geom = pt.GridGeometry(rects=((0.0, 0.0, 1.0, 1.0),), snap=1.0)
    return pt.build_initial_mesh(geom, target_h=0.3,
                                 dirichlet=((( 0.0, 0.0), (1.0, 0.0)),
                                            ((1.0, 0.0), (1.0, 1.0)),
                                            ((1.0, 1.0), (0.0, 1.0)),
                                            ((0.0, 1.0), (0.0, 0.0))))


@pytest.fixture(scope="session")
def bench_a_adaptive(tmp_path_factory):
    """The benchmark (a) desk-scale reproduction run (5 refinement rounds,
    published hyperparameters); shared across acceptance criteria 6-9."""
    out = tmp_path_factory.mktemp("bench_a_adaptive")
    cfg = RunConfig(benchmark="a", mode="adaptive", rounds=6, out_dir=str(out))
    t0 = time.perf_counter()
    summary = run(cfg)
    wall = time.perf_counter() - t0
    return {"config": cfg, "summary": summary, "wall": wall, "out": out}


@pytest.fixture(scope="session")
def bench_a_uniform(tmp_path_factory, bench_a, bench_a_adaptive):
    """Uniform-refinement baseline with matched final vertex count and the
    same total number of outer iterations (4 meshes x 30 instead of
    6 x 20), mirroring the published comparison protocol."""
    target = bench_a_adaptive["summary"].final_vertices
    h_u = matched_uniform_target_h(bench_a, rounds=4, target_vertices=target)
    out = tmp_path_factory.mktemp("bench_a_uniform")
    cfg = RunConfig(benchmark="a", mode="uniform", rounds=4, out_dir=str(out),
                    target_h=h_u, n_outer=30)
    t0 = time.perf_counter()
    summary = run(cfg)
    wall = time.perf_counter() - t0
    return {"config": cfg, "summary": summary, "wall": wall, "out": out}
