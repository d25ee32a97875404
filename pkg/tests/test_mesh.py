import math

import matplotlib.tri as mtri
import numpy as np
import pytest

import phasetop as pt
from phasetop.errors import GeometryError, MeshError
from phasetop.fields import DensityField, integrate_p1, prolong_scalar, prolong_vector
from phasetop.mesh import (DIRICHLET, NEUMANN, GridGeometry, Mesh, ShearBandGeometry,
                           audit_conformity, bisect, build_initial_mesh,
                           element_geometry, mesh_size, min_angle, nvb_shape_classes,
                           uniform_refine)


def single_triangle(p0=(0, 0), p1=(1, 0), p2=(0, 1), tags=(DIRICHLET,) * 3):
    verts = np.array([p0, p1, p2], float)
    bedges = np.array([[1, 2], [2, 0], [0, 1]])
    return Mesh(verts, np.array([[0, 1, 2]]), bedges, np.array(tags), np.zeros(1, int))


def evaluate_p1(mesh, values, points):
    """Independent P1 evaluation through matplotlib's point locator."""
    tri = mtri.Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles)
    interp = mtri.LinearTriInterpolator(tri, values)
    out = interp(points[:, 0], points[:, 1])
    assert not np.ma.is_masked(out) or not out.mask.any()
    return np.asarray(out)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def test_unit_square_two_triangles():
    geom = GridGeometry(rects=((0, 0, 1, 1),), snap=1.0)
    mesh = build_initial_mesh(geom, target_h=10.0)
    assert mesh.n_triangles == 2
    assert np.allclose(np.sort(mesh.areas), [0.5, 0.5])
    audit_conformity(mesh)


def test_single_right_triangle_size():
    mesh = single_triangle()
    assert mesh_size(mesh)[0] == pytest.approx(math.sqrt(0.5), abs=1e-12)
    assert mesh_size(mesh)[0] == pytest.approx(0.7071067812, abs=1e-9)


def test_benchmark_a_initial_vertex_count():
    mesh = pt.benchmark("a").build_mesh(0.05)
    # initial mesh size comparable with the published run (1718 vertices)
    assert 1718 / 2 <= mesh.n_vertices <= 1718 * 2


def test_mesh_size_values():
    mesh = single_triangle(p2=(0, 2))  # area 1
    assert mesh_size(mesh)[0] == pytest.approx(1.0, abs=1e-14)
    fine = bisect(mesh, [0])
    assert np.allclose(mesh_size(fine), math.sqrt(0.5), atol=1e-14)


def test_element_geometry_invariants():
    mesh = pt.benchmark("a").build_mesh(0.3)
    g = element_geometry(mesh, 3)
    assert g.h == pytest.approx(math.sqrt(g.area), abs=1e-15)
    assert np.allclose(np.hypot(g.normals[:, 0], g.normals[:, 1]), 1.0, atol=1e-14)


def test_degenerate_geometry_rejected():
    with pytest.raises(GeometryError):
        GridGeometry(rects=((0, 0, 0, 1),), snap=1.0)
    with pytest.raises(GeometryError):
        GridGeometry(rects=((0, 0, 1, 1), (0.5, 0, 1.5, 1)), snap=0.5)
    with pytest.raises(GeometryError):
        ShearBandGeometry(0.0, 1.0, 0.0, ((0, 0), (1, 0)))
    with pytest.raises(GeometryError):
        ShearBandGeometry(0.0, 1.0, 1.0, ((0, 0), (0.7, 0), (1, 0)))


def test_boundary_tags_partition():
    prob = pt.benchmark("a")
    mesh = prob.build_mesh(0.2)
    tags = mesh.edge_tag
    boundary = mesh.edge_tris[:, 1] < 0
    assert np.all((tags >= 0) == boundary)
    # left side exactly Dirichlet
    dir_len = mesh.edge_lengths[tags == DIRICHLET].sum()
    assert dir_len == pytest.approx(1.0, abs=1e-12)
    neu_len = mesh.edge_lengths[tags == NEUMANN].sum()
    assert dir_len + neu_len == pytest.approx(6.0, abs=1e-10)


# ---------------------------------------------------------------------------
# bisection
# ---------------------------------------------------------------------------

def test_bisect_empty_is_identity():
    mesh = pt.benchmark("a").build_mesh(0.4)
    assert bisect(mesh, []) is mesh


def test_bisect_one_of_two_conforming():
    geom = GridGeometry(rects=((0, 0, 1, 1),), snap=1.0)
    mesh = build_initial_mesh(geom, target_h=10.0)
    fine = bisect(mesh, [0])
    assert fine.n_triangles >= 4
    audit_conformity(fine)
    assert abs(fine.areas.sum() - 1.0) < 1e-12


def test_children_nested_and_halved():
    mesh = pt.benchmark("f").build_mesh(0.4)
    rng = np.random.default_rng(5)
    marked = rng.choice(mesh.n_triangles, size=mesh.n_triangles // 3, replace=False)
    fine = bisect(mesh, marked)
    audit_conformity(fine)
    # nestedness: every fine vertex is inside some coarse element (barycentric)
    tri = mtri.Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles)
    finder = tri.get_trifinder()
    found = finder(fine.vertices[:, 0], fine.vertices[:, 1])
    assert np.all(found >= 0)
    # area conservation and exact halving: the structured parent mesh has
    # one cell area, so children can only be that, its half, or its quarter
    assert abs(fine.areas.sum() - mesh.areas.sum()) < 1e-12 * mesh.areas.sum()
    base = mesh.areas[0]
    ratios = fine.areas / base
    assert np.all(np.isin(np.round(np.log2(ratios)), [0, -1, -2]))
    assert np.allclose(ratios * 2.0 ** (-np.round(np.log2(ratios))), 1.0, atol=1e-12)


def test_six_rounds_shape_regularity():
    mesh = pt.benchmark("a").build_mesh(0.4)
    _, class_min = nvb_shape_classes(mesh)
    m = mesh
    for _ in range(6):
        m = bisect(m, np.arange(m.n_triangles))
        audit_conformity(m)
        assert min_angle(m) >= class_min - 1e-6
    assert abs(m.areas.sum() - 2.0) < 1e-10 * 2.0


def test_bisect_marked_out_of_range():
    mesh = pt.benchmark("a").build_mesh(0.4)
    with pytest.raises(MeshError):
        bisect(mesh, [mesh.n_triangles + 3])


# ---------------------------------------------------------------------------
# prolongation
# ---------------------------------------------------------------------------

def test_prolong_constant_and_linear():
    mesh = pt.benchmark("a").build_mesh(0.3)
    fine = bisect(mesh, np.arange(0, mesh.n_triangles, 2))
    const = prolong_scalar(DensityField(mesh, np.full(mesh.n_vertices, 0.4)), fine)
    assert np.all(const.values == 0.4)
    lin = prolong_scalar(DensityField(mesh, mesh.vertices[:, 0].copy()), fine)
    assert np.allclose(lin.values, fine.vertices[:, 0], atol=1e-14)


def test_prolong_exact_against_point_location(rng):
    mesh = pt.benchmark("a").build_mesh(0.3)
    vals = rng.uniform(0.0, 1.0, mesh.n_vertices)
    field = DensityField(mesh, vals)
    fine = bisect(mesh, rng.choice(mesh.n_triangles, 40, replace=False))
    pro = prolong_scalar(field, fine)
    ref = evaluate_p1(mesh, vals, fine.vertices)
    assert np.max(np.abs(pro.values - ref)) <= 1e-14
    v0 = integrate_p1(mesh, vals)
    v1 = integrate_p1(fine, pro.values)
    assert abs(v1 - v0) <= 1e-14 * abs(v0)


def test_prolong_vector_matches_componentwise(rng):
    mesh = pt.benchmark("a").build_mesh(0.4)
    vals = rng.standard_normal((mesh.n_vertices, 2))
    fine = bisect(mesh, [0, 1, 2])
    pro = prolong_vector(pt.DisplacementField(mesh, vals), fine)
    for c in range(2):
        ref = prolong_scalar(DensityField(mesh, vals[:, c]), fine)
        assert np.array_equal(pro.values[:, c], ref.values)


def test_prolong_rejects_unrelated_mesh():
    mesh_a = pt.benchmark("a").build_mesh(0.4)
    mesh_b = pt.benchmark("a").build_mesh(0.3)
    field = DensityField(mesh_a, np.zeros(mesh_a.n_vertices))
    with pytest.raises(MeshError):
        prolong_scalar(field, mesh_b)


def test_uniform_refine_doubles_elements():
    mesh = pt.benchmark("a").build_mesh(0.4)
    fine = uniform_refine(mesh, 1)
    assert fine.n_triangles == 2 * mesh.n_triangles
