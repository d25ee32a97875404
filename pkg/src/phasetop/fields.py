"""Nodal P1 fields on a mesh and exact transfer between nested meshes."""

from dataclasses import dataclass

import numpy as np

from .errors import MeshError
from .mesh import Mesh


@dataclass(frozen=True)
class DensityField:
    """Scalar P1 field (one value per vertex)."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, float))
        if v.shape != (self.mesh.n_vertices,):
            raise MeshError("density values do not match the mesh")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values):
        return DensityField(self.mesh, values)


@dataclass(frozen=True)
class DisplacementField:
    """Vector P1 field (a 2-vector per vertex)."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, float))
        if v.shape != (self.mesh.n_vertices, 2):
            raise MeshError("displacement values do not match the mesh")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _prolong_values(coarse: Mesh, fine: Mesh, values):
    if fine is coarse:
        return np.array(values)
    if fine.parent is not coarse:
        raise MeshError("target mesh is not a bisection of the field's mesh")
    nvc = coarse.n_vertices
    pa = fine.vertex_parents[nvc:, 0]
    pb = fine.vertex_parents[nvc:, 1]
    if pa.size and (pa.max() >= nvc or pb.max() >= nvc):
        raise MeshError("midpoint lineage refers to new vertices")
    out = np.empty((fine.n_vertices,) + np.shape(values)[1:])
    out[:nvc] = values
    out[nvc:] = 0.5 * (out[pa] + out[pb])
    return out


def prolong_scalar(field: DensityField, fine: Mesh) -> DensityField:
    """Re-express a P1 field on a nested refinement, exactly.

    Midpoint values are the averages of the split-edge endpoints, so the
    returned field equals the input as a function on the domain; box bounds
    and the integral are preserved to machine precision.
    """
    return DensityField(fine, _prolong_values(field.mesh, fine, field.values))


def prolong_vector(field: DisplacementField, fine: Mesh) -> DisplacementField:
    return DisplacementField(fine, _prolong_values(field.mesh, fine, field.values))


def integrate_p1(mesh: Mesh, values) -> float:
    """Exact integral of a P1 field: sum over T of |T| * mean(nodal values)."""
    values = np.asarray(values, float)
    tri_vals = values[mesh.triangles]
    return float(np.sum(mesh.areas * tri_vals.mean(axis=1)))


def basis_integrals(mesh: Mesh) -> np.ndarray:
    """Vector of integrals of the nodal basis functions (|omega_x| / 3)."""
    out = np.zeros(mesh.n_vertices)
    w = mesh.areas / 3.0
    for i in range(3):
        np.add.at(out, mesh.triangles[:, i], w)
    return out
