"""P1 finite elements for SIMP-weighted linear elasticity.

Assembly integrates the density weight rho^p exactly (rho is P1, the strain
product is elementwise constant), Dirichlet conditions are eliminated
symmetrically so the reduced system stays SPD, and the solve contract is a
relative residual below the requested tolerance.
"""

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import MeshError, SolveError
from .fields import DensityField, DisplacementField, basis_integrals, integrate_p1
from .mesh import Mesh
from .quadrature import triangle_rule


def lame_constants(E: float, nu: float):
    """Lame constants mu = E/(2(1+nu)), lambda = E nu/((1+nu)(1-2nu))."""
    if E <= 0:
        raise ValueError("Young modulus must be positive")
    if not 0 <= nu < 0.5:
        raise ValueError("Poisson ratio must lie in [0, 0.5)")
    if nu == 0:
        warnings.warn("nu = 0 gives lambda = 0; shear stiffness only")
    mu = E / (2.0 * (1.0 + nu))
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    return mu, lam


@dataclass(frozen=True)
class MaterialModel:
    """Isotropic medium with SIMP density penalization.

    The SIMP exponent must be an integer > 1, which keeps all density
    integrands polynomial and exactly integrable.
    """

    E: float = 1.0
    nu: float = 0.3
    p: int = 3
    rho_low: float = 1e-4

    def __post_init__(self):
        if int(self.p) != self.p or self.p <= 1:
            raise ValueError("SIMP exponent p must be an integer greater than 1")
        if not 0 < self.rho_low < 1:
            raise ValueError("density floor must lie in (0, 1)")
        lame_constants(self.E, self.nu)  # validates E, nu

    @property
    def mu(self):
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def lam(self):
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @property
    def voigt(self):
        """Stiffness in Voigt order (exx, eyy, gxy)."""
        mu, lam = self.mu, self.lam
        return np.array([[2 * mu + lam, lam, 0.0],
                         [lam, 2 * mu + lam, 0.0],
                         [0.0, 0.0, mu]])


def elastic_stress(mu, lam, eps):
    """Isotropic stress 2 mu eps + lam tr(eps) I for a symmetric 2x2 strain."""
    eps = np.asarray(eps, float)
    return 2.0 * mu * eps + lam * np.trace(eps) * np.eye(2)


@dataclass(frozen=True)
class LoadSpec:
    """Loads: constant-or-callable body force, nodal point loads resolved to
    the nearest vertex, and constant tractions on tagged boundary segments."""

    body_force: tuple = (0.0, 0.0)
    point_loads: tuple = ()    # ((x, y), (fx, fy)) pairs
    tractions: tuple = ()      # ((p0, p1), (gx, gy)) segment tractions


@dataclass(frozen=True)
class LinearSystem:
    """Reduced SPD system after symmetric Dirichlet elimination."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    free: np.ndarray     # free dof indices into the full 2*nv vector
    n_full: int

    @cached_property
    def rhs_norm(self):
        return float(np.linalg.norm(self.rhs))


def simp_weights(mesh: Mesh, rho: DensityField, p: int) -> np.ndarray:
    """Exact per-element integrals of rho^p (degree-p quadrature)."""
    bary, w = triangle_rule(int(p))
    rq = rho.values[mesh.triangles] @ bary.T     # (nt, nq)
    return mesh.areas * ((rq ** p) @ w)


def _bmatrix(mesh: Mesh):
    g = mesh.grads  # (nt, 3, 2)
    nt = mesh.n_triangles
    B = np.zeros((nt, 3, 6))
    B[:, 0, 0::2] = g[:, :, 0]
    B[:, 1, 1::2] = g[:, :, 1]
    B[:, 2, 0::2] = g[:, :, 1]
    B[:, 2, 1::2] = g[:, :, 0]
    return B


def _element_dofs(mesh: Mesh):
    t = mesh.triangles
    dofs = np.empty((mesh.n_triangles, 6), np.int64)
    dofs[:, 0::2] = 2 * t
    dofs[:, 1::2] = 2 * t + 1
    return dofs


def assemble_stiffness(mesh: Mesh, rho: DensityField | None, mat: MaterialModel) -> sp.csr_matrix:
    """Global stiffness for the form (rho^p C0 eps(u), eps(v)); rho=None
    bypasses SIMP (plain elasticity), used as an assembly oracle."""
    if rho is None:
        w = mesh.areas
    else:
        if rho.mesh is not mesh:
            raise MeshError("density lives on a different mesh")
        w = simp_weights(mesh, rho, mat.p)
    B = _bmatrix(mesh)
    D = mat.voigt
    Ke = np.einsum("t,tik,kl,tlj->tij", w, B.transpose(0, 2, 1), D, B, optimize=True)
    dofs = _element_dofs(mesh)
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    n = 2 * mesh.n_vertices
    return sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def nearest_vertex(mesh: Mesh, point, max_dist=None) -> int:
    point = np.asarray(point, float)
    d2 = np.sum((mesh.vertices - point) ** 2, axis=1)
    i = int(np.argmin(d2))
    limit = mesh.max_diameter if max_dist is None else max_dist
    if math.sqrt(d2[i]) > limit:
        raise MeshError(f"no mesh vertex within element size of point {tuple(point)}")
    return i


def load_vector(mesh: Mesh, loads: LoadSpec, quad_degree: int = 6) -> np.ndarray:
    f = np.zeros(2 * mesh.n_vertices)
    bf = loads.body_force
    if callable(bf):
        bary, w = triangle_rule(quad_degree)
        pts = np.einsum("qk,tkd->tqd", bary, mesh.vertices[mesh.triangles])
        vals = np.asarray(bf(pts[..., 0], pts[..., 1]))  # (2, nt, nq)
        for i in range(3):
            wi = w * bary[:, i]
            np.add.at(f, 2 * mesh.triangles[:, i], mesh.areas * (vals[0] @ wi))
            np.add.at(f, 2 * mesh.triangles[:, i] + 1, mesh.areas * (vals[1] @ wi))
    elif bf is not None and (bf[0] != 0.0 or bf[1] != 0.0):
        third = basis_integrals(mesh)
        f[0::2] = bf[0] * third
        f[1::2] = bf[1] * third
    for point, force in loads.point_loads:
        v = nearest_vertex(mesh, point)
        f[2 * v] += force[0]
        f[2 * v + 1] += force[1]
    if loads.tractions:
        from .mesh import _point_on_segment  # segment test shared with tagging
        tag = mesh.edge_tag
        bids = np.where(tag >= 0)[0]
        a = mesh.vertices[mesh.edges[bids, 0]]
        b = mesh.vertices[mesh.edges[bids, 1]]
        mids = 0.5 * (a + b)
        for (p0, p1), g in loads.tractions:
            hit = (_point_on_segment(a, p0, p1) & _point_on_segment(b, p0, p1)
                   & _point_on_segment(mids, p0, p1))
            for eid in bids[hit]:
                i, j = mesh.edges[eid]
                L = mesh.edge_lengths[eid]
                for v in (i, j):
                    f[2 * v] += 0.5 * L * g[0]
                    f[2 * v + 1] += 0.5 * L * g[1]
    return f


def apply_dirichlet(K: sp.csr_matrix, f: np.ndarray, fixed_dofs) -> LinearSystem:
    """Symmetric elimination: drop fixed rows and columns (zero data)."""
    n = K.shape[0]
    fixed = np.unique(np.asarray(fixed_dofs, np.int64))
    mask = np.ones(n, bool)
    mask[fixed] = False
    free = np.where(mask)[0]
    A = K[free][:, free].tocsr()
    return LinearSystem(A, f[free], free, n)


def assemble_system(mesh: Mesh, rho: DensityField, mat: MaterialModel,
                    loads: LoadSpec, fixed_dofs) -> LinearSystem:
    K = assemble_stiffness(mesh, rho, mat)
    f = load_vector(mesh, loads)
    return apply_dirichlet(K, f, fixed_dofs)


def solve_state(system: LinearSystem, mesh: Mesh, tol: float = 1e-10,
                x0=None) -> DisplacementField:
    """Solve the reduced SPD system to a relative residual <= tol.

    Direct sparse factorization first; if rounding on badly conditioned
    SIMP contrasts leaves a too-large residual, fall back to Jacobi-
    preconditioned CG before giving up with a diagnostic.
    """
    A, b = system.matrix, system.rhs
    bnorm = system.rhs_norm
    full = np.zeros(system.n_full)
    if bnorm == 0.0:
        return DisplacementField(mesh, full.reshape(-1, 2))
    x = spla.spsolve(A.tocsc(), b)
    res = np.linalg.norm(b - A @ x) / bnorm
    if not np.isfinite(res) or res > tol:
        diag = A.diagonal()
        M = sp.diags(1.0 / np.where(diag > 0, diag, 1.0))
        x0 = x if np.all(np.isfinite(x)) else (x0[system.free] if x0 is not None else None)
        x_it, info = spla.cg(A, b, x0=x0, rtol=tol * 0.1, maxiter=20 * A.shape[0], M=M)
        res_it = np.linalg.norm(b - A @ x_it) / bnorm
        if res_it < res:
            x, res = x_it, res_it
        if res > tol:
            raise SolveError(f"state solve stalled at relative residual {res:.3e}", residual=res)
    full[system.free] = x
    return DisplacementField(mesh, full.reshape(-1, 2))


def strains(mesh: Mesh, u: DisplacementField) -> np.ndarray:
    """Elementwise constant strain tensors, shape (nt, 2, 2)."""
    uv = u.values[mesh.triangles]          # (nt, 3, 2)
    grad = np.einsum("tkd,tkc->tdc", mesh.grads, uv)  # grad[d, c] = d u_c / d x_d
    gradu = grad.transpose(0, 2, 1)        # (du_c/dx_d) with rows = component
    return 0.5 * (gradu + gradu.transpose(0, 2, 1))


def element_strain(u: DisplacementField, t: int) -> np.ndarray:
    return strains(u.mesh, u)[t]


def energy_density(mesh: Mesh, u: DisplacementField, mat: MaterialModel) -> np.ndarray:
    """Elementwise constant C0 eps(u) : eps(u)."""
    eps = strains(mesh, u)
    v = np.column_stack([eps[:, 0, 0], eps[:, 1, 1], 2.0 * eps[:, 0, 1]])
    return np.einsum("ti,ij,tj->t", v, mat.voigt, v)


def element_stresses(mesh: Mesh, u: DisplacementField, mat: MaterialModel) -> np.ndarray:
    """Elementwise constant stress tensors C0 eps(u), shape (nt, 2, 2)."""
    eps = strains(mesh, u)
    tr = eps[:, 0, 0] + eps[:, 1, 1]
    sig = 2.0 * mat.mu * eps
    sig[:, 0, 0] += mat.lam * tr
    sig[:, 1, 1] += mat.lam * tr
    return sig


def compliance(rho: DensityField, u: DisplacementField, mat: MaterialModel) -> float:
    """Elastic work integral (rho^p C0 eps(u), eps(u)), exact quadrature."""
    if rho.mesh is not u.mesh:
        raise MeshError("density and displacement live on different meshes")
    w = simp_weights(rho.mesh, rho, mat.p)
    return float(np.dot(w, energy_density(rho.mesh, u, mat)))


def external_work(mesh: Mesh, loads: LoadSpec, u: DisplacementField) -> float:
    f = load_vector(mesh, loads)
    return float(f @ u.values.ravel())


def interpolate_constrained(v, mesh: Mesh, quad_degree: int = 4) -> DensityField:
    """Constraint-preserving interpolation onto the P1 space of `mesh`.

    The nodal value is the average of v over the vertex patch, which keeps
    box bounds and (because each element belongs to exactly three patches
    and integrates each of its basis functions to |T|/3) reproduces the
    integral of v exactly.

    `v` may be a DensityField on `mesh` or on a coarser mesh `mesh`
    descends from, a callable v(x, y), or a scalar.
    """
    if isinstance(v, DensityField):
        if v.mesh is not mesh:
            chain = []
            m = mesh
            while m is not None and m is not v.mesh:
                chain.append(m)
                m = m.parent
            if m is None:
                raise MeshError("field mesh is not an ancestor of the target mesh")
            from .fields import prolong_scalar
            for fine in reversed(chain):
                v = prolong_scalar(v, fine)
        vals = v.values
        tri_int = mesh.areas * vals[mesh.triangles].mean(axis=1)
        lo, hi = float(vals.min()), float(vals.max())
    elif np.isscalar(v):
        return DensityField(mesh, np.full(mesh.n_vertices, float(v)))
    elif callable(v):
        bary, w = triangle_rule(quad_degree)
        pts = np.einsum("qk,tkd->tqd", bary, mesh.vertices[mesh.triangles])
        vq = np.asarray(v(pts[..., 0], pts[..., 1]), float)
        tri_int = mesh.areas * (vq @ w)
        lo, hi = float(vq.min()), float(vq.max())
    else:
        raise TypeError("unsupported field type for interpolation")

    patch_int = np.zeros(mesh.n_vertices)
    patch_area = np.zeros(mesh.n_vertices)
    for i in range(3):
        np.add.at(patch_int, mesh.triangles[:, i], tri_int)
        np.add.at(patch_area, mesh.triangles[:, i], mesh.areas)
    out = patch_int / patch_area
    # averaging cannot leave [lo, hi]; clipping only removes rounding dust
    np.clip(out, lo, hi, out=out)
    return DensityField(mesh, out)


def volume(mesh: Mesh, rho: DensityField) -> float:
    return integrate_p1(mesh, rho.values)
