"""Phase-field objective and the augmented-Lagrangian gradient-flow optimizer.

The density update is the semi-implicit step

    (M/tau + bt*gamma*K) rho_new = (M/tau) rho_old + F(rho_old),

where F tests the explicit part of the negative Lagrangian gradient against
the basis functions:

    F_i = int [ p rho^(p-1) C0 eps(u):eps(u)
                - (bt/gamma) W'(rho) - ell - alpha G(rho) ] phi_i dx.

The compliance term enters with positive sign (adding material where strain
energy is high lowers compliance through the self-adjoint state equation);
together with W' carrying coefficient bt/gamma and negative sign this makes
the step a descent direction for the augmented Lagrangian, which the
finite-difference gradient check pins down.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.integrate
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .elasticity import (MaterialModel, assemble_system, compliance,
                         energy_density, simp_weights, solve_state)
from .errors import SolveError
from .fields import DensityField, DisplacementField, basis_integrals, integrate_p1
from .mesh import Mesh
from .quadrature import triangle_rule


def double_well(s, rho_low):
    """W(s) = (1/4) (s - rho_low)^2 (s - 1)^2."""
    s = np.asarray(s, float)
    return 0.25 * (s - rho_low) ** 2 * (s - 1.0) ** 2


def double_well_prime(s, rho_low):
    """W'(s) = (1/2) (s - rho_low) (s - 1) (2s - rho_low - 1)."""
    s = np.asarray(s, float)
    return 0.5 * (s - rho_low) * (s - 1.0) * (2.0 * s - rho_low - 1.0)


@dataclass(frozen=True)
class PhaseFieldParams:
    """Interface regularization: weight beta, width gamma, density floor.

    beta_tilde = beta / c_W with c_W = int_{rho_low}^1 sqrt(2 W(s)) ds, the
    perimeter-rescaling constant of the double well.
    """

    beta: float
    gamma: float
    rho_low: float = 1e-4

    def __post_init__(self):
        if self.beta <= 0 or self.gamma <= 0:
            raise ValueError("beta and gamma must be positive")

    @cached_property
    def c_w(self):
        val, err = scipy.integrate.quad(
            lambda s: math.sqrt(2.0 * double_well(s, self.rho_low)),
            self.rho_low, 1.0, epsabs=0.0, epsrel=1e-10)
        return val

    @property
    def beta_tilde(self):
        return self.beta / self.c_w


@dataclass
class OptimizerState:
    """Augmented-Lagrangian state: multiplier, penalty and loop sizes."""

    ell: float
    alpha: float
    xi: float
    tau: float
    n_outer: int
    m_inner: int
    volume_target: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("pseudo time step must be positive")
        if not 0 < self.xi <= 1:
            raise ValueError("penalty divisor must lie in (0, 1]")
        if self.alpha <= 0:
            raise ValueError("penalty weight must be positive")
        if self.n_outer < 1 or self.m_inner < 0:
            raise ValueError("iteration counts out of range")


@dataclass
class ScalarSystem:
    """P1 mass/stiffness on the density mesh (natural boundary conditions)."""

    mesh: Mesh
    mass: sp.csr_matrix
    stiffness: sp.csr_matrix
    phi_int: np.ndarray
    _factors: dict = field(default_factory=dict, repr=False)

    def flow_solver(self, tau, diffusion):
        key = (float(tau), float(diffusion))
        if key not in self._factors:
            A = (self.mass / tau + diffusion * self.stiffness).tocsc()
            self._factors[key] = (A, spla.splu(A))
        return self._factors[key]


def scalar_system(mesh: Mesh) -> ScalarSystem:
    t = mesh.triangles
    nt = mesh.n_triangles
    Me = np.tile(np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0, (nt, 1, 1))
    Me *= mesh.areas[:, None, None]
    Ke = np.einsum("t,tid,tjd->tij", mesh.areas, mesh.grads, mesh.grads)
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.n_vertices
    M = sp.coo_matrix((Me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return ScalarSystem(mesh, M, K, basis_integrals(mesh))


def modica_mortola(rho: DensityField, params: PhaseFieldParams,
                   system: ScalarSystem | None = None) -> float:
    """(gamma/2) |grad rho|_L2^2 + (1/gamma) int W(rho); W integrated with a
    rule exact for the quartic integrand."""
    mesh = rho.mesh
    if system is None or system.mesh is not mesh:
        system = scalar_system(mesh)
    grad_part = float(rho.values @ (system.stiffness @ rho.values))
    bary, w = triangle_rule(4)
    rq = rho.values[mesh.triangles] @ bary.T
    well = float(np.sum(mesh.areas * (double_well(rq, params.rho_low) @ w)))
    return 0.5 * params.gamma * grad_part + well / params.gamma


def objective(rho: DensityField, u: DisplacementField, mat: MaterialModel,
              params: PhaseFieldParams, system: ScalarSystem | None = None) -> float:
    """J(rho) = compliance + beta_tilde * (Modica-Mortola energy)."""
    return compliance(rho, u, mat) + params.beta_tilde * modica_mortola(rho, params, system)


def volume_gap(rho: DensityField, volume_target: float) -> float:
    """G(rho) = int rho dx - V0 (exact P1 integral)."""
    return integrate_p1(rho.mesh, rho.values) - volume_target


def augmented_lagrangian(rho, u, ell, alpha, mat, params, volume_target,
                         system=None) -> float:
    G = volume_gap(rho, volume_target)
    return objective(rho, u, mat, params, system) + ell * G + 0.5 * alpha * G * G


def explicit_force(rho: DensityField, energy: np.ndarray, ell: float, alpha: float,
                   volume_target: float, mat: MaterialModel,
                   params: PhaseFieldParams, system: ScalarSystem) -> np.ndarray:
    """F_i = int [p rho^(p-1) E - (bt/g) W'(rho) - ell - alpha G(rho)] phi_i dx."""
    mesh = rho.mesh
    p = mat.p
    bt, gamma = params.beta_tilde, params.gamma
    bary, w = triangle_rule(max(4, p))
    rq = rho.values[mesh.triangles] @ bary.T
    dens = (p * rq ** (p - 1)) * energy[:, None] \
        - (bt / gamma) * double_well_prime(rq, params.rho_low)
    F = np.zeros(mesh.n_vertices)
    for i in range(3):
        wi = w * bary[:, i]
        np.add.at(F, mesh.triangles[:, i], mesh.areas * (dens @ wi))
    G = volume_gap(rho, volume_target)
    F -= (ell + alpha * G) * system.phi_int
    return F


def density_gradient(rho: DensityField, u: DisplacementField, ell: float, alpha: float,
                     mat: MaterialModel, params: PhaseFieldParams, volume_target: float,
                     system: ScalarSystem | None = None) -> np.ndarray:
    """Discrete gradient of the augmented Lagrangian tested against each
    basis function (compliance term with the adjoint-induced minus sign)."""
    mesh = rho.mesh
    if system is None or system.mesh is not mesh:
        system = scalar_system(mesh)
    E = energy_density(mesh, u, mat)
    F = explicit_force(rho, E, ell, alpha, volume_target, mat, params, system)
    return params.beta_tilde * params.gamma * (system.stiffness @ rho.values) - F


def gradient_flow_step(rho: DensityField, energy: np.ndarray, state: OptimizerState,
                       params: PhaseFieldParams, mat: MaterialModel,
                       system: ScalarSystem, tol: float = 1e-10) -> DensityField:
    """One semi-implicit pseudo-time step of the gradient flow."""
    F = explicit_force(rho, energy, state.ell, state.alpha, state.volume_target,
                       mat, params, system)
    A, lu = system.flow_solver(state.tau, params.beta_tilde * params.gamma)
    b = system.mass @ rho.values / state.tau + F
    x = lu.solve(b)
    bnorm = np.linalg.norm(b)
    if bnorm > 0:
        res = np.linalg.norm(b - A @ x) / bnorm
        if not res <= tol:
            raise SolveError(f"flow step stalled at relative residual {res:.3e}", residual=res)
    return rho.with_values(x)


def project_box(rho: DensityField, rho_low: float) -> DensityField:
    """Nodal clamp onto [rho_low, 1]."""
    return rho.with_values(np.clip(rho.values, rho_low, 1.0))


def update_multiplier(ell: float, alpha: float, gap: float) -> float:
    """Uzawa step: the multiplier moves with the signed volume violation."""
    return ell + alpha * gap


def update_penalty(alpha: float, xi: float) -> float:
    if xi <= 0:
        raise ValueError("penalty divisor must be positive")
    return alpha / xi


@dataclass(frozen=True)
class OuterIterate:
    """Per-outer-iteration log entry."""

    objective: float
    volume_gap: float
    multiplier: float
    penalty: float


def optimize_on_mesh(mesh: Mesh, rho_init: DensityField, problem, state: OptimizerState,
                     u_warm: DisplacementField | None = None, solver_tol: float = 1e-10):
    """Fixed-mesh optimization: N outer iterations, each with one state
    solve, M projected semi-implicit density steps, then Uzawa multiplier
    and penalty updates.

    `problem` supplies material, phase_params, load_spec and fixed_dofs().
    Returns (rho, u, history) with u re-solved for the final density and
    history holding one OuterIterate per outer iteration.
    """
    mat = problem.material
    params = problem.phase_params
    loads = problem.load_spec
    fixed = problem.fixed_dofs(mesh)
    system = scalar_system(mesh)

    rho = project_box(DensityField(mesh, rho_init.values), params.rho_low)
    ell, alpha = state.ell, state.alpha
    gap = volume_gap(rho, state.volume_target)
    history = []
    u = None
    x0 = u_warm.values.ravel() if u_warm is not None else None

    for n in range(state.n_outer):
        lin = assemble_system(mesh, rho, mat, loads, fixed)
        u = solve_state(lin, mesh, tol=solver_tol, x0=x0)
        x0 = u.values.ravel()
        E = energy_density(mesh, u, mat)
        J = float(np.dot(simp_weights(mesh, rho, mat.p), E)) \
            + params.beta_tilde * modica_mortola(rho, params, system)
        history.append(OuterIterate(J, gap, ell, alpha))

        step_state = OptimizerState(ell, alpha, state.xi, state.tau, 1, 0, state.volume_target)
        for m in range(state.m_inner):
            rho = gradient_flow_step(rho, E, step_state, params, mat, system)
            rho = project_box(rho, params.rho_low)

        gap = volume_gap(rho, state.volume_target)
        ell = update_multiplier(ell, alpha, gap)
        alpha = update_penalty(alpha, state.xi)

    state.ell, state.alpha = ell, alpha
    if state.m_inner > 0 or u is None:
        lin = assemble_system(mesh, rho, mat, loads, fixed)
        u = solve_state(lin, mesh, tol=solver_tol, x0=x0)
    return rho, u, history
