"""The outer adaptive loop: optimize, estimate, mark, refine.

Marking compares the two estimator totals and applies the bulk criterion to
whichever dominates (ties go to the optimality indicator).  The marked set
is the minimal descending-sorted prefix reaching the theta fraction.
Fields are carried to the refined mesh by exact prolongation.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .estimator import EstimatorReport, estimate
from .fields import DensityField, DisplacementField, prolong_scalar, prolong_vector
from .mesh import Mesh, bisect
from .phasefield import (OptimizerState, OuterIterate, modica_mortola,
                         optimize_on_mesh, scalar_system, volume_gap)
from .elasticity import compliance, simp_weights, energy_density


@dataclass(frozen=True)
class AdaptiveConfig:
    """Loop controls: bulk fractions, round budget, optional stops."""

    theta1: float = 0.95
    theta2: float = 0.95
    rounds: int = 6
    estimator_tol: float | None = None
    vertex_budget: int | None = None
    uniform: bool = False
    eta1_scale: float = 1.0   # optional rescaling of eta1^2 in the comparison

    def __post_init__(self):
        if not (0 < self.theta1 <= 1 and 0 < self.theta2 <= 1):
            raise ConfigError("bulk fractions must lie in (0, 1]")
        if self.rounds < 1:
            raise ConfigError("at least one round required")


@dataclass(frozen=True)
class RoundRecord:
    """Per-round summary written to histories and run reports."""

    round: int
    vertices: int
    objective: float
    volume_gap_abs: float
    eta1_sq: float
    eta2_sq: float
    seconds: float


@dataclass
class AdaptiveResult:
    rho: DensityField
    u: DisplacementField
    mesh: Mesh
    records: list
    stop_reason: str


def dorfler_mark(indicators_sq, theta: float):
    """Minimal-cardinality bulk marking.

    Sorts the squared indicators descending (ties broken by element index)
    and takes the shortest prefix whose sum reaches theta times the total.
    All-zero indicators mark nothing, which the driver treats as converged.
    """
    eta = np.asarray(indicators_sq, float)
    if np.any(eta < 0):
        raise ValueError("indicators must be nonnegative")
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    order = np.lexsort((np.arange(eta.size), -eta))
    csum = np.cumsum(eta[order])
    total = csum[-1] if eta.size else 0.0
    if total == 0.0:
        return np.array([], dtype=np.int64)
    k = int(np.searchsorted(csum, theta * total)) + 1
    k = min(k, eta.size)
    while k > 1 and csum[k - 2] >= theta * total:
        k -= 1
    return np.sort(order[:k])


def _final_round_stats(problem, mesh, rho, u, history):
    system = scalar_system(mesh)
    mat, params = problem.material, problem.phase_params
    J = compliance(rho, u, mat) + params.beta_tilde * modica_mortola(rho, params, system)
    G = volume_gap(rho, problem.volume_target)
    return J, G


def adaptive_loop(problem, config: AdaptiveConfig, sink=None,
                  solver_tol: float = 1e-10, target_h: float | None = None,
                  initial_mesh: Mesh | None = None) -> AdaptiveResult:
    """Run `config.rounds` optimize/estimate/mark/refine rounds.

    `sink`, when given, receives on_round(k, mesh, rho, u, report, history,
    record) after every round.  Refinement is skipped after the last round;
    optional estimator tolerance and vertex budget stop the loop early.
    """
    mesh = initial_mesh if initial_mesh is not None else problem.build_mesh(target_h)
    rho = problem.initial_density(mesh)
    u_warm = None
    records = []
    stop_reason = "rounds exhausted"
    # multiplier and penalty continue across rounds like the density warm
    # start; the penalty growth is capped at the explicit-step stability
    # bound tau * alpha * |Omega| < 1
    ell = alpha = None
    alpha_cap = 1.0 / (problem.hyper.tau * problem.geometry.area())

    for k in range(config.rounds):
        t0 = time.perf_counter()
        state = problem.optimizer_state()
        if ell is not None:
            state.ell = ell
            state.alpha = min(alpha, alpha_cap)
        rho, u, history = optimize_on_mesh(mesh, rho, problem, state,
                                           u_warm=u_warm, solver_tol=solver_tol)
        ell, alpha = state.ell, state.alpha
        report = estimate(mesh, rho, u, problem.material, problem.phase_params,
                          problem.load_spec)
        J, G = _final_round_stats(problem, mesh, rho, u, history)
        rec = RoundRecord(k, mesh.n_vertices, J, abs(G), report.total1,
                          report.total2, time.perf_counter() - t0)
        records.append(rec)
        if sink is not None:
            sink.on_round(k, mesh, rho, u, report, history, rec)

        if k == config.rounds - 1:
            break
        if config.estimator_tol is not None and report.total <= config.estimator_tol:
            stop_reason = "estimator tolerance reached"
            break
        if config.vertex_budget is not None and mesh.n_vertices >= config.vertex_budget:
            stop_reason = "vertex budget reached"
            break

        if config.uniform:
            marked = np.arange(mesh.n_triangles)
        else:
            if config.eta1_scale * report.total1 >= report.total2:
                marked = dorfler_mark(report.eta1_sq, config.theta1)
            else:
                marked = dorfler_mark(report.eta2_sq, config.theta2)
            if marked.size == 0:
                stop_reason = "estimators vanished"
                break
        fine = bisect(mesh, marked)
        rho = prolong_scalar(rho, fine)
        u_warm = prolong_vector(u, fine)
        mesh = fine

    return AdaptiveResult(rho, u, mesh, records, stop_reason)
