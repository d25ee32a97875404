"""Adaptive phase-field topology optimization on triangular meshes."""

from .adaptive import AdaptiveConfig, AdaptiveResult, RoundRecord, adaptive_loop, dorfler_mark
from .elasticity import (LinearSystem, LoadSpec, MaterialModel, assemble_stiffness,
                         assemble_system, compliance, elastic_stress, element_strain,
                         interpolate_constrained, lame_constants, solve_state, strains)
from .errors import (ConfigError, GeometryError, MeshError, PhasetopError, SolveError,
                     SupportError)
from .estimator import EstimatorReport, estimate
from .fields import DensityField, DisplacementField, prolong_scalar, prolong_vector
from .mesh import (DIRICHLET, FREE, NEUMANN, GridGeometry, Mesh, ShearBandGeometry,
                   bisect, build_initial_mesh, mesh_size, uniform_refine)
from .phasefield import (OptimizerState, PhaseFieldParams, augmented_lagrangian,
                         density_gradient, double_well, double_well_prime,
                         gradient_flow_step, modica_mortola, objective, optimize_on_mesh,
                         project_box, update_multiplier, update_penalty, volume_gap)
from .problems import Hyperparameters, ProblemSpec, benchmark, mixed_dirichlet_apply
from .runio import RunConfig, RunSummary, compare, run

__version__ = "0.1.0"
