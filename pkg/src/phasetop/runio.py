"""Run configuration, CSV/summary writers and the run/compare drivers.

Configs and summaries are JSON (floats serialize via shortest round-trip
repr, so reload is bit-exact).  The CSV history has one row per outer
iteration per round:

    outer_iteration, round, objective, volume_gap, multiplier, penalty,
    eta1_sq, eta2_sq, vertices, elapsed_seconds

Apart from elapsed_seconds (wall time is not reproducible) rows are
deterministic for a fixed config.
"""

import dataclasses
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .adaptive import AdaptiveConfig, RoundRecord, adaptive_loop
from .errors import ConfigError
from .problems import ProblemSpec, benchmark
from .vtkio import write_vtk

CSV_HEADER = ("outer_iteration,round,objective,volume_gap,multiplier,penalty,"
              "eta1_sq,eta2_sq,vertices,elapsed_seconds")
_F = "%.17g"


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run."""

    benchmark: str = "a"
    mode: str = "adaptive"            # adaptive | uniform
    rounds: int = 6
    theta1: float = 0.95
    theta2: float = 0.95
    out_dir: str = "runs/out"
    target_h: float | None = None
    n_outer: int | None = None        # override the benchmark's outer count
    m_inner: int | None = None
    estimator_tol: float | None = None
    vertex_budget: int | None = None
    eta1_scale: float = 1.0
    solver_tol: float = 1e-10
    seed: int = 0                     # reserved for randomized harnesses
    figures: bool = False

    def __post_init__(self):
        if self.mode not in ("adaptive", "uniform"):
            raise ConfigError(f"unknown mode {self.mode!r}")

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2)

    @staticmethod
    def from_json(text: str) -> "RunConfig":
        data = json.loads(text)
        try:
            return RunConfig(**data)
        except TypeError as exc:
            raise ConfigError(f"bad run config: {exc}") from None

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    @staticmethod
    def load(path) -> "RunConfig":
        with open(path) as fh:
            return RunConfig.from_json(fh.read())


@dataclass(frozen=True)
class RunSummary:
    benchmark: str
    mode: str
    final_vertices: int
    final_objective: float
    total_seconds: float
    stop_reason: str
    rounds: tuple

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    @staticmethod
    def load(path) -> "RunSummary":
        with open(path) as fh:
            data = json.loads(fh.read())
        data["rounds"] = tuple(tuple(r) for r in data["rounds"])
        return RunSummary(**data)


class RunWriter:
    """Sink for adaptive_loop: per-round VTK plus an appended CSV history."""

    def __init__(self, out_dir, problem: ProblemSpec):
        self.out_dir = out_dir
        self.problem = problem
        os.makedirs(out_dir, exist_ok=True)
        self.csv_path = os.path.join(out_dir, "history.csv")
        with open(self.csv_path, "w") as fh:
            fh.write(CSV_HEADER + "\n")
        self.t0 = time.perf_counter()

    def on_round(self, k, mesh, rho, u, report, history, record: RoundRecord):
        elapsed = time.perf_counter() - self.t0
        with open(self.csv_path, "a") as fh:
            for n, it in enumerate(history):
                row = [str(n), str(k), _F % it.objective, _F % it.volume_gap,
                       _F % it.multiplier, _F % it.penalty, _F % record.eta1_sq,
                       _F % record.eta2_sq, str(record.vertices), _F % elapsed]
                fh.write(",".join(row) + "\n")
        umag = np.hypot(u.values[:, 0], u.values[:, 1])
        write_vtk(os.path.join(self.out_dir, f"round_{k}.vtk"), mesh,
                  point_scalars={"rho": rho.values, "u_magnitude": umag},
                  point_vectors={"displacement": u.values},
                  cell_scalars={"eta1_sq": report.eta1_sq, "eta2_sq": report.eta2_sq},
                  title=f"benchmark {self.problem.name} round {k}")


def build_problem(config: RunConfig) -> ProblemSpec:
    prob = benchmark(config.benchmark)
    hyper = prob.hyper
    if config.n_outer is not None:
        hyper = dataclasses.replace(hyper, n_outer=config.n_outer)
    if config.m_inner is not None:
        hyper = dataclasses.replace(hyper, m_inner=config.m_inner)
    return dataclasses.replace(prob, hyper=hyper)


def run(config: RunConfig) -> RunSummary:
    """Execute the configured pipeline; write VTK rounds, history.csv,
    summary.json (and figures when requested) into the output directory."""
    problem = build_problem(config)
    adaptive = AdaptiveConfig(theta1=config.theta1, theta2=config.theta2,
                              rounds=config.rounds, estimator_tol=config.estimator_tol,
                              vertex_budget=config.vertex_budget,
                              uniform=(config.mode == "uniform"),
                              eta1_scale=config.eta1_scale)
    writer = RunWriter(config.out_dir, problem)
    t0 = time.perf_counter()
    result = adaptive_loop(problem, adaptive, sink=writer,
                           solver_tol=config.solver_tol, target_h=config.target_h)
    total = time.perf_counter() - t0
    summary = RunSummary(
        benchmark=config.benchmark, mode=config.mode,
        final_vertices=result.mesh.n_vertices,
        final_objective=result.records[-1].objective,
        total_seconds=total, stop_reason=result.stop_reason,
        rounds=tuple((r.round, r.vertices, r.objective, r.volume_gap_abs,
                      r.eta1_sq, r.eta2_sq, r.seconds) for r in result.records))
    config.save(os.path.join(config.out_dir, "config.json"))
    summary.save(os.path.join(config.out_dir, "summary.json"))
    if config.figures:
        from .figures import render_run
        render_run(config.out_dir)
    return summary


@dataclass(frozen=True)
class ComparisonReport:
    benchmark: str
    adaptive_vertices: int
    adaptive_objective: float
    adaptive_seconds: float
    uniform_vertices: int
    uniform_objective: float
    uniform_seconds: float

    @property
    def time_saving_percent(self):
        """(t_uniform - t_adaptive) / t_adaptive * 100."""
        return (self.uniform_seconds - self.adaptive_seconds) / self.adaptive_seconds * 100.0

    def format_table(self) -> str:
        rows = [
            ("", "vertices", "objective", "time (s)"),
            ("adaptive", str(self.adaptive_vertices),
             f"{self.adaptive_objective:.6g}", f"{self.adaptive_seconds:.2f}"),
            ("uniform", str(self.uniform_vertices),
             f"{self.uniform_objective:.6g}", f"{self.uniform_seconds:.2f}"),
        ]
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
        lines.append(f"time saving: {self.time_saving_percent:.2f}%")
        return "\n".join(lines)


def compare(adaptive_summary: RunSummary, uniform_summary: RunSummary) -> ComparisonReport:
    """Side-by-side comparison of two runs of the same benchmark."""
    if adaptive_summary.benchmark != uniform_summary.benchmark:
        raise ConfigError("compared runs target different benchmarks")
    return ComparisonReport(
        benchmark=adaptive_summary.benchmark,
        adaptive_vertices=adaptive_summary.final_vertices,
        adaptive_objective=adaptive_summary.final_objective,
        adaptive_seconds=adaptive_summary.total_seconds,
        uniform_vertices=uniform_summary.final_vertices,
        uniform_objective=uniform_summary.final_objective,
        uniform_seconds=uniform_summary.total_seconds)


def matched_uniform_target_h(problem: ProblemSpec, rounds: int, target_vertices: int,
                             tol: float = 0.05, max_iters: int = 8) -> float:
    """Initial mesh size for a uniform run of `rounds` rounds whose final
    vertex count lands near target_vertices.

    Mesh-only bisections are cheap, so this just iterates the size until the
    refined count matches within tol.
    """
    from .mesh import uniform_refine
    h = problem.default_target_h
    for _ in range(max_iters):
        mesh = problem.build_mesh(h)
        fine = uniform_refine(mesh, rounds - 1)
        ratio = fine.n_vertices / target_vertices
        if abs(ratio - 1.0) <= tol:
            return h
        h = h * ratio ** 0.5
    return h
