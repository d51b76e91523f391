"""Experiment runner: builds the model and problem from a RunConfig, drives the
zeroth-order loop, logs metric rows, and writes checkpoints.

One call to `train` executes every seed in the config sequentially and
reports mean and std of the final hold-out error.  Per-seed outputs land in
`<out_dir>/<name>/seed<k>/`: metrics.csv (step, loss, rel_l2, queries,
wall_time), checkpoint.npz, report.txt.  All stochastic streams are keyed by
(seed, step, ...) so reruns reproduce every column except wall_time.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig, serialize_config
from .models import build_model, hjb_folds
from .nets import TensorizedMlp, save_checkpoint
from .pde import OracleNotBuilt, get_problem, pinn_loss, reference_solution, relative_l2
from .pde.problems import LossWeights, PinnProblem, SamplingBudget
from .photonic.model import PhotonicDense, PhotonicMlp, PhotonicTT
from .photonic.noise import NoiseModel
from .quadrature import SteinConfig
from .tensortrain import TTLayout
from .zo import AdamState, DivergenceError, ParamView, ZoConfig, rge_estimate, zo_adam_step, zo_sgd_step

__all__ = ["train", "evaluate_model", "RunReport", "build_run_model", "NumericalFailure"]


class NumericalFailure(RuntimeError):
    """Training aborted on a non-finite loss; the state dump path is attached."""

    def __init__(self, message: str, dump_path: str | None = None):
        super().__init__(message)
        self.dump_path = dump_path


@dataclass
class SeedResult:
    seed: int
    steps_run: int
    final_rel_l2: float
    queries: int
    wall_time: float
    out_dir: str


@dataclass
class RunReport:
    config_hash: str
    results: list[SeedResult] = field(default_factory=list)

    @property
    def mean_rel_l2(self) -> float:
        return float(np.mean([r.final_rel_l2 for r in self.results]))

    @property
    def std_rel_l2(self) -> float:
        return float(np.std([r.final_rel_l2 for r in self.results]))

    @property
    def total_queries(self) -> int:
        return sum(r.queries for r in self.results)

    def summary(self) -> str:
        lines = [f"config {self.config_hash}"]
        for r in self.results:
            lines.append(
                f"seed {r.seed}: rel_l2 {r.final_rel_l2:.6e} after {r.steps_run} steps, "
                f"{r.queries} loss queries, {r.wall_time:.1f} s"
            )
        lines.append(f"mean rel_l2 {self.mean_rel_l2:.6e} +- {self.std_rel_l2:.2e}")
        return "\n".join(lines)


def config_problem(cfg: RunConfig) -> PinnProblem:
    budget = None
    if cfg.problem_residual_points or cfg.problem_initial_points or cfg.problem_boundary_points:
        base = get_problem(cfg.problem_name).budget
        budget = SamplingBudget(
            residual=cfg.problem_residual_points or base.residual,
            initial=cfg.problem_initial_points or base.initial,
            boundary=cfg.problem_boundary_points or base.boundary,
            fixed_grid=base.fixed_grid,
        )
    return get_problem(
        cfg.problem_name,
        sigma=cfg.problem_sigma or None,
        weights=LossWeights(cfg.problem_lambda0, cfg.problem_lambdab),
        budget=budget,
        oracle_dir=cfg.run_oracle_dir,
        sample_margin=cfg.problem_margin,
    )


def config_stein(cfg: RunConfig, problem: PinnProblem, seed: int) -> SteinConfig:
    sigma = cfg.problem_sigma or problem.sigma_default
    if cfg.loss_mode == "sg":
        return SteinConfig(sigma=sigma, mode="sparse-grid", level=cfg.loss_level)
    return SteinConfig(sigma=sigma, mode="monte-carlo", samples=cfg.loss_samples, seed=seed)


def build_run_model(cfg: RunConfig, seed: int):
    """Weight- or phase-domain model for the configured problem."""
    if cfg.domain == "weight":
        return build_model(
            cfg.problem_name,
            tensorized=cfg.model_tensorized,
            rank=cfg.model_rank,
            width=cfg.model_width or None,
            seed=seed,
            dtype=np.dtype(cfg.model_dtype),
        )
    return _build_phase_model(cfg, seed)


def _build_phase_model(cfg: RunConfig, seed: int) -> PhotonicMlp:
    noise = NoiseModel(
        bits=cfg.noise_bits or None,
        gamma_std=cfg.noise_gamma_std,
        crosstalk=cfg.noise_crosstalk,
        phase_bias=cfg.noise_phase_bias,
        seed=cfg.noise_seed,
    )
    rng = np.random.default_rng(seed)
    rank = cfg.model_rank
    name = cfg.problem_name
    if name == "black-scholes":
        w = cfg.model_width or 128
        hidden = (
            PhotonicTT(TTLayout((4, 4, 8), (8, 4, 4), (1, rank, rank, 1)), rng)
            if cfg.model_tensorized
            else PhotonicDense(w, w, rng)
        )
        from .pde import black_scholes as bs

        return PhotonicMlp(
            [PhotonicDense(2, w, rng), hidden, PhotonicDense(w, 1, rng)],
            activation="tanh",
            noise=noise,
            input_shift=np.array([bs.X_MAX / 2.0, bs.HORIZON / 2.0]),
            input_scale=np.array([2.0 / bs.X_MAX, 2.0 / bs.HORIZON]),
            output_scale=bs.STRIKE,
        )
    if name == "hjb":
        w = cfg.model_width or 512
        if cfg.model_tensorized:
            (in_f, in_o), (h_f, h_o) = hjb_folds(w)
            layers = [
                PhotonicTT(TTLayout(in_f, in_o, (1,) + (rank,) * (len(in_f) - 1) + (1,)), rng),
                PhotonicTT(TTLayout(h_f, h_o, (1,) + (rank,) * (len(h_f) - 1) + (1,)), rng),
                PhotonicDense(w, 1, rng),
            ]
        else:
            layers = [PhotonicDense(21, w, rng), PhotonicDense(w, w, rng), PhotonicDense(w, 1, rng)]
        return PhotonicMlp(layers, activation="sine", noise=noise)
    if name in ("burgers", "darcy"):
        w = cfg.model_width or 100
        if cfg.model_tensorized:
            hiddens = [PhotonicTT(TTLayout((4, 5, 5), (5, 5, 4), (1, rank, rank, 1)), rng) for _ in range(3)]
        else:
            hiddens = [PhotonicDense(w, w, rng) for _ in range(3)]
        shift = np.array([0.0, 0.5]) if name == "burgers" else np.array([0.5, 0.5])
        scale = np.array([1.0, 2.0]) if name == "burgers" else np.array([2.0, 2.0])
        return PhotonicMlp(
            [PhotonicDense(2, w, rng), *hiddens, PhotonicDense(w, 1, rng)],
            activation="tanh",
            noise=noise,
            input_shift=shift,
            input_scale=scale,
        )
    raise KeyError(name)


def evaluate_model(model, problem: PinnProblem, max_points: int | None = None):
    """Hold-out relative l2 of the (transformed) solution, plus the field dump."""
    pts = problem.holdout_points()
    if max_points is not None and len(pts) > max_points:
        pts = pts[:: len(pts) // max_points + 1]
    solution = problem.transform(model)
    pred = np.asarray(solution(pts), dtype=float)
    ref = reference_solution(problem, pts)
    return relative_l2(pred, ref), pts, pred, ref


def _config_hash(cfg: RunConfig) -> str:
    return hashlib.md5(serialize_config(cfg).encode()).hexdigest()[:12]


def train(cfg: RunConfig, verbose: bool = False) -> RunReport:
    report = RunReport(config_hash=_config_hash(cfg))
    for seed in cfg.seeds:
        report.results.append(_train_one_seed(cfg, seed, verbose))
    base = Path(cfg.run_out_dir) / cfg.problem_name
    base.mkdir(parents=True, exist_ok=True)
    (base / "report.txt").write_text(report.summary() + "\n")
    return report


def _train_one_seed(cfg: RunConfig, seed: int, verbose: bool) -> SeedResult:
    out_dir = Path(cfg.run_out_dir) / cfg.problem_name / f"seed{seed}"
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.cfg").write_text(serialize_config(cfg))

    problem = config_problem(cfg)
    stein = config_stein(cfg, problem, seed)
    model = build_run_model(cfg, seed)
    theta = model.get_flat()
    view = ParamView.from_segments(model.segments())
    zo_cfg = ZoConfig(
        queries=cfg.zo_queries,
        radius=cfg.zo_radius_effective(),
        distribution=cfg.zo_distribution_effective(),
        grouping=cfg.zo_grouping,
        seed=seed,
    )
    adam = AdamState.zeros(len(theta))
    queries = 0
    rel = float("nan")
    can_eval = problem.reference is not None
    rows = [("step", "loss", "rel_l2", "queries", "wall_time")]
    t0 = time.perf_counter()
    steps_run = 0
    stopped_early = False

    def loss_at(step):
        def fn(th):
            model.set_flat(th)
            solution = problem.transform(model)
            value, _ = pinn_loss(solution, problem, batch_seed=seed, step=step, stein_cfg=stein)
            return value
        return fn

    try:
        for step in range(cfg.opt_iterations):
            fn = loss_at(step)
            grad, q = rge_estimate(fn, theta, view, zo_cfg, step=step)
            queries += q
            if cfg.opt_algorithm == "adam":
                adam, theta = zo_adam_step(
                    adam, theta, grad, cfg.opt_lr, cfg.opt_beta1, cfg.opt_beta2, cfg.opt_eps
                )
            else:
                theta = zo_sgd_step(theta, grad, cfg.opt_lr)
            steps_run = step + 1
            do_eval = can_eval and cfg.run_eval_every and (step + 1) % cfg.run_eval_every == 0
            if do_eval:
                model.set_flat(theta)
                rel = evaluate_model(model, problem)[0]
            if (step + 1) % cfg.run_log_every == 0 or do_eval or step == cfg.opt_iterations - 1:
                loss_now = fn(theta)
                if not np.isfinite(loss_now):
                    raise DivergenceError(f"non-finite loss at step {step + 1}")
                rows.append(
                    (step + 1, f"{loss_now:.8e}", f"{rel:.8e}", queries, f"{time.perf_counter() - t0:.3f}")
                )
                if verbose:
                    print(f"[seed {seed}] step {step + 1}: loss {loss_now:.4e} rel_l2 {rel:.4e}")
            if do_eval and cfg.run_target_rel_l2 > 0 and rel <= cfg.run_target_rel_l2:
                stopped_early = True
                break
    except DivergenceError as exc:
        dump = out_dir / "divergence_dump.npz"
        np.savez(dump, theta=theta, step=steps_run)
        _write_rows(out_dir / "metrics.csv", rows)
        raise NumericalFailure(f"{exc} (state dumped)", str(dump)) from exc

    model.set_flat(theta)
    if can_eval:
        rel = evaluate_model(model, problem)[0]
    wall = time.perf_counter() - t0
    rows.append((steps_run, "final", f"{rel:.8e}", queries, f"{wall:.3f}"))
    _write_rows(out_dir / "metrics.csv", rows)
    _save_model(out_dir / "checkpoint.npz", cfg, model, seed, steps_run)
    meta = {
        "seed": seed,
        "steps_run": steps_run,
        "stopped_early": stopped_early,
        "final_rel_l2": rel,
        "queries": queries,
        "wall_time": wall,
    }
    (out_dir / "report.txt").write_text(json.dumps(meta, indent=2) + "\n")
    return SeedResult(seed, steps_run, rel, queries, wall, str(out_dir))


def _write_rows(path, rows):
    with open(path, "w") as fh:
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def _save_model(path, cfg: RunConfig, model, seed: int, iteration: int) -> None:
    if isinstance(model, TensorizedMlp):
        save_checkpoint(path, model, seed=seed, iteration=iteration, extra={"config": serialize_config(cfg)})
    else:
        spec = {
            "domain": "phase",
            "seed": seed,
            "iteration": iteration,
            "config": serialize_config(cfg),
        }
        np.savez(
            path,
            spec=np.frombuffer(json.dumps(spec).encode(), dtype=np.uint8),
            theta=model.get_flat(),
        )


def load_model(path):
    """Rebuild a trained model from a checkpoint (either domain)."""
    from .config import parse_config
    from .nets import load_checkpoint

    data = np.load(path)
    spec = json.loads(bytes(data["spec"]).decode())
    if spec.get("domain") == "phase":
        cfg = parse_config(spec["config"], apply_env=False)
        model = _build_phase_model(cfg, spec["seed"])
        model.set_flat(data["theta"])
        return model, spec
    return load_checkpoint(path)
