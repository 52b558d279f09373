"""Config-driven experiment orchestration.

A run produces a deterministic artifact tree::

    out/
      snapshots/   states.csv rhs.csv meta.txt
      models/      <point>/operator_*.csv meta.txt diagnostics.csv
      spectra/     <point>_eigenvalues.csv <point>_discs.csv
      forecasts/   <point>_e_u.csv
      stencil_table.csv        (single-operator 1-D cases)
      summary.csv
      manifest.txt             (config echo + content hashes)

Identical config and seed give byte-identical artifacts. Sweep points are
the cartesian product of configured methods, stencil sizes, and (for the
ridge path) beta grids.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, config_echo, load_config
from .forecast import averaged_stencil, integrate_model, relative_error_series, total_error
from .grids import Grid1D, Grid2D
from .io import load_model, save_model, write_stencil_table_csv, write_summary_csv
from .learn import LearnedModel, RidgeConfig, learn_model
from .simulate import (
    SnapshotSet,
    case_rhs_function,
    forward_euler,
    generate_case,
    initial_condition,
    load_snapshots,
    reference_operator_1d,
    save_snapshots,
)
from .spectra import (
    DENSE_EIG_CAP,
    dominance_margins,
    gershgorin_discs,
    stability_report,
    write_eigenvalues_csv,
)

REDUCED_2D_POINTS = 31
STABILITY_TOL = 1e-8


def sweep_points(config: ExperimentConfig):
    """(method, sizes, beta1, beta2) tuples; betas are None for S-LDO."""
    points = []
    for method in config.methods:
        for sizes in config.size_combos():
            if method == "LDO":
                for b1 in config.beta1_grid:
                    for b2 in config.beta2_grid:
                        points.append((method, sizes, b1, b2))
            else:
                points.append((method, sizes, None, None))
    return points


def point_name(method, sizes, b1, b2) -> str:
    name = method.replace("S-LDO", "sldo").replace("LDO", "ldo")
    name += "_s" + "x".join(str(s) for s in sizes)
    if b1 is not None:
        name += f"_b1_{b1:g}_b2_{b2:g}"
    return name


# Stages ======================================================================

def stage_generate(config: ExperimentConfig, out: Path) -> SnapshotSet:
    snap_dir = out / "snapshots"
    if (snap_dir / "meta.txt").exists():
        return load_snapshots(snap_dir)
    snap = generate_case(config.params, rhs_source=config.rhs_source)
    save_snapshots(snap, snap_dir)
    return snap


def _learn_point(config: ExperimentConfig, snap: SnapshotSet, point,
                 threads: int = 1) -> LearnedModel:
    method, sizes, b1, b2 = point
    ridge = None
    if method == "LDO":
        ridge = RidgeConfig(beta1=b1, beta2=b2, scaling=config.penalty_scaling)
    return learn_model(snap, config.params, method,
                       sizes if len(sizes) > 1 else sizes[0], ridge=ridge,
                       tol=config.tol, margin=config.margin,
                       max_iter=config.max_iter, threads=threads)


def stage_learn(config: ExperimentConfig, out: Path, snap: SnapshotSet,
                threads: int = 1) -> dict:
    models = {}
    for point in sweep_points(config):
        name = point_name(*point)
        model_dir = out / "models" / name
        if (model_dir / "meta.txt").exists():
            models[name] = load_model(model_dir)
            continue
        model = _learn_point(config, snap, point, threads=threads)
        save_model(model, model_dir)
        models[name] = model
    return models


def _write_discs_csv(op, path):
    discs = gershgorin_discs(op)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dof", "center", "radius", "margin"])
        for i, (c, r) in enumerate(discs):
            writer.writerow([i, f"{c:.17g}", f"{r:.17g}", f"{c - r:.17g}"])


def _reduced_config(config: ExperimentConfig) -> ExperimentConfig:
    """Same settings on a coarse grid, for dense 2-D spectra."""
    grid = config.params.grid
    reduced = Grid2D(nx=REDUCED_2D_POINTS, ny=REDUCED_2D_POINTS,
                     lx=grid.lx, ly=grid.ly)
    return replace(config, params=replace(config.params, grid=reduced))


def stage_analyze(config: ExperimentConfig, out: Path, models: dict,
                  threads: int = 1) -> dict:
    """Spectra and dominance reports; returns {point: stable flag}.

    Operators small enough for the dense cap get their full spectrum; the
    2-D case gets exact Gershgorin discs plus the dense spectrum of a
    model trained with identical settings on a reduced grid.
    """
    spectra_dir = out / "spectra"
    spectra_dir.mkdir(parents=True, exist_ok=True)
    stable = {}
    reduced_snap = None
    is_2d = isinstance(config.params.grid, Grid2D)
    for name, model in models.items():
        op = model.constrained_operator() if model.case == "burgers" else model.form_operator()
        _write_discs_csv(op, spectra_dir / f"{name}_discs.csv")
        if op.n <= DENSE_EIG_CAP:
            report = stability_report(op, tol=STABILITY_TOL)
            write_eigenvalues_csv(report.eigenvalues, spectra_dir / f"{name}_eigenvalues.csv")
            stable[name] = report.stable
        elif is_2d:
            reduced_cfg = _reduced_config(config)
            if reduced_snap is None:
                reduced_snap = generate_case(reduced_cfg.params, rhs_source=reduced_cfg.rhs_source)
            point = next(pt for pt in sweep_points(config) if point_name(*pt) == name)
            small = _learn_point(reduced_cfg, reduced_snap, point, threads=threads)
            report = stability_report(small.form_operator(), tol=STABILITY_TOL)
            write_eigenvalues_csv(
                report.eigenvalues,
                spectra_dir / f"{name}_eigenvalues_reduced_{REDUCED_2D_POINTS}.csv",
            )
            # Dominance is exact at full size; the reduced dense spectrum
            # covers the non-dominant (unconstrained) models.
            stable[name] = bool(dominance_margins(op).min() >= -STABILITY_TOL) or report.stable
        else:
            stable[name] = bool(dominance_margins(op).min() >= -STABILITY_TOL)
    return stable


def stage_forecast(config: ExperimentConfig, out: Path, snap: SnapshotSet,
                   models: dict) -> dict:
    """Integrate every model over the extended horizon; emit e_u series."""
    fc_dir = out / "forecasts"
    fc_dir.mkdir(parents=True, exist_ok=True)
    params = config.params
    train_steps = params.n_snapshots - 1
    steps = int(round(config.horizon_multiplier * train_steps))
    reference = forward_euler(case_rhs_function(params), initial_condition(params),
                              params.dt, steps)
    u0 = snap.states[:, 0]
    results = {}
    for name, model in models.items():
        traj = integrate_model(model, u0, params.dt, steps, guard=config.blowup_guard)
        times, e_u, _ = relative_error_series(reference, traj)
        with open(fc_dir / f"{name}_e_u.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "e_u"])
            for t, e in zip(times, e_u):
                writer.writerow([f"{t:.17g}", f"{e:.17g}"])
        results[name] = {
            "eps_xt": total_error(reference, traj),
            "blowup_step": traj.meta.blowup_step,
        }
    return results


def stage_report(config: ExperimentConfig, out: Path, models: dict,
                 stable: dict, forecasts: dict) -> None:
    rows = []
    for point in sweep_points(config):
        method, sizes, b1, b2 = point
        name = point_name(*point)
        rows.append({
            "case": config.params.case,
            "method": method,
            "s1": sizes[0],
            "s2": sizes[1] if len(sizes) > 1 else None,
            "beta1": b1, "beta2": b2,
            "eps_xt": forecasts[name]["eps_xt"],
            "stable": stable[name],
            "blowup_step": forecasts[name]["blowup_step"],
        })
    write_summary_csv(rows, out / "summary.csv")

    if config.params.case in ("diffusion", "advection") and not config.sizes2:
        _write_stencil_table(config, out, models)


def _write_stencil_table(config: ExperimentConfig, out: Path, models: dict) -> None:
    grid = config.params.grid
    dx = grid.dx
    half = (max(config.sizes1) - 1) // 2
    offsets = list(range(-half, half + 1))
    L1, L2 = reference_operator_1d(grid)
    ref_op = L1 if config.params.case == "advection" else L2
    ref_coeffs = averaged_stencil(ref_op, dx)
    entries = [("reference", 3, dict(zip((-1, 0, 1), ref_coeffs)))]
    for point in sweep_points(config):
        method, sizes, b1, b2 = point
        name = point_name(*point)
        avg = averaged_stencil(models[name], dx)
        s = sizes[0]
        offs = range(-(s - 1) // 2, (s - 1) // 2 + 1)
        label = method if b1 is None else f"{method}(b1={b1:g},b2={b2:g})"
        entries.append((label, s, dict(zip(offs, avg))))
    write_stencil_table_csv(entries, offsets, out / "stencil_table.csv")


def write_manifest(config: ExperimentConfig, out: Path) -> None:
    """Config echo plus a sha256 per emitted file, deterministic order."""
    records = []
    for path in sorted(out.rglob("*")):
        if path.is_file() and path.name != "manifest.txt":
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            records.append(f"{path.relative_to(out).as_posix()}  sha256:{digest}")
    body = (
        f"stencilfit {__version__}\n\n"
        "## configuration\n\n" + config_echo(config) + "\n## artifacts\n\n"
        + "\n".join(records) + "\n"
    )
    (out / "manifest.txt").write_text(body)


# Entry points ================================================================

def run_experiment(config_path, out_dir, seed: int | None = None,
                   threads: int = 1) -> Path:
    """Full pipeline: generate, learn, analyze, forecast, report, manifest."""
    config = load_config(config_path, seed_override=seed) \
        if not isinstance(config_path, ExperimentConfig) else config_path
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    snap = stage_generate(config, out)
    models = stage_learn(config, out, snap, threads=threads)
    stable = stage_analyze(config, out, models, threads=threads)
    forecasts = stage_forecast(config, out, snap, models)
    stage_report(config, out, models, stable, forecasts)
    write_manifest(config, out)
    return out


def bundled_config_path(case: str) -> Path:
    """Path of the packaged canonical configuration for a case."""
    from importlib import resources

    filename = case.replace("-", "_") + ".cfg"
    root = resources.files("stencilfit") / "configs" / filename
    if not root.is_file():
        from .errors import ConfigError
        from .simulate import CASES

        raise ConfigError(f"unknown repro case {case!r}; expected one of {CASES}")
    return Path(str(root))


def repro(case: str, out_dir, seed: int | None = None, threads: int = 1) -> Path:
    """Run the canonical configuration for one published case."""
    return run_experiment(bundled_config_path(case), out_dir, seed=seed, threads=threads)
