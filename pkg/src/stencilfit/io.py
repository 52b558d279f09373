"""Artifact serialization: learned models, summaries, and report tables.

Everything is CSV or key = value text so any plotting tool can consume the
outputs; all floats are written with %.17g and round-trip exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .cases import layout_for_case
from .grids import Grid1D, Grid2D
from .learn import LearnedModel
from .operators import read_operator_csv, write_operator_csv
from .simulate import CaseParams


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


# Learned models ==============================================================

def save_model(model: LearnedModel, directory) -> None:
    """Operator CSV per block + meta.txt + per-DOF diagnostics.csv."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, op in model.operators.items():
        write_operator_csv(op, directory / f"operator_{name}.csv")

    p = model.params
    lines = [
        f"case = {model.case}",
        f"method = {model.method}",
        f"operators = {','.join(model.operators)}",
        f"sizes = {','.join(str(s) for s in model.config['sizes'])}",
        f"dt = {p.dt:.17g}",
        f"seed = {p.seed}",
    ]
    grid = p.grid
    if isinstance(grid, Grid1D):
        lines += [f"n = {grid.n}", f"length = {grid.length:.17g}"]
    else:
        lines += [f"nx = {grid.nx}", f"ny = {grid.ny}",
                  f"lx = {grid.lx:.17g}", f"ly = {grid.ly:.17g}"]
    for key in ("c", "nu", "cx", "cy"):
        lines.append(f"{key} = {getattr(p, key):.17g}")
    for key in ("beta1", "beta2", "penalty_scaling", "tol", "margin",
                "equilibrium", "constraint_mode", "warm_start"):
        if key in model.config and model.config[key] is not None:
            lines.append(f"{key} = {_fmt(model.config[key])}")
    (directory / "meta.txt").write_text("\n".join(lines) + "\n")

    diag = model.diagnostics
    with open(directory / "diagnostics.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dof", "status", "iterations", "kkt_residual"])
        for i in range(len(diag["status"])):
            writer.writerow([i, diag["status"][i], int(diag["iterations"][i]),
                             f"{diag['kkt_residual'][i]:.17g}"])


def load_model(directory) -> LearnedModel:
    """Inverse of :func:`save_model`."""
    directory = Path(directory)
    fields = {}
    for line in (directory / "meta.txt").read_text().splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()

    if "n" in fields:
        grid = Grid1D(n=int(fields["n"]), length=float(fields["length"]))
        shape = None
    else:
        grid = Grid2D(nx=int(fields["nx"]), ny=int(fields["ny"]),
                      lx=float(fields["lx"]), ly=float(fields["ly"]))
        shape = grid.shape
    sizes = tuple(int(s) for s in fields["sizes"].split(","))
    params = CaseParams(case=fields["case"], grid=grid, dt=float(fields["dt"]),
                        n_snapshots=2, seed=int(fields.get("seed", 0)),
                        c=float(fields["c"]), nu=float(fields["nu"]),
                        cx=float(fields["cx"]), cy=float(fields["cy"]))
    layout = layout_for_case(params, sizes if len(sizes) > 1 else sizes[0])
    operators = {
        name: read_operator_csv(directory / f"operator_{name}.csv", shape=shape)
        for name in fields["operators"].split(",")
    }

    diag = {"status": [], "iterations": [], "kkt_residual": []}
    with open(directory / "diagnostics.csv", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for rec in reader:
            diag["status"].append(rec[1])
            diag["iterations"].append(int(rec[2]))
            diag["kkt_residual"].append(float(rec[3]))
    diagnostics = {k: np.array(v, dtype=object if k == "status" else None)
                   for k, v in diag.items()}

    config = {"sizes": sizes}
    for key in ("beta1", "beta2", "tol", "margin", "equilibrium"):
        if key in fields:
            config[key] = float(fields[key])
    for key in ("penalty_scaling", "constraint_mode", "warm_start"):
        if key in fields:
            config[key] = fields[key]
    return LearnedModel(case=fields["case"], method=fields["method"],
                        operators=operators, layout=layout, params=params,
                        diagnostics=diagnostics, config=config)


# Report tables ===============================================================

SUMMARY_COLUMNS = ["case", "method", "s1", "s2", "beta1", "beta2",
                   "eps_xt", "stable", "blowup_step"]


def write_summary_csv(rows, path) -> None:
    """One row per (method, stencil sizes, betas) sweep point."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow([
                row["case"], row["method"], row["s1"], row.get("s2", ""),
                _fmt(row.get("beta1", "")), _fmt(row.get("beta2", "")),
                _fmt(row["eps_xt"]), int(bool(row["stable"])),
                "" if row.get("blowup_step") is None else row["blowup_step"],
            ])


def read_summary_csv(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append({
                "case": rec["case"],
                "method": rec["method"],
                "s1": int(rec["s1"]),
                "s2": int(rec["s2"]) if rec["s2"] else None,
                "beta1": float(rec["beta1"]) if rec["beta1"] else None,
                "beta2": float(rec["beta2"]) if rec["beta2"] else None,
                "eps_xt": float(rec["eps_xt"]),
                "stable": bool(int(rec["stable"])),
                "blowup_step": int(rec["blowup_step"]) if rec["blowup_step"] else None,
            })
    return rows


def write_stencil_table_csv(entries, offsets, path) -> None:
    """Averaged dx-scaled stencil table, one row per (approach, size).

    ``entries`` are (label, size_label, {offset: coefficient}) tuples;
    missing offsets print empty cells, mirroring the published layout.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["approach", "stencil_size"] + [f"u_{o:+d}" for o in offsets])
        for label, size, coeffs in entries:
            row = [label, size]
            for o in offsets:
                row.append(_fmt(coeffs[o]) if o in coeffs else "")
            writer.writerow(row)
