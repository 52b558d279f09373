"""Experiment configuration: a human-readable INI with units in key names.

Sections:

``[case]``
    name, grid size(s), domain extent(s), physical constants, sampling.
``[learn]``
    methods, stencil-size lists per operator, ridge grids, solver settings.
``[forecast]``
    horizon multiplier and blow-up guard.

The sweep run by the experiment runner is the cartesian product of the
configured stencil sizes (and, for the ridge path, the beta grids).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .cases import n_stencils
from .errors import ConfigError
from .grids import Grid1D, Grid2D
from .simulate import CASES, CaseParams


@dataclass(frozen=True)
class ExperimentConfig:
    params: CaseParams
    rhs_source: str
    methods: tuple
    sizes1: tuple
    sizes2: tuple  # empty for single-operator cases
    beta1_grid: tuple
    beta2_grid: tuple
    penalty_scaling: str
    tol: float
    margin: float | None
    max_iter: int
    horizon_multiplier: float
    blowup_guard: float
    seed: int

    def size_combos(self):
        if not self.sizes2:
            return [(s,) for s in self.sizes1]
        return [(s1, s2) for s1 in self.sizes1 for s2 in self.sizes2]


def _fail(section, key, message):
    raise ConfigError(f"[{section}] {key}: {message}")


def _get(cp, section, key, cast, default=None, required=False):
    if not cp.has_option(section, key):
        if required:
            _fail(section, key, "missing required key")
        return default
    raw = cp.get(section, key)
    try:
        return cast(raw)
    except (TypeError, ValueError):
        _fail(section, key, f"cannot parse {raw!r}")


def _float_list(raw):
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def _int_list(raw):
    return tuple(int(tok) for tok in raw.replace(",", " ").split())


def _str_list(raw):
    return tuple(tok.strip() for tok in raw.split(",") if tok.strip())


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    """Parse and validate an experiment configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    for section in ("case", "learn"):
        if not cp.has_section(section):
            raise ConfigError(f"missing [{section}] section in {path}")

    name = _get(cp, "case", "name", str, required=True)
    if name not in CASES:
        _fail("case", "name", f"unknown case {name!r}; expected one of {CASES}")

    seed = _get(cp, "case", "seed", int, default=1234)
    if seed_override is not None:
        seed = seed_override

    if name == "advection2d":
        nx = _get(cp, "case", "nx_dofs", int, required=True)
        ny = _get(cp, "case", "ny_dofs", int, required=True)
        lx = _get(cp, "case", "domain_length_x", float, required=True)
        ly = _get(cp, "case", "domain_length_y", float, required=True)
        try:
            grid = Grid2D(nx=nx, ny=ny, lx=lx, ly=ly)
        except ValueError as exc:
            _fail("case", "nx_dofs", str(exc))
    else:
        n = _get(cp, "case", "n_dofs", int, required=True)
        length = _get(cp, "case", "domain_length", float, required=True)
        try:
            grid = Grid1D(n=n, length=length)
        except ValueError as exc:
            _fail("case", "n_dofs", str(exc))

    try:
        params = CaseParams(
            case=name,
            grid=grid,
            dt=_get(cp, "case", "dt_seconds", float, required=True),
            n_snapshots=_get(cp, "case", "n_snapshots", int, required=True),
            seed=seed,
            c=_get(cp, "case", "advection_velocity", float, default=0.0),
            nu=_get(cp, "case", "diffusivity", float, default=0.0),
            cx=_get(cp, "case", "advection_velocity_x", float, default=0.0),
            cy=_get(cp, "case", "advection_velocity_y", float, default=0.0),
            pulse_center=_get(cp, "case", "pulse_center", float, default=2.5),
            pulse_width=_get(cp, "case", "pulse_width", float, default=0.5),
        )
    except ValueError as exc:
        _fail("case", "dt_seconds", str(exc))

    rhs_source = _get(cp, "case", "rhs_source", str, default="exact")
    if rhs_source not in ("exact", "finite-difference"):
        _fail("case", "rhs_source", f"must be 'exact' or 'finite-difference', got {rhs_source!r}")

    methods = _get(cp, "learn", "methods", _str_list, default=("LDO", "S-LDO"))
    for m in methods:
        if m not in ("LDO", "S-LDO"):
            _fail("learn", "methods", f"unknown method {m!r}")
    if not methods:
        _fail("learn", "methods", "empty method list")

    sizes1 = _get(cp, "learn", "stencil_sizes", _int_list, required=True)
    sizes2 = _get(cp, "learn", "stencil_sizes_2", _int_list, default=())
    want_two = n_stencils(name) == 2
    if want_two and not sizes2:
        _fail("learn", "stencil_sizes_2", f"case {name!r} needs a second stencil list")
    if not want_two and sizes2:
        _fail("learn", "stencil_sizes_2", f"case {name!r} takes a single stencil list")
    for key, sizes in (("stencil_sizes", sizes1), ("stencil_sizes_2", sizes2)):
        if key == "stencil_sizes" and not sizes:
            _fail("learn", key, "empty stencil list")
        for s in sizes:
            if s < 3 or s % 2 == 0:
                _fail("learn", key, f"stencil size {s} must be odd and >= 3")

    beta1_grid = _get(cp, "learn", "beta1_grid", _float_list, default=(1e-3,))
    beta2_grid = _get(cp, "learn", "beta2_grid", _float_list, default=(0.0,))
    for key, grid_vals in (("beta1_grid", beta1_grid), ("beta2_grid", beta2_grid)):
        if not grid_vals:
            _fail("learn", key, "empty grid")
        if any(b < 0 for b in grid_vals):
            _fail("learn", key, "ridge weights must be nonnegative")

    penalty_scaling = _get(cp, "learn", "penalty_scaling", str, default="stored")
    if penalty_scaling not in ("stored", "dimensionless"):
        _fail("learn", "penalty_scaling", f"got {penalty_scaling!r}")

    tol = _get(cp, "learn", "tolerance", float, default=1e-6)
    if not tol > 0:
        _fail("learn", "tolerance", "must be positive")
    margin = _get(cp, "learn", "margin", float, default=None)
    max_iter = _get(cp, "learn", "max_iter", int, default=500)

    horizon = _get(cp, "forecast", "horizon_multiplier", float, default=2.0) \
        if cp.has_section("forecast") else 2.0
    guard = _get(cp, "forecast", "blowup_guard", float, default=1e6) \
        if cp.has_section("forecast") else 1e6
    if not horizon > 0:
        _fail("forecast", "horizon_multiplier", "must be positive")

    return ExperimentConfig(
        params=params, rhs_source=rhs_source, methods=methods,
        sizes1=sizes1, sizes2=sizes2, beta1_grid=beta1_grid,
        beta2_grid=beta2_grid, penalty_scaling=penalty_scaling, tol=tol,
        margin=margin, max_iter=max_iter, horizon_multiplier=horizon,
        blowup_guard=guard, seed=seed,
    )


def config_echo(config: ExperimentConfig) -> str:
    """Canonical text form of a parsed config, for the run manifest."""
    p = config.params
    lines = ["[case]", f"name = {p.case}"]
    if isinstance(p.grid, Grid2D):
        lines += [f"nx_dofs = {p.grid.nx}", f"ny_dofs = {p.grid.ny}",
                  f"domain_length_x = {p.grid.lx:.17g}",
                  f"domain_length_y = {p.grid.ly:.17g}"]
    else:
        lines += [f"n_dofs = {p.grid.n}", f"domain_length = {p.grid.length:.17g}"]
    lines += [
        f"dt_seconds = {p.dt:.17g}",
        f"n_snapshots = {p.n_snapshots}",
        f"seed = {config.seed}",
        f"rhs_source = {config.rhs_source}",
        f"advection_velocity = {p.c:.17g}",
        f"diffusivity = {p.nu:.17g}",
        f"advection_velocity_x = {p.cx:.17g}",
        f"advection_velocity_y = {p.cy:.17g}",
        f"pulse_center = {p.pulse_center:.17g}",
        f"pulse_width = {p.pulse_width:.17g}",
        "",
        "[learn]",
        f"methods = {', '.join(config.methods)}",
        f"stencil_sizes = {', '.join(map(str, config.sizes1))}",
    ]
    if config.sizes2:
        lines.append(f"stencil_sizes_2 = {', '.join(map(str, config.sizes2))}")
    lines += [
        f"beta1_grid = {', '.join(f'{b:.17g}' for b in config.beta1_grid)}",
        f"beta2_grid = {', '.join(f'{b:.17g}' for b in config.beta2_grid)}",
        f"penalty_scaling = {config.penalty_scaling}",
        f"tolerance = {config.tol:.17g}",
        f"max_iter = {config.max_iter}",
    ]
    if config.margin is not None:
        lines.append(f"margin = {config.margin:.17g}")
    lines += [
        "",
        "[forecast]",
        f"horizon_multiplier = {config.horizon_multiplier:.17g}",
        f"blowup_guard = {config.blowup_guard:.17g}",
    ]
    return "\n".join(lines) + "\n"
