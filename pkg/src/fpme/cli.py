"""Command-line interface for the radial fractional-flow laboratory.

Four verbs share one executable:

``fpme green``
    Tabulate the Green function of the fractional operator on a log radius
    grid and (for dimension >= 3) fit its small- and large-radius structure.
``fpme evolve``
    Run one implicit time-discretized evolution and write the trajectory
    norms plus state snapshots.
``fpme verify``
    Build the standard check runs and evaluate a named suite of inequality
    and scaling checks, or re-check a previously saved evolution.
``fpme sweep``
    Run the decay-profile sampler over a Cartesian grid of (m, s, mass)
    combinations, one subdirectory per combination, plus a summary table.

Exit codes: 0 success / all checks passed, 1 check failure, 2 configuration
error (including malformed JSON, reported with line and column), 3 data
error (corrupted saved run), 4 solver or quadrature nonconvergence.

Output files never embed wall-clock information, so rerunning a verb with
an identical configuration reproduces every CSV and JSON byte for byte;
``meta.json`` in each output directory carries the provenance (package
version, verb, and the fully resolved configuration).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .evolution import (
    BoundaryLeakWarning,
    NegativityError,
    SolverConfig,
    SolverNonconvergence,
    Trajectory,
    _boundary_fraction,
    decay_profile,
    default_weights,
    evolve,
)
from .kernels import (
    FitDivergenceError,
    KernelParams,
    QuadratureError,
    green_asymptotics,
    green_table,
)
from .spectral import (
    RadialField,
    RadialGrid,
    bump_field,
    gaussian_field,
    measure,
    standard_bump,
)
from .verify import (
    SUITES,
    CheckReport,
    HorizonError,
    VerifyPlan,
    check_fundamental_pointwise,
    check_potential_monotone,
    check_time_monotonicity,
    check_weak_dual_identity,
    check_weighted_mass_monotone,
    merge_reports,
    reports_to_json,
    run_suite,
    smoothing_ratio_series,
    weighted_ratio_series,
)

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_DATA_ERROR = 3
EXIT_SOLVER_ERROR = 4

TRAJECTORY_HEADER = (
    "t,l1,l2,linf,l1_phi1,l1_phiW,hs,energy_m,inner_iters,boundary_mass"
)
SNAPSHOT_HEADER = "r,u"
GREEN_HEADER = "r,G,quad_err"
SWEEP_HEADER = "m,s,mass,sup_Q_l1,sup_Q_phi1,sup_Q_w,passed"
WEIGHT_HEADER = "r,phi"

#: suites whose checks each consume a single trajectory, hence can run
#: against a saved evolution instead of freshly built paired runs
SAVED_RUN_SUITES = ("monotonicity", "fundamental", "identity")


class ConfigError(Exception):
    """Invalid configuration: bad JSON, unknown keys, or out-of-range values."""


class DataError(Exception):
    """Corrupted or inconsistent saved run data."""


# -- deterministic serialization ---------------------------------------------


def _fmt_cell(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return repr(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header: str, rows: Iterable[Sequence[Any]]) -> None:
    """Write rows under a fixed header with shortest round-trip numerals."""
    lines = [header]
    lines.extend(",".join(_fmt_cell(x) for x in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path: Path, obj: Any) -> None:
    path.write_text(
        json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def write_meta(out_dir: Path, verb: str, config: Mapping[str, Any]) -> None:
    """Provenance record: package version, verb, resolved configuration.

    Deliberately contains no timestamps so a rerun with the same
    configuration reproduces the whole output directory byte for byte.
    """
    write_json(
        out_dir / "meta.json",
        {"package": "fpme", "version": __version__, "verb": verb, "config": config},
    )


# -- configuration loading and validation ------------------------------------


def load_config(path: str | Path) -> dict[str, Any]:
    """Parse a JSON config file; malformed JSON reports line and column."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"config root in {path} must be a JSON object")
    return obj


def _section(cfg: Mapping[str, Any], name: str) -> dict[str, Any]:
    sec = cfg.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"config section {name!r} must be a JSON object")
    return dict(sec)


def _reject_unknown(obj: Mapping[str, Any], allowed: Iterable[str], where: str) -> None:
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(
            f"unknown key(s) {', '.join(map(repr, unknown))} in {where}; "
            f"allowed: {', '.join(sorted(allowed))}"
        )


def _num(
    value: Any,
    where: str,
    *,
    integer: bool = False,
    minimum: float | None = None,
    maximum: float | None = None,
    open_min: bool = False,
    open_max: bool = False,
) -> float | int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        kind = "an integer" if integer else "a number"
        raise ConfigError(f"{where} must be {kind}, got {value!r}")
    if integer and not float(value).is_integer():
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise ConfigError(f"{where} must be finite, got {value!r}")
    if minimum is not None and (x <= minimum if open_min else x < minimum):
        op = ">" if open_min else ">="
        raise ConfigError(f"{where} must be {op} {minimum:g}, got {value!r}")
    if maximum is not None and (x >= maximum if open_max else x > maximum):
        op = "<" if open_max else "<="
        raise ConfigError(f"{where} must be {op} {maximum:g}, got {value!r}")
    return int(x) if integer else x


def _boolean(value: Any, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{where} must be true or false, got {value!r}")
    return value


def _num_list(
    value: Any,
    where: str,
    *,
    minimum: float | None = None,
    maximum: float | None = None,
    open_min: bool = False,
    open_max: bool = False,
    increasing: bool = False,
) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where} must be a nonempty list of numbers")
    out = [
        float(
            _num(
                v,
                f"{where}[{i}]",
                minimum=minimum,
                maximum=maximum,
                open_min=open_min,
                open_max=open_max,
            )
        )
        for i, v in enumerate(value)
    ]
    if increasing and any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(f"{where} must be strictly increasing")
    return out


def _parse_grid(obj: Any, where: str) -> RadialGrid:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object with r_max and points")
    _reject_unknown(obj, ("r_max", "points"), where)
    if "r_max" not in obj or "points" not in obj:
        raise ConfigError(f"{where} must provide r_max and points")
    r_max = _num(obj["r_max"], f"{where}.r_max", minimum=0.0, open_min=True)
    points = _num(obj["points"], f"{where}.points", integer=True, minimum=16)
    return RadialGrid(float(r_max), int(points))


_DATUM_KEYS = ("kind", "width", "mass", "height", "center")


def _parse_datum(obj: Any, grid: RadialGrid, where: str) -> RadialField:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object describing the datum")
    _reject_unknown(obj, _DATUM_KEYS, where)
    kind = obj.get("kind", "gaussian")
    if kind not in ("gaussian", "bump"):
        raise ConfigError(f"{where}.kind must be 'gaussian' or 'bump', got {kind!r}")
    width = _num(obj.get("width", 0.5), f"{where}.width", minimum=0.0, open_min=True)
    has_mass = "mass" in obj
    has_height = "height" in obj
    if has_mass and has_height:
        raise ConfigError(f"{where} must give at most one of mass and height")
    mass = height = None
    if has_height:
        height = _num(obj["height"], f"{where}.height", minimum=0.0)
    else:
        mass = _num(obj.get("mass", 1.0), f"{where}.mass", minimum=0.0)
    if kind == "gaussian":
        if "center" in obj:
            raise ConfigError(f"{where}.center applies only to kind 'bump'")
        return gaussian_field(grid, float(width), mass=mass, height=height)
    center = _num(obj.get("center", 0.0), f"{where}.center", minimum=0.0)
    return bump_field(grid, float(width), mass=mass, center=float(center), height=height)


# -- green -------------------------------------------------------------------

_GREEN_KEYS = ("dim", "s", "r_min", "r_max", "points", "tol", "asymptotics")

_GREEN_DEFAULTS: dict[str, Any] = {
    "dim": 3,
    "s": 0.5,
    "r_min": 1e-3,
    "r_max": 20.0,
    "points": 512,
    "tol": 1e-9,
    "asymptotics": True,
}


def _green_settings(args: argparse.Namespace) -> dict[str, Any]:
    settings = dict(_GREEN_DEFAULTS)
    if args.config is not None:
        sec = _section(load_config(args.config), "green")
        _reject_unknown(sec, _GREEN_KEYS, "green section")
        settings.update(sec)
    overrides = {
        "dim": args.dim,
        "s": args.s,
        "r_min": args.rmin,
        "r_max": args.rmax,
        "points": args.points,
        "tol": args.tol,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    if args.no_asymptotics:
        settings["asymptotics"] = False

    settings["dim"] = _num(settings["dim"], "green dim", integer=True, minimum=2)
    settings["s"] = _num(
        settings["s"], "green s", minimum=0.0, maximum=1.0, open_min=True, open_max=True
    )
    settings["r_min"] = _num(settings["r_min"], "green r_min", minimum=0.0, open_min=True)
    settings["r_max"] = _num(
        settings["r_max"], "green r_max", minimum=settings["r_min"], open_min=True
    )
    settings["points"] = _num(settings["points"], "green points", integer=True, minimum=2)
    settings["tol"] = _num(settings["tol"], "green tol", minimum=0.0, open_min=True)
    settings["asymptotics"] = _boolean(settings["asymptotics"], "green asymptotics")
    if settings["asymptotics"] and settings["dim"] < 3:
        raise ConfigError(
            "asymptotic fits are established only for dimension N >= 3; "
            "pass --no-asymptotics to tabulate values at dim "
            f"{settings['dim']}"
        )
    return settings


def run_green(args: argparse.Namespace) -> int:
    settings = _green_settings(args)
    out_dir = _resolve_out_dir(args)
    params = KernelParams(dim=int(settings["dim"]), order=float(settings["s"]))
    table = green_table(
        params,
        float(settings["r_min"]),
        float(settings["r_max"]),
        int(settings["points"]),
        tol=float(settings["tol"]),
    )
    write_csv(
        out_dir / "green.csv",
        GREEN_HEADER,
        zip(table.radii, table.values, table.errors),
    )
    if settings["asymptotics"]:
        fits = green_asymptotics(params, tol=float(settings["tol"]))
        write_json(out_dir / "green_asymptotics.json", fits)
    write_meta(out_dir, "green", settings)
    return EXIT_OK


# -- evolve ------------------------------------------------------------------

_EVOLVE_KEYS = (
    "m",
    "s",
    "grid",
    "T",
    "n_steps",
    "datum",
    "snapshot_stride",
    "inner_tol",
    "inner_max_iters",
    "strict",
)


def _parse_evolve_section(
    sec: Mapping[str, Any], strict_flag: bool
) -> tuple[SolverConfig, RadialField, int, dict[str, Any]]:
    sec = dict(sec)
    _reject_unknown(sec, _EVOLVE_KEYS, "evolve section")
    for key in ("m", "s", "grid", "T", "n_steps"):
        if key not in sec:
            raise ConfigError(f"evolve section must provide {key!r}")
    m = _num(sec["m"], "evolve m", minimum=1.0, open_min=True)
    s = _num(
        sec["s"], "evolve s", minimum=0.0, maximum=1.0, open_min=True, open_max=True
    )
    grid = _parse_grid(sec["grid"], "evolve grid")
    T = _num(sec["T"], "evolve T", minimum=0.0, open_min=True)
    n_steps = _num(sec["n_steps"], "evolve n_steps", integer=True, minimum=1)
    inner_tol = _num(
        sec.get("inner_tol", 1e-10), "evolve inner_tol", minimum=0.0, open_min=True
    )
    inner_max_iters = _num(
        sec.get("inner_max_iters", 200), "evolve inner_max_iters", integer=True, minimum=1
    )
    strict = _boolean(sec.get("strict", False), "evolve strict") or strict_flag
    stride_default = max(1, int(n_steps) // 10)
    stride = _num(
        sec.get("snapshot_stride", stride_default),
        "evolve snapshot_stride",
        integer=True,
        minimum=1,
    )
    cfg = SolverConfig(
        m=float(m),
        s=float(s),
        T=float(T),
        n_steps=int(n_steps),
        grid=grid,
        inner_tol=float(inner_tol),
        inner_max_iters=int(inner_max_iters),
        strict=strict,
    )
    datum = _parse_datum(sec.get("datum", {}), grid, "evolve datum")
    resolved = {
        "m": cfg.m,
        "s": cfg.s,
        "grid": {"r_max": grid.r_max, "points": grid.points},
        "T": cfg.T,
        "n_steps": cfg.n_steps,
        "datum": dict(sec.get("datum", {})),
        "snapshot_stride": int(stride),
        "inner_tol": cfg.inner_tol,
        "inner_max_iters": cfg.inner_max_iters,
        "strict": cfg.strict,
    }
    return cfg, datum, int(stride), resolved


def _snapshot_name(step: int, n_steps: int) -> str:
    width = max(4, len(str(n_steps)))
    return f"snapshot_{step:0{width}d}.csv"


def _write_trajectory(out_dir: Path, traj: Trajectory, stride: int) -> None:
    rows = []
    for k, (t, rec) in enumerate(zip(traj.times, traj.records)):
        iters = 0 if k == 0 else traj.inner_iterations[k - 1]
        rows.append(
            (
                t,
                rec.l1,
                rec.l2,
                rec.linf,
                rec.l1_phi1,
                rec.l1_phiW,
                rec.hs,
                rec.energy_m,
                int(iters),
                traj.boundary_mass_fraction[k],
            )
        )
    write_csv(out_dir / "trajectory.csv", TRAJECTORY_HEADER, rows)
    n_steps = len(traj.times) - 1
    for k, snap in enumerate(traj.snapshots):
        if k % stride == 0 or k == n_steps:
            write_csv(
                out_dir / _snapshot_name(k, n_steps),
                SNAPSHOT_HEADER,
                zip(snap.grid.nodes, snap.values),
            )


def run_evolve(args: argparse.Namespace) -> int:
    if args.config is None:
        raise ConfigError("evolve requires --config with an 'evolve' section")
    sec = _section(load_config(args.config), "evolve")
    cfg, datum, stride, resolved = _parse_evolve_section(sec, args.strict)
    out_dir = _resolve_out_dir(args)
    with warnings.catch_warnings():
        warnings.simplefilter("always", BoundaryLeakWarning)
        traj = evolve(datum, cfg)
    _write_trajectory(out_dir, traj, stride)
    for name, weight in (("weight_phi1.csv", traj.phi1), ("weight_phiW.csv", traj.phi_w)):
        write_csv(
            out_dir / name,
            WEIGHT_HEADER,
            zip(cfg.grid.nodes, weight.profile.values),
        )
    write_meta(out_dir, "evolve", resolved)
    return EXIT_OK


# -- verify ------------------------------------------------------------------

_PLAN_INT_FIELDS = {
    "ineq_points",
    "ineq_steps",
    "smooth_points",
    "smooth_inner",
    "slope_points",
    "slope_samples",
    "log_samples",
    "gs_log_samples",
    "jobs",
}
_PLAN_LIST_FIELDS = {"smooth_masses", "smooth_targets", "plateau_targets"}
_PLAN_FIELDS = tuple(f.name for f in VerifyPlan.__dataclass_fields__.values())

_VERIFY_KEYS = ("suite", "jobs", "plan", "trajectory")


def _parse_plan(obj: Any) -> VerifyPlan:
    if not isinstance(obj, dict):
        raise ConfigError("verify plan must be a JSON object")
    _reject_unknown(obj, _PLAN_FIELDS, "verify plan")
    kwargs: dict[str, Any] = {}
    for key, value in obj.items():
        where = f"verify plan {key}"
        if key in _PLAN_LIST_FIELDS:
            kwargs[key] = tuple(
                _num_list(value, where, minimum=0.0, open_min=True, increasing=True)
            )
        elif key in _PLAN_INT_FIELDS:
            kwargs[key] = int(_num(value, where, integer=True, minimum=1))
        elif key == "m":
            kwargs[key] = float(_num(value, where, minimum=1.0, open_min=True))
        elif key == "s":
            kwargs[key] = float(
                _num(value, where, minimum=0.0, maximum=1.0, open_min=True, open_max=True)
            )
        else:
            kwargs[key] = float(_num(value, where, minimum=0.0, open_min=True))
    try:
        return VerifyPlan(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _verify_settings(args: argparse.Namespace) -> tuple[str, int | None, VerifyPlan, str | None, dict[str, Any]]:
    sec: dict[str, Any] = {}
    if args.config is not None:
        sec = _section(load_config(args.config), "verify")
        _reject_unknown(sec, _VERIFY_KEYS, "verify section")
    suite = args.suite if args.suite is not None else sec.get("suite", "all")
    if suite not in SUITES:
        raise ConfigError(
            f"unknown suite {suite!r}; expected one of {', '.join(sorted(SUITES))}"
        )
    jobs: int | None = None
    if args.jobs is not None:
        jobs = args.jobs
    elif "jobs" in sec:
        jobs = int(_num(sec["jobs"], "verify jobs", integer=True, minimum=1))
    plan = _parse_plan(sec.get("plan", {}))
    trajectory = sec.get("trajectory")
    if trajectory is not None and not isinstance(trajectory, str):
        raise ConfigError("verify trajectory must be a path string")
    resolved = {
        "suite": suite,
        "jobs": jobs,
        "plan": dict(sec.get("plan", {})),
        "trajectory": trajectory,
    }
    return suite, jobs, plan, trajectory, resolved


def _parse_csv(path: Path, expected_header: str) -> np.ndarray:
    """Read a numeric CSV written by this package; DataError on any defect."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    lines = text.strip().splitlines()
    if not lines or lines[0].strip() != expected_header:
        got = lines[0].strip() if lines else "<empty>"
        raise DataError(
            f"{path} is corrupted: expected header {expected_header!r}, got {got!r}"
        )
    n_cols = len(expected_header.split(","))
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != n_cols:
            raise DataError(
                f"{path} is corrupted: line {i} has {len(parts)} fields, "
                f"expected {n_cols}"
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise DataError(f"{path} is corrupted: line {i}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is corrupted: no data rows")
    data = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(data)):
        raise DataError(f"{path} is corrupted: non-finite entries")
    return data


def load_run(run_dir: str | Path) -> Trajectory:
    """Reconstruct a trajectory from an evolve output directory.

    The snapshot files present (a stride subset of the full run) define the
    reconstructed time grid; norms are recomputed from the loaded states so
    the result is self-consistent even if the norm table was tampered with.
    Any structural defect raises DataError.
    """
    run_dir = Path(run_dir)
    meta_path = run_dir / "meta.json"
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read {meta_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(
            f"{meta_path} is corrupted: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    config = meta.get("config") if isinstance(meta, dict) else None
    if not isinstance(config, dict):
        raise DataError(f"{meta_path} is corrupted: missing config object")
    try:
        cfg, _, _, _ = _parse_evolve_section(config, strict_flag=False)
    except ConfigError as exc:
        raise DataError(f"{meta_path} is corrupted: {exc}") from exc

    table = _parse_csv(run_dir / "trajectory.csv", TRAJECTORY_HEADER)
    times_full = table[:, 0]
    if len(times_full) != cfg.n_steps + 1 or times_full[0] != 0.0:
        raise DataError(
            f"{run_dir / 'trajectory.csv'} is corrupted: expected "
            f"{cfg.n_steps + 1} rows starting at t = 0"
        )
    if not np.all(np.diff(times_full) > 0):
        raise DataError(f"{run_dir / 'trajectory.csv'} is corrupted: times not increasing")

    snap_paths = sorted(run_dir.glob("snapshot_*.csv"))
    if len(snap_paths) < 2:
        raise DataError(f"{run_dir} must contain at least two snapshot files")
    steps = []
    for p in snap_paths:
        match = re.fullmatch(r"snapshot_(\d+)\.csv", p.name)
        if match is None:
            raise DataError(f"{p} does not follow the snapshot_<step>.csv pattern")
        steps.append(int(match.group(1)))
    if steps[0] != 0 or any(b <= a for a, b in zip(steps, steps[1:])):
        raise DataError(f"{run_dir} snapshots must start at step 0 and increase")
    if steps[-1] > cfg.n_steps:
        raise DataError(f"{run_dir} snapshot step {steps[-1]} exceeds n_steps")

    grid = cfg.grid
    snapshots = []
    for p in snap_paths:
        data = _parse_csv(p, SNAPSHOT_HEADER)
        if data.shape[0] != grid.points:
            raise DataError(
                f"{p} is corrupted: {data.shape[0]} rows, grid has {grid.points}"
            )
        if not np.allclose(data[:, 0], grid.nodes, rtol=1e-9, atol=1e-12):
            raise DataError(f"{p} is corrupted: radius column does not match the grid")
        if np.any(data[:, 1] < 0):
            raise DataError(f"{p} is corrupted: negative state values")
        snapshots.append(RadialField(grid, data[:, 1]))

    phi1, phi_w = default_weights(cfg)
    records = [
        measure(u, cfg.m, cfg.s, phi1.profile, phi_w.profile) for u in snapshots
    ]
    boundary = [_boundary_fraction(u) for u in snapshots]
    return Trajectory(
        config=cfg,
        times=times_full[steps],
        snapshots=snapshots,
        records=records,
        inner_iterations=[0] * (len(steps) - 1),
        boundary_mass_fraction=boundary,
        phi1=phi1,
        phi_w=phi_w,
    )


def _check_saved_run(traj: Trajectory, suite: str) -> list[CheckReport]:
    evaluators: dict[str, Callable[[], CheckReport]] = {
        "time_monotonicity": lambda: check_time_monotonicity(traj),
        "potential_monotone": lambda: check_potential_monotone(traj),
        "weighted_mass_monotone": lambda: merge_reports(
            "weighted_mass_monotone",
            [
                check_weighted_mass_monotone(traj, traj.phi1),
                check_weighted_mass_monotone(traj, traj.phi_w),
            ],
        ),
        "fundamental_pointwise": lambda: check_fundamental_pointwise(traj),
        "weak_dual_identity": lambda: check_weak_dual_identity(
            traj, standard_bump(traj.config.grid)
        ),
    }
    return [evaluators[name]() for name in SUITES[suite]]


def run_verify(args: argparse.Namespace) -> int:
    suite, jobs, plan, trajectory, resolved = _verify_settings(args)
    out_dir = _resolve_out_dir(args)
    if trajectory is not None:
        if suite not in SAVED_RUN_SUITES:
            raise ConfigError(
                f"suite {suite!r} needs freshly built paired runs; a saved "
                f"trajectory supports: {', '.join(SAVED_RUN_SUITES)}"
            )
        traj = load_run(trajectory)
        reports = _check_saved_run(traj, suite)
    else:
        reports = run_suite(suite, plan=plan, jobs=jobs)
    (out_dir / "report.json").write_text(reports_to_json(reports), encoding="utf-8")
    write_meta(out_dir, "verify", resolved)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILURE


# -- sweep -------------------------------------------------------------------

_SWEEP_KEYS = (
    "m",
    "s",
    "mass",
    "width",
    "r_max",
    "points",
    "targets",
    "n_inner",
    "jobs",
)

_SWEEP_DEFAULTS: dict[str, Any] = {
    "m": [2.0],
    "s": [0.25, 0.75],
    "mass": [1.0],
    "width": 0.05,
    "r_max": 15.0,
    "points": 2048,
    "n_inner": 100,
}


def _sweep_settings(args: argparse.Namespace) -> dict[str, Any]:
    settings = dict(_SWEEP_DEFAULTS)
    if args.config is not None:
        sec = _section(load_config(args.config), "sweep")
        _reject_unknown(sec, _SWEEP_KEYS, "sweep section")
        settings.update(sec)
    settings["m"] = _num_list(settings["m"], "sweep m", minimum=1.0, open_min=True)
    settings["s"] = _num_list(
        settings["s"], "sweep s", minimum=0.0, maximum=1.0, open_min=True, open_max=True
    )
    settings["mass"] = _num_list(settings["mass"], "sweep mass", minimum=0.0, open_min=True)
    settings["width"] = _num(settings["width"], "sweep width", minimum=0.0, open_min=True)
    settings["r_max"] = _num(settings["r_max"], "sweep r_max", minimum=0.0, open_min=True)
    settings["points"] = _num(settings["points"], "sweep points", integer=True, minimum=16)
    if "targets" in settings:
        settings["targets"] = _num_list(
            settings["targets"], "sweep targets", minimum=0.0, open_min=True, increasing=True
        )
    else:
        settings["targets"] = [float(t) for t in np.geomspace(1e-3, 1e-1, 7)]
    settings["n_inner"] = _num(settings["n_inner"], "sweep n_inner", integer=True, minimum=1)
    if args.jobs is not None:
        settings["jobs"] = args.jobs
    elif "jobs" in settings:
        settings["jobs"] = int(_num(settings["jobs"], "sweep jobs", integer=True, minimum=1))
    else:
        settings["jobs"] = 1
    return settings


def _combo_dir_name(m: float, s: float, mass: float) -> str:
    return f"m{m:g}_s{s:g}_mass{mass:g}"


def _run_combo(
    combo: tuple[float, float, float], settings: Mapping[str, Any], out_dir: Path
) -> dict[str, Any]:
    m, s, mass = combo
    sub = out_dir / _combo_dir_name(m, s, mass)
    sub.mkdir(parents=True, exist_ok=True)
    row: dict[str, Any] = {
        "m": m,
        "s": s,
        "mass": mass,
        "sup_Q_l1": math.nan,
        "sup_Q_phi1": math.nan,
        "sup_Q_w": math.nan,
        "passed": False,
        "error": None,
    }
    targets = settings["targets"]
    try:
        grid = RadialGrid(float(settings["r_max"]), int(settings["points"]))
        cfg = SolverConfig(
            m=m, s=s, T=targets[-1], n_steps=len(targets), grid=grid
        )
        datum = gaussian_field(grid, float(settings["width"]), mass=mass)
        traj = decay_profile(datum, targets, cfg, n_inner=int(settings["n_inner"]))
        _write_trajectory(sub, traj, stride=1)
        write_meta(
            sub,
            "sweep-combo",
            {
                "m": m,
                "s": s,
                "grid": {"r_max": grid.r_max, "points": grid.points},
                "T": cfg.T,
                "n_steps": cfg.n_steps,
                "datum": {"kind": "gaussian", "width": settings["width"], "mass": mass},
                "snapshot_stride": 1,
                "inner_tol": cfg.inner_tol,
                "inner_max_iters": cfg.inner_max_iters,
                "strict": cfg.strict,
            },
        )
        _, q_l1 = smoothing_ratio_series(traj)
        _, q_phi1 = weighted_ratio_series(traj, "ground_state")
        _, q_w = weighted_ratio_series(traj, "w_class")
        sups = {
            "sup_Q_l1": float(np.max(q_l1)),
            "sup_Q_phi1": float(np.max(q_phi1)),
            "sup_Q_w": float(np.max(q_w)),
        }
        row.update(sups)
        row["passed"] = all(math.isfinite(v) and v > 0 for v in sups.values())
    except (SolverNonconvergence, NegativityError, ValueError, RuntimeError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        (sub / "error.txt").write_text(row["error"] + "\n", encoding="utf-8")
    return row


def run_sweep(args: argparse.Namespace) -> int:
    settings = _sweep_settings(args)
    out_dir = _resolve_out_dir(args)
    combos = list(product(settings["m"], settings["s"], settings["mass"]))
    jobs = min(int(settings["jobs"]), len(combos))
    # the summary table reports each combo's edge behavior implicitly through
    # its trajectory file; the per-run advisory would also race across the
    # worker threads, so it is silenced for the whole sweep
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryLeakWarning)
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [
                    pool.submit(_run_combo, combo, settings, out_dir) for combo in combos
                ]
                rows = [f.result() for f in futures]
        else:
            rows = [_run_combo(combo, settings, out_dir) for combo in combos]

    write_csv(
        out_dir / "sweep_summary.csv",
        SWEEP_HEADER,
        (
            (
                row["m"],
                row["s"],
                row["mass"],
                row["sup_Q_l1"],
                row["sup_Q_phi1"],
                row["sup_Q_w"],
                row["passed"],
            )
            for row in rows
        ),
    )
    first_failure = next(
        (
            {"combo": _combo_dir_name(row["m"], row["s"], row["mass"]), "error": row["error"]}
            for row in rows
            if not row["passed"]
        ),
        None,
    )
    write_meta(
        out_dir,
        "sweep",
        {**{k: settings[k] for k in _SWEEP_KEYS if k in settings}, "first_failure": first_failure},
    )
    return EXIT_OK if all(row["passed"] for row in rows) else EXIT_CHECK_FAILURE


# -- entry point -------------------------------------------------------------


def _resolve_out_dir(args: argparse.Namespace) -> Path:
    out = args.out or os.environ.get("FPME_OUT_DIR") or "fpme_out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="PATH", help="JSON configuration file")
    sub.add_argument(
        "--out",
        metavar="DIR",
        help="output directory (default: $FPME_OUT_DIR or ./fpme_out)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpme",
        description="Radial fractional porous-medium flow laboratory.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    green = sub.add_parser(
        "green", help="tabulate the Green function and fit its asymptotics"
    )
    _add_common(green)
    green.add_argument("--dim", type=int, help="spatial dimension N >= 2")
    green.add_argument("--s", type=float, help="fractional order in (0, 1)")
    green.add_argument("--rmin", type=float, help="smallest tabulated radius")
    green.add_argument("--rmax", type=float, help="largest tabulated radius")
    green.add_argument("--points", type=int, help="number of tabulated radii")
    green.add_argument("--tol", type=float, help="quadrature tolerance")
    green.add_argument(
        "--no-asymptotics",
        action="store_true",
        help="skip the asymptotic fits (required for dim 2)",
    )

    ev = sub.add_parser("evolve", help="run one implicit evolution")
    _add_common(ev)
    ev.add_argument(
        "--strict",
        action="store_true",
        help="escalate resolution and boundary advisories to errors",
    )

    ver = sub.add_parser("verify", help="run a named check suite")
    _add_common(ver)
    ver.add_argument(
        "--suite",
        metavar="NAME",
        help=f"one of: {', '.join(sorted(SUITES))} (default: all)",
    )
    ver.add_argument("--jobs", type=int, metavar="K", help="concurrent runs")

    sw = sub.add_parser("sweep", help="sweep (m, s, mass) combinations")
    _add_common(sw)
    sw.add_argument("--jobs", type=int, metavar="K", help="concurrent combinations")

    return parser


_HANDLERS: dict[str, Callable[[argparse.Namespace], int]] = {
    "green": run_green,
    "evolve": run_evolve,
    "verify": run_verify,
    "sweep": run_sweep,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.verb](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except HorizonError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR
    except SolverNonconvergence as exc:
        print(f"solver error at step {exc.step_index}: {exc}", file=sys.stderr)
        return EXIT_SOLVER_ERROR
    except (NegativityError, QuadratureError, FitDivergenceError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_ERROR


if __name__ == "__main__":
    sys.exit(main())
