"""Diagnostic figures over the solver's documented CSV schemas.

Four figure kinds cover the standard outputs:

``green_asymptotics``
    Log-log kernel tabulation with its two regimes: an algebraic plateau
    near the pole and exponential-times-algebraic decay at large radius.
``smoothing_decay``
    Sup-norm decay of one or more runs with the theoretical slope guide,
    plus the mass-normalized ratio curves that should nearly collapse.
``monotonicity``
    Weighted masses and plain mass of one run against time; all three
    must be nonincreasing.
``sweep_summary``
    Scatter of the decay-ratio suprema across a parameter sweep, with a
    per-cell fitted decay slope when the per-combination runs sit next
    to the summary table.

Every plotting function writes ``spec.output`` and returns the numbers it
annotated, so callers can assert on exactly what the figure shows.
Figures embed no timestamps: rendering the same inputs twice produces
identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

#: column contracts of the consumed CSV files
GREEN_HEADER = "r,G,quad_err"
TRAJECTORY_HEADER = "t,l1,l2,linf,l1_phi1,l1_phiW,hs,energy_m,inner_iters,boundary_mass"
SWEEP_HEADER = "m,s,mass,sup_Q_l1,sup_Q_phi1,sup_Q_w,passed"

FIGURE_KINDS = ("green_asymptotics", "smoothing_decay", "monotonicity", "sweep_summary")

#: the solver works on 3-dimensional radial balls
DIM = 3


class InputFormatError(ValueError):
    """An input file is missing, empty, or does not match its schema."""


@dataclass(frozen=True)
class FigureSpec:
    """Inputs, figure kind, and output image path for one figure."""

    inputs: tuple[str, ...]
    kind: str
    output: str

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise ValueError(
                f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}"
            )
        if not self.inputs:
            raise ValueError("at least one input file is required")
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))
        for p in self.inputs:
            if not Path(p).is_file():
                raise InputFormatError(f"input file does not exist: {p}")


def load_table(path: str | Path, expected_header: str) -> dict[str, np.ndarray]:
    """Columns of a solver CSV; InputFormatError on any schema defect."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").strip().splitlines()
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from exc
    if not lines or not lines[0].strip():
        raise InputFormatError(f"{path} is empty; expected columns {expected_header!r}")
    if lines[0].strip() != expected_header:
        raise InputFormatError(
            f"{path} header {lines[0].strip()!r} does not match expected columns "
            f"{expected_header!r}"
        )
    names = expected_header.split(",")
    if len(lines) < 2:
        raise InputFormatError(f"{path} has no data rows")
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(names):
            raise InputFormatError(
                f"{path} line {i}: {len(parts)} fields, expected {len(names)}"
            )
        row = []
        for name, part in zip(names, parts):
            if name == "passed":
                if part not in ("true", "false"):
                    raise InputFormatError(f"{path} line {i}: bad boolean {part!r}")
                row.append(1.0 if part == "true" else 0.0)
            else:
                try:
                    row.append(float(part))
                except ValueError as exc:
                    raise InputFormatError(f"{path} line {i}: {exc}") from exc
        rows.append(row)
    data = np.asarray(rows, dtype=np.float64)
    return {name: data[:, j] for j, name in enumerate(names)}


def load_meta(csv_path: str | Path) -> dict:
    """The resolved configuration from meta.json next to a solver CSV."""
    meta_path = Path(csv_path).parent / "meta.json"
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputFormatError(
            f"missing provenance record {meta_path} (written by the solver next "
            f"to every output table): {exc}"
        ) from exc
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{meta_path} is not valid JSON: {exc}") from exc
    config = meta.get("config")
    if not isinstance(config, dict):
        raise InputFormatError(f"{meta_path} lacks a config object")
    return config


def theta1(m: float, s: float, dim: int = DIM) -> float:
    """Scaling exponent 1/(dim*(m-1) + 2s) of the sup-norm decay law."""
    return 1.0 / (dim * (m - 1.0) + 2.0 * s)


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def _save(fig, output: str) -> None:
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)


# -- figure kinds ------------------------------------------------------------


def plot_green(spec: FigureSpec) -> dict:
    """Two-regime log-log view of a kernel tabulation.

    Expects one ``green.csv`` with its meta.json.  Draws the tabulated
    values with a near-pole power-law guide of slope 2s - N and a far
    overlay exp(-(N-1) r) * r^(s-1), both anchored on the data; annotates
    the fitted near exponent and far decay rate.
    """
    table = load_table(spec.inputs[0], GREEN_HEADER)
    config = load_meta(spec.inputs[0])
    dim = int(config.get("dim", DIM))
    s = float(config["s"])
    r, g = table["r"], table["G"]
    if np.any(r <= 0) or np.any(g <= 0):
        raise InputFormatError(f"{spec.inputs[0]}: radii and values must be positive")

    near_mask = r <= max(10.0 * r[0], 1e-2)
    if np.count_nonzero(near_mask) < 3:
        near_mask = np.zeros_like(r, dtype=bool)
        near_mask[:3] = True
    near_exponent = _fit_slope(r[near_mask], g[near_mask])

    far_mask = r >= min(0.5 * r[-1], 10.0)
    if np.count_nonzero(far_mask) < 3:
        far_mask = np.zeros_like(r, dtype=bool)
        far_mask[-3:] = True
    # separate the algebraic factor, then the log is linear in r
    far_rate, _ = np.polyfit(r[far_mask], np.log(g[far_mask] * r[far_mask] ** (1.0 - s)), 1)
    far_rate = float(far_rate)

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(r, g, "k-", lw=1.5, label="tabulated kernel")
    near_r = r[r <= 1.0]
    if len(near_r) >= 2:
        guide = g[0] * (near_r / r[0]) ** (2.0 * s - dim)
        ax.loglog(near_r, guide, "C0--", lw=1.0,
                  label=f"near slope {2.0 * s - dim:g}")
    far_r = r[r >= 2.0]
    if len(far_r) >= 2:
        envelope = g[-1] * np.exp(-(dim - 1.0) * (far_r - r[-1])) * (far_r / r[-1]) ** (s - 1.0)
        ax.loglog(far_r, envelope, "C3--", lw=1.0,
                  label=f"far envelope rate {-(dim - 1.0):g}")
    ax.set_xlabel("r")
    ax.set_ylabel("G(r)")
    ax.set_title(f"kernel regimes (dim {dim}, s = {s:g})")
    ax.legend(loc="lower left", fontsize=8)
    ax.text(
        0.97, 0.97,
        f"fitted near exponent {near_exponent:+.3f}\nfitted far rate {far_rate:+.3f}",
        transform=ax.transAxes, ha="right", va="top", fontsize=8,
    )
    _save(fig, spec.output)
    return {
        "near_exponent": near_exponent,
        "near_target": 2.0 * s - dim,
        "far_rate": far_rate,
        "far_target": -(dim - 1.0),
    }


def _trajectory_curves(paths) -> list[dict]:
    curves = []
    for path in paths:
        table = load_table(path, TRAJECTORY_HEADER)
        t, linf, l1 = table["t"], table["linf"], table["l1"]
        mask = t > 0
        if np.count_nonzero(mask) < 2:
            raise InputFormatError(f"{path}: need at least two positive-time rows")
        curves.append(
            {"path": str(path), "t": t[mask], "linf": linf[mask], "mass": float(l1[0])}
        )
    return curves


def plot_smoothing(spec: FigureSpec) -> dict:
    """Sup-norm decay with the theoretical slope and ratio collapse.

    Expects one or more ``trajectory.csv`` files (each with meta.json).
    Left panel: log-log sup norm against time per run, a guide with the
    theoretical slope -N*theta1, and the fitted slope of the first run.
    Right panel: the mass-normalized ratio curves, which must stay within
    a bounded band across runs.
    """
    curves = _trajectory_curves(spec.inputs)
    config = load_meta(spec.inputs[0])
    m, s = float(config["m"]), float(config["s"])
    th = theta1(m, s)
    target = -DIM * th

    first = curves[0]
    window = (first["t"] >= 1e-3) & (first["t"] <= 1e-1)
    if np.count_nonzero(window) < 2:
        window = np.ones_like(first["t"], dtype=bool)
    fitted = _fit_slope(first["t"][window], first["linf"][window])

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.0, 4.2))
    sups = []
    for curve in curves:
        label = f"mass {curve['mass']:g}"
        ax1.loglog(curve["t"], curve["linf"], "o-", ms=3, lw=1.0, label=label)
        q = curve["t"] ** (DIM * th) * curve["linf"] / curve["mass"] ** (2.0 * s * th)
        sups.append(float(np.max(q)))
        ax2.semilogx(curve["t"], q, "o-", ms=3, lw=1.0, label=label)
    guide_t = first["t"]
    guide = first["linf"][0] * (guide_t / guide_t[0]) ** target
    ax1.loglog(guide_t, guide, "k--", lw=1.0, label=f"slope {target:g}")
    ax1.set_xlabel("t")
    ax1.set_ylabel("sup norm")
    ax1.set_title(f"decay (m = {m:g}, s = {s:g}); fitted slope {fitted:+.3f}")
    ax1.legend(fontsize=8)
    ax2.set_xlabel("t")
    ax2.set_ylabel("normalized ratio Q(t)")
    ax2.set_title("mass-normalized collapse")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, spec.output)
    return {
        "fitted_slope": fitted,
        "target_slope": target,
        "q_spread": max(sups) / min(sups),
        "n_curves": len(curves),
    }


def plot_monotonicity(spec: FigureSpec) -> dict:
    """Plain and weighted masses of one run against time.

    Expects one ``trajectory.csv``.  All three series must be
    nonincreasing; the returned dict carries the worst observed increase
    of each so callers can assert monotonicity of what was drawn.
    """
    table = load_table(spec.inputs[0], TRAJECTORY_HEADER)
    t = table["t"]
    series = {"l1": table["l1"], "l1_phi1": table["l1_phi1"], "l1_phiW": table["l1_phiW"]}
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    increases = {}
    for name, values in series.items():
        ax.plot(t, values / values[0], lw=1.3, label=f"{name} (relative)")
        increases[f"max_increase_{name}"] = float(max(0.0, np.max(np.diff(values))))
    ax.set_xlabel("t")
    ax.set_ylabel("mass relative to t = 0")
    ax.set_title("monotone weighted masses")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, spec.output)
    return increases


def plot_sweep(spec: FigureSpec) -> dict:
    """Decay-ratio suprema across a parameter sweep.

    Expects one ``sweep_summary.csv``.  Scatter of sup Q over the (m, s)
    plane, colored by the supremum, round markers for passed cells and
    crosses for failed ones.  When the per-combination directories sit
    next to the summary, each cell is annotated with the fitted decay
    slope of its run.
    """
    path = Path(spec.inputs[0])
    table = load_table(path, SWEEP_HEADER)
    n_cells = len(table["m"])
    all_passed = bool(np.all(table["passed"] == 1.0))

    slopes: dict[str, float] = {}
    slope_targets: dict[str, float] = {}
    for i in range(n_cells):
        m, s, mass = table["m"][i], table["s"][i], table["mass"][i]
        combo = f"m{m:g}_s{s:g}_mass{mass:g}"
        run_path = path.parent / combo / "trajectory.csv"
        if run_path.is_file():
            curve = _trajectory_curves([run_path])[0]
            slopes[combo] = _fit_slope(curve["t"], curve["linf"])
            slope_targets[combo] = -DIM * theta1(float(m), float(s))

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for passed, marker in ((1.0, "o"), (0.0, "x")):
        mask = table["passed"] == passed
        if np.any(mask):
            sc = ax.scatter(
                table["s"][mask], table["m"][mask],
                c=table["sup_Q_l1"][mask], s=80, marker=marker,
                vmin=float(np.nanmin(table["sup_Q_l1"])),
                vmax=float(np.nanmax(table["sup_Q_l1"])),
            )
    fig.colorbar(sc, ax=ax, label="sup Q")
    for i in range(n_cells):
        m, s, mass = table["m"][i], table["s"][i], table["mass"][i]
        combo = f"m{m:g}_s{s:g}_mass{mass:g}"
        if combo in slopes:
            ax.annotate(
                f"{slopes[combo]:+.2f}",
                (s, m), textcoords="offset points", xytext=(6, 6), fontsize=8,
            )
    ax.set_xlabel("s")
    ax.set_ylabel("m")
    ax.set_title("sweep: ratio suprema and fitted decay slopes")
    fig.tight_layout()
    _save(fig, spec.output)
    return {
        "n_cells": n_cells,
        "all_passed": all_passed,
        "slopes": slopes,
        "slope_targets": slope_targets,
    }


_DISPATCH = {
    "green_asymptotics": plot_green,
    "smoothing_decay": plot_smoothing,
    "monotonicity": plot_monotonicity,
    "sweep_summary": plot_sweep,
}


def make_figure(spec: FigureSpec) -> dict:
    """Render one figure and return the values it annotates."""
    return _DISPATCH[spec.kind](spec)
