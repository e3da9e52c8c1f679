"""Implicit time stepping: solver contract, scheme invariants, diagnostics.

The single-step oracle is Richardson-extrapolated explicit Euler: for one
step of size h the implicit and explicit schemes bracket the exact flow
and differ from it at O(h^2), so the extrapolated explicit state pins the
implicit step to a small multiple of h^2.
"""

import math
import warnings

import numpy as np
import pytest

from fpme.evolution import (
    BoundaryLeakWarning,
    NegativityError,
    SolverConfig,
    SolverNonconvergence,
    Trajectory,
    decay_profile,
    default_weights,
    evi_residual,
    evolve,
    itd_step,
    truncate_datum,
)
from fpme.operators import frac_laplacian
from fpme.spectral import (
    RadialField,
    RadialGrid,
    gaussian_field,
    integrate,
    lp_norm,
)

GRID = RadialGrid(15.0, 1024)
U0 = gaussian_field(GRID, 0.7, mass=1.0)
CFG = SolverConfig(m=2.0, s=0.5, T=0.4, n_steps=400, grid=GRID)


def _quiet_evolve(u0, cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryLeakWarning)
        return evolve(u0, cfg)


@pytest.fixture(scope="module")
def short_run():
    cfg = SolverConfig(m=2.0, s=0.5, T=0.2, n_steps=100, grid=GRID)
    return _quiet_evolve(U0, cfg)


# -- configuration contract --------------------------------------------------


def test_solver_config_validation():
    good = dict(m=2.0, s=0.5, T=1.0, n_steps=10, grid=GRID)
    for key, bad in [
        ("m", 1.0),
        ("s", 0.0),
        ("s", 1.0),
        ("T", 0.0),
        ("n_steps", 0),
        ("inner_tol", 0.0),
        ("inner_max_iters", 0),
    ]:
        with pytest.raises(ValueError):
            SolverConfig(**{**good, key: bad})


def test_solver_config_derived_quantities():
    cfg = SolverConfig(m=2.0, s=0.5, T=1.0, n_steps=1000, grid=GRID)
    assert cfg.h == pytest.approx(1e-3)
    # 1/(2s + N(m-1)) with N = 3
    assert cfg.theta1 == pytest.approx(0.25)
    assert SolverConfig(m=2.0, s=0.25, T=1.0, n_steps=1, grid=GRID).theta1 == (
        pytest.approx(1.0 / 3.5)
    )


# -- single step against the extrapolated explicit oracle --------------------


def test_implicit_step_matches_extrapolated_euler():
    h = 1e-4

    def euler(hh: float, n: int) -> np.ndarray:
        v = U0.values.copy()
        for _ in range(n):
            powered = RadialField(GRID, np.sign(v) * np.abs(v) ** 2)
            v = v - hh * frac_laplacian(powered, 0.5).values
        return v

    extrapolated = 2.0 * euler(h / 2.0, 2) - euler(h, 1)
    implicit, iters = itd_step(U0, h, CFG)
    scale = np.max(U0.values)
    assert np.max(np.abs(implicit.values - extrapolated)) <= 1e-6 * scale
    assert 1 <= iters <= 10


def test_step_preserves_nonnegativity_and_decreases_mass():
    stepped, _ = itd_step(U0, 1e-2, CFG)
    assert np.all(stepped.values >= 0.0)
    assert integrate(stepped) < integrate(U0)
    assert lp_norm(stepped, math.inf) < lp_norm(U0, math.inf)


def test_nonconvergence_carries_step_diagnostics():
    cfg = SolverConfig(
        m=2.0, s=0.5, T=5.0, n_steps=1, grid=GRID, inner_max_iters=1, inner_tol=1e-14
    )
    with pytest.raises(SolverNonconvergence) as exc_info:
        evolve(U0, cfg)
    err = exc_info.value
    assert err.step_index == 0
    assert err.iters == 1
    assert err.residual > err.tol


# -- full runs ---------------------------------------------------------------


def test_trajectory_shape_and_time_grid(short_run):
    traj = short_run
    assert len(traj.times) == 101
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(0.2)
    assert len(traj.snapshots) == 101
    assert len(traj.records) == 101
    assert len(traj.inner_iterations) == 100
    assert len(traj.boundary_mass_fraction) == 101
    assert all(it >= 1 for it in traj.inner_iterations)


def test_run_invariants_positivity_and_decay(short_run):
    traj = short_run
    l1 = [rec.l1 for rec in traj.records]
    linf = [rec.linf for rec in traj.records]
    en = [rec.energy_m for rec in traj.records]
    assert all(b <= a for a, b in zip(l1, l1[1:]))
    assert all(b <= a for a, b in zip(linf, linf[1:]))
    assert all(b <= a for a, b in zip(en, en[1:]))
    assert all(np.all(u.values >= 0.0) for u in traj.snapshots)


def test_boundary_monitor_stays_small_on_adequate_ball(short_run):
    frac = np.array(short_run.boundary_mass_fraction)
    assert np.all(frac >= 0.0)
    assert np.all(frac <= 1e-8)


def test_boundary_advisory_fires_once_per_run():
    cfg = SolverConfig(m=2.0, s=0.5, T=0.2, n_steps=100, grid=GRID)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        evolve(U0, cfg)
    leaks = [w for w in rec if issubclass(w.category, BoundaryLeakWarning)]
    assert len(leaks) == 1


def test_strict_mode_escalates_boundary_advisory():
    small = RadialGrid(6.0, 256)
    heavy = gaussian_field(small, 0.7, mass=5.0)
    cfg = SolverConfig(m=2.0, s=0.5, T=2.0, n_steps=200, grid=small, strict=True)
    with pytest.raises(RuntimeError, match="boundary"):
        evolve(heavy, cfg)


def test_zero_datum_stays_zero():
    zero = gaussian_field(GRID, 0.7, mass=0.0)
    traj = _quiet_evolve(zero, SolverConfig(m=2.0, s=0.5, T=0.1, n_steps=20, grid=GRID))
    assert all(rec.l1 == 0.0 for rec in traj.records)
    assert all(rec.linf == 0.0 for rec in traj.records)


def test_ordered_data_stay_ordered():
    # comparison principle: half the datum stays below the full datum
    lower = RadialField(GRID, 0.5 * U0.values)
    cfg = SolverConfig(m=2.0, s=0.5, T=0.2, n_steps=100, grid=GRID)
    upper_traj = _quiet_evolve(U0, cfg)
    lower_traj = _quiet_evolve(lower, cfg)
    for hi, lo in zip(upper_traj.snapshots, lower_traj.snapshots):
        gap = lo.values - hi.values
        assert np.max(gap) <= 1e-10 * np.max(hi.values)


def test_l1_contraction_between_runs():
    other = gaussian_field(GRID, 1.0, mass=0.7)
    cfg = SolverConfig(m=2.0, s=0.5, T=0.2, n_steps=100, grid=GRID)
    a = _quiet_evolve(U0, cfg)
    b = _quiet_evolve(other, cfg)
    dists = [
        integrate(RadialField(GRID, np.abs(x.values - y.values)))
        for x, y in zip(a.snapshots, b.snapshots)
    ]
    assert all(later <= earlier * (1.0 + 1e-12) for earlier, later in zip(dists, dists[1:]))


# -- datum truncation --------------------------------------------------------


def test_truncate_datum_caps_and_cuts():
    tall = RadialField(GRID, 3.0 * np.exp(-GRID.nodes))
    t1 = truncate_datum(tall, 1)
    assert np.max(t1.values) <= 1.0
    assert np.all(t1.values[GRID.nodes > 1.0] == 0.0)
    t5 = truncate_datum(tall, 5)
    assert np.all(t5.values >= t1.values)
    assert np.all(t5.values <= tall.values)
    with pytest.raises(ValueError):
        truncate_datum(tall, 0)
    with pytest.raises(ValueError):
        truncate_datum(tall, 1.5)


def test_truncations_exhaust_the_datum():
    t_big = truncate_datum(U0, 20)
    assert np.allclose(t_big.values, U0.values, atol=1e-15)


# -- variational residuals ---------------------------------------------------


def test_evi_residuals_are_nonpositive(short_run):
    y = gaussian_field(GRID, 1.0, mass=0.5)
    res = evi_residual(short_run, y)
    assert res.shape == (100,)
    assert np.max(res) <= 1e-8


def test_evi_residual_grid_mismatch():
    other = RadialGrid(10.0, 256)
    with pytest.raises(ValueError):
        evi_residual(
            _quiet_evolve(U0, SolverConfig(m=2.0, s=0.5, T=0.05, n_steps=10, grid=GRID)),
            gaussian_field(other, 1.0, mass=0.5),
        )


# -- profile sampling --------------------------------------------------------


def test_decay_profile_samples_independent_runs():
    targets = [0.01, 0.05, 0.2]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryLeakWarning)
        traj = decay_profile(U0, targets, CFG, n_inner=20)
    assert np.allclose(traj.times, [0.0] + targets)
    assert len(traj.snapshots) == 4
    assert len(traj.inner_iterations) == 3
    linf = [rec.linf for rec in traj.records]
    assert all(b < a for a, b in zip(linf, linf[1:]))


def test_decay_profile_validation():
    with pytest.raises(ValueError):
        decay_profile(U0, [], CFG)
    with pytest.raises(ValueError):
        decay_profile(U0, [0.0, 0.1], CFG)
    with pytest.raises(ValueError):
        decay_profile(U0, [0.1], CFG, n_inner=0)


def test_default_weights_kinds():
    phi1, phi_w = default_weights(CFG)
    assert phi1.kind == "ground_state"
    assert phi_w.kind == "w_class"
    assert np.all(phi_w.profile.values > 0)
