"""End-to-end validation battery with pinned tolerances and runtime caps.

Each test pins one headline guarantee of the package: closed-form kernel
constants, asymptotic exponents across dimensions, agreement of independent
operator routes, the eigenfunction relation, family-stable decay ratios,
the full inequality suite, and first-order convergence of the time scheme.
Runtime caps keep the battery usable as a routine gate.
"""

import math
import time
import warnings

import numpy as np
import pytest
from scipy.special import kv

from fpme.evolution import (
    BoundaryLeakWarning,
    SolverConfig,
    evi_residual,
    evolve,
)
from fpme.kernels import KernelParams, green_asymptotics, green_value
from fpme.operators import (
    ResolutionWarning,
    frac_laplacian,
    frac_laplacian_subordination,
    ground_state,
    inv_frac_laplacian,
)
from fpme.spectral import RadialField, RadialGrid, gaussian_field, lp_norm, standard_bump
from fpme.verify import check_weak_dual_identity, run_suite

FINE = RadialGrid(30.0, 4096)

#: checks whose thresholds are the universal inequality tolerance
INEQUALITY_CHECKS = (
    "time_monotonicity",
    "lp_stability",
    "contraction_comparison",
    "potential_monotone",
    "fundamental_pointwise",
    "weighted_mass_monotone",
)


def _quiet(fn, *args, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryLeakWarning)
        warnings.simplefilter("ignore", ResolutionWarning)
        return fn(*args, **kwargs)


@pytest.fixture(scope="module")
def suite_reports():
    t0 = time.perf_counter()
    reports = run_suite("all")
    wall = time.perf_counter() - t0
    return {r.name: r for r in reports}, wall


@pytest.fixture(scope="module")
def millistep_run():
    # reference run with step size exactly 1e-3
    grid = RadialGrid(15.0, 1024)
    cfg = SolverConfig(m=2.0, s=0.5, T=0.4, n_steps=400, grid=grid)
    t0 = time.perf_counter()
    traj = _quiet(evolve, gaussian_field(grid, 0.7, mass=1.0), cfg)
    return traj, time.perf_counter() - t0


def test_near_field_constant():
    t0 = time.perf_counter()
    params = KernelParams(dim=3, order=0.5)
    target = 1.0 / (2.0 * math.pi**2)
    for r in np.geomspace(1e-3, 1e-2, 8):
        assert r * r * green_value(r, params) == pytest.approx(target, rel=0.02)
    assert time.perf_counter() - t0 < 10.0


def test_far_field_constant_and_closed_form():
    t0 = time.perf_counter()
    params = KernelParams(dim=3, order=0.5)
    target = math.sqrt(math.pi / 2.0) / math.pi**2
    fits = green_asymptotics(params)
    assert fits["far_constant"] == pytest.approx(target, rel=0.02)
    # independent closed form at this order: Bessel-K over sinh
    prefactor = (4.0 * math.pi) ** -1.5 * 4.0 / math.sqrt(math.pi)
    for r in np.linspace(10.0, 20.0, 5):
        oracle = prefactor * kv(1.0, r) / math.sinh(r)
        assert green_value(r, params) == pytest.approx(oracle, rel=1e-10)
    assert time.perf_counter() - t0 < 10.0


@pytest.mark.parametrize("dim,s", [(3, 0.25), (3, 0.5), (3, 0.75), (4, 0.5), (5, 0.3)])
def test_asymptotic_exponents_across_dimensions(dim, s):
    t0 = time.perf_counter()
    fits = green_asymptotics(KernelParams(dim=dim, order=s), far_window=(20.0, 40.0))
    assert fits["near_exponent"] == pytest.approx(2.0 * s - dim, abs=0.02)
    assert fits["far_rate"] == pytest.approx(-(dim - 1.0), rel=0.02)
    assert fits["far_power"] == pytest.approx(s - 1.0, rel=0.02)
    assert time.perf_counter() - t0 < 12.0  # 60 s for the five-pair family


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_operator_routes_agree_and_invert(s):
    t0 = time.perf_counter()
    u = gaussian_field(FINE, 0.7, mass=1.0)
    spectral = frac_laplacian(u, s)
    subord = frac_laplacian_subordination(u, s)
    dev = lp_norm(RadialField(FINE, spectral.values - subord.values), 2.0)
    assert dev <= 1e-4 * lp_norm(spectral, 2.0)
    back = inv_frac_laplacian(spectral, s)
    assert np.max(np.abs(back.values - u.values)) <= 1e-10 * np.max(u.values)
    assert time.perf_counter() - t0 < 10.0  # 30 s over the three orders


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_eigenfunction_is_fixed_at_every_order(s):
    t0 = time.perf_counter()
    phi = ground_state(FINE).profile
    out = _quiet(frac_laplacian, phi, s)
    window = (FINE.nodes >= 0.5) & (FINE.nodes <= 10.0)
    rel = np.max(np.abs(out.values[window] - phi.values[window]) / phi.values[window])
    assert rel <= 0.01
    assert time.perf_counter() - t0 < 10.0  # 30 s over the three orders


def test_mass_family_spread_and_decay_exponent(suite_reports):
    reports, wall = suite_reports
    rep = reports["smoothing_l1"]
    assert rep.passed
    assert rep.observed["violation_spread"] <= 3.0
    assert sorted(rep.observed[f"mass_{i}"] for i in range(3)) == pytest.approx(
        [0.1, 1.0, 10.0]
    )
    # dedicated narrow-datum run isolates the decay exponent
    assert rep.observed["slope_3"] == pytest.approx(-0.75, rel=0.05)
    assert wall < 120.0


def test_weighted_family_spread_and_exponent(suite_reports):
    reports, wall = suite_reports
    rep = reports["smoothing_weighted"]
    assert rep.passed
    assert rep.observed["violation_ground_state_spread"] <= 3.0
    assert rep.observed["violation_w_class_spread"] <= 3.0
    # wide plateau run isolates the ratio's time exponent 1/m
    assert rep.observed["w_class_slope_Q_3"] == pytest.approx(0.5, rel=0.05)
    assert wall < 120.0


def test_inequality_battery_and_energy_dissipation(suite_reports, millistep_run):
    reports, wall = suite_reports
    for name in INEQUALITY_CHECKS:
        rep = reports[name]
        assert rep.passed, name
        assert rep.threshold == 1e-8, name
    traj, run_wall = millistep_run
    energies = np.array([rec.energy_m for rec in traj.records])
    assert np.all(np.diff(energies) <= 0.0)
    assert wall + run_wall < 180.0


def test_step_halving_variational_and_dual_residuals(millistep_run):
    t0 = time.perf_counter()
    # first-order convergence: distance to the halved-step run halves
    grid = RadialGrid(20.0, 2048)
    u0 = gaussian_field(grid, 0.7, mass=1.0)
    finals = {}
    for n in (250, 500, 1000):
        cfg = SolverConfig(m=2.0, s=0.5, T=0.5, n_steps=n, grid=grid)
        finals[n] = _quiet(evolve, u0, cfg).snapshots[-1]
    w = grid.mu_weights
    d_coarse = float(np.dot(w, np.abs(finals[250].values - finals[500].values)))
    d_fine = float(np.dot(w, np.abs(finals[500].values - finals[1000].values)))
    assert 1.6 <= d_coarse / d_fine <= 2.4

    # per-step variational residuals at step 1e-3
    traj, run_wall = millistep_run
    y = gaussian_field(traj.config.grid, 1.0, mass=0.5)
    assert np.max(evi_residual(traj, y)) <= 1e-6

    # dual identity at step 1e-4
    dual_grid = RadialGrid(15.0, 1024)
    cfg = SolverConfig(m=2.0, s=0.5, T=0.05, n_steps=500, grid=dual_grid)
    dual_run = _quiet(evolve, gaussian_field(dual_grid, 0.7, mass=1.0), cfg)
    rep = check_weak_dual_identity(dual_run, standard_bump(dual_grid))
    assert rep.passed
    assert rep.observed["violation_residual"] <= 1e-4
    assert (time.perf_counter() - t0) + run_wall < 120.0
