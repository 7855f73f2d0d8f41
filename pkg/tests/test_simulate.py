"""Path engine: regulator identities, traces, excursions, determinism."""

import math

import numpy as np
import pytest

from stringtrace import (
    BadParameter,
    InsufficientLocalTime,
    SimConfig,
    StringSpec,
    empirical_cf,
    empirical_levy_measure,
    excursion_decompose,
    local_time_profile,
    run_ensemble,
    sample_path,
    trace,
)
from stringtrace.strings import ConstantDensity, ConstantDrift

CFG = SimConfig(dt=1e-3, horizon=5.0, n_paths=4, seed=42)


def test_config_validation():
    with pytest.raises(BadParameter):
        SimConfig(dt=0.0)
    with pytest.raises(BadParameter):
        SimConfig(n_paths=0)
    with pytest.raises(BadParameter):
        SimConfig(dt=1e-2, eps=1e-3)  # eps below sqrt(dt)
    assert SimConfig(dt=1e-4).eps == pytest.approx(4e-2)


def test_zero_string_has_zero_horizontal_part():
    path = sample_path(StringSpec(R=math.inf), CFG)
    assert np.all(path.X == 0.0)
    assert np.all(path.A == 0.0)
    assert np.all(path.B == 0.0)


def test_pure_shear_is_exact():
    q = 2.0
    path = sample_path(StringSpec(R=math.inf, b=ConstantDrift(-q)), CFG)
    assert np.allclose(path.X, -q * path.Ydot, atol=1e-12)
    # at boundary visits Ydot = -rho, so X = q rho = (q/2) L0 there; the trace
    # lands on the first grid point past u, an O(sqrt(dt)) overshoot
    ts = trace(path, np.linspace(0.0, path.L0[-1] * 0.9, 8))
    gap = ts.Z[ts.alive] - 0.5 * q * ts.u[ts.alive]
    assert np.all(gap >= -1e-12)
    assert np.all(gap <= q * 5.0 * math.sqrt(path.dt))


def test_skorokhod_regulator_identities():
    path = sample_path(StringSpec(R=math.inf, density=ConstantDensity(1.0)), CFG)
    Y, rho = path.Y, path.rho
    assert np.all(Y >= 0.0)
    drho = np.diff(rho, prepend=0.0)
    assert np.all(drho >= 0.0)
    # complementarity: the regulator only moves when Y sits at the boundary
    assert np.all(Y[drho > 0.0] == 0.0)
    assert np.allclose(path.L0, 2.0 * rho)
    # the clock of the Cauchy string is total elapsed time
    assert np.allclose(path.A, path.t)


def test_trace_generalized_inverse():
    path = sample_path(StringSpec(R=math.inf), CFG)
    u = np.array([0.0, 0.3, 0.6, 2.0 * path.rho[-1] + 1.0])
    ts = trace(path, u)
    assert ts.Z[0] == 0.0 and ts.alive[0]
    # L0 at the hitting index reaches the requested level
    for uj, ok in zip(ts.u, ts.alive):
        if ok and uj > 0:
            k = int(np.searchsorted(path.rho, 0.5 * uj, side="left"))
            assert path.L0[k] >= uj
    assert not ts.alive[-1] and ts.horizon_short[-1]
    with pytest.raises(BadParameter):
        trace(path, [0.5, 0.1])


def test_killing_at_finite_horizon():
    cfg = SimConfig(dt=1e-3, horizon=50.0, n_paths=1, seed=1)
    path = sample_path(StringSpec(R=1.0), cfg)
    assert path.killed
    assert path.T_R_index == path.Ydot.size - 1
    assert path.Y[path.T_R_index] >= 1.0
    assert np.all(path.Y[:path.T_R_index] < 1.0)
    assert not path.alive[-1]
    # horizon-short is false for a killed path: it is dead, not unresolved
    ts = trace(path, [path.L0[-1] + 1.0])
    assert not ts.alive[0] and not ts.horizon_short[0]


def test_stop_at_local_time_level():
    cfg = SimConfig(dt=1e-3, horizon=100.0, n_paths=1, seed=5,
                    stop_local_time=1.0)
    path = sample_path(StringSpec(R=math.inf), cfg)
    assert path.L0[-1] >= 1.0
    assert path.L0[-2] < 1.0


def test_determinism_bit_identical():
    spec = StringSpec(R=math.inf, density=ConstantDensity(1.0),
                      b=ConstantDrift(0.5))
    a = sample_path(spec, CFG, path_index=3)
    b = sample_path(spec, CFG, path_index=3)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.Ydot, b.Ydot)
    c = sample_path(spec, CFG, path_index=4)
    assert not np.array_equal(a.Ydot, c.Ydot)


def test_excursion_partition_and_order():
    path = sample_path(StringSpec(R=math.inf), CFG)
    recs = excursion_decompose(path)
    assert recs, "a 5-second path must contain excursions"
    us = [r.u for r in recs]
    assert us == sorted(us)
    assert all(r.duration > 0 for r in recs)
    assert all(math.isfinite(r.dX) for r in recs)
    # recorded durations cannot exceed the elapsed time
    assert sum(r.duration for r in recs) <= path.t[-1] + path.dt
    # every recorded excursion respects the discretization floor unless it is
    # the final (possibly truncated) one
    floor = SimConfig(dt=path.dt).min_excursion_steps * path.dt
    assert all(r.duration >= floor for r in recs[:-1])


def test_excursion_heights_bounded_by_path_max():
    path = sample_path(StringSpec(R=math.inf), CFG)
    top = path.Y.max()
    for r in excursion_decompose(path):
        assert 0.0 < r.max_height <= top


def test_run_ensemble_collects_everything():
    spec = StringSpec(R=1.0, density=ConstantDensity(1.0))
    cfg = SimConfig(dt=1e-3, horizon=50.0, n_paths=8, seed=2)
    res = run_ensemble(spec, cfg, u_grid=np.array([0.0, 0.5]),
                       collect_excursions=True, y_levels=(0.0, 0.5))
    assert len(res.traces) == 8
    assert res.U == pytest.approx(res.L0_final.sum())
    assert res.level_occupation.shape == (8, 2)
    assert res.excursions.u.size > 0
    assert np.all(np.isnan(res.T_R) == ~res.killed)
    # the final excursion of a killed path is recorded as incomplete
    assert (~res.excursions.completed).sum() >= res.killed.sum() * 0 + 1


def test_empirical_cf_deterministic_drift():
    q, u, xi = 2.0, 1.0, 1.0
    spec = StringSpec(R=math.inf, b=ConstantDrift(-q))
    cfg = SimConfig(dt=1e-3, horizon=20.0, n_paths=50, seed=9)
    res = run_ensemble(spec, cfg, u_grid=np.array([u]))
    mean, se = empirical_cf(res.traces, xi, u)
    # every resolved path contributes the same phase up to O(sqrt(dt));
    # unresolved (horizon-short) paths contribute 0 and shrink the modulus
    n_alive = sum(t.alive[0] for t in res.traces)
    assert abs(mean) == pytest.approx(n_alive / len(res.traces), abs=0.01)
    assert mean / abs(mean) == pytest.approx(
        np.exp(1j * xi * 0.5 * q * u), abs=0.05)
    with pytest.raises(BadParameter):
        empirical_cf(res.traces, xi, 0.123)


def test_levy_histogram_contract():
    spec = StringSpec(R=math.inf, atoms=((1.0, 1.0),))
    cfg = SimConfig(dt=1e-3, horizon=50.0, n_paths=10, seed=4)
    res = run_ensemble(spec, cfg, collect_excursions=True)
    edges = np.array([-2.0, -0.5, -0.004, 0.004, 0.5, 2.0])
    hist = empirical_levy_measure(res.excursions, edges, res.U,
                                  min_jump=cfg.min_jump)
    assert hist.counts.sum() <= res.excursions.completed.sum()
    assert np.all(hist.nu >= 0) and np.all(hist.stderr >= 0)
    assert hist.excluded[2] and not hist.excluded[0]
    with pytest.raises(InsufficientLocalTime):
        empirical_levy_measure(res.excursions, edges, 0.1, min_jump=0.01)
    with pytest.raises(BadParameter):
        empirical_levy_measure(res.excursions, [1.0, 0.5], res.U, min_jump=0.01)


def test_clock_two_estimator_agreement():
    """Occupation-density estimate of A(t) agrees with the direct clock."""
    spec = StringSpec(R=math.inf, density=ConstantDensity(1.0))
    cfg = SimConfig(dt=2.5e-5, horizon=1.0, n_paths=1, seed=14)
    path = sample_path(spec, cfg)
    ys = np.linspace(0.0, path.Y.max() * 1.05, 400)
    prof = local_time_profile(path, ys, eps=cfg.eps)
    indirect = np.trapezoid(prof * np.asarray(spec.density.value(ys)), ys)
    direct = path.A[-1]
    assert indirect == pytest.approx(direct, rel=0.05)


def test_local_time_profile_basic_properties():
    spec = StringSpec(R=math.inf)
    path = sample_path(spec, CFG)
    ys = [0.0, 0.5, 1e6]
    prof = local_time_profile(path, ys, eps=0.1)
    assert np.all(prof >= 0)
    assert prof[2] == 0.0  # unvisited level
