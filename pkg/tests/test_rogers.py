"""Exponent representations and the complete-monotonicity battery."""

import math

import numpy as np
import pytest

from stringtrace import (
    BadParameter,
    IndexOne,
    InsufficientSamples,
    LevyTriplet,
    MuRepresentation,
    StableTail,
    StringSpec,
    TableTail,
    ThetaRepresentation,
    ZeroTail,
    check_rogers_properties,
    complete_monotonicity_check,
    exponent,
    levy_khintchine,
    rogers_from_mu,
    rogers_from_theta,
    stable_levy_constants,
)
from stringtrace.errors import InvalidMeasure
from stringtrace.ode import ExponentSample
from stringtrace.strings import ConstantDensity


# ---------------------------------------------------------------------------
# Levy-Khintchine evaluator
# ---------------------------------------------------------------------------

def test_pure_gaussian():
    t = LevyTriplet(gaussian=1.0)
    assert levy_khintchine(t, 3.0) == pytest.approx(9.0)


def test_pure_drift():
    t = LevyTriplet(drift=2.0)
    assert levy_khintchine(t, 5.0) == pytest.approx(-10.0j)


def test_cauchy_density_both_sides():
    nu = StableTail(1.0 / math.pi, 1.0)
    t = LevyTriplet(nu_plus=nu, nu_minus=nu)
    for xi in (2.0, -2.0):
        got = levy_khintchine(t, xi)
        assert got.real == pytest.approx(2.0, rel=1e-8)
        assert got.imag == pytest.approx(0.0, abs=1e-8)


def test_hermitian_and_nonnegative_real_random():
    rng = np.random.default_rng(7)
    for _ in range(5):
        t = LevyTriplet(gaussian=rng.uniform(0, 2), drift=rng.uniform(-2, 2),
                        kill=rng.uniform(0, 1),
                        nu_plus=StableTail(rng.uniform(0.1, 2), rng.uniform(0.3, 1.8)),
                        nu_minus=StableTail(rng.uniform(0.1, 2), rng.uniform(0.3, 1.8)))
        for xi in (0.3, 1.7, 6.0):
            a = levy_khintchine(t, xi)
            b = levy_khintchine(t, -xi)
            assert b == pytest.approx(a.conjugate(), rel=1e-8, abs=1e-10)
            assert a.real >= -1e-10 * (1.0 + abs(a))


def test_levy_khintchine_matches_ode_for_cauchy():
    nu = StableTail(1.0 / (2.0 * math.pi), 1.0)
    t = LevyTriplet(nu_plus=nu, nu_minus=nu)
    spec = StringSpec(R=math.inf, density=ConstantDensity(1.0))
    for xi in (0.5, 1.0, 4.0):
        assert levy_khintchine(t, xi) == pytest.approx(
            exponent(spec, xi).psi, rel=1e-7, abs=1e-9)


def test_invalid_triplet_rejected():
    with pytest.raises(InvalidMeasure):
        LevyTriplet(gaussian=-1.0)
    with pytest.raises(InvalidMeasure):
        StableTail(1.0, 2.5)


# ---------------------------------------------------------------------------
# mu representation
# ---------------------------------------------------------------------------

def test_mu_empty_measure():
    m = MuRepresentation(gaussian=0.7, drift=1.5, kill=0.2)
    xi = 2.0
    assert rogers_from_mu(m, xi) == pytest.approx(
        0.7 * xi * xi - 1.5j * xi + 0.2)


def test_mu_abs_density_is_cauchy():
    m = MuRepresentation(density=lambda s: abs(s))
    assert rogers_from_mu(m, 3.0) == pytest.approx(3.0, rel=1e-8)
    assert rogers_from_mu(m, -3.0) == pytest.approx(3.0, rel=1e-8)


def test_mu_hermitian_random():
    rng = np.random.default_rng(11)
    m = MuRepresentation(drift=0.4, atoms=((1.0, 0.5), (-2.0, 0.3)),
                         density=lambda s: abs(s) * math.exp(-abs(s)))
    for xi in rng.uniform(0.2, 5.0, 4):
        a = rogers_from_mu(m, xi)
        b = rogers_from_mu(m, -xi)
        assert b == pytest.approx(a.conjugate(), rel=1e-9)
    with pytest.raises(BadParameter):
        rogers_from_mu(m, 0.0)


def test_mu_atoms_validated():
    with pytest.raises(InvalidMeasure):
        MuRepresentation(atoms=((0.0, 1.0),))
    with pytest.raises(InvalidMeasure):
        MuRepresentation(atoms=((1.0, -1.0),))


# ---------------------------------------------------------------------------
# theta representation
# ---------------------------------------------------------------------------

def test_theta_zero_is_pure_killing():
    r = ThetaRepresentation(c=7.0)
    for xi in (0.3, 1.0, 9.0):
        assert rogers_from_theta(r, xi) == pytest.approx(7.0)


@pytest.mark.parametrize("alpha", [0.4, 1.0, 1.3])
def test_theta_constant_gives_homogeneity(alpha):
    r = ThetaRepresentation(c=1.0, values=(math.pi * alpha / 2.0,))
    base = rogers_from_theta(r, 1.0)
    for lam in (2.0, 5.0):
        assert rogers_from_theta(r, lam) == pytest.approx(
            lam ** alpha * base, rel=1e-7)


def test_theta_alpha_one_linear():
    r = ThetaRepresentation(c=1.0, values=(math.pi / 2.0,))
    c = 1.0 / abs(rogers_from_theta(r, 1.0))
    r2 = ThetaRepresentation(c=c, values=(math.pi / 2.0,))
    assert abs(rogers_from_theta(r2, 2.0)) == pytest.approx(2.0, rel=1e-7)


def test_theta_validation():
    with pytest.raises(BadParameter):
        ThetaRepresentation(c=0.0)
    with pytest.raises(BadParameter):
        ThetaRepresentation(c=1.0, values=(4.0,))
    with pytest.raises(BadParameter):
        ThetaRepresentation(c=1.0, breakpoints=(1.0,), values=(0.1,))
    with pytest.raises(BadParameter):
        rogers_from_theta(ThetaRepresentation(c=1.0), -1.0)


# ---------------------------------------------------------------------------
# complete monotonicity battery
# ---------------------------------------------------------------------------

GRID = np.geomspace(1e-2, 1e2, 64)


def test_cm_accepts_canonical_functions():
    ok, viol = complete_monotonicity_check(GRID, np.exp(-GRID), order=6)
    assert ok and viol is None
    ok, viol = complete_monotonicity_check(GRID, 1.0 / (1.0 + GRID), order=8)
    assert ok and viol is None
    ok, _ = complete_monotonicity_check(GRID, GRID ** -1.5, order=8)
    assert ok


def test_cm_rejects_oscillation():
    xs = np.linspace(0.1, 20.0, 40)
    ok, viol = complete_monotonicity_check(xs, np.sin(xs), order=2)
    assert not ok and viol is not None
    order, where = viol
    assert 0 <= order <= 2 and 0.1 <= where <= 20.0


def test_cm_rejects_planted_cosine_ripples():
    nu = GRID ** -2.5
    ok, _ = complete_monotonicity_check(GRID, nu * (1.0 + 0.01 * np.cos(2.0 * GRID)))
    assert not ok
    ok, _ = complete_monotonicity_check(GRID, nu + 0.01 * np.exp(-GRID) * np.cos(3.0 * GRID))
    assert not ok


def test_cm_requires_enough_positive_samples():
    with pytest.raises(InsufficientSamples):
        complete_monotonicity_check([1.0, 2.0], [1.0, 0.5], order=8)
    with pytest.raises(InsufficientSamples):
        complete_monotonicity_check([-1.0, 1.0, 2.0], [1, 1, 1], order=2)


# ---------------------------------------------------------------------------
# property report
# ---------------------------------------------------------------------------

def _samples(f, xis=np.geomspace(0.1, 10.0, 24)):
    return [ExponentSample(xi=float(x), psi=complex(f(x))) for x in xis]


def test_report_brownian_passes():
    rep = check_rogers_properties(_samples(lambda x: x * x))
    assert rep.hermitian_ok and rep.nonneg_real_ok
    assert rep.passed


def test_report_negative_real_fails():
    rep = check_rogers_properties(_samples(lambda x: -x))
    assert not rep.nonneg_real_ok
    assert not rep.passed


def test_report_inconclusive_without_nu():
    rep = check_rogers_properties(_samples(lambda x: 1j * x * x))
    assert rep.cm_plus_ok is None and rep.cm_minus_ok is None
    assert any("inconclusive without nu" in str(v) for v in rep.details.values())


def test_report_with_density_runs_cm():
    rep = check_rogers_properties(
        _samples(lambda x: x),
        levy_density=(lambda x: x ** -2.0 / (2 * math.pi),
                      lambda x: x ** -2.0 / (2 * math.pi)))
    assert rep.cm_plus_ok and rep.cm_minus_ok and rep.passed
    bad = check_rogers_properties(
        _samples(lambda x: x),
        levy_density=(lambda x: x ** -2.0 * (1 + 0.01 * np.cos(2 * x)),
                      lambda x: x ** -2.0))
    assert bad.cm_plus_ok is False and not bad.passed


def test_report_serializes():
    text = check_rogers_properties(_samples(lambda x: x)).serialize()
    assert "property_report" in text and "passed = True" in text


# ---------------------------------------------------------------------------
# stable constants
# ---------------------------------------------------------------------------

def test_stable_constants_symmetric_when_q_zero():
    for a in (0.5, 1.2, 1.5):
        cp, cm = stable_levy_constants(a, 1.0, 0.0)
        assert cp == pytest.approx(cm, rel=1e-12)
        assert cp > 0


def test_stable_constants_subordinator():
    cp, cm = stable_levy_constants(0.5, 0.0, 1.0)
    assert cm == pytest.approx(0.0, abs=1e-12)
    assert cp > 0


def test_stable_constants_one_sided_high_index():
    cp, cm = stable_levy_constants(1.5, 0.0, 1.0)
    # no negative jumps: the spectrally positive side survives
    assert cp == pytest.approx(0.0, abs=1e-12)
    assert cm > 0


def test_stable_constants_domain():
    with pytest.raises(IndexOne):
        stable_levy_constants(1.0, 1.0, 1.0)
    with pytest.raises(BadParameter):
        stable_levy_constants(2.5, 1.0, 0.0)
    with pytest.raises(BadParameter):
        stable_levy_constants(0.5, 0.0, 0.0)
    with pytest.raises(BadParameter):
        stable_levy_constants(0.5, -1.0, 0.0)


def test_stable_constants_ratio_matches_ode_imbalance():
    """The C+/C- ratio must match the jump asymmetry of the solved exponent:
    fit the two tail constants of the Levy-Khintchine form to psi_ODE."""
    from stringtrace.gallery import make
    a, p, q = 1.5, 1.0, 1.0
    spec = make("stable", index=a, p=p, q=q).spec
    xis = np.geomspace(0.3, 3.0, 7)
    targets = np.array([exponent(spec, x).psi for x in xis])

    def model(params):
        cp, cm, drift = params
        t = LevyTriplet(drift=drift, nu_plus=StableTail(max(cp, 0), a),
                        nu_minus=StableTail(max(cm, 0), a))
        return np.array([levy_khintchine(t, x) for x in xis])

    from scipy.optimize import least_squares
    def resid(params):
        d = model(params) - targets
        return np.concatenate([d.real, d.imag])

    fit = least_squares(resid, x0=[0.1, 0.5, 0.0], xtol=1e-12, ftol=1e-12)
    cp_fit, cm_fit, _ = fit.x
    cp_ref, cm_ref = stable_levy_constants(a, p, q)
    assert cp_fit / cm_fit == pytest.approx(cp_ref / cm_ref, rel=1e-3)
    # absolute normalization: formula constants are 2|Gamma(-a)| times the
    # density constants of this package's clock convention
    scale = 2.0 * abs(math.gamma(-a))
    assert cp_fit == pytest.approx(cp_ref / scale, rel=1e-3)
    assert cm_fit == pytest.approx(cm_ref / scale, rel=1e-3)


# ---------------------------------------------------------------------------
# subordinate-Brownian structure of symmetric strings
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["cauchy", "symmetric_stable", "relativistic_alt"])
def test_symmetric_exponent_is_complete_bernstein_like(name):
    from stringtrace.gallery import make
    spec = make(name).spec
    ss = np.geomspace(0.05, 50.0, 40)
    vals = np.array([exponent(spec, math.sqrt(s)).psi.real for s in ss])
    assert np.all(vals >= 0)
    assert np.all(np.diff(vals) >= 0)          # nondecreasing
    # derivative is CM: check divided-difference alternation of dpsi/ds
    mids = 0.5 * (ss[1:] + ss[:-1])
    deriv = np.diff(vals) / np.diff(ss)
    ok, _ = complete_monotonicity_check(mids, deriv, order=4, tol=1e-6)
    assert ok


def test_table_tail_zero_flags():
    assert ZeroTail().is_zero
    assert TableTail((1.0, 2.0), (0.0, 0.0)).is_zero
    assert not TableTail((1.0, 2.0), (0.0, 1.0)).is_zero
