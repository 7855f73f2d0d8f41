"""Exponent solver: closed-form oracles, symmetric identity, convergence."""

import math

import numpy as np
import pytest

from stringtrace import (
    InvalidString,
    NotSymmetric,
    SolverOptions,
    StringSpec,
    exponent,
    exponent_grid,
    krein_laplace_exponent,
    solve_phi,
)
from stringtrace.strings import (
    ConstantDensity,
    ConstantDrift,
    PowerDensity,
    RationalPowerDensity,
    SineDrift,
    ZeroDensity,
    ZeroDrift,
)
from stringtrace.gallery import make

XIS = np.geomspace(0.1, 10.0, 13)


def _psi(spec, xi, opts=None):
    return exponent(spec, xi, opts).psi


def _relerr(got, want):
    return abs(got - want) / (1.0 + abs(want))


# ---------------------------------------------------------------------------
# closed-form oracles (hand-solvable linear ODEs)
# ---------------------------------------------------------------------------

def test_cauchy_exponent():
    spec = StringSpec(R=math.inf, density=ConstantDensity(1.0))
    for xi in XIS:
        assert _relerr(_psi(spec, xi), 0.5 * xi) < 1e-6


def test_empty_finite_string_pure_killing():
    for R in (0.5, 1.0, 4.0):
        spec = StringSpec(R=R)
        for xi in (0.1, 1.0, 10.0):
            assert _relerr(_psi(spec, xi), 1.0 / (2.0 * R)) < 1e-6


def test_finite_string_with_unit_density_coth():
    R = 1.0
    spec = StringSpec(R=R, density=ConstantDensity(1.0))
    for xi in XIS:
        want = 0.5 * xi / math.tanh(xi * R)
        assert _relerr(_psi(spec, xi), want) < 1e-6


def test_one_atom_exponent():
    m, y0 = 1.0, 1.0
    spec = StringSpec(R=math.inf, atoms=((y0, m),))
    for xi in XIS:
        want = 0.5 * xi * xi * m / (1.0 + xi * xi * m * y0)
        assert _relerr(_psi(spec, xi), want) < 1e-6
    assert _psi(spec, 1.0) == pytest.approx(0.25, rel=1e-8)


def test_pure_shear_exponent():
    q = 2.0
    spec = StringSpec(R=math.inf, b=ConstantDrift(-q))
    for xi in XIS:
        assert _relerr(_psi(spec, xi), -0.5j * q * xi) < 1e-6


def test_quasi_relativistic_closed_form():
    m = 1.0
    spec = StringSpec(R=math.inf, density=RationalPowerDensity(1.0, m, -2.0))
    for xi in XIS:
        want = 0.5 * (math.sqrt(xi * xi + m * m) - m)
        assert _relerr(_psi(spec, xi), want) < 1e-6


def test_atom_at_zero_adds_quadratic_term():
    base = StringSpec(R=math.inf, density=ConstantDensity(1.0))
    shifted = StringSpec(R=math.inf, atoms=((0.0, 0.7),),
                         density=ConstantDensity(1.0))
    for xi in (0.5, 2.0):
        assert _psi(shifted, xi) == pytest.approx(
            _psi(base, xi) + 0.5 * 0.7 * xi * xi, rel=1e-9)


# ---------------------------------------------------------------------------
# symmetric (Laplace) identity
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name,params", [
    ("cauchy", {}),
    ("symmetric_stable", {"index": 0.8}),
    ("symmetric_stable", {"index": 1.5}),
    ("relativistic", {"m": 1.0}),
])
def test_symmetric_identity(name, params):
    spec = make(name, **params).spec
    for xi in (0.3, 1.0, 3.0):
        psi = _psi(spec, xi)
        psi_k = krein_laplace_exponent(spec, xi * xi)
        assert psi.imag == 0.0
        assert abs(psi.real - 0.5 * psi_k) <= 1e-8 * (1.0 + abs(psi_k))


def test_krein_requires_symmetry():
    spec = StringSpec(R=math.inf, b=ConstantDrift(1.0))
    with pytest.raises(NotSymmetric):
        krein_laplace_exponent(spec, 1.0)


def test_positive_xi_required():
    spec = StringSpec(R=math.inf, density=ConstantDensity(1.0))
    for bad in (0.0, -1.0):
        with pytest.raises(InvalidString):
            exponent(spec, bad)


# ---------------------------------------------------------------------------
# homogeneity
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("index", [0.5, 1.2, 1.5])
def test_stable_homogeneity_slope(index):
    spec = make("symmetric_stable", index=index).spec
    xs = np.geomspace(0.1, 10.0, 9)
    ps = np.array([_psi(spec, x).real for x in xs])
    slope = np.polyfit(np.log(xs), np.log(ps), 1)[0]
    assert abs(slope - index) < 1e-3


def test_nonsymmetric_stable_homogeneity():
    spec = make("stable", index=1.5, p=1.0, q=1.0).spec
    c = 2.0
    for xi in (0.4, 1.0):
        assert _psi(spec, c * xi) == pytest.approx(
            c ** 1.5 * _psi(spec, xi), rel=1e-4)


# ---------------------------------------------------------------------------
# solution invariants and convergence
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["cauchy", "one_atom", "stable", "sine",
                                  "meromorphic", "relativistic_alt"])
def test_phi_solution_invariants(name):
    spec = make(name).spec
    sol = solve_phi(spec, 1.3)
    mod = np.abs(sol.phi)
    assert mod[0] == pytest.approx(1.0)
    assert np.all(mod <= 1.0 + 1e-9)
    # |phi| decreasing toward the far end of the string
    assert np.all(np.diff(mod) <= 1e-9)
    if not make(name).spec.atoms:
        # defect diagnostic is a trapezoid residual; atom jumps inflate it
        assert sol.residual < 1e-4


@pytest.mark.parametrize("name", ["trivial", "cauchy", "relativistic",
                                  "relativistic_alt", "symmetric_stable",
                                  "stable", "one_atom", "meromorphic",
                                  "sine", "cosine"])
def test_exponent_is_rogers_like_on_grid(name):
    spec = make(name).spec
    for s in exponent_grid(spec, (0.5, 1.0, 2.0)):
        assert s.error is None
        assert s.psi.real >= -1e-8 * (1.0 + abs(s.psi))
        if spec.b.is_zero:
            assert s.psi.imag == pytest.approx(0.0, abs=1e-10)


def test_refinement_order_at_least_two():
    spec = StringSpec(R=math.inf, density=ConstantDensity(1.0),
                      b=SineDrift(-0.5))
    xi = 1.0
    coarse = SolverOptions(h0=1e-4, grade_ratio=1.2, far_frac=0.2,
                           osc_frac=0.4, rtol=1e-12)
    fine = coarse.refined(2.0)
    finest = coarse.refined(4.0)
    p0 = _psi(spec, xi, coarse)
    p1 = _psi(spec, xi, fine)
    p2 = _psi(spec, xi, finest)
    e0 = abs(p0 - p2)
    e1 = abs(p1 - p2)
    # one refinement level must cut the error by at least 4 (order >= 2)
    assert e1 < e0 / 4.0


def test_exponent_grid_isolates_failures():
    spec = StringSpec(R=math.inf, density=ConstantDensity(1.0))
    out = exponent_grid(spec, (1.0, -1.0, 2.0))
    assert out[0].error is None and out[2].error is None
    assert out[1].error is not None and out[1].psi is None
