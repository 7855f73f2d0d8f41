"""Levy-Khintchine and Rogers-function representations, and the
completely-monotone-jumps certification battery.

A characteristic exponent with completely monotone jump density admits,
besides the Levy-Khintchine form, two integral representations:

    Psi(xi) = g xi^2 - i beta xi + gamma
              + (1/pi) int ( xi/(xi + i s) + i xi sign(s)/(1 + |s|) ) mu(ds)/|s|

    Psi(xi) = c exp( (1/pi) int ( xi/(xi + i s) - 1/(1 + |s|) ) theta(s)/|s| ds )

with mu a nonnegative measure satisfying int min(|s|^-1, |s|^-3) mu(ds) < inf
and theta taking values in [0, pi].  This module evaluates all three forms
by adaptive quadrature and provides necessary-condition checks (Hermitian
symmetry, nonnegative real part, finite-order complete monotonicity of the
jump density) used to certify exponent tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gamma as _gamma

from .errors import (
    BadParameter,
    IndexOne,
    InsufficientSamples,
    InvalidMeasure,
    QuadratureFailure,
)

__all__ = [
    "LevyTriplet", "MuRepresentation", "ThetaRepresentation", "PropertyReport",
    "ZeroTail", "StableTail", "TableTail",
    "levy_khintchine", "rogers_from_mu", "rogers_from_theta",
    "check_rogers_properties", "complete_monotonicity_check",
    "stable_levy_constants",
]


# ---------------------------------------------------------------------------
# jump-density families (one-sided, on (0, inf))
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroTail:
    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def is_zero(self):
        return True


@dataclass(frozen=True)
class StableTail:
    """C x^{-1-index} on (0, inf)."""

    C: float
    index: float

    def __post_init__(self):
        if not (0.0 < self.index < 2.0):
            raise InvalidMeasure(f"stable-tail index must lie in (0, 2), got {self.index}")
        if self.C < 0:
            raise InvalidMeasure("stable-tail constant must be nonnegative")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.C * x ** (-1.0 - self.index)

    @property
    def is_zero(self):
        return self.C == 0.0


@dataclass(frozen=True)
class TableTail:
    """Linear interpolation of (x_i, nu_i) samples, zero outside the table."""

    xs: tuple
    values: tuple

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.values,
                         left=0.0, right=0.0)

    @property
    def is_zero(self):
        return all(v == 0.0 for v in self.values)


def _density_is_zero(nu):
    return getattr(nu, "is_zero", False)


@dataclass(frozen=True)
class LevyTriplet:
    """(gaussian, drift, kill, jump density) with the two-sided density
    given as functions of |x| for each half-line."""

    gaussian: float = 0.0
    drift: float = 0.0
    kill: float = 0.0
    nu_plus: object = field(default_factory=ZeroTail)   # density of nu(x), x > 0
    nu_minus: object = field(default_factory=ZeroTail)  # density of nu(-x), x > 0

    def __post_init__(self):
        if self.gaussian < 0 or self.kill < 0:
            raise InvalidMeasure("gaussian and kill coefficients must be nonnegative")


@dataclass(frozen=True)
class MuRepresentation:
    gaussian: float = 0.0
    drift: float = 0.0
    kill: float = 0.0
    atoms: tuple = ()          # ((s_i, mass_i), ...), s_i != 0
    density: object = None     # callable mu-density on R \ {0}, or None

    def __post_init__(self):
        if self.gaussian < 0 or self.kill < 0:
            raise InvalidMeasure("gaussian and kill coefficients must be nonnegative")
        for s, m in self.atoms:
            if s == 0:
                raise InvalidMeasure("mu atoms must avoid 0")
            if m < 0:
                raise InvalidMeasure("mu atom masses must be nonnegative")


@dataclass(frozen=True)
class ThetaRepresentation:
    """c exp-representation with piecewise-constant theta.

    theta(s) = values[j] on (breakpoints[j-1], breakpoints[j]); breakpoints
    ascending, len(values) = len(breakpoints) + 1.
    """

    c: float
    breakpoints: tuple = ()
    values: tuple = (0.0,)

    def __post_init__(self):
        if not self.c > 0:
            raise BadParameter("theta representation requires c > 0")
        if len(self.values) != len(self.breakpoints) + 1:
            raise BadParameter("need one theta value per breakpoint gap")
        if any(not (0.0 <= v <= math.pi + 1e-15) for v in self.values):
            raise BadParameter("theta values must lie in [0, pi]")
        if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise BadParameter("theta breakpoints must be strictly ascending")

    def theta(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(np.asarray(self.breakpoints, dtype=float), s, side="right")
        return np.asarray(self.values, dtype=float)[idx]


@dataclass
class PropertyReport:
    hermitian_ok: bool
    nonneg_real_ok: bool
    cm_plus_ok: bool | None
    cm_minus_ok: bool | None
    details: dict

    @property
    def passed(self) -> bool:
        flags = [self.hermitian_ok, self.nonneg_real_ok, self.cm_plus_ok, self.cm_minus_ok]
        return all(f for f in flags if f is not None)

    def serialize(self) -> str:
        lines = ["property_report"]
        for name in ("hermitian_ok", "nonneg_real_ok", "cm_plus_ok", "cm_minus_ok"):
            lines.append(f"  {name} = {getattr(self, name)}")
        for key, val in self.details.items():
            lines.append(f"  {key} = {val}")
        lines.append(f"  passed = {self.passed}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# quadrature helpers
# ---------------------------------------------------------------------------

_QUAD_OPTS = dict(limit=200, epsabs=1e-12, epsrel=1e-10)


def _quad(f, a, b, scale=1.0):
    try:
        val, err = integrate.quad(f, a, b, **_QUAD_OPTS)
    except Exception as exc:
        raise QuadratureFailure(f"quadrature failed on [{a}, {b}]: {exc}") from exc
    if not math.isfinite(val) or err > 1e-6 * (1.0 + abs(val) + scale):
        raise QuadratureFailure(
            f"quadrature error estimate {err:.2e} too large on [{a}, {b}]")
    return val


def _quad_fourier(f, a, omega, kind):
    """int_a^inf f(x) * cos/sin(omega x) dx by Fourier-weighted quadrature."""
    try:
        val, err = integrate.quad(f, a, np.inf, weight=kind, wvar=omega,
                                  epsabs=1e-12, limlst=200, limit=200)
    except Exception as exc:
        raise QuadratureFailure(f"Fourier quadrature failed: {exc}") from exc
    if not math.isfinite(val) or err > 1e-6 * (1.0 + abs(val)):
        raise QuadratureFailure(f"Fourier quadrature error estimate {err:.2e} too large")
    return val


def _z_minus_sin(z):
    """z - sin z, accurate for small z."""
    if abs(z) < 1e-4:
        z2 = z * z
        return z * z2 / 6.0 * (1.0 - z2 / 20.0)
    return z - math.sin(z)


# ---------------------------------------------------------------------------
# representation evaluators
# ---------------------------------------------------------------------------

def levy_khintchine(t: LevyTriplet, xi: float) -> complex:
    """Psi(xi) = g xi^2 - i b xi + k + int (1 - e^{i xi x} + i xi (1 - e^{-|x|}) sign x) nu."""
    xi = float(xi)
    total = t.gaussian * xi * xi - 1j * t.drift * xi + t.kill

    for side, nu in ((1.0, t.nu_plus), (-1.0, t.nu_minus)):
        if _density_is_zero(nu):
            continue

        def re_part(x, nu=nu):
            # 1 - cos(xi x) in cancellation-safe form
            s = math.sin(0.5 * xi * x)
            return 2.0 * s * s * float(nu(x))

        def im_small(x, side=side, nu=nu):
            # xi x - sin(xi x) plus xi ((1 - e^{-x}) - x), both O(x^2) or better
            core = _z_minus_sin(xi * x) + xi * (-math.expm1(-x) - x)
            return side * core * float(nu(x))

        def plain(x, nu=nu):
            return float(nu(x))

        def damped(x, nu=nu):
            return -math.expm1(-x) * float(nu(x))

        # tail pieces: 1 - cos and -sin handled by Fourier-weighted quadrature
        re = _quad(re_part, 0.0, 1.0) + _quad(plain, 1.0, np.inf) \
            - _quad_fourier(plain, 1.0, xi, "cos")
        im = _quad(im_small, 0.0, 1.0) \
            + side * (xi * _quad(damped, 1.0, np.inf) - _quad_fourier(plain, 1.0, xi, "sin"))
        total += re + 1j * im
    return complex(total)


def _mu_integrand(s, xi):
    # ( xi/(xi + i s) + i xi sign s/(1 + |s|) ) / |s|
    val = xi / (xi + 1j * s) + 1j * xi * math.copysign(1.0, s) / (1.0 + abs(s))
    return val / abs(s)


def rogers_from_mu(m: MuRepresentation, xi: float) -> complex:
    if xi == 0:
        raise BadParameter("rogers_from_mu requires xi != 0")
    xi = float(xi)
    total = m.gaussian * xi * xi - 1j * m.drift * xi + m.kill
    for s, mass in m.atoms:
        total += mass / math.pi * _mu_integrand(s, xi)
    if m.density is not None:
        dens = m.density
        pts = sorted({abs(xi), 1.0})

        def piece(which):
            def re_f(s):
                x = which * s
                return (_mu_integrand(x, xi) * float(dens(x))).real

            def im_f(s):
                x = which * s
                return (_mu_integrand(x, xi) * float(dens(x))).imag

            segs = [(0.0, pts[0]), (pts[0], pts[-1]), (pts[-1], np.inf)]
            re = sum(_quad(re_f, a, b) for a, b in segs if a != b)
            im = sum(_quad(im_f, a, b) for a, b in segs if a != b)
            return re + 1j * im

        total += (piece(1.0) + piece(-1.0)) / math.pi
    return complex(total)


def rogers_from_theta(r: ThetaRepresentation, xi: float) -> complex:
    if not xi > 0:
        raise BadParameter("rogers_from_theta requires xi > 0")
    xi = float(xi)

    def integrand(s):
        # xi/(xi+is) - 1/(1+|s|) = (xi |s| - i s) / ((xi + i s)(1 + |s|)),
        # a cancellation-free form near s = 0
        num = xi * abs(s) - 1j * s
        val = num / ((xi + 1j * s) * (1.0 + abs(s)))
        return val * float(r.theta(s)) / abs(s)

    pts = sorted({xi, 1.0})
    segs = [(0.0, pts[0]), (pts[0], pts[-1]), (pts[-1], np.inf)]
    acc = 0.0 + 0.0j
    for sgn in (1.0, -1.0):
        for a, b in segs:
            if a == b:
                continue
            acc += _quad(lambda s: integrand(sgn * s).real, a, b)
            acc += 1j * _quad(lambda s: integrand(sgn * s).imag, a, b)
    return complex(r.c * np.exp(acc / math.pi))


# ---------------------------------------------------------------------------
# certification battery
# ---------------------------------------------------------------------------

def complete_monotonicity_check(xs, fs, order: int = 8, tol: float = 1e-9):
    """Necessary-condition test: divided differences of orders 0..order
    alternate in sign on the (geometric) grid.

    Returns (ok, first_violation) with first_violation = (order, x) or None.
    """
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    if xs.size < order + 1:
        raise InsufficientSamples(
            f"need at least {order + 1} samples for order {order}, got {xs.size}")
    if np.any(xs <= 0):
        raise InsufficientSamples("grid points must be positive")
    table = fs.copy()
    # worst-case magnitude bound per entry, propagated through the same
    # recursion: sets the local roundoff floor for the sign test
    local = np.abs(fs) + 1e-300
    pts = xs.copy()
    for j in range(order + 1):
        sign = (-1.0) ** j
        bad = np.nonzero(sign * table < -np.maximum(tol, 1e-10) * local)[0]
        if bad.size:
            return False, (j, float(pts[bad[0]]))
        if j < order:
            gaps = xs[j + 1:] - xs[:xs.size - j - 1]
            table = (table[1:] - table[:-1]) / gaps
            local = (local[1:] + local[:-1]) / gaps
            pts = pts[:-1]
    return True, None


def check_rogers_properties(samples, levy_density=None, tol: float = 1e-8,
                            table_pairs=None) -> PropertyReport:
    """Real-axis necessary conditions for a characteristic exponent with
    completely monotone jumps.

    `samples` is a list of objects with fields (xi, psi), xi > 0 ascending;
    psi(-xi) is defined by conjugation.  `levy_density` is an optional pair
    (nu_plus, nu_minus) of densities on (0, inf); when given, both are put
    through the finite-order complete-monotonicity battery.
    `table_pairs` optionally supplies explicit (psi(xi), psi(-xi)) pairs
    whose Hermitian consistency is then actually tested.
    """
    xis = np.array([s.xi for s in samples if s.psi is not None], dtype=float)
    psis = np.array([s.psi for s in samples if s.psi is not None], dtype=complex)
    details = {}

    if table_pairs is not None:
        herm_gap = max((abs(nn - pp.conjugate()) for pp, nn in table_pairs), default=0.0)
        hermitian_ok = bool(herm_gap <= tol * (1.0 + float(np.abs(psis).max(initial=0.0))))
        details["hermitian_max_gap"] = herm_gap
    else:
        hermitian_ok = True
        details["hermitian"] = "by conjugate extension (definitional)"

    scale = 1.0 + np.abs(psis)
    re_viol = (-psis.real) / scale
    worst = int(np.argmax(re_viol)) if re_viol.size else 0
    nonneg_real_ok = bool(re_viol.size == 0 or re_viol[worst] <= tol)
    details["re_psi_min"] = float(psis.real.min()) if re_viol.size else 0.0
    details["re_psi_worst_xi"] = float(xis[worst]) if re_viol.size else None

    # real-axis trace of the Nevanlinna-Pick condition on psi(xi)/xi
    ratio = psis / xis if xis.size else np.array([])
    ratio_ok = bool(ratio.size == 0 or np.all(ratio.real >= -tol * scale))
    details["re_psi_over_xi_min"] = float(ratio.real.min()) if ratio.size else 0.0
    if ratio.size and np.all(np.abs(ratio.real) <= tol * scale) and np.any(np.abs(psis) > tol):
        details["nevanlinna_trace"] = "inconclusive without nu (vanishing real part)"
    nonneg_real_ok = nonneg_real_ok and ratio_ok

    cm_plus_ok = cm_minus_ok = None
    if levy_density is not None:
        nu_plus, nu_minus = levy_density
        grid = np.geomspace(1e-2, 1e2, 64)
        for label, nu in (("plus", nu_plus), ("minus", nu_minus)):
            if nu is None or _density_is_zero(nu):
                details[f"cm_{label}"] = "zero density (vacuous)"
                ok = True
                violation = None
            else:
                vals = np.asarray(nu(grid), dtype=float)
                ok, violation = complete_monotonicity_check(grid, vals, order=8)
                details[f"cm_{label}_violation"] = violation
            if label == "plus":
                cm_plus_ok = ok
            else:
                cm_minus_ok = ok

    return PropertyReport(hermitian_ok=hermitian_ok, nonneg_real_ok=nonneg_real_ok,
                          cm_plus_ok=cm_plus_ok, cm_minus_ok=cm_minus_ok,
                          details=details)


def stable_levy_constants(index: float, p: float, q: float):
    """Two-sided Levy-measure constants (C_plus, C_minus) of the stable trace
    with density coefficient p^2 and shear coefficient q.

    nu(dx) = (C_plus 1_{x>0} + C_minus 1_{x<0}) |x|^{-1-index} dx.
    """
    a = float(index)
    if not (0.0 < a < 2.0):
        raise BadParameter(f"stable index must lie in (0, 2), got {a}")
    if a == 1.0:
        raise IndexOne("index 1 is the Cauchy-with-drift case: nu(x) = (p/pi)|x|^-2, drift q")
    if p < 0:
        raise BadParameter("p must be nonnegative")
    if p == 0 and q == 0:
        raise BadParameter("p and q must not both vanish")

    if p > 0:
        z = (1.0 - a) * (p - 1j * q) / (2.0 * p)
        AB = (-_gamma(-a) * _gamma(a + z)) / (_gamma(a) * _gamma(z)) * (2.0 * a * p) ** a
    else:
        phase = np.exp(-1j * (math.pi * a / 2.0) * math.copysign(1.0, q * (1.0 - a)))
        AB = (-_gamma(-a)) / _gamma(a) * phase * abs(q * a * (1.0 - a)) ** a
    A, B = AB.real, AB.imag
    cos_t = 2.0 * math.cos(a * math.pi / 2.0)
    sin_t = 2.0 * math.sin(a * math.pi / 2.0)
    c_plus = abs(A / cos_t - B / sin_t)
    c_minus = abs(A / cos_t + B / sin_t)
    return c_plus, c_minus
