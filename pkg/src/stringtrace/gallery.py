"""Catalogue of example strings with reference exponents.

Every entry is a (R, a, b) string together with whatever is known in closed
form about the trace process it generates: an exact exponent, an asymptotic
law (homogeneity degree, high-frequency limit, Levy-measure tail constants),
or nothing.  All references use this package's local-time normalisation,
under which drift, killing rate and mean local time are half of what the
doubled-clock convention would give.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import BadParameter
from .rogers import stable_levy_constants
from .strings import (
    ConstantDensity,
    ConstantDrift,
    CosineDrift,
    PiecewiseConstantDrift,
    PowerDensity,
    PowerDrift,
    RationalPowerDensity,
    SineDrift,
    StringSpec,
    ZeroDensity,
    ZeroDrift,
)

__all__ = ["GalleryEntry", "ClosedForm", "Asymptotic", "Unavailable",
           "UNAVAILABLE", "GALLERY_NAMES", "make", "reference_exponent",
           "default_entries"]


class Unavailable:
    """Sentinel: no pointwise reference value exists for this entry."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unavailable"


UNAVAILABLE = Unavailable()


@dataclass(frozen=True)
class ClosedForm:
    label: str
    fn: Callable[[float], complex]
    note: str = ""


@dataclass(frozen=True)
class Asymptotic:
    """Non-pointwise reference laws: exact homogeneity degree, high-xi
    behaviour, and/or power-law tail constants of the Levy measure."""

    homogeneity: float | None = None
    high_xi: str | None = None
    tail_index: float | None = None
    tail_constants: tuple | None = None  # (C_plus, C_minus)
    note: str = ""


@dataclass(frozen=True)
class GalleryEntry:
    name: str
    spec: StringSpec
    reference: object  # ClosedForm | Asymptotic | None
    notes: str = ""


def _power_density(c, exponent):
    if exponent == 0.0:
        return ConstantDensity(c)
    return PowerDensity(c, exponent)


def make(name: str, **params) -> GalleryEntry:
    """Construct a catalogue entry by name.

    Names and parameters: trivial(q, R), cauchy(), relativistic(m),
    relativistic_alt(m), symmetric_stable(index), stable(index, p, q),
    one_atom(m, y0), meromorphic(atoms, b_breakpoints, b_values),
    sine(), cosine().
    """
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise BadParameter(f"unknown gallery name {name!r}; known: {sorted(_BUILDERS)}")
    return builder(**params)


def _trivial(q: float = 2.0, R: float = math.inf) -> GalleryEntry:
    if not R > 0:
        raise BadParameter("R must be positive")
    q = float(q)
    kill = 0.0 if math.isinf(R) else 1.0 / (2.0 * R)
    ref = ClosedForm(
        "shear drift",
        lambda xi, q=q, kill=kill: -0.5j * q * xi + kill,
        note="drift q/2 and killing 1/(2R): half the doubled-clock values q and 1/R",
    )
    return GalleryEntry(
        name="trivial",
        spec=StringSpec(R=R, atoms=(), density=ZeroDensity(), b=ConstantDrift(-q)),
        reference=ref,
        notes="degenerate: the trace is a deterministic drift (killed if R < inf)",
    )


def _cauchy() -> GalleryEntry:
    ref = ClosedForm("cauchy", lambda xi: 0.5 * xi,
                     note="half the standard Cauchy exponent |xi|")
    return GalleryEntry(
        name="cauchy",
        spec=StringSpec(R=math.inf, atoms=(), density=ConstantDensity(1.0), b=ZeroDrift()),
        reference=ref,
        notes="planar Brownian motion traced on the boundary",
    )


def _relativistic(m: float = 1.0) -> GalleryEntry:
    if not m > 0:
        raise BadParameter("m must be positive")
    ref = Asymptotic(high_xi="psi(xi)/(xi/2) -> 1 as xi -> inf",
                     note="no closed form attached: this density does not reproduce "
                          "(sqrt(xi^2+m^2)-m)/2; see relativistic_alt")
    return GalleryEntry(
        name="relativistic",
        spec=StringSpec(R=math.inf, atoms=(),
                        density=RationalPowerDensity(1.0, float(m), -1.0), b=ZeroDrift()),
        reference=ref,
        notes="density (1+2my)^-1",
    )


def _relativistic_alt(m: float = 1.0) -> GalleryEntry:
    if not m > 0:
        raise BadParameter("m must be positive")
    m = float(m)
    ref = ClosedForm(
        "quasi-relativistic",
        lambda xi, m=m: 0.5 * (math.sqrt(xi * xi + m * m) - m),
        note="numerically confirmed closed form for the (1+2my)^-2 string",
    )
    return GalleryEntry(
        name="relativistic_alt",
        spec=StringSpec(R=math.inf, atoms=(),
                        density=RationalPowerDensity(1.0, m, -2.0), b=ZeroDrift()),
        reference=ref,
        notes="density (1+2my)^-2; generator m - sqrt(m^2 - d^2/dx^2) (halved)",
    )


def _symmetric_stable(index: float = 1.5) -> GalleryEntry:
    a = float(index)
    if not (0.0 < a < 2.0):
        raise BadParameter(f"index must lie in (0, 2), got {a}")
    ref = Asymptotic(homogeneity=a, note="psi(c xi) = c^index psi(xi) exactly")
    return GalleryEntry(
        name="symmetric_stable",
        spec=StringSpec(R=math.inf, atoms=(),
                        density=_power_density(1.0, 2.0 / a - 2.0), b=ZeroDrift()),
        reference=ref,
        notes=f"symmetric {a}-stable trace",
    )


def _stable(index: float = 1.5, p: float = 1.0, q: float = 1.0) -> GalleryEntry:
    a = float(index)
    p = float(p)
    q = float(q)
    if not (0.0 < a < 2.0):
        raise BadParameter(f"index must lie in (0, 2), got {a}")
    if p < 0:
        raise BadParameter("p must be nonnegative")
    if p == 0 and q == 0:
        raise BadParameter("p and q must not both vanish")
    density = _power_density(p * p, 2.0 / a - 2.0) if p > 0 else ZeroDensity()
    if q == 0:
        b = ZeroDrift()
    elif a == 1.0:
        b = ConstantDrift(-q)
    else:
        b = PowerDrift(-q, 1.0 / a - 1.0)
    if a == 1.0:
        tail = (p / math.pi, p / math.pi)
        note = "index 1: nu(x) = (p/pi)|x|^-2 with drift q (halved in this convention)"
    else:
        tail = stable_levy_constants(a, p, q)
        note = "tail constants from the two-sided stable formula"
    ref = Asymptotic(homogeneity=a, tail_index=a, tail_constants=tail, note=note)
    return GalleryEntry(
        name="stable",
        spec=StringSpec(R=math.inf, atoms=(), density=density, b=b),
        reference=ref,
        notes=f"{a}-stable trace with p={p}, q={q}",
    )


def _one_atom(m: float = 1.0, y0: float = 1.0) -> GalleryEntry:
    m = float(m)
    y0 = float(y0)
    if not (m > 0 and y0 > 0):
        raise BadParameter("one_atom requires m > 0 and y0 > 0")
    ref = ClosedForm(
        "one-atom",
        lambda xi, m=m, y0=y0: 0.5 * xi * xi * m / (1.0 + xi * xi * m * y0),
        note="compound Poisson with two-sided exponential jumps",
    )
    return GalleryEntry(
        name="one_atom",
        spec=StringSpec(R=math.inf, atoms=((y0, m),), density=ZeroDensity(), b=ZeroDrift()),
        reference=ref,
    )


def _meromorphic(atoms=((1.0, 1.0), (2.0, 0.5)),
                 b_breakpoints=(1.5,), b_values=(0.3, -0.2)) -> GalleryEntry:
    atoms = tuple((float(y), float(m)) for y, m in atoms)
    for y, m in atoms:
        if y <= 0 or m <= 0:
            raise BadParameter("meromorphic atoms need y > 0 and m > 0")
    b = PiecewiseConstantDrift(tuple(float(x) for x in b_breakpoints),
                               tuple(float(v) for v in b_values)) \
        if any(v != 0 for v in b_values) else ZeroDrift()
    return GalleryEntry(
        name="meromorphic",
        spec=StringSpec(R=math.inf, atoms=atoms, density=ZeroDensity(), b=b),
        reference=None,
        notes="finitely many atoms + step shear: meromorphic exponent, "
              "no reference attached (validated against simulation only)",
    )


def _sine() -> GalleryEntry:
    ref = Asymptotic(note="two-sided jumps, zero drift; Levy measure infinite "
                          "on (0, inf) and finite on (-inf, 0)")
    return GalleryEntry(
        name="sine",
        spec=StringSpec(R=math.inf, atoms=(), density=ZeroDensity(), b=SineDrift(-1.0)),
        reference=ref,
        notes="b(y) = -sin y: profile lines x - cos y = const",
    )


def _cosine() -> GalleryEntry:
    ref = Asymptotic(note="two-sided jumps, drift 1/2 in this convention "
                          "(unit drift under the doubled clock); Levy measure "
                          "infinite on (-inf, 0) and finite on (0, inf)")
    return GalleryEntry(
        name="cosine",
        spec=StringSpec(R=math.inf, atoms=(), density=ZeroDensity(), b=CosineDrift(-1.0)),
        reference=ref,
        notes="b(y) = -cos y: profile lines x + sin y = const",
    )


_BUILDERS = {
    "trivial": _trivial,
    "cauchy": _cauchy,
    "relativistic": _relativistic,
    "relativistic_alt": _relativistic_alt,
    "symmetric_stable": _symmetric_stable,
    "stable": _stable,
    "one_atom": _one_atom,
    "meromorphic": _meromorphic,
    "sine": _sine,
    "cosine": _cosine,
}

GALLERY_NAMES = tuple(_BUILDERS)


def default_entries() -> list:
    """One entry per name with default parameters."""
    return [make(name) for name in GALLERY_NAMES]


def reference_exponent(entry: GalleryEntry, xi: float):
    """Pointwise reference value, or UNAVAILABLE when only asymptotic or no
    information is attached."""
    if not xi > 0:
        raise BadParameter("reference_exponent requires xi > 0")
    if isinstance(entry.reference, ClosedForm):
        return complex(entry.reference.fn(float(xi)))
    return UNAVAILABLE
