"""Generalized string data: horizon R, measure a(dy) = atoms + density, shear b(y).

The triple (R, a, b) encodes a shift-invariant diffusion in the half-plane;
it is the central input of every other module.  The measure a(dy) is stored
as a finite atom list plus one parametric density, which covers all the
example strings while keeping the on-disk format portable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidString, OutOfDomain

__all__ = [
    "DensityProfile", "ZeroDensity", "ConstantDensity", "PowerDensity",
    "RationalPowerDensity", "TableDensity",
    "DriftProfile", "ZeroDrift", "ConstantDrift", "PowerDrift",
    "PiecewiseConstantDrift", "SineDrift", "CosineDrift", "TableDrift",
    "StringSpec", "ValidationReport",
    "validate_string", "canonicalize", "a_mass",
    "spec_to_dict", "spec_from_dict", "dump_spec", "load_spec",
]


def _split_points(lo, hi, breakpoints):
    """Interval endpoints [lo, hi] refined by the breakpoints inside it."""
    pts = [lo]
    for y in breakpoints:
        if lo < y < hi:
            pts.append(float(y))
    pts.append(hi)
    return pts


def _pl_value(bp, vals, y):
    """Piecewise-linear interpolation with constant extrapolation."""
    return np.interp(y, bp, vals)


def _pl_integral(bp, vals, lo, hi):
    """Exact integral of the piecewise-linear table over [lo, hi]."""
    total = 0.0
    for a, b in zip(_split_points(lo, hi, bp)[:-1], _split_points(lo, hi, bp)[1:]):
        total += 0.5 * (b - a) * (_pl_value(bp, vals, a) + _pl_value(bp, vals, b))
    return total


# ---------------------------------------------------------------------------
# density profiles: the absolutely continuous part of a(dy)
# ---------------------------------------------------------------------------

class DensityProfile:
    """Nonnegative density of the absolutely continuous part of a(dy)."""

    kind = "zero"

    def value(self, y):
        raise NotImplementedError

    def integral(self, lo, hi):
        """Exact value of the integral over [lo, hi], 0 <= lo <= hi."""
        raise NotImplementedError

    @property
    def is_zero(self):
        return False

    @property
    def singular_at_zero(self):
        """True when value(y) diverges as y -> 0+ (integrably)."""
        return False

    def resolution_scale(self):
        """Length scale below which the profile must be resolved by a mesh."""
        return math.inf

    def violations(self, R):
        return []

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroDensity(DensityProfile):
    kind = "zero"

    def value(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def integral(self, lo, hi):
        return 0.0

    @property
    def is_zero(self):
        return True

    def to_dict(self):
        return {"kind": "zero"}


@dataclass(frozen=True)
class ConstantDensity(DensityProfile):
    c: float
    kind = "constant"

    def value(self, y):
        return np.full_like(np.asarray(y, dtype=float), self.c)

    def integral(self, lo, hi):
        return self.c * (hi - lo)

    @property
    def is_zero(self):
        return self.c == 0.0

    def violations(self, R):
        return [] if self.c >= 0 else [f"density constant must be nonnegative, got {self.c}"]

    def to_dict(self):
        return {"kind": "constant", "c": self.c}


@dataclass(frozen=True)
class PowerDensity(DensityProfile):
    """c * y**exponent with exponent > -1 (integrable at 0)."""

    c: float
    exponent: float
    kind = "power"

    def value(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            return self.c * np.power(y, self.exponent)

    def integral(self, lo, hi):
        k = self.exponent
        if k == -1.0:
            raise InvalidString("power density exponent -1 is not locally integrable")
        return self.c * (hi ** (k + 1.0) - lo ** (k + 1.0)) / (k + 1.0)

    @property
    def is_zero(self):
        return self.c == 0.0

    @property
    def singular_at_zero(self):
        return self.c != 0.0 and self.exponent < 0.0

    def violations(self, R):
        out = []
        if self.c < 0:
            out.append(f"density coefficient must be nonnegative, got {self.c}")
        if self.exponent <= -1.0:
            out.append(
                f"density power exponent must exceed -1 for local integrability, got {self.exponent}")
        return out

    def to_dict(self):
        return {"kind": "power", "c": self.c, "exponent": self.exponent}


@dataclass(frozen=True)
class RationalPowerDensity(DensityProfile):
    """c * (1 + 2*scale*y)**exponent with scale > 0."""

    c: float
    scale: float
    exponent: float
    kind = "rational_power"

    def value(self, y):
        y = np.asarray(y, dtype=float)
        return self.c * np.power(1.0 + 2.0 * self.scale * y, self.exponent)

    def integral(self, lo, hi):
        k, m = self.exponent, self.scale
        if k == -1.0:
            return self.c / (2.0 * m) * math.log((1.0 + 2.0 * m * hi) / (1.0 + 2.0 * m * lo))
        g = lambda y: (1.0 + 2.0 * m * y) ** (k + 1.0) / (2.0 * m * (k + 1.0))
        return self.c * (g(hi) - g(lo))

    @property
    def is_zero(self):
        return self.c == 0.0

    def resolution_scale(self):
        # smooth and monotone: relative variation is controlled without a cap
        return math.inf

    def violations(self, R):
        out = []
        if self.c < 0:
            out.append(f"density coefficient must be nonnegative, got {self.c}")
        if self.scale <= 0:
            out.append(f"rational power density scale must be positive, got {self.scale}")
        return out

    def to_dict(self):
        return {"kind": "rational_power", "c": self.c, "scale": self.scale,
                "exponent": self.exponent}


@dataclass(frozen=True)
class TableDensity(DensityProfile):
    """Linear interpolation of (breakpoints, values), constant beyond the ends."""

    breakpoints: tuple
    values: tuple
    kind = "table"

    def value(self, y):
        return _pl_value(self.breakpoints, self.values, np.asarray(y, dtype=float))

    def integral(self, lo, hi):
        return _pl_integral(self.breakpoints, self.values, lo, hi)

    @property
    def is_zero(self):
        return all(v == 0.0 for v in self.values)

    def resolution_scale(self):
        gaps = np.diff(self.breakpoints)
        return float(gaps.min()) if gaps.size else math.inf

    def violations(self, R):
        out = []
        bp, vals = np.asarray(self.breakpoints, float), np.asarray(self.values, float)
        if bp.size != vals.size or bp.size == 0:
            out.append("table breakpoints and values must be nonempty and equal length")
            return out
        if np.any(np.diff(bp) <= 0):
            out.append("table breakpoints must be strictly increasing")
        if bp[0] < 0 or bp[-1] >= R:
            out.append(f"table breakpoints must lie in [0, R), got range [{bp[0]}, {bp[-1]}]")
        if np.any(vals < 0):
            out.append(f"table values must be nonnegative, min is {vals.min()}")
        return out

    def to_dict(self):
        return {"kind": "table", "breakpoints": list(self.breakpoints),
                "values": list(self.values)}


# ---------------------------------------------------------------------------
# drift (shear) profiles b(y)
# ---------------------------------------------------------------------------

class DriftProfile:
    """The oblique/shear coefficient b(y); locally square-integrable."""

    kind = "zero"

    def value(self, y):
        raise NotImplementedError

    def integral(self, lo, hi):
        """Exact integral of b over [lo, hi]."""
        raise NotImplementedError

    def sq_integral(self, lo, hi):
        """Exact integral of b**2 over [lo, hi]."""
        raise NotImplementedError

    @property
    def is_zero(self):
        return False

    @property
    def singular_at_zero(self):
        return False

    def resolution_scale(self):
        return math.inf

    def violations(self, R):
        return []

    def to_dict(self):
        raise NotImplementedError

    def _segment_exact(self, lo, hi, breakpoints):
        # Two-point Gauss per subsegment: exact whenever b is linear on the
        # segment, hence b**2 quadratic.  Interior nodes keep jump profiles
        # from sampling the wrong side of a breakpoint.
        total_b = 0.0
        total_b2 = 0.0
        off = 0.5 / math.sqrt(3.0)
        pts = _split_points(lo, hi, breakpoints)
        for a, b in zip(pts[:-1], pts[1:]):
            m, h = 0.5 * (a + b), b - a
            f1, f2 = (float(self.value(x)) for x in (m - off * h, m + off * h))
            total_b += 0.5 * h * (f1 + f2)
            total_b2 += 0.5 * h * (f1 * f1 + f2 * f2)
        return total_b, total_b2


@dataclass(frozen=True)
class ZeroDrift(DriftProfile):
    kind = "zero"

    def value(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def integral(self, lo, hi):
        return 0.0

    def sq_integral(self, lo, hi):
        return 0.0

    @property
    def is_zero(self):
        return True

    def to_dict(self):
        return {"kind": "zero"}


@dataclass(frozen=True)
class ConstantDrift(DriftProfile):
    q: float
    kind = "constant"

    def value(self, y):
        return np.full_like(np.asarray(y, dtype=float), self.q)

    def integral(self, lo, hi):
        return self.q * (hi - lo)

    def sq_integral(self, lo, hi):
        return self.q * self.q * (hi - lo)

    @property
    def is_zero(self):
        return self.q == 0.0

    def to_dict(self):
        return {"kind": "constant", "q": self.q}


@dataclass(frozen=True)
class PowerDrift(DriftProfile):
    """c * y**exponent with exponent > -1/2 (square-integrable at 0)."""

    c: float
    exponent: float
    kind = "power"

    def value(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            return self.c * np.power(y, self.exponent)

    def integral(self, lo, hi):
        k = self.exponent
        return self.c * (hi ** (k + 1.0) - lo ** (k + 1.0)) / (k + 1.0)

    def sq_integral(self, lo, hi):
        k2 = 2.0 * self.exponent
        if k2 == -1.0:
            if lo == 0.0:
                return math.inf
            return self.c * self.c * math.log(hi / lo)
        return self.c * self.c * (hi ** (k2 + 1.0) - lo ** (k2 + 1.0)) / (k2 + 1.0)

    @property
    def is_zero(self):
        return self.c == 0.0

    @property
    def singular_at_zero(self):
        return self.c != 0.0 and self.exponent < 0.0

    def violations(self, R):
        if self.c != 0.0 and self.exponent <= -0.5:
            return [
                f"b not locally square-integrable: power exponent must exceed -1/2, got {self.exponent}"]
        return []

    def to_dict(self):
        return {"kind": "power", "c": self.c, "exponent": self.exponent}


@dataclass(frozen=True)
class PiecewiseConstantDrift(DriftProfile):
    """Value values[i] on (breakpoints[i-1], breakpoints[i]); len(values) = len(breakpoints)+1."""

    breakpoints: tuple
    values: tuple
    kind = "piecewise_constant"

    def value(self, y):
        y = np.asarray(y, dtype=float)
        idx = np.searchsorted(self.breakpoints, y, side="right")
        return np.asarray(self.values, dtype=float)[idx]

    def integral(self, lo, hi):
        return self._segment_exact(lo, hi, self.breakpoints)[0]

    def sq_integral(self, lo, hi):
        return self._segment_exact(lo, hi, self.breakpoints)[1]

    @property
    def is_zero(self):
        return all(v == 0.0 for v in self.values)

    def resolution_scale(self):
        pts = np.asarray(self.breakpoints, float)
        gaps = np.diff(pts)
        return float(gaps.min()) if gaps.size else math.inf

    def violations(self, R):
        out = []
        bp = np.asarray(self.breakpoints, float)
        if len(self.values) != len(self.breakpoints) + 1:
            out.append("piecewise constant drift needs len(values) == len(breakpoints) + 1")
        if bp.size and (np.any(np.diff(bp) <= 0) or bp[0] <= 0 or bp[-1] >= R):
            out.append("piecewise constant breakpoints must be strictly increasing inside (0, R)")
        return out

    def to_dict(self):
        return {"kind": "piecewise_constant", "breakpoints": list(self.breakpoints),
                "values": list(self.values)}


@dataclass(frozen=True)
class SineDrift(DriftProfile):
    """amplitude * sin(y)."""

    amplitude: float
    kind = "sine"

    def value(self, y):
        return self.amplitude * np.sin(np.asarray(y, dtype=float))

    def integral(self, lo, hi):
        return self.amplitude * (math.cos(lo) - math.cos(hi))

    def sq_integral(self, lo, hi):
        c2 = self.amplitude * self.amplitude
        return c2 * (0.5 * (hi - lo) - 0.25 * (math.sin(2 * hi) - math.sin(2 * lo)))

    @property
    def is_zero(self):
        return self.amplitude == 0.0

    def resolution_scale(self):
        return 0.5

    def to_dict(self):
        return {"kind": "sine", "amplitude": self.amplitude}


@dataclass(frozen=True)
class CosineDrift(DriftProfile):
    """amplitude * cos(y)."""

    amplitude: float
    kind = "cosine"

    def value(self, y):
        return self.amplitude * np.cos(np.asarray(y, dtype=float))

    def integral(self, lo, hi):
        return self.amplitude * (math.sin(hi) - math.sin(lo))

    def sq_integral(self, lo, hi):
        c2 = self.amplitude * self.amplitude
        return c2 * (0.5 * (hi - lo) + 0.25 * (math.sin(2 * hi) - math.sin(2 * lo)))

    @property
    def is_zero(self):
        return self.amplitude == 0.0

    def resolution_scale(self):
        return 0.5

    def to_dict(self):
        return {"kind": "cosine", "amplitude": self.amplitude}


@dataclass(frozen=True)
class TableDrift(DriftProfile):
    breakpoints: tuple
    values: tuple
    kind = "table"

    def value(self, y):
        return _pl_value(self.breakpoints, self.values, np.asarray(y, dtype=float))

    def integral(self, lo, hi):
        return self._segment_exact(lo, hi, self.breakpoints)[0]

    def sq_integral(self, lo, hi):
        return self._segment_exact(lo, hi, self.breakpoints)[1]

    @property
    def is_zero(self):
        return all(v == 0.0 for v in self.values)

    def resolution_scale(self):
        gaps = np.diff(self.breakpoints)
        return float(gaps.min()) if gaps.size else math.inf

    def violations(self, R):
        out = []
        bp = np.asarray(self.breakpoints, float)
        if bp.size != len(self.values) or bp.size == 0:
            out.append("table breakpoints and values must be nonempty and equal length")
            return out
        if np.any(np.diff(bp) <= 0):
            out.append("table breakpoints must be strictly increasing")
        if bp[0] < 0 or bp[-1] >= R:
            out.append("table breakpoints must lie in [0, R)")
        return out

    def to_dict(self):
        return {"kind": "table", "breakpoints": list(self.breakpoints),
                "values": list(self.values)}


# ---------------------------------------------------------------------------
# the string itself
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StringSpec:
    """A generalized string (R, a(dy), b(y)).

    Attributes
    ----------
    R : float
        Horizon; positive, possibly math.inf.
    atoms : tuple of (location, mass)
        Atomic part of a(dy); locations in [0, R), masses >= 0.
    density : DensityProfile
        Absolutely continuous part of a(dy).
    b : DriftProfile
        The shear coefficient.
    """

    R: float
    atoms: tuple = ()
    density: DensityProfile = field(default_factory=ZeroDensity)
    b: DriftProfile = field(default_factory=ZeroDrift)

    def atom_at_zero(self):
        """Mass of the atom at y = 0 (consumed by the exponent formula only)."""
        return sum(m for y, m in self.atoms if y == 0.0)

    def interior_atoms(self):
        return tuple((y, m) for y, m in self.atoms if y > 0.0 and m > 0.0)

    @property
    def is_symmetric(self):
        return self.b.is_zero


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple

    def __bool__(self):
        return self.ok


def validate_string(spec: StringSpec) -> ValidationReport:
    """Check every admissibility condition; failures are reported, not raised."""
    violations = []
    R = spec.R
    if not (isinstance(R, (int, float)) and R > 0):
        violations.append(f"R must be positive, got {R!r}")
        R = math.inf  # keep checking the rest against a permissive horizon
    for y, m in spec.atoms:
        if m < 0:
            violations.append(f"negative atom mass {m} at y={y}")
        if not (0.0 <= y < R):
            violations.append(f"atom location {y} outside [0, R)")
    # Atom ordering is not checked here: canonicalize establishes it.
    violations.extend(spec.density.violations(R))
    bviol = spec.b.violations(R)
    violations.extend(bviol)
    return ValidationReport(ok=not violations, violations=tuple(violations))


def canonicalize(spec: StringSpec) -> StringSpec:
    """Sort atoms, merge duplicates, drop zero masses.  Raises InvalidString."""
    raw = StringSpec(R=spec.R, atoms=(), density=spec.density, b=spec.b)
    report = validate_string(raw)
    merged = {}
    for y, m in spec.atoms:
        if m < 0:
            raise InvalidString(f"negative atom mass {m} at y={y}")
        if not (0.0 <= y < spec.R):
            raise InvalidString(f"atom location {y} outside [0, R)")
        merged[float(y)] = merged.get(float(y), 0.0) + float(m)
    if not report.ok:
        raise InvalidString("; ".join(report.violations))
    atoms = tuple((y, m) for y, m in sorted(merged.items()) if m > 0.0)
    return replace(spec, atoms=atoms)


def a_mass(spec: StringSpec, y1: float, y2: float) -> float:
    """a([y1, y2]): atom masses in the closed interval plus the density integral."""
    if not (0.0 <= y1 <= y2 < spec.R or (y1 <= y2 and math.isinf(spec.R))):
        raise OutOfDomain(f"interval [{y1}, {y2}] not inside [0, {spec.R})")
    if y1 < 0.0:
        raise OutOfDomain(f"interval [{y1}, {y2}] not inside [0, {spec.R})")
    total = sum(m for y, m in spec.atoms if y1 <= y <= y2)
    return total + spec.density.integral(y1, y2)


# ---------------------------------------------------------------------------
# on-disk format: a single JSON document; unknown keys rejected
# ---------------------------------------------------------------------------

_DENSITY_KINDS = {
    "zero": (ZeroDensity, ()),
    "constant": (ConstantDensity, ("c",)),
    "power": (PowerDensity, ("c", "exponent")),
    "rational_power": (RationalPowerDensity, ("c", "scale", "exponent")),
    "table": (TableDensity, ("breakpoints", "values")),
}

_DRIFT_KINDS = {
    "zero": (ZeroDrift, ()),
    "constant": (ConstantDrift, ("q",)),
    "power": (PowerDrift, ("c", "exponent")),
    "piecewise_constant": (PiecewiseConstantDrift, ("breakpoints", "values")),
    "sine": (SineDrift, ("amplitude",)),
    "cosine": (CosineDrift, ("amplitude",)),
    "table": (TableDrift, ("breakpoints", "values")),
}


def _profile_from_dict(d, kinds, what):
    if not isinstance(d, dict) or "kind" not in d:
        raise InvalidString(f"{what} must be an object with a 'kind' key")
    kind = d["kind"]
    if kind not in kinds:
        raise InvalidString(f"unknown {what} kind {kind!r}")
    cls, keys = kinds[kind]
    extra = set(d) - {"kind", *keys}
    if extra:
        raise InvalidString(f"unknown keys in {what}: {sorted(extra)}")
    missing = [k for k in keys if k not in d]
    if missing:
        raise InvalidString(f"missing keys in {what}: {missing}")
    args = {}
    for k in keys:
        v = d[k]
        args[k] = tuple(float(x) for x in v) if isinstance(v, (list, tuple)) else float(v)
    return cls(**args)


def spec_from_dict(doc: dict) -> StringSpec:
    """Parse the interchange document; rejects unknown keys."""
    if not isinstance(doc, dict):
        raise InvalidString("string file must contain a JSON object")
    extra = set(doc) - {"R", "atoms", "density", "b"}
    if extra:
        raise InvalidString(f"unknown keys in string file: {sorted(extra)}")
    if "R" not in doc:
        raise InvalidString("missing key 'R'")
    R = doc["R"]
    if R == "inf":
        R = math.inf
    elif isinstance(R, (int, float)) and not isinstance(R, bool):
        R = float(R)
    else:
        raise InvalidString(f"R must be a number or \"inf\", got {R!r}")
    atoms = []
    for entry in doc.get("atoms", []):
        if not isinstance(entry, dict) or set(entry) != {"y", "mass"}:
            raise InvalidString(f"atom entries must be objects with keys y, mass: {entry!r}")
        atoms.append((float(entry["y"]), float(entry["mass"])))
    density = _profile_from_dict(doc.get("density", {"kind": "zero"}),
                                 _DENSITY_KINDS, "density")
    b = _profile_from_dict(doc.get("b", {"kind": "zero"}), _DRIFT_KINDS, "b")
    return StringSpec(R=R, atoms=tuple(atoms), density=density, b=b)


def spec_to_dict(spec: StringSpec) -> dict:
    return {
        "R": "inf" if math.isinf(spec.R) else spec.R,
        "atoms": [{"y": y, "mass": m} for y, m in spec.atoms],
        "density": spec.density.to_dict(),
        "b": spec.b.to_dict(),
    }


def dump_spec(spec: StringSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


def load_spec(path) -> StringSpec:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidString(f"{path} is not valid JSON: {exc}") from exc
    return spec_from_dict(doc)
