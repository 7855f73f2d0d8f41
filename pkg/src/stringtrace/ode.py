"""Measure-coefficient ODE solver and trace characteristic exponent.

Solves, for a string (R, a, b) and xi > 0, the boundary problem

    phi''(dy) = xi^2 phi(y) a(dy) + xi^2 phi(y) b(y)^2 dy - 2 i xi b(y) phi'(y) dy

on (0, R) with phi(0) = 1 and phi(R-) = 0 (boundedness when R = inf), and
returns the trace exponent psi(xi) = -phi'(0+)/2 + a({0}) xi^2 / 2.

The linear problem is integrated backward from the (possibly truncated)
right endpoint with terminal data (phi, phi') = (0, -1) and rescaled so
that phi(0) = 1.  Between atoms the first-order system is propagated by a
cell-wise matrix exponential (two-point Magnus scheme; exact cell
integrals of the coefficients near an integrable singularity), and each
interior atom (y_i, m_i) contributes the exact jump
phi'(y_i+) - phi'(y_i-) = xi^2 m_i phi(y_i).  For R = inf the cut grows
geometrically and phi'(0+) is extrapolated in 1/Y_cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateNormalization, InvalidString, NonConvergent, NotSymmetric
from .strings import StringSpec, canonicalize, validate_string

__all__ = ["SolverOptions", "PhiSolution", "ExponentSample",
           "solve_phi", "exponent", "exponent_grid", "krein_laplace_exponent"]

_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class SolverOptions:
    """Mesh, truncation and tolerance knobs for the string ODE solver."""

    h0: float = 1e-7              # first cell near y = 0
    grade_ratio: float = 1.04     # geometric growth of the graded mesh
    far_frac: float = 0.04        # step cap as a fraction of (1 + y)
    osc_frac: float = 0.08        # step cap relative to the local wavelength
    max_step: float = 1e9         # absolute step cap
    sing_window: float = 1.0      # exact-integral cells while y < window (singular profiles)
    initial_cut: float | None = None
    growth: float = 2.0           # geometric growth of Y_cut for R = inf
    rtol: float = 1e-10           # relative stability target for phi'(0+)
    boundary_tol: float = 1e-9
    max_depth: int = 40           # truncation doublings before giving up

    def refined(self, factor: float) -> "SolverOptions":
        """Options with every mesh scale tightened by `factor`."""
        return replace(
            self,
            h0=self.h0 / factor,
            grade_ratio=self.grade_ratio ** (1.0 / factor),
            far_frac=self.far_frac / factor,
            osc_frac=self.osc_frac / factor,
            max_step=self.max_step / factor,
        )


@dataclass
class PhiSolution:
    """Solution of the string ODE on a mesh, normalised to phi(0) = 1."""

    mesh: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    dphi_at_zero: complex
    Y_cut: float
    residual: float


@dataclass
class ExponentSample:
    xi: float
    psi: complex | None
    error: str | None = None


# ---------------------------------------------------------------------------
# mesh construction
# ---------------------------------------------------------------------------

def _build_mesh(spec, s, xi1, Y_cut, opts):
    """Graded mesh on [0, Y_cut] with atom locations as forced nodes."""
    res = min(spec.density.resolution_scale(), spec.b.resolution_scale())
    res_cap = 0.25 * res if math.isfinite(res) else math.inf
    forced = sorted({y for y, _ in spec.interior_atoms() if y < Y_cut} | {Y_cut})
    nodes = [0.0]
    h = opts.h0
    y = 0.0
    nf = 0
    while y < Y_cut:
        probe = y + 0.5 * h if y > 0 else h
        dens = float(spec.density.value(probe))
        bval = float(spec.b.value(probe))
        lam = math.sqrt(max(s, 0.0) * (dens + bval * bval)) + 2.0 * abs(xi1 * bval)
        cap = min(opts.max_step, opts.far_frac * (1.0 + y), res_cap)
        if lam > 0:
            cap = min(cap, opts.osc_frac / lam)
        h = min(h * opts.grade_ratio, cap)
        nxt = y + h
        # snap to a forced node when we step past (or very close to) it
        while nf < len(forced) and forced[nf] <= y * (1 + 1e-15):
            nf += 1
        if nf < len(forced) and nxt >= forced[nf] * (1 - 1e-12):
            nxt = forced[nf]
            nf += 1
        nodes.append(nxt)
        y = nxt
        if len(nodes) > 4_000_000:
            raise NonConvergent("mesh exceeded 4e6 nodes; loosen SolverOptions")
    nodes[-1] = Y_cut
    return np.asarray(nodes)


def _cell_operators(spec, s, xi1, nodes, opts):
    """Backward transfer matrices exp(-Omega_k) per cell, with atom jumps folded in."""
    y0 = nodes[:-1]
    y1 = nodes[1:]
    h = y1 - y0
    mid = 0.5 * (y0 + y1)
    off = h * (_SQRT3 / 6.0)
    g1 = mid - off
    g2 = mid + off

    dens1 = np.asarray(spec.density.value(g1), dtype=float)
    dens2 = np.asarray(spec.density.value(g2), dtype=float)
    b1 = np.asarray(spec.b.value(g1), dtype=float)
    b2 = np.asarray(spec.b.value(g2), dtype=float)
    P1 = s * (dens1 + b1 * b1)
    P2 = s * (dens2 + b2 * b2)
    Q1 = -2j * xi1 * b1
    Q2 = -2j * xi1 * b2

    c = (_SQRT3 / 12.0) * h * h
    O00 = c * (P1 - P2) + 0j
    O01 = h + c * (Q1 - Q2)
    O10 = 0.5 * h * (P1 + P2) + c * (Q2 * P1 - Q1 * P2)
    O11 = 0.5 * h * (Q1 + Q2) - c * (P1 - P2)

    # integrable singularity at 0: use exact cell integrals (order-2 cells)
    if spec.density.singular_at_zero or spec.b.singular_at_zero:
        idx = np.nonzero(y0 < opts.sing_window)[0]
        for k in idx:
            a_int = spec.density.integral(float(y0[k]), float(y1[k]))
            b2_int = spec.b.sq_integral(float(y0[k]), float(y1[k]))
            b_int = spec.b.integral(float(y0[k]), float(y1[k]))
            O00[k] = 0.0
            O01[k] = h[k]
            O10[k] = s * (a_int + b2_int)
            O11[k] = -2j * xi1 * b_int

    E = _expm2x2(-O00, -O01, -O10, -O11)

    # fold phi' jumps of interior atoms into the cell to their left
    node_index = {float(v): i for i, v in enumerate(nodes)}
    for ya, m in spec.interior_atoms():
        if ya >= nodes[-1]:
            continue
        k = node_index.get(float(ya))
        if k is None:
            k = int(np.argmin(np.abs(nodes - ya)))
        if k == 0 or k == len(nodes) - 1:
            continue
        jump = -s * m
        # C_{k-1} = E_{k-1} @ J_k with J = [[1, 0], [jump, 1]]
        E[k - 1, 0, 0] += jump * E[k - 1, 0, 1]
        E[k - 1, 1, 0] += jump * E[k - 1, 1, 1]
    return E, O10, O11


def _expm2x2(m00, m01, m10, m11):
    """Vectorised matrix exponential of 2x2 complex matrices."""
    tau = 0.5 * (m00 + m11)
    a = m00 - tau
    w2 = a * a + m01 * m10
    w = np.sqrt(w2)
    small = np.abs(w) < 1e-8
    w_safe = np.where(small, 1.0, w)
    sh = np.where(small, 1.0 + w2 / 6.0, np.sinh(w_safe) / w_safe)
    ch = np.where(small, 1.0 + w2 / 2.0, np.cosh(w_safe))
    et = np.exp(tau)
    out = np.empty(m00.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = et * (ch + sh * a)
    out[..., 0, 1] = et * sh * m01
    out[..., 1, 0] = et * sh * m10
    out[..., 1, 1] = et * (ch - sh * a)
    return out


def _suffix_products(C):
    """S[k] = C[k] @ C[k+1] @ ... @ C[-1], with per-matrix log-scales."""
    S = C.copy()
    n = S.shape[0]
    ls = np.zeros(n)
    norm = np.abs(S).max(axis=(1, 2))
    norm = np.where(norm > 0, norm, 1.0)
    S /= norm[:, None, None]
    ls += np.log(norm)
    shift = 1
    while shift < n:
        head = n - shift
        S[:head] = np.matmul(S[:head], S[shift:])
        ls[:head] += ls[shift:]
        norm = np.abs(S[:head]).max(axis=(1, 2))
        norm = np.where(norm > 0, norm, 1.0)
        S[:head] /= norm[:, None, None]
        ls[:head] += np.log(norm)
        shift *= 2
    return S, ls


def _solve_on_cut(spec, s, xi1, Y_cut, opts):
    """One backward solve on [0, Y_cut]; returns mesh, normalised (phi, dphi), defect."""
    last_err = None
    for attempt in range(3):
        o = opts.refined(2.0 ** attempt)
        nodes = _build_mesh(spec, s, xi1, Y_cut, o)
        C, O10, O11 = _cell_operators(spec, s, xi1, nodes, o)
        S, ls = _suffix_products(C)
        # u_k = S_k @ (0, -1)
        phi_raw = -S[:, 0, 1]
        dphi_raw = -S[:, 1, 1]
        phi0 = phi_raw[0]
        if phi0 == 0 or not np.isfinite(phi0):
            last_err = DegenerateNormalization(
                f"phi(0) degenerate on cut {Y_cut} (attempt {attempt})")
            continue
        dphi0 = dphi_raw[0] / phi0
        rel = np.exp(np.clip(ls - ls[0], -745.0, 60.0))
        # terminal node: u = (0, -1) at log-scale 0
        term = -math.exp(min(60.0, max(-745.0, -ls[0]))) / phi0
        phi = np.concatenate([phi_raw * rel / phi0, [0.0 + 0j]])
        dphi = np.concatenate([dphi_raw * rel / phi0, [term]])
        phi[0] = 1.0 + 0j
        dphi[0] = dphi0
        residual = _defect(nodes, spec, s, phi, dphi, O10, O11)
        return nodes, phi, dphi, dphi0, residual
    raise last_err


def _defect(nodes, spec, s, phi, dphi, O10, O11):
    """Trapezoid-consistency defect of the computed solution (diagnostic)."""
    dphi_left = dphi[1:].copy()
    node_pos = {float(v): i for i, v in enumerate(nodes)}
    for ya, m in spec.interior_atoms():
        k = node_pos.get(float(ya))
        if k is not None and 0 < k < len(nodes) - 1:
            dphi_left[k - 1] -= s * m * phi[k]
    dd = dphi_left - dphi[:-1]
    rhs = O10 * 0.5 * (phi[:-1] + phi[1:]) + O11 * 0.5 * (dphi[:-1] + dphi[1:])
    scale = max(1.0, float(np.abs(dphi).max()))
    return float(np.abs(dd - rhs).max() / scale)


# ---------------------------------------------------------------------------
# truncation of R = inf
# ---------------------------------------------------------------------------

def _initial_cut(spec, s, opts):
    if opts.initial_cut is not None:
        return float(opts.initial_cut)
    ys = np.geomspace(1e-4, 1e7, 600)
    dens = np.asarray(spec.density.value(ys), dtype=float)
    b = np.asarray(spec.b.value(ys), dtype=float)
    rate = np.sqrt(np.maximum(s * (dens + b * b), 0.0))
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(ys))])
    hit = np.nonzero(cum >= 14.0)[0]
    Y = float(ys[hit[0]]) if hit.size else 64.0
    atom_top = max((y for y, _ in spec.interior_atoms()), default=0.0)
    return float(min(max(Y, 8.0, 4.0 * atom_top), 1e6))


def _neville_at_zero(xs, fs):
    xs = list(xs)
    fs = list(fs)
    n = len(xs)
    tab = list(fs)
    for level in range(1, n):
        for i in range(n - level):
            tab[i] = (tab[i] * (0.0 - xs[i + level]) - tab[i + 1] * (0.0 - xs[i])) \
                / (xs[i] - xs[i + level])
    return tab[0]


def _solve_general(spec, s, xi1, opts):
    """Backward solve with truncation handling; returns (PhiSolution, dphi0)."""
    report = validate_string(spec)
    if not report.ok:
        raise InvalidString("; ".join(report.violations))
    spec = canonicalize(spec)
    if math.isfinite(spec.R):
        nodes, phi, dphi, dphi0, res = _solve_on_cut(spec, s, xi1, spec.R, opts)
        sol = PhiSolution(mesh=nodes, phi=phi, dphi=dphi, dphi_at_zero=dphi0,
                          Y_cut=spec.R, residual=res)
        return sol, dphi0

    Y = _initial_cut(spec, s, opts)
    cuts, d0s, exts = [], [], []
    last = None
    for _ in range(opts.max_depth):
        nodes, phi, dphi, dphi0, res = _solve_on_cut(spec, s, xi1, Y, opts)
        last = (nodes, phi, dphi, res, Y)
        cuts.append(Y)
        d0s.append(dphi0)
        k = min(3, len(cuts))
        exts.append(_neville_at_zero([1.0 / c for c in cuts[-k:]], d0s[-k:]))
        if len(exts) >= 2:
            change = abs(exts[-1] - exts[-2])
            if change <= opts.rtol * (1.0 + abs(exts[-1])):
                nodes, phi, dphi, res, Y = last
                sol = PhiSolution(mesh=nodes, phi=phi, dphi=dphi,
                                  dphi_at_zero=exts[-1], Y_cut=Y,
                                  residual=max(res, change))
                return sol, exts[-1]
        Y *= opts.growth
    raise NonConvergent(
        f"truncation did not stabilise after {opts.max_depth} cuts (last Y_cut {Y / opts.growth})")


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def solve_phi(spec: StringSpec, xi: float, opts: SolverOptions | None = None) -> PhiSolution:
    """Unique bounded solution of the string ODE for xi > 0."""
    if not xi > 0:
        raise InvalidString(f"xi must be positive, got {xi}")
    opts = opts or SolverOptions()
    sol, _ = _solve_general(spec, xi * xi, xi, opts)
    return sol


def exponent(spec: StringSpec, xi: float, opts: SolverOptions | None = None) -> ExponentSample:
    """Trace exponent psi(xi) = -phi'(0+)/2 + a({0}) xi^2 / 2."""
    sol = solve_phi(spec, xi, opts)
    a0 = canonicalize(spec).atom_at_zero()
    psi = -0.5 * sol.dphi_at_zero + 0.5 * a0 * xi * xi
    return ExponentSample(xi=float(xi), psi=complex(psi))


def exponent_grid(spec: StringSpec, xi_list, opts: SolverOptions | None = None):
    """Per-xi exponent samples; a failure is reported on its entry only."""
    out = []
    for xi in xi_list:
        try:
            out.append(exponent(spec, float(xi), opts))
        except Exception as exc:  # per-entry failure, not global
            out.append(ExponentSample(xi=float(xi), psi=None, error=str(exc)))
    return out


def krein_laplace_exponent(spec: StringSpec, xi: float,
                           opts: SolverOptions | None = None) -> float:
    """Laplace exponent of the inverse-local-time subordinator of the b-free string.

    Solves phi''(dy) = xi phi(y) a(dy), phi(0) = 1, phi(R-) = 0 and returns
    -phi'(0+) + a({0}) xi.
    """
    if not spec.b.is_zero:
        raise NotSymmetric("Krein exponent requires b = 0")
    if not xi > 0:
        raise InvalidString(f"xi must be positive, got {xi}")
    opts = opts or SolverOptions()
    _, dphi0 = _solve_general(spec, float(xi), 0.0, opts)
    a0 = canonicalize(spec).atom_at_zero()
    return float((-dphi0).real + a0 * xi)
