"""Pathwise simulation of the half-plane diffusion and its boundary trace.

The vertical component is reflected (and optionally killed) Brownian motion
realised through the discrete Skorokhod regulator of a free Gaussian walk:

    Ydot_k = sum of N(0, dt) increments,   rho_k = max(0, running max of -Ydot),
    Y_k = Ydot_k + rho_k,                  L0(t_k) = 2 rho_k.

The horizontal component is realised incrementally as X = W(A) + B with

    dA_k = density(Y_k) dt + sum_i m_i (dt/eps) 1{|Y_k - y_i| < eps/2}
           + a({0}) dL0_k,
    dB_k = b(Y_{k-1}) dYdot_k,
    dX_k = N(0, dA_k) + dB_k,

the N(0, dA) draws coming from an independent sub-stream, so W(A) is exact
in distribution given the A increments.  Local time at 0 is exactly twice
the regulator; interior local times use eps-band occupation estimates.

Everything downstream (trace process, empirical characteristic function,
excursion decomposition, empirical Levy measure) is computed from these
paths.  Paths are independent; path i draws from PCG64 streams seeded by
(seed, i) and (seed, i, 1), so results are reproducible and independent of
scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter, InsufficientLocalTime
from .strings import StringSpec, canonicalize

__all__ = ["SimConfig", "PathRecord", "TraceSample", "ExcursionRecord",
           "ExcursionPool", "LevyHistogram", "EnsembleResult",
           "sample_path", "trace", "trace_ensemble", "empirical_cf",
           "excursion_decompose", "run_ensemble", "empirical_levy_measure",
           "local_time_profile"]

_CHUNK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    horizon: float = 100.0
    n_paths: int = 1000
    seed: int = 0
    eps: float | None = None            # occupation bandwidth, default 4 sqrt(dt)
    min_excursion_steps: int = 3        # discretization floor for excursions
    min_jump: float | None = None       # smallest |dX| resolved by histograms
    stop_local_time: float | None = None  # stop a path once L0 reaches this

    def __post_init__(self):
        if not self.dt > 0:
            raise BadParameter("dt must be positive")
        if self.n_paths < 1:
            raise BadParameter("n_paths must be at least 1")
        if not self.horizon > 0:
            raise BadParameter("horizon must be positive")
        if self.eps is None:
            object.__setattr__(self, "eps", 4.0 * math.sqrt(self.dt))
        if self.eps < math.sqrt(self.dt):
            raise BadParameter("eps must be at least sqrt(dt)")
        if self.min_jump is None:
            object.__setattr__(self, "min_jump", 4.0 * math.sqrt(self.dt))


@dataclass
class PathRecord:
    dt: float
    Ydot: np.ndarray
    rho: np.ndarray
    A: np.ndarray
    B: np.ndarray
    X: np.ndarray
    alive: np.ndarray      # prefix property; False from the killing step on
    killed: bool
    T_R_index: int | None  # first k with Y_k >= R, when killed

    @property
    def t(self):
        return self.dt * np.arange(1, self.Ydot.size + 1)

    @property
    def Y(self):
        return self.Ydot + self.rho

    @property
    def L0(self):
        return 2.0 * self.rho


@dataclass
class TraceSample:
    u: np.ndarray
    Z: np.ndarray
    alive: np.ndarray          # False once the path is dead or unresolved
    horizon_short: np.ndarray  # True where the path ended un-killed before u


@dataclass(frozen=True)
class ExcursionRecord:
    u: float          # local time at the start of the excursion
    duration: float
    max_height: float
    dX: float
    completed: bool


@dataclass
class ExcursionPool:
    u: np.ndarray
    duration: np.ndarray
    max_height: np.ndarray
    dX: np.ndarray
    completed: np.ndarray


@dataclass
class LevyHistogram:
    edges: np.ndarray
    nu: np.ndarray
    stderr: np.ndarray
    counts: np.ndarray
    U: float
    excluded: np.ndarray  # bins overlapping the unresolved neighbourhood of 0


@dataclass
class EnsembleResult:
    traces: list | None
    excursions: ExcursionPool | None
    U: float                    # pooled local time (sum of final L0)
    L0_final: np.ndarray
    killed: np.ndarray
    T_R: np.ndarray             # killing times (nan when not killed)
    level_occupation: np.ndarray | None  # (n_paths, n_levels) local-time estimates


# ---------------------------------------------------------------------------
# core path engine
# ---------------------------------------------------------------------------

def _streams(cfg, path_index):
    gen_y = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((cfg.seed, path_index))))
    gen_w = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((cfg.seed, path_index, 1))))
    return gen_y, gen_w


def _iter_chunks(spec, cfg, path_index, complete_open=False):
    """Yield per-chunk arrays; the last chunk carries killed/stopped flags.

    Each yielded dict has keys: Ydot, rho, Y, dYdot, dA, X, A, B, dL0,
    prev_rho (scalar), killed (bool), stopped (bool), start (global index).

    With complete_open=True, a path away from the boundary at the horizon
    keeps running until the next regulator push (capped at twice the horizon
    again), so the excursion in progress can finish.  This removes the
    size-biased truncation of long excursions by the horizon.
    """
    gen_y, gen_w = _streams(cfg, path_index)
    dt = cfg.dt
    sq_dt = math.sqrt(dt)
    n_total = int(round(cfg.horizon / dt))
    stop_rho = math.inf if cfg.stop_local_time is None else 0.5 * cfg.stop_local_time

    a0 = spec.atom_at_zero()
    interior = spec.interior_atoms()
    dens = None if spec.density.is_zero else spec.density
    bfun = None if spec.b.is_zero else spec.b
    has_gauss = dens is not None or interior or a0 > 0
    finite_R = math.isfinite(spec.R)

    # integrable singularities at the boundary: evaluate coefficients by
    # their exact band average below the occupation bandwidth (the grid
    # visits Y = 0 exactly at every regulator push)
    band = cfg.eps
    dens_band = (dens.integral(0.0, band) / band
                 if dens is not None and dens.singular_at_zero else None)
    b_band = (bfun.integral(0.0, band) / band
              if bfun is not None and bfun.singular_at_zero else None)

    def _dens_vals(Y):
        if dens_band is None:
            return np.asarray(dens.value(Y), dtype=float)
        low = Y < band
        vals = np.asarray(dens.value(np.where(low, band, Y)), dtype=float)
        vals[low] = dens_band
        return vals

    def _b_vals(Y):
        if b_band is None:
            return np.asarray(bfun.value(Y), dtype=float)
        low = Y < band
        vals = np.asarray(bfun.value(np.where(low, band, Y)), dtype=float)
        vals[low] = b_band
        return vals

    ydot = 0.0
    rho = 0.0
    x = 0.0
    a_acc = 0.0
    b_acc = 0.0
    y_prev = 0.0
    done = 0
    n_limit = n_total
    extending = False
    while done < n_limit:
        K = min(_CHUNK, n_limit - done)
        d_ydot = gen_y.normal(0.0, sq_dt, K)
        ydot_c = ydot + np.cumsum(d_ydot)
        rho_c = np.maximum(rho, np.maximum.accumulate(-ydot_c))
        Y = ydot_c + rho_c

        end = K
        killed = False
        if finite_R:
            hits = np.nonzero(Y >= spec.R)[0]
            if hits.size:
                end = int(hits[0]) + 1
                killed = True
        stopped = False
        if stop_rho < math.inf:
            j = int(np.searchsorted(rho_c[:end], stop_rho, side="left"))
            if j < end - 1 or (j == end - 1 and not killed):
                end = j + 1
                killed = False
                stopped = True
        ext_done = False
        if extending:
            push = np.nonzero(np.diff(rho_c[:end], prepend=rho) > 0)[0]
            if push.size:
                end = min(end, int(push[0]) + 1)
                ext_done = True
                if killed and end <= int(push[0]):
                    ext_done = False

        d_ydot = d_ydot[:end]
        ydot_c = ydot_c[:end]
        rho_c = rho_c[:end]
        Y = Y[:end]
        d_l0 = 2.0 * np.diff(rho_c, prepend=rho)

        if has_gauss:
            dA = np.zeros(end)
            if dens is not None:
                dA += _dens_vals(Y) * dt
            for ya, ma in interior:
                dA += ma * (dt / cfg.eps) * (np.abs(Y - ya) < 0.5 * cfg.eps)
            if a0 > 0:
                dA += a0 * d_l0
            dX = gen_w.standard_normal(end) * np.sqrt(dA)
        else:
            dA = np.zeros(end)
            dX = np.zeros(end)
        if bfun is not None:
            y_pre = np.empty(end)
            y_pre[0] = y_prev
            y_pre[1:] = Y[:-1]
            dB = _b_vals(y_pre) * d_ydot
        else:
            dB = np.zeros(end)
        dX = dX + dB

        chunk = {
            "Ydot": ydot_c,
            "rho": rho_c,
            "Y": Y,
            "dYdot": d_ydot,
            "dA": dA,
            "dL0": d_l0,
            "X": x + np.cumsum(dX),
            "A": a_acc + np.cumsum(dA),
            "B": b_acc + np.cumsum(dB),
            "prev_rho": rho,
            "killed": killed,
            "stopped": stopped,
            "start": done,
        }
        yield chunk
        ydot = float(ydot_c[-1])
        rho = float(rho_c[-1])
        x = float(chunk["X"][-1])
        a_acc = float(chunk["A"][-1])
        b_acc = float(chunk["B"][-1])
        y_prev = float(Y[-1])
        done += end
        if killed or stopped or ext_done:
            return
        if done >= n_total and not extending:
            if complete_open and y_prev > 0.0:
                extending = True
                n_limit = 3 * n_total
            else:
                return


def sample_path(spec: StringSpec, cfg: SimConfig, path_index: int = 0) -> PathRecord:
    """Simulate one full path; arrays cover every retained step."""
    spec = canonicalize(spec)
    parts = {k: [] for k in ("Ydot", "rho", "A", "B", "X")}
    killed = False
    for chunk in _iter_chunks(spec, cfg, path_index):
        for k in parts:
            parts[k].append(chunk[k])
        killed = chunk["killed"]
    arrays = {k: (np.concatenate(v) if v else np.zeros(0)) for k, v in parts.items()}
    n = arrays["Ydot"].size
    alive = np.ones(n, dtype=bool)
    t_r = None
    if killed and n:
        t_r = n - 1
        alive[t_r:] = False
    return PathRecord(dt=cfg.dt, alive=alive, killed=killed, T_R_index=t_r, **arrays)


# ---------------------------------------------------------------------------
# trace process
# ---------------------------------------------------------------------------

def _trace_from(rho, X, killed, u_grid):
    u = np.asarray(u_grid, dtype=float)
    if np.any(np.diff(u) < 0) or np.any(u < 0):
        raise BadParameter("u grid must be ascending and nonnegative")
    idx = np.searchsorted(rho, 0.5 * u, side="left")
    found = idx < rho.size
    Z = np.zeros(u.size)
    Z[found] = X[idx[found]]
    Z[u == 0.0] = 0.0
    alive = found.copy()
    alive[u == 0.0] = True
    horizon_short = (~found) & (not killed)
    return TraceSample(u=u, Z=Z, alive=alive, horizon_short=horizon_short)


def trace(path: PathRecord, u_grid) -> TraceSample:
    """Z(u) = X at the first step where L0 reaches u (right-continuous inverse)."""
    return _trace_from(path.rho, path.X, path.killed, u_grid)


def trace_ensemble(spec: StringSpec, cfg: SimConfig, u_grid) -> list:
    res = run_ensemble(spec, cfg, u_grid=u_grid)
    return res.traces


def empirical_cf(traces, xi: float, u: float):
    """Mean of 1{alive} e^{i xi Z(u)} over paths, with componentwise stderr.

    Dead paths (killed, or ended before reaching local time u) contribute 0.
    """
    u_grid = traces[0].u
    j = int(np.argmin(np.abs(u_grid - u)))
    if abs(u_grid[j] - u) > 1e-12 * (1.0 + abs(u)):
        raise BadParameter(f"u={u} is not on the trace grid")
    alive = np.array([t.alive[j] for t in traces])
    Z = np.array([t.Z[j] for t in traces])
    vals = alive * np.exp(1j * xi * Z)
    n = vals.size
    mean = vals.mean()
    se = (vals.real.std(ddof=1) + 1j * vals.imag.std(ddof=1)) / math.sqrt(n)
    return complex(mean), complex(se)


# ---------------------------------------------------------------------------
# excursions
# ---------------------------------------------------------------------------

def _segment_max(Y, starts, ends):
    """Max of Y[s:e] per pair (0 for empty); interleaved ascending indices."""
    n = starts.size
    out = np.zeros(n)
    if n == 0 or Y.size == 0:
        return out
    idx = np.empty(2 * n, dtype=np.intp)
    idx[0::2] = starts
    idx[1::2] = ends
    # all indices are < len(Y) here (ends are push positions), so the full
    # interleaved index list is valid and even slots give the wanted segments
    red = np.maximum.reduceat(Y, idx)[0::2]
    nonempty = ends > starts
    out[nonempty] = red[nonempty]
    return out


class _ExcursionScanner:
    """Streaming excursion decomposition across chunks of one path."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.run_steps = 0
        self.run_start_x = 0.0
        self.run_start_rho = 0.0
        self.run_max = 0.0
        self.records = []  # (u, duration, max_height, dX, completed)

    def feed(self, chunk):
        rho = chunk["rho"]
        Y = chunk["Y"]
        X = chunk["X"]
        dt = self.cfg.dt
        push = np.diff(rho, prepend=chunk["prev_rho"]) > 0
        pidx = np.nonzero(push)[0]
        prev = -1
        if pidx.size:
            # first record closes the carried run
            p0 = int(pidx[0])
            steps = self.run_steps + p0 + 1
            mx = self.run_max
            if p0 > 0:
                mx = max(mx, float(Y[:p0].max()))
            if steps >= self.cfg.min_excursion_steps:
                self.records.append((2.0 * self.run_start_rho, steps * dt, mx,
                                     float(X[p0]) - self.run_start_x, True))
            if pidx.size > 1:
                starts = pidx[:-1] + 1
                ends = pidx[1:]
                steps_v = np.diff(pidx)
                keep = steps_v >= self.cfg.min_excursion_steps
                if keep.any():
                    mxs = _segment_max(Y, starts[keep], ends[keep])
                    dxs = X[ends[keep]] - X[pidx[:-1][keep]]
                    us = 2.0 * rho[pidx[:-1][keep]]
                    for rec in zip(us, steps_v[keep] * dt, mxs, dxs):
                        self.records.append((*map(float, rec), True))
            last = int(pidx[-1])
            self.run_steps = 0
            self.run_start_x = float(X[last])
            self.run_start_rho = float(rho[last])
            self.run_max = 0.0
            prev = last
        tail = Y.size - (prev + 1)
        if tail > 0:
            self.run_steps += tail
            self.run_max = max(self.run_max, float(Y[prev + 1:].max()))

    def finish(self, chunk_last, killed):
        """Close the open run at the end of the path."""
        if self.run_steps == 0:
            return
        X = chunk_last["X"]
        if killed or self.run_steps >= self.cfg.min_excursion_steps:
            self.records.append((2.0 * self.run_start_rho,
                                 self.run_steps * self.cfg.dt,
                                 self.run_max,
                                 float(X[-1]) - self.run_start_x,
                                 False))


def excursion_decompose(path: PathRecord) -> list:
    """Excursions of one path: maximal runs with no regulator push.

    Runs shorter than the configured floor are discarded; the final open run
    (killed at R, or horizon-truncated) is recorded with completed=False.
    """
    cfg = SimConfig(dt=path.dt)
    scanner = _ExcursionScanner(cfg)
    chunk = {
        "rho": path.rho, "Y": path.Y, "X": path.X,
        "prev_rho": 0.0,
    }
    if path.rho.size:
        scanner.feed(chunk)
        scanner.finish(chunk, path.killed)
    return [ExcursionRecord(*r) for r in scanner.records]


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

def run_ensemble(spec: StringSpec, cfg: SimConfig, u_grid=None,
                 collect_excursions=False, y_levels=()) -> EnsembleResult:
    """Simulate cfg.n_paths independent paths in one streaming pass.

    Collects, as requested: trace samples on u_grid, pooled excursions, and
    eps-band local-time estimates at the interior levels y_levels.  When
    excursions are collected, each path runs past the horizon until its open
    excursion completes (capped at twice the horizon again), which keeps the
    jump histogram free of size-biased truncation of long excursions.
    """
    spec = canonicalize(spec)
    n = cfg.n_paths
    traces = [] if u_grid is not None else None
    exc_parts = [] if collect_excursions else None
    levels = np.asarray(y_levels, dtype=float)
    occ = np.zeros((n, levels.size)) if levels.size else None
    L0_final = np.zeros(n)
    killed = np.zeros(n, dtype=bool)
    T_R = np.full(n, np.nan)
    half_band = 0.5 * cfg.eps

    for i in range(n):
        scanner = _ExcursionScanner(cfg) if collect_excursions else None
        rho_last = 0.0
        x_last = 0.0
        was_killed = False
        steps = 0
        last_chunk = None
        trace_rho = [] if u_grid is not None else None
        trace_x = [] if u_grid is not None else None
        for chunk in _iter_chunks(spec, cfg, i, complete_open=collect_excursions):
            if scanner is not None:
                scanner.feed(chunk)
            if occ is not None:
                Y = chunk["Y"]
                for li, y in enumerate(levels):
                    if y == 0.0:
                        cnt = int(np.count_nonzero(Y < cfg.eps))
                    else:
                        cnt = int(np.count_nonzero(np.abs(Y - y) < half_band))
                    occ[i, li] += cnt * cfg.dt / cfg.eps
            if trace_rho is not None:
                trace_rho.append(chunk["rho"])
                trace_x.append(chunk["X"])
            rho_last = float(chunk["rho"][-1])
            x_last = float(chunk["X"][-1])
            was_killed = chunk["killed"]
            steps += chunk["rho"].size
            last_chunk = chunk
        if scanner is not None and last_chunk is not None:
            scanner.finish(last_chunk, was_killed)
            exc_parts.append(scanner.records)
        if trace_rho is not None:
            rho_all = np.concatenate(trace_rho) if trace_rho else np.zeros(0)
            x_all = np.concatenate(trace_x) if trace_x else np.zeros(0)
            traces.append(_trace_from(rho_all, x_all, was_killed, u_grid))
        L0_final[i] = 2.0 * rho_last
        killed[i] = was_killed
        if was_killed:
            T_R[i] = steps * cfg.dt

    pool = None
    if collect_excursions:
        flat = [r for recs in exc_parts for r in recs]
        if flat:
            arr = np.array(flat, dtype=float)
            pool = ExcursionPool(u=arr[:, 0], duration=arr[:, 1],
                                 max_height=arr[:, 2], dX=arr[:, 3],
                                 completed=arr[:, 4].astype(bool))
        else:
            z = np.zeros(0)
            pool = ExcursionPool(z, z, z, z, z.astype(bool))
    return EnsembleResult(traces=traces, excursions=pool, U=float(L0_final.sum()),
                          L0_final=L0_final, killed=killed, T_R=T_R,
                          level_occupation=occ)


def empirical_levy_measure(pool: ExcursionPool, bins, U: float,
                           min_jump: float, min_local_time: float = 1.0) -> LevyHistogram:
    """Jump-intensity histogram: completed-excursion dX counts per unit L0."""
    if U < min_local_time:
        raise InsufficientLocalTime(
            f"pooled local time {U:.3g} below the floor {min_local_time}")
    edges = np.asarray(bins, dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise BadParameter("bins must be ascending edges")
    dx = pool.dX[pool.completed]
    counts, _ = np.histogram(dx, bins=edges)
    widths = np.diff(edges)
    nu = counts / (U * widths)
    stderr = np.sqrt(np.maximum(counts, 1.0)) / (U * widths)
    excluded = (edges[:-1] < min_jump) & (edges[1:] > -min_jump)
    return LevyHistogram(edges=edges, nu=nu, stderr=stderr,
                         counts=counts, U=float(U), excluded=excluded)


def local_time_profile(path: PathRecord, y_grid, eps: float):
    """eps-band occupation estimates of the local-time profile at t_end.

    Interior levels use the band (y - eps/2, y + eps/2); the boundary level
    uses [0, eps) with no halving, matching the reflected normalisation.
    """
    Y = path.Y[path.alive]
    out = np.zeros(len(y_grid))
    for i, y in enumerate(np.asarray(y_grid, dtype=float)):
        if y == 0.0:
            cnt = np.count_nonzero(Y < eps)
        else:
            cnt = np.count_nonzero(np.abs(Y - y) < 0.5 * eps)
        out[i] = cnt * path.dt / eps
    return out
