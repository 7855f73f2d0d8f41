"""Batch command-line front-end.

Subcommands:

    validate      check a string-specification file and report violations
    exponent      tabulate the characteristic exponent on a log-spaced grid
    simulate      dump one simulated path, its trace, or its excursions
    verify-cf     compare empirical characteristic functions to the exponent
    levy-measure  empirical jump-intensity histogram from pooled excursions
    check-rogers  certification battery on a computed exponent table
    gallery       list catalogue entries or emit their specification files

Exit status: 0 success, 1 validation failure, 2 numerical non-convergence,
3 statistical/property verification failure.  All CSV outputs carry a header
row and trailing provenance comments (# seed=, # dt=, # version=).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import (
    BadParameter,
    InsufficientLocalTime,
    InvalidMeasure,
    InvalidString,
    NonConvergent,
    QuadratureFailure,
    StringTraceError,
)
from .gallery import GALLERY_NAMES, make, reference_exponent, UNAVAILABLE
from .ode import ExponentSample, exponent, exponent_grid
from .rogers import check_rogers_properties
from .simulate import (
    SimConfig,
    empirical_cf,
    empirical_levy_measure,
    excursion_decompose,
    run_ensemble,
    sample_path,
    trace,
)
from .strings import dump_spec, load_spec, validate_string

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_STATISTICAL = 3


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

def _num(x):
    """Full-precision decimal form of a scalar for CSV cells."""
    return repr(float(x))


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w"), True


def _provenance(fh, seed=None, dt=None):
    fh.write(f"# seed={'none' if seed is None else seed}\n")
    fh.write(f"# dt={'none' if dt is None else repr(dt)}\n")
    fh.write(f"# version={__version__}\n")


def _parse_param(text):
    key, _, raw = text.partition("=")
    if not _:
        raise BadParameter(f"--param expects key=value, got {text!r}")
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def _resolve_spec(args):
    """Load the string from --string, or build it from --gallery/--param."""
    if getattr(args, "string", None):
        return load_spec(args.string)
    if getattr(args, "gallery", None):
        params = dict(_parse_param(p) for p in (args.param or []))
        return make(args.gallery, **params).spec
    raise BadParameter("one of --string FILE or --gallery NAME is required")


def _xi_grid(args):
    if args.xi_min <= 0 or args.xi_max < args.xi_min:
        raise BadParameter("need 0 < --xi-min <= --xi-max")
    if args.xi_points < 1:
        raise BadParameter("--xi-points must be at least 1")
    if args.xi_points == 1:
        return np.array([args.xi_min])
    return np.geomspace(args.xi_min, args.xi_max, args.xi_points)


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise BadParameter(f"expected a comma-separated number list, got {text!r}")


def _sim_config(args):
    return SimConfig(dt=args.dt, horizon=args.horizon, n_paths=args.paths,
                     seed=args.seed)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_validate(args):
    spec = load_spec(args.string)
    report = validate_string(spec)
    if report.ok:
        print(f"{args.string}: ok")
        return EXIT_OK
    print(f"{args.string}: invalid")
    for v in report.violations:
        print(f"  - {v}")
    return EXIT_INVALID


def _cmd_exponent(args):
    spec = _resolve_spec(args)
    xis = _xi_grid(args)
    samples = exponent_grid(spec, xis)
    bad = [s for s in samples if s.error is not None]
    fh, close = _open_out(args.out)
    try:
        fh.write("xi,re_psi,im_psi\n")
        for s in samples:
            if s.error is None:
                fh.write(f"{_num(s.xi)},{_num(s.psi.real)},{_num(s.psi.imag)}\n")
        _provenance(fh)
    finally:
        if close:
            fh.close()
    for s in bad:
        print(f"xi={s.xi}: {s.error}", file=sys.stderr)
    return EXIT_NUMERICAL if bad else EXIT_OK


def _cmd_simulate(args):
    spec = _resolve_spec(args)
    cfg = _sim_config(args)
    path = sample_path(spec, cfg, path_index=args.path_index)
    fh, close = _open_out(args.out)
    try:
        if args.emit == "path":
            fh.write("k,t,Y,L0,A,B,X,alive\n")
            t, Y, L0 = path.t, path.Y, path.L0
            for k in range(Y.size):
                fh.write(f"{k + 1},{_num(t[k])},{_num(Y[k])},{_num(L0[k])},"
                         f"{_num(path.A[k])},{_num(path.B[k])},{_num(path.X[k])},"
                         f"{int(path.alive[k])}\n")
        elif args.emit == "trace":
            if not args.u:
                raise BadParameter("--emit trace requires --u LIST")
            ts = trace(path, np.asarray(args.u))
            fh.write("u,Z,alive\n")
            for u, z, a in zip(ts.u, ts.Z, ts.alive):
                fh.write(f"{_num(u)},{_num(z)},{int(a)}\n")
        else:
            fh.write("u,zeta,max,dX,completed\n")
            for rec in excursion_decompose(path):
                fh.write(f"{_num(rec.u)},{_num(rec.duration)},{_num(rec.max_height)},"
                         f"{_num(rec.dX)},{int(rec.completed)}\n")
        _provenance(fh, seed=cfg.seed, dt=cfg.dt)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _cmd_verify_cf(args):
    spec = _resolve_spec(args)
    if args.paths < 100:
        raise BadParameter("verify-cf needs --paths >= 100")
    u_list = sorted(set(args.u or [0.5, 1.0]))
    xi_list = args.xi or [0.5, 1.0, 2.0]
    cfg = _sim_config(args)
    psi = {xi: exponent(spec, xi).psi for xi in xi_list}
    u_grid = np.asarray(u_list)
    res = run_ensemble(spec, cfg, u_grid=u_grid)
    C = args.tolerance
    allowance_bias = C * math.sqrt(cfg.dt)
    fh, close = _open_out(args.out)
    failed = 0
    try:
        fh.write(f"# verify-cf: |emp - exp(-u psi)| <= 3*stderr + C*sqrt(dt), "
                 f"C={C}, n_paths={cfg.n_paths}\n")
        fh.write("u,xi,model_re,model_im,emp_re,emp_im,stderr,pass\n")
        for u in u_list:
            for xi in xi_list:
                model = np.exp(-u * psi[xi])
                emp, se = empirical_cf(res.traces, xi, u)
                serr = math.hypot(se.real, se.imag)
                ok = abs(emp - model) <= 3.0 * serr + allowance_bias
                failed += 0 if ok else 1
                fh.write(f"{_num(u)},{_num(xi)},{_num(model.real)},{_num(model.imag)},"
                         f"{_num(emp.real)},{_num(emp.imag)},{_num(serr)},{int(ok)}\n")
        _provenance(fh, seed=cfg.seed, dt=cfg.dt)
    finally:
        if close:
            fh.close()
    if failed:
        print(f"verify-cf: {failed} cell(s) outside tolerance", file=sys.stderr)
        return EXIT_STATISTICAL
    return EXIT_OK


def _cmd_levy_measure(args):
    spec = _resolve_spec(args)
    cfg = _sim_config(args)
    res = run_ensemble(spec, cfg, collect_excursions=True)
    pool = res.excursions
    xmin = args.xmin if args.xmin is not None else cfg.min_jump
    dx = pool.dX[pool.completed]
    top = float(np.abs(dx).max()) if dx.size else 10.0 * xmin
    top = max(top, 2.0 * xmin)
    pos = np.geomspace(xmin, top, args.bins + 1)
    edges = np.concatenate([-pos[::-1], pos])
    hist = empirical_levy_measure(pool, edges, res.U, min_jump=cfg.min_jump,
                                  min_local_time=args.min_local_time)
    fh, close = _open_out(args.out)
    try:
        fh.write(f"# pooled local time U={_num(res.U)}, "
                 f"completed excursions={int(pool.completed.sum())}\n")
        fh.write("lo,hi,nu,stderr,count,excluded\n")
        for i in range(hist.counts.size):
            fh.write(f"{_num(hist.edges[i])},{_num(hist.edges[i + 1])},"
                     f"{_num(hist.nu[i])},{_num(hist.stderr[i])},"
                     f"{int(hist.counts[i])},{int(hist.excluded[i])}\n")
        _provenance(fh, seed=cfg.seed, dt=cfg.dt)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _cmd_check_rogers(args):
    if args.csv:
        rows = np.genfromtxt(args.csv, delimiter=",", skip_header=1, comments="#")
        rows = np.atleast_2d(rows)
        samples = [ExponentSample(xi=float(r[0]), psi=complex(r[1], r[2]))
                   for r in rows]
    else:
        spec = _resolve_spec(args)
        grid = exponent_grid(spec, _xi_grid(args))
        bad = [s for s in grid if s.error is not None]
        if bad:
            for s in bad:
                print(f"xi={s.xi}: {s.error}", file=sys.stderr)
            return EXIT_NUMERICAL
        samples = grid
    report = check_rogers_properties(samples, tol=args.tolerance)
    for line in report.serialize().splitlines():
        print(line)
    return EXIT_OK if report.passed else EXIT_STATISTICAL


def _cmd_gallery(args):
    if args.action == "list":
        for name in GALLERY_NAMES:
            entry = make(name)
            ref = type(entry.reference).__name__ if entry.reference else "none"
            print(f"{name:18s} reference={ref:12s} {entry.notes}")
        return EXIT_OK
    if not args.name:
        raise BadParameter("gallery emit requires a name")
    params = dict(_parse_param(p) for p in (args.param or []))
    entry = make(args.name, **params)
    if args.out and args.out != "-":
        dump_spec(entry.spec, args.out)
        print(f"wrote {args.out}")
    else:
        from .strings import spec_to_dict
        json.dump(spec_to_dict(entry.spec), sys.stdout, indent=2)
        print()
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_spec_flags(p):
    p.add_argument("--string", metavar="FILE", help="string-specification file")
    p.add_argument("--gallery", metavar="NAME", choices=GALLERY_NAMES,
                   help="catalogue entry instead of a file")
    p.add_argument("--param", action="append", metavar="K=V",
                   help="gallery parameter override (repeatable)")


def _add_xi_flags(p):
    p.add_argument("--xi-min", type=float, default=0.1)
    p.add_argument("--xi-max", type=float, default=10.0)
    p.add_argument("--xi-points", type=int, default=50)


def _add_sim_flags(p):
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="stringtrace",
        description="Krein strings, half-plane diffusions, and boundary traces")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a string-specification file")
    p.add_argument("--string", metavar="FILE", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("exponent", help="tabulate the characteristic exponent")
    _add_spec_flags(p)
    _add_xi_flags(p)
    p.add_argument("--out", metavar="FILE", default="-")
    p.set_defaults(func=_cmd_exponent)

    p = sub.add_parser("simulate", help="dump a path, trace, or excursion CSV")
    _add_spec_flags(p)
    _add_sim_flags(p)
    p.add_argument("--emit", choices=("path", "trace", "excursions"),
                   default="path")
    p.add_argument("--path-index", type=int, default=0)
    p.add_argument("--u", type=_float_list, metavar="LIST",
                   help="comma-separated local-time grid for --emit trace")
    p.add_argument("--out", metavar="FILE", default="-")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify-cf",
                       help="empirical characteristic function vs exponent")
    _add_spec_flags(p)
    _add_sim_flags(p)
    p.add_argument("--u", type=_float_list, metavar="LIST")
    p.add_argument("--xi", type=_float_list, metavar="LIST")
    p.add_argument("--tolerance", type=float, default=5.0,
                   help="bias constant C in 3*stderr + C*sqrt(dt)")
    p.add_argument("--out", metavar="FILE", default="-")
    p.set_defaults(func=_cmd_verify_cf)

    p = sub.add_parser("levy-measure", help="empirical jump-intensity histogram")
    _add_spec_flags(p)
    _add_sim_flags(p)
    p.add_argument("--bins", type=int, default=20, help="bins per side")
    p.add_argument("--xmin", type=float, default=None,
                   help="smallest resolved |dX| (default: 4 sqrt(dt))")
    p.add_argument("--min-local-time", type=float, default=1.0)
    p.add_argument("--out", metavar="FILE", default="-")
    p.set_defaults(func=_cmd_levy_measure)

    p = sub.add_parser("check-rogers", help="certification battery on psi")
    _add_spec_flags(p)
    _add_xi_flags(p)
    p.add_argument("--csv", metavar="FILE",
                   help="existing exponent table instead of recomputing")
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.set_defaults(func=_cmd_check_rogers)

    p = sub.add_parser("gallery", help="list entries or emit their spec files")
    p.add_argument("action", choices=("list", "emit"))
    p.add_argument("name", nargs="?", choices=GALLERY_NAMES)
    p.add_argument("--param", action="append", metavar="K=V")
    p.add_argument("--out", metavar="FILE", default="-")
    p.set_defaults(func=_cmd_gallery)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidString, InvalidMeasure, BadParameter) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NonConvergent, QuadratureFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except InsufficientLocalTime as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATISTICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except StringTraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
