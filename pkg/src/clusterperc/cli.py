"""Command-line front end.

    clusterperc sweep     --geometry square --L 512 --scheme waveguide
    clusterperc threshold --geometry triangular --sizes 64,128,256
    clusterperc threshold --transparent --epsilon 0.01 --L 1024
    clusterperc yield     --geometry square --q-grid 0.7,0.8,0.9,1.0
    clusterperc physics   --scheme cavity
    clusterperc replay    out/sweep_manifest.json

Every file-producing command also writes ``<command>_manifest.json`` with
the full argument set and SHA-256 checksums of its outputs; ``replay``
re-runs a manifest and checks the outputs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .lattice import Geometry, check_size
from .percolation import NonPercolatingError, ReplicaGraph, ensemble_run, estimate_threshold
from .physics import (
    BOND_THRESHOLD,
    DEGREE,
    PhysicalParams,
    Scheme,
    bond_prob_from_time,
    report,
    time_to_threshold,
)
from .site_bond import CSV_HEADER, yield_curve
from .transparent import min_threshold_vs_epsilon

log = logging.getLogger("clusterperc")

EXIT_OK, EXIT_USAGE, EXIT_NON_PERCOLATING = 0, 2, 3
OUT_ENV = "CLUSTERPERC_OUT"

_UNITS = {"": 1.0, "s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9}


class UsageError(ValueError):
    pass


def parse_time(text: str) -> float:
    """``'5us'`` -> 5e-6. Bare numbers are seconds."""
    m = re.fullmatch(r"\s*([-+0-9.eE]+)\s*(s|ms|us|µs|ns)?\s*", str(text))
    if not m:
        raise argparse.ArgumentTypeError(f"cannot parse time {text!r}")
    return float(m.group(1)) * _UNITS[m.group(2) or ""]


def parse_grid(text: str, parse=float) -> np.ndarray:
    """``'a:b:n'`` (inclusive linspace) or a comma list."""
    if ":" in text:
        a, b, n = text.split(":")
        return np.linspace(parse(a), parse(b), int(n))
    return np.array([parse(x) for x in text.split(",") if x.strip()])


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _params(args) -> PhysicalParams:
    if args.eta is not None:
        return PhysicalParams.from_eta(args.eta, args.t0)
    if args.p0 is not None:
        return PhysicalParams(p0=args.p0, t0=args.t0)
    p = PhysicalParams.preset(args.scheme)
    return PhysicalParams(p0=p.p0, t0=args.t0, scheme=p.scheme)


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    path.write_text(buf.getvalue())


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV, "clusterperc_out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(args, outputs: list[Path], started: float) -> Path:
    argv = {k: v for k, v in vars(args).items() if k not in ("func", "out", "workers")}
    manifest = {
        "command": args.command,
        "parameters": argv,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "outputs": {p.name: _sha256(p) for p in outputs},
        "duration_seconds": round(time.perf_counter() - started, 3),
    }
    path = outputs[0].parent / f"{args.command}_manifest.json"
    _write_json(path, manifest)
    return path


# -- commands ---------------------------------------------------------------

def cmd_sweep(args) -> int:
    started = time.perf_counter()
    geometry = Geometry(args.geometry)
    if args.epsilon is not None and geometry is not Geometry.SQUARE:
        raise UsageError("--epsilon needs --geometry square")
    d = args.d or geometry.degree
    try:
        check_size(geometry, args.L)
        builder = ReplicaGraph(geometry, args.L, q=args.q, epsilon=args.epsilon)
        if args.epsilon is not None and not 0.0 < args.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in (0, 1], got {args.epsilon}")
        params = _params(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    if args.p_grid is not None:
        p_grid = parse_grid(args.p_grid)
        t_grid = time_to_threshold(np.clip(p_grid, 0, 1), params, d)
    else:
        if args.t_grid is not None:
            t_grid = parse_grid(args.t_grid, parse_time)
        else:
            t_c = time_to_threshold(BOND_THRESHOLD[geometry.value], params, d)
            t_grid = np.linspace(0.0, 2.0 * t_c, 101)
        p_grid = np.atleast_1d(bond_prob_from_time(t_grid, params, d))
    t_grid = np.atleast_1d(t_grid)

    curve = ensemble_run(builder, args.replicas, p_grid, args.seed, args.workers)
    wrap = curve.wrap.get("both" if args.epsilon is not None else "axes")
    if wrap is None:
        wrap = np.full(len(p_grid), math.nan)
    header = ["p", "t_seconds", "f_lcc_mean", "f_lcc_stderr", "wrap_prob"]
    rows = zip(p_grid, t_grid, curve.f_lcc, curve.f_lcc_stderr, wrap)
    if args.epsilon is not None:
        header = ["epsilon"] + header
        rows = ([args.epsilon, *r] for r in rows)
    out = _out_dir(args)
    path = out / "sweep.csv"
    _write_csv(path, header, rows)
    _manifest(args, [path], started)
    log.info("wrote %s", path)
    return EXIT_OK


def cmd_threshold(args) -> int:
    started = time.perf_counter()
    try:
        if args.transparent:
            eps = args.epsilon or [0.01]
            L = args.L or 1024
            records = [e.to_json() for e in min_threshold_vs_epsilon(
                L, eps, args.replicas, args.seed, sizes=args.sizes, workers=args.workers)]
        else:
            sizes = args.sizes or [64, 128, 256]
            est = estimate_threshold(args.geometry, sizes, args.replicas, args.seed,
                                     criterion=args.criterion, workers=args.workers,
                                     q=args.q)
            records = [est.to_json()]
    except NonPercolatingError as exc:
        print(f"clusterperc: non-percolating input: {exc}", file=sys.stderr)
        return EXIT_NON_PERCOLATING
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = _out_dir(args)
    path = out / "threshold.json"
    _write_json(path, records)
    _manifest(args, [path], started)
    for r in records:
        print(f"{r['geometry']} eps={r.get('epsilon', 1.0)}: p_c = {r['p_c_hat']:.4f} "
              f"+- {r['sigma']:.4f} ({r['criterion']})")
    return EXIT_OK


def cmd_yield(args) -> int:
    started = time.perf_counter()
    q_grid = sorted(_float_list(args.q_grid))
    try:
        points = yield_curve(args.geometry, q_grid, args.sizes or [128], args.replicas,
                             args.seed, args.tolerance, _params(args), args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = _out_dir(args)
    path = out / "yield.csv"
    _write_csv(path, CSV_HEADER, (p.csv_row() for p in points))
    _manifest(args, [path], started)
    return EXIT_OK


def cmd_physics(args) -> int:
    try:
        params = _params(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    geometries = [args.geometry] if args.geometry else list(DEGREE)
    rep = report(params, geometries, p_c=args.p_c, coherence=args.coherence)
    if args.d is not None:
        rep["lattices"] = [dict(r, d=args.d, t_c=time_to_threshold(r["p_c"], params, args.d))
                           for r in rep["lattices"]]
    json.dump(rep, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_replay(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    argv = [manifest["command"]]
    for key, value in manifest["parameters"].items():
        if key in ("command", "manifest") or value is None or value is False:
            continue
        flag = "--" + key.replace("_", "-")
        if value is True:
            argv.append(flag)
        elif isinstance(value, list):
            argv += [flag, ",".join(str(v) for v in value)]
        else:
            argv += [flag, str(value)]
    out = Path(args.out or Path(args.manifest).parent / "replay")
    argv += ["--out", str(out)]
    code = main(argv)
    if code != EXIT_OK:
        return code
    bad = [name for name, digest in manifest["outputs"].items()
           if _sha256(out / name) != digest]
    if bad:
        print(f"clusterperc: replay differs for {', '.join(bad)}", file=sys.stderr)
        return 1
    print(f"replay of {args.manifest} reproduced {len(manifest['outputs'])} file(s)")
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _add_physics_flags(p):
    p.add_argument("--scheme", choices=[s.value for s in Scheme if s is not Scheme.CUSTOM],
                   default="waveguide")
    p.add_argument("--p0", type=float, help="per-attempt Bell success (overrides --scheme)")
    p.add_argument("--eta", type=float, help="photon efficiency; sets p0 = eta**2/2")
    p.add_argument("--t0", type=parse_time, default=5e-6, help="attempt period, e.g. 5us")
    p.add_argument("--d", type=int, help="degree used for time conversion")


def _add_run_flags(p):
    p.add_argument("--replicas", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="affects wall-clock only")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./clusterperc_out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clusterperc", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    geoms = [g.value for g in Geometry]

    p = sub.add_parser("sweep", help="f_LCC versus bond probability and time")
    p.add_argument("--geometry", choices=geoms, default="square")
    p.add_argument("--L", type=int, default=3000)
    p.add_argument("--q", type=float, default=1.0, help="site yield")
    p.add_argument("--epsilon", type=float, help="active fraction (transparent nodes)")
    p.add_argument("--p-grid", help="a:b:n or comma list of bond probabilities")
    p.add_argument("--t-grid", help="a:b:n or comma list of times, e.g. 0:200ms:101")
    _add_physics_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_sweep, replicas=1)

    p = sub.add_parser("threshold", help="bond percolation threshold")
    p.add_argument("--geometry", choices=geoms, default="square")
    p.add_argument("--sizes", type=_int_list)
    p.add_argument("--criterion", choices=["axes", "any", "x", "y", "both", "jump"])
    p.add_argument("--q", type=float, default=1.0, help="site yield")
    p.add_argument("--transparent", action="store_true")
    p.add_argument("--epsilon", type=_float_list, help="active fraction(s), comma list")
    p.add_argument("--L", type=int, help="largest size for --transparent")
    _add_run_flags(p)
    p.set_defaults(func=cmd_threshold, replicas=200)

    p = sub.add_parser("yield", help="minimum percolating bond probability per site yield")
    p.add_argument("--geometry", choices=geoms, default="square")
    p.add_argument("--q-grid", default="0.7,0.8,0.9,1.0")
    p.add_argument("--sizes", type=_int_list)
    p.add_argument("--tolerance", type=float, default=2e-3)
    _add_physics_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_yield, replicas=100)

    p = sub.add_parser("physics", help="closed-form threshold times (JSON on stdout)")
    p.add_argument("--geometry", choices=geoms)
    p.add_argument("--p-c", type=float, help="override the bond threshold")
    p.add_argument("--coherence", type=parse_time, help="coherence budget to compare t_c against")
    _add_physics_flags(p)
    p.set_defaults(func=cmd_physics)

    p = sub.add_parser("replay", help="re-run a manifest and verify its outputs")
    p.add_argument("manifest")
    p.add_argument("--out")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"clusterperc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
