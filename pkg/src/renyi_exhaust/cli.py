"""Command line entry point: ``renyi-exhaust <group> <command> ...``."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np


def _decimal(s: str) -> float:
    """Parse an explicit decimal string (no locale separators)."""
    try:
        d = Decimal(s)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a decimal number: {s!r}") from None
    x = float(d)
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"not finite: {s!r}")
    return x


def _positive_int(s: str) -> int:
    try:
        n = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {s!r}")
    return n


def _length(s: str) -> float:
    x = _decimal(s)
    if x <= 0:
        raise argparse.ArgumentTypeError("length must be positive")
    return x


def _dump(obj: dict, path: str, timestamp: bool) -> None:
    if timestamp and "generated_at" not in obj:
        obj = dict(obj, generated_at=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_rows(path: str, header: list, rows: list) -> None:
    fh = sys.stdout if path == "-" else open(path, "w", newline="")
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    finally:
        if fh is not sys.stdout:
            fh.close()


# commands ---------------------------------------------------------------


def cmd_matrix_build(args) -> int:
    from .matrix import build

    M = build(args.m, args.rho)
    _dump(M.to_json(), args.out, timestamp=False)
    if args.out != "-":
        M.write_csv(Path(args.out).with_suffix(".csv"))
    return 0


def cmd_spectral_certify(args) -> int:
    from .spectral import certify

    cert = certify(args.m, args.h)
    _dump(cert.to_json(), args.out, not args.no_timestamp)
    lam = cert.lam
    print(f"lambda in [{lam.lo!r}, {lam.hi!r}], gap bound {cert.gap_bound:.6f}", file=sys.stderr)
    return 0


def _load_init(source: str, m: int):
    from . import density

    if source == "uniform":
        return density.constant(0.5, m)
    d = json.loads(Path(source).read_text())
    return density.DensityCoeffs.from_json(d)


def cmd_density_iterate(args) -> int:
    from . import density

    f0 = _load_init(args.init, args.m)
    res = density.iterate_to_fixed(f0, args.tol, args.max_iter, m=args.m)
    _dump(res.to_json(), args.out, not args.no_timestamp)
    if args.trace:
        # replay to attach the steady-state residual of each iterate
        it = density.initial(f0, args.m)
        A = density.float_matrix(args.m)
        rows = []
        for h in res.history:
            it = density.step(it, A)
            rows.append([h["stage"], h["C_s"], h["R_half"], h["sup_diff"],
                         density.steady_residual(it.coeffs, it.C)])
        _write_rows(args.trace, ["stage", "C_s", "R_half", "sup_diff", "residual"], rows)
    print(f"C = {res.C!r} after {res.iterations} stages", file=sys.stderr)
    return 0


def cmd_measure_orbit(args) -> int:
    from . import density, measure

    if args.fstar:
        d = json.loads(Path(args.fstar).read_text())
        fstar = density.DensityCoeffs.from_json(d)
    else:
        fstar = density.iterate_to_fixed(density.constant(0.5), 1e-12, m=args.m).fstar
    rows = []
    for k, mu in enumerate(measure.delta_orbit(args.x, args.steps, args.bins)):
        atoms = sum(1 for _, p in mu.atoms if p != 0.0)
        dist = measure.distance_to_fstar(mu, fstar) if atoms == 0 else float("nan")
        rows.append([k, atoms, mu.mass(), dist])
    _write_rows(args.out, ["step", "atom_count", "total_mass", "distance_to_fstar"], rows)
    return 0


def cmd_sim_run(args) -> int:
    from .simulator import run_stages

    stats = run_stages(args.length, args.stages, args.seed)
    rows = [[s.stage, s.car_length, s.gap_count, s.uncovered, s.ratio] for s in stats]
    _write_rows(args.out, ["stage", "car_length", "gap_count", "uncovered", "ratio"], rows)
    return 0


def cmd_sim_renyi(args) -> int:
    from .simulator import renyi_trials

    fr = renyi_trials(args.length, args.trials, args.seed)
    se = float(fr.std(ddof=1) / np.sqrt(len(fr))) if len(fr) > 1 else float("nan")
    if args.out:
        _write_rows(args.out, ["trial", "fraction"], [[k, float(x)] for k, x in enumerate(fr)])
    print(f"mean coverage {fr.mean():.6f} +- {se:.6f} ({args.trials} trials)")
    return 0


def _read_sim_csv(path: str) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_report(args) -> int:
    from .report import InconsistentResults, build_report, to_markdown

    cert = json.loads(Path(args.cert).read_text()) if args.cert else None
    fstar = json.loads(Path(args.fstar).read_text()) if args.fstar else None
    sim = _read_sim_csv(args.sim) if args.sim else None
    status = 0
    try:
        rep = build_report(cert, fstar, sim, timestamp=not args.no_timestamp)
    except InconsistentResults as exc:
        rep = exc.report
        status = 1
        print(str(exc), file=sys.stderr)
    _dump(rep, args.out, timestamp=False)
    if args.markdown:
        Path(args.markdown).write_text(to_markdown(rep))
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="renyi-exhaust", description=__doc__)
    sub = p.add_subparsers(dest="group", required=True)

    g = sub.add_parser("matrix").add_subparsers(dest="cmd", required=True)
    c = g.add_parser("build", help="interval enclosure of the truncated transfer matrix")
    c.add_argument("--m", type=_positive_int, required=True)
    c.add_argument("--rho", type=str, default="1")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_matrix_build)

    g = sub.add_parser("spectral").add_subparsers(dest="cmd", required=True)
    c = g.add_parser("certify", help="certify the dominant eigenvalue")
    c.add_argument("--m", type=_positive_int, default=64)
    c.add_argument("--h", type=_positive_int, default=7)
    c.add_argument("--out", required=True)
    c.add_argument("--no-timestamp", action="store_true")
    c.set_defaults(func=cmd_spectral_certify)

    g = sub.add_parser("density").add_subparsers(dest="cmd", required=True)
    c = g.add_parser("iterate", help="iterate the stage map to its fixed density")
    c.add_argument("--m", type=_positive_int, default=64)
    c.add_argument("--tol", type=_decimal, default=1e-10)
    c.add_argument("--max-iter", type=_positive_int, default=200)
    c.add_argument("--init", default="uniform", help="'uniform' or a JSON file with ell and a")
    c.add_argument("--out", required=True)
    c.add_argument("--trace")
    c.add_argument("--no-timestamp", action="store_true")
    c.set_defaults(func=cmd_density_iterate)

    g = sub.add_parser("measure").add_subparsers(dest="cmd", required=True)
    c = g.add_parser("orbit", help="orbit of a point mass under the normalised stage operator")
    c.add_argument("--x", type=_decimal, required=True)
    c.add_argument("--steps", type=_positive_int, default=50)
    c.add_argument("--bins", type=_positive_int, default=2**14)
    c.add_argument("--fstar")
    c.add_argument("--m", type=_positive_int, default=64)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_measure_orbit)

    g = sub.add_parser("sim").add_subparsers(dest="cmd", required=True)
    c = g.add_parser("run", help="multi-stage parking simulation")
    c.add_argument("--length", type=_length, default=1e6)
    c.add_argument("--stages", type=_positive_int, default=10)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_sim_run)
    c = g.add_parser("renyi", help="single-stage parking coverage")
    c.add_argument("--length", type=_length, default=1e6)
    c.add_argument("--trials", type=_positive_int, default=20)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_sim_renyi)

    c = sub.add_parser("report", help="cross-check certificate, density and simulation")
    c.add_argument("--cert", required=True)
    c.add_argument("--fstar")
    c.add_argument("--sim")
    c.add_argument("--out", default="-")
    c.add_argument("--markdown")
    c.add_argument("--no-timestamp", action="store_true")
    c.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
