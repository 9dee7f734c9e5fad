"""Command-line interface: ``roughcb {analytic,simulate,validate}``.

Every data file is UTF-8 CSV with LF line endings whose first line is
``#`` followed by a JSON metadata object.  Floats use the shortest
round-trip representation, so files are byte-reproducible.  Wall-clock
information goes to a ``.log`` sidecar, never into the data.

Exit codes: 0 success, 1 validation failure, 2 bad flags, 3 infeasible
discretisation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import __version__, analytics
from .errors import DomainError, ParameterError
from .model import ModelParams
from .prelimit import make_discrete
from .simulate import RNG_ALGORITHM, McConfig, censored_fraction, run_monte_carlo
from .validation import BatteryConfig, run_battery

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


class UsageError(Exception):
    pass


# CSV serialisation ------------------------------------------------------------


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    text = str(value)
    if any(ch in text for ch in ',"\n\r'):
        raise ValueError(f"cell {text!r} needs quoting, which the format does not use")
    return text


def parse_cell(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def render_csv(metadata: dict, header: list[str], rows: list[list]) -> str:
    lines = ["#" + json.dumps(metadata, sort_keys=True, separators=(",", ":"))]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> tuple[dict, list[str], list[list]]:
    lines = text.split("\n")
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing metadata line")
    metadata = json.loads(lines[0][1:])
    header = lines[1].split(",")
    rows = [[parse_cell(c) for c in line.split(",")] for line in lines[2:] if line != ""]
    return metadata, header, rows


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _sidecar(path: str | None, info: dict) -> None:
    if path is None or path == "-":
        return
    with open(path + ".log", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(info, sort_keys=True) + "\n")


def _metadata(command: str, parameters: dict, seed: int | None = None) -> dict:
    meta = {"tool_version": __version__, "command": command, "parameters": parameters}
    if seed is not None:
        meta["master_seed"] = seed
        meta["rng_algorithm"] = RNG_ALGORITHM
    return meta


# Flag parsing -------------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of reals: {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _model_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--alpha", type=float, required=True)
    ap.add_argument("--b", type=float, required=True)
    ap.add_argument("--c", type=float, required=True)
    ap.add_argument("--zeta", type=float, default=1.0)


def _params(args) -> ModelParams:
    p = ModelParams(args.alpha, args.b, args.c)
    if not args.zeta > 0 or not math.isfinite(args.zeta):
        raise DomainError(f"zeta must be positive, got {args.zeta}")
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="roughcb", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analytic", help="closed-form laws on t and lambda grids")
    _model_flags(a)
    a.add_argument("--t-grid", type=_float_list)
    a.add_argument("--lambda-grid", type=_float_list)
    a.add_argument("--out", help="output CSV (default stdout)")

    s = sub.add_parser("simulate", help="Monte Carlo aggregates of the level-n model")
    _model_flags(s)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--samples", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--t-grid", type=_float_list)
    s.add_argument("--jump-cap", type=int, default=10**7)
    s.add_argument("--threads", type=int, default=1, help="worker processes")
    s.add_argument("--out", help="per-sample CSV (default stdout)")
    s.add_argument("--mass-out", help="mass-profile CSV (default: <out stem>_mass.csv)")

    v = sub.add_parser("validate", help="Monte Carlo versus analytic battery")
    _model_flags(v)
    v.add_argument("--n-list", type=_int_list, default=[1024])
    v.add_argument("--samples", type=int, default=5000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--threads", type=int, default=1)
    v.add_argument("--excursions", type=int, default=100_000)
    v.add_argument("--excursion-n", type=int, default=256)
    v.add_argument("--tail-samples", type=int)
    v.add_argument("--jump-cap", type=int, default=10**7)
    v.add_argument("--perturb", type=float, default=0.0, help="scale analytic targets by 1+perturb")
    v.add_argument("--skip-excursions", action="store_true")
    v.add_argument("--skip-tails", action="store_true")
    v.add_argument("--out", help="report CSV (default stdout)")
    return ap


# Commands -----------------------------------------------------------------------

ANALYTIC_HEADER = ["quantity", "alpha", "b", "c", "zeta", "t", "lambda", "value"]


def analytic_rows(p: ModelParams, zeta: float, t_grid, lam_grid) -> list[list]:
    a, b, c = p.alpha, p.b, p.c
    rows = []

    def row(q, t, lam, value):
        rows.append([q, a, b, c, zeta, t, lam, float(value)])

    ext = analytics.extinction_tail_asymptote(p, zeta)
    prog = analytics.progeny_tail_asymptote(p, zeta)
    row("tail_tau_const", None, None, ext.constant)
    row("tail_tau_exp", None, None, ext.exponent)
    row("tail_T_const", None, None, prog.constant)
    row("tail_T_exp", None, None, prog.exponent)
    f_ext, f_prog = analytics.feller_asymptotes(b, c, zeta)
    row("feller_tail_tau_const", None, None, f_ext.constant)
    row("feller_tail_tau_exp", None, None, f_ext.exponent)
    row("feller_tail_T_const", None, None, f_prog.constant)
    row("feller_tail_T_exp", None, None, f_prog.exponent)
    for t in t_grid:
        row("vbar", t, None, analytics.vbar(p, t))
        row("survival_tau", t, None, analytics.extinction_survival(p, zeta, t))
        row("mean_mass", t, None, analytics.mean_mass(p, zeta, t))
        row("feller_survival_tau", t, None, analytics.feller_survival(b, c, zeta, t))
        for lam in lam_grid:
            row("v", t, lam, analytics.extinction_exponent(p, t, lam))
            row("laplace_mass", t, lam, analytics.mass_laplace(p, zeta, t, lam))
            row("feller_laplace_mass", t, lam, analytics.feller_mass_laplace(b, c, zeta, t, lam))
    for lam in lam_grid:
        row("V_T", None, lam, analytics.progeny_exponent(p, lam))
        row("laplace_T", None, lam, analytics.progeny_laplace(p, zeta, lam))
        row("feller_laplace_T", None, lam, analytics.feller_progeny_laplace(b, c, zeta, lam))
    return rows


def cmd_analytic(args) -> int:
    if args.t_grid is None and args.lambda_grid is None:
        raise UsageError("give at least one of --t-grid / --lambda-grid")
    p = _params(args)
    t_grid = args.t_grid or []
    lam_grid = args.lambda_grid or []
    if any(not t > 0 for t in t_grid):
        raise DomainError("t-grid values must be positive")
    if any(not lam >= 0 for lam in lam_grid):
        raise DomainError("lambda-grid values must be nonnegative")
    meta = _metadata(
        "analytic",
        {"model": p.as_dict(), "zeta": args.zeta, "t_grid": t_grid, "lambda_grid": lam_grid},
    )
    _emit(render_csv(meta, ANALYTIC_HEADER, analytic_rows(p, args.zeta, t_grid, lam_grid)), args.out)
    return EXIT_OK


def _mass_path(args) -> str | None:
    if args.mass_out:
        return args.mass_out
    if args.out and args.out != "-":
        path = Path(args.out)
        return str(path.with_name(path.stem + "_mass" + (path.suffix or ".csv")))
    return None


def cmd_simulate(args) -> int:
    p = _params(args)
    if args.samples < 1:
        raise DomainError("--samples must be positive")
    if args.threads < 1:
        raise DomainError("--threads must be positive")
    if not 0 <= args.seed < 2**64:
        raise DomainError("--seed must be a 64-bit unsigned integer")
    if args.n < 1:
        raise DomainError("--n must be a positive integer")
    dm = make_discrete(p, args.n)  # ParameterError -> exit 3
    t_grid = tuple(args.t_grid) if args.t_grid else (0.0,)
    mass_path = _mass_path(args) if args.t_grid else None
    if args.t_grid and mass_path is None:
        raise UsageError("--t-grid needs --out or --mass-out for the mass file")
    cfg = McConfig(dm, args.zeta, t_grid, args.samples, args.seed, args.jump_cap)
    started = time.time()
    samples = run_monte_carlo(cfg, args.threads)
    elapsed = time.time() - started
    params = {
        "model": p.as_dict(),
        "zeta": args.zeta,
        "n": args.n,
        "gamma_n": dm.gamma_n,
        "c0": dm.c0,
        "excursion_count": dm.excursion_count(args.zeta),
        "samples": args.samples,
        "jump_cap": args.jump_cap,
        "t_grid": list(args.t_grid) if args.t_grid else None,
    }
    meta = _metadata("simulate", params, args.seed)
    rows = [[s.sample_index, s.extinction_time, s.total_progeny, s.censored] for s in samples]
    _emit(render_csv(meta, ["sample_id", "extinction_time", "total_progeny", "censored"], rows), args.out)
    if mass_path is not None:
        mrows = [[s.sample_index, t, m] for s in samples for t, m in s.mass_profile]
        _emit(render_csv(meta, ["sample_id", "t", "mass"], mrows), mass_path)
    frac = censored_fraction(samples)
    _sidecar(args.out, {"elapsed_seconds": elapsed, "censored_fraction": frac, "threads": args.threads})
    print(f"censored fraction: {frac:.6g}", file=sys.stderr)
    return EXIT_OK


REPORT_HEADER = ["name", "analytic", "empirical", "std_error", "z", "abs_tol", "pass"]


def report_csv(report) -> str:
    rows = [[r.name, r.analytic, r.empirical, r.std_error, r.z, r.abs_tol, r.passed] for r in report.rows]
    meta = _metadata("validate", report.metadata, report.metadata.get("seed"))
    return render_csv(meta, REPORT_HEADER, rows)


def cmd_validate(args) -> int:
    p = _params(args)
    for n in args.n_list:
        make_discrete(p, n)
    if args.samples < 1 or args.excursions < 1 or args.threads < 1:
        raise DomainError("--samples, --excursions and --threads must be positive")
    if not 0 <= args.seed < 2**64:
        raise DomainError("--seed must be a 64-bit unsigned integer")
    cfg = BatteryConfig(
        params=p,
        zeta=args.zeta,
        n_list=tuple(args.n_list),
        samples=args.samples,
        seed=args.seed,
        workers=args.threads,
        excursion_n=args.excursion_n,
        excursions=args.excursions,
        tail_samples=args.tail_samples,
        jump_cap=args.jump_cap,
        perturb=args.perturb,
        run_excursions=not args.skip_excursions,
        run_tails=not args.skip_tails,
    )
    started = time.time()
    report = run_battery(cfg)
    _emit(report_csv(report), args.out)
    _sidecar(args.out, {"elapsed_seconds": time.time() - started, "threads": args.threads})
    for r in report.failures():
        print(f"FAIL {r.name}: analytic={r.analytic!r} empirical={r.empirical!r} z={r.z:.3g}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {"analytic": cmd_analytic, "simulate": cmd_simulate, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DomainError) as exc:
        print(f"roughcb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"roughcb: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["main", "build_parser", "render_csv", "parse_csv", "cmd_analytic", "cmd_simulate", "cmd_validate"]
