"""Command-line front end: ``fracpoisson {pmf,simulate,ml,check,info}``.

Exit codes: 0 success (all checks pass), 1 check failure or series
non-convergence, 2 usage error, 3 sampling stall.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import dataclass

from . import harness, pmf, simulate, specfun
from .errors import InvalidParameter, NonConvergence, SamplingStall
from .pmf import CompositeParams, GegenbauerParams, ProcessParams

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_STALL = 0, 1, 2, 3

DEFAULT_TOL = 1e-12
DEFAULT_KMAX = 20
DEFAULT_N = 100_000
DEFAULT_SEED = 0

# flags each family accepts besides --lambda
FAMILY_FLAGS = {
    "poisson": (),
    "tfpp": ("beta",),
    "sfpp": ("alpha",),
    "tsfpp": ("alpha", "beta"),
    "tempered-sfpp": ("alpha", "mu"),
    "tempered-tsfpp": ("alpha", "beta", "mu", "nu"),
    "gegenbauer": ("d", "u"),
    "gegenbauer-ts": ("d", "u", "beta"),
    "composite": ("alpha", "alpha2"),
}
REQUIRED_FLAGS = {
    "gegenbauer": ("d", "u"),
    "gegenbauer-ts": ("d", "u"),
    "composite": ("alpha", "alpha2"),
}
SIMULATED_FAMILIES = pmf.PROPER_FAMILIES
PARAM_FLAGS = ("alpha", "beta", "mu", "nu", "d", "u", "alpha2")

FORMULAS = (
    ("poisson", "exp(-lam t (1-w))", "--lambda"),
    ("tfpp", "E_beta(-lam t^beta (1-w))", "--lambda --beta"),
    ("sfpp", "exp(-lam^alpha t (1-w)^alpha)", "--lambda --alpha"),
    ("tsfpp", "E_beta(-lam^alpha t^beta (1-w)^alpha)", "--lambda --alpha --beta"),
    ("tempered-sfpp", "exp(-t((mu + lam(1-w))^alpha - mu^alpha))", "--lambda --alpha --mu"),
    ("tempered-tsfpp", "Laplace transform phi(s) / (s (phi(s) + A(w))), "
                       "phi = (s+nu)^beta - nu^beta, A = (mu + lam(1-w))^alpha - mu^alpha",
     "--lambda --alpha --beta --mu --nu"),
    ("gegenbauer", "exp(-lam^(2d) t (1 - 2uw + w^2)^d)", "--lambda --d --u"),
    ("gegenbauer-ts", "E_beta(-lam^(2d) t^beta (1 - 2uw + w^2)^d)", "--lambda --d --u --beta"),
    ("composite", "exp(-lam t ((1-w)^alpha + (1-w)^alpha2))", "--lambda --alpha --alpha2"),
)


class UsageError(Exception):
    """Invalid flag combination; reported with exit code 2."""


@dataclass(frozen=True)
class CliConfig:
    """Validated command, model parameters and output target."""

    command: str
    family: str | None = None
    params: object = None
    out: str | None = None
    fmt: str = "csv"


# ---------------------------------------------------------------------------
# parsing


def _float_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, "
                                         f"got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_family_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", required=True, choices=pmf.FAMILIES)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    for name in PARAM_FLAGS:
        p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--t", type=_float_list, required=True, help="comma-separated times")
    p.add_argument("--out", default=None, help="output path (default: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracpoisson", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", help="state probabilities P(k, t)")
    _add_family_flags(p)
    p.add_argument("--kmax", type=int, default=DEFAULT_KMAX)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")

    p = sub.add_parser("simulate", help="Monte Carlo counts N(t)")
    _add_family_flags(p)
    p.add_argument("--n", type=int, default=DEFAULT_N)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--grid-dt", dest="grid_dt", type=float, default=None,
                   help="inverse-subordinator grid step (default 0.01 t)")
    p.add_argument("--empirical-pmf", dest="empirical", action="store_true",
                   help="write the histogram on k = 0..kmax instead of raw counts")
    p.add_argument("--kmax", type=int, default=DEFAULT_KMAX)

    p = sub.add_parser("ml", help="Mittag-Leffler / Prabhakar function value")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = sub.add_parser("check", help="run validation suites and write a JSONL report")
    p.add_argument("--suite", choices=harness.SUITES + ("all",), default="all")
    p.add_argument("--seed", type=int, default=harness.DEFAULT_SEED)
    p.add_argument("--fresh-seed", dest="fresh_seed", action="store_true",
                   help="draw a new seed from system entropy (recorded in the header)")
    p.add_argument("--out", default=None)

    sub.add_parser("info", help="families, generating functions and flags")
    return parser


def make_params(family: str, args: argparse.Namespace):
    """Validate the parameter flags against ``family`` and build its parameters."""
    allowed = FAMILY_FLAGS[family]
    given = {name: getattr(args, name) for name in PARAM_FLAGS
             if getattr(args, name) is not None}
    extra = sorted(set(given) - set(allowed))
    if extra:
        flags = ", ".join(f"--{x}" for x in extra)
        raise UsageError(f"{flags} not used by family {family} "
                         f"(accepted: --lambda {' '.join('--' + a for a in allowed)})".rstrip())
    missing = [x for x in REQUIRED_FLAGS.get(family, ()) if x not in given]
    if missing:
        raise UsageError(f"family {family} requires {', '.join('--' + x for x in missing)}")
    lam = args.lam
    if family in ("gegenbauer", "gegenbauer-ts"):
        return GegenbauerParams(lam, given["d"], given["u"], given.get("beta", 1.0))
    if family == "composite":
        return CompositeParams(lam, given["alpha"], given["alpha2"])
    return ProcessParams(lam, alpha=given.get("alpha", 1.0), beta=given.get("beta", 1.0),
                         mu=given.get("mu", 0.0), nu=given.get("nu", 0.0))


def _params_dict(params) -> dict:
    return {k: float(v) for k, v in vars(params).items()}


# ---------------------------------------------------------------------------
# output


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        harness.atomic_write(out, text)


def _num(x) -> str:
    return repr(float(x))


def format_pmf_csv(table: pmf.PmfTable) -> str:
    buf = io.StringIO()
    buf.write("k,t,p,terms_used\n")
    for i, t in enumerate(table.t):
        for k in range(table.k_max + 1):
            buf.write(f"{k},{_num(t)},{_num(table.values[k, i])},{int(table.terms_used[k, i])}\n")
    return buf.getvalue()


def format_pmf_json(table: pmf.PmfTable) -> str:
    rows = [{"k": k, "t": float(t), "p": float(table.values[k, i]),
             "terms_used": int(table.terms_used[k, i])}
            for i, t in enumerate(table.t) for k in range(table.k_max + 1)]
    doc = {"family": table.family, "params": _params_dict(table.params),
           "columns": ["k", "t", "p", "terms_used"], "rows": rows}
    return json.dumps(doc, indent=1) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_pmf(args) -> int:
    params = make_params(args.family, args)
    if args.kmax < 0:
        raise UsageError(f"--kmax must be >= 0, got {args.kmax}")
    config = specfun.SeriesConfig(rel_tol=args.tol)
    table = pmf.pmf_table(params, args.kmax, args.t, config, family=args.family)
    text = format_pmf_json(table) if args.fmt == "json" else format_pmf_csv(table)
    _emit(text, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.family not in SIMULATED_FAMILIES:
        raise UsageError(f"family {args.family} is not a counting process and cannot be "
                         f"simulated (choose from {', '.join(SIMULATED_FAMILIES)})")
    params = make_params(args.family, args)
    if len(args.t) != 1:
        raise UsageError("simulate takes a single --t value")
    t = args.t[0]
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    if args.stream < 0:
        raise UsageError(f"--stream must be >= 0, got {args.stream}")
    grid_dt = args.grid_dt if args.grid_dt is not None else 0.01 * t
    if not grid_dt > 0 and t > 0:
        raise UsageError(f"--grid-dt must be > 0, got {grid_dt}")
    spec = simulate.RngSpec(args.seed, args.stream)
    sample = simulate.sample_process(params, t, args.n, spec, grid_dt if t > 0 else None)
    meta = {"family": args.family, **_params_dict(params), "t": t, "n": args.n,
            "seed": args.seed, "stream": args.stream, "grid_dt": grid_dt}
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    if args.empirical:
        buf.write("k,p\n")
        for k, p in enumerate(sample.empirical_pmf(args.kmax)):
            buf.write(f"{k},{_num(p)}\n")
    else:
        buf.write("count\n")
        buf.write("".join(f"{c}\n" for c in sample.counts))
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_ml(args) -> int:
    config = specfun.SeriesConfig(rel_tol=args.tol)
    if args.c == 1:
        value = specfun.mittag_leffler(args.a, args.b, args.z, config)
    else:
        value = specfun.prabhakar_ml(args.a, args.b, args.c, args.z, config)
    print(_num(value))
    return EXIT_OK


def cmd_check(args) -> int:
    seed = harness.fresh_seed() if args.fresh_seed else args.seed
    reports = harness.run_suite(args.suite, seed)
    text = "\n".join(harness.report_lines(args.suite, seed, reports)) + "\n"
    _emit(text, args.out)
    failed = [r.check_id for r in reports if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(reports)} checks failed: {', '.join(failed)}",
              file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_info(args) -> int:
    width = max(len(f) for f, _, _ in FORMULAS)
    print("Generating functions in w = 1/z (P(k,t) is the coefficient of w^k):")
    for family, formula, flags in FORMULAS:
        print(f"  {family:<{width}}  {formula}")
        print(f"  {'':<{width}}  flags: {flags}")
    print()
    print("Parameter ranges: lambda > 0; alpha, beta, alpha2 in (0, 1]; mu, nu >= 0; "
          "d in (0, 1/2]; |u| <= 1")
    print("Check suites: " + ", ".join(harness.SUITES + ("all",)))
    print("Exit codes: 0 success, 1 check failure, 2 usage error, 3 sampling stall")
    return EXIT_OK


COMMANDS = {"pmf": cmd_pmf, "simulate": cmd_simulate, "ml": cmd_ml, "check": cmd_check,
            "info": cmd_info}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, InvalidParameter) as exc:
        print(f"fracpoisson {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SamplingStall as exc:
        print(f"fracpoisson {args.command}: sampling stalled: {exc}", file=sys.stderr)
        return EXIT_STALL
    except NonConvergence as exc:
        print(f"fracpoisson {args.command}: series did not converge: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
