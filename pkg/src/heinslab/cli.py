"""Command-line interface: ``heinslab {fixpoint,heins,kobayashi,trace,verify}``.

Every subcommand builds a JSON report (schema ``heinslab/1``) that is
byte-identical for identical input file, seed and flags. A human summary
goes to stdout unless ``--quiet``; ``--json PATH`` writes the report
(``-`` for stdout).

Exit codes:

    0  success
    1  ``verify`` found at least one failing invariant
    2  bad input: unreadable file, parse error, point outside its domain
    3  no convergence, or a fixed point that is not attracting
    4  the map does not have relatively compact image (or is not a self-map)
    5  ``heins --fd-check`` disagreement above 1e-5
"""

from __future__ import annotations

import argparse
import sys
import time

from . import __version__
from .domains import PointOutsideDomain
from .dynamics import (EvaluationFailure, IterateLeftDomain, MaxIterationsExceeded,
                       check_compact_image, iterate_to_fixed_point, orbit_trace)
from .errors import HeinslabError
from .expr import ParseError
from .heins import HolcViolation, InconsistentCertificate, ParametricFamily, heins_differential
from .io import (SCHEMA, complex_vector_to_json, dumps_report, parse_vector_arg,
                 read_map_file)
from .verify import verify_builtin, verify_definition

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_NOT_HOLC = 4
EXIT_FD_MISMATCH = 5

FD_AGREEMENT_LIMIT = 1e-5
IMAGE_MARGIN = 1e-6


class CliError(Exception):
    def __init__(self, code: int, message: str, witness=None):
        super().__init__(message)
        self.code = code
        self.witness = witness


# ------------------------------------------------------------------ helpers


def _vector(text: str | None, what: str):
    if text is None:
        return None
    try:
        return parse_vector_arg(text)
    except ValueError as exc:
        raise CliError(EXIT_BAD_INPUT, f"{what}: {exc}") from None


def _load(path: str):
    try:
        return read_map_file(path)
    except OSError as exc:
        raise CliError(EXIT_BAD_INPUT, f"cannot read {path}: {exc.strerror or exc}") from None
    except (ParseError, ValueError, HeinslabError) as exc:
        raise CliError(EXIT_BAD_INPUT, f"{path}: {exc}") from None


def _params(defn, at, required: bool):
    """Parameter value for a family (``--at`` or the parameter-domain center)."""
    if defn.param_domain is None:
        if required:
            raise CliError(EXIT_BAD_INPUT, "this command needs a map file with a 'params' block")
        if at is not None:
            raise CliError(EXIT_BAD_INPUT, "--at given but the map has no parameters")
        return []
    y = list(defn.param_domain.center) if at is None else at
    if len(y) != defn.param_domain.n:
        raise CliError(EXIT_BAD_INPUT, f"--at needs {defn.param_domain.n} coordinates, got {len(y)}")
    if not defn.param_domain.contains(y):
        raise CliError(EXIT_BAD_INPUT, f"--at {_fmt(y)} is outside the parameter domain", tuple(y))
    return y


def _check_point(dom, z, flag: str):
    if z is None:
        return
    if len(z) != dom.n:
        raise CliError(EXIT_BAD_INPUT, f"{flag} needs {dom.n} coordinates, got {len(z)}")
    if not dom.contains(z):
        raise CliError(EXIT_BAD_INPUT, f"{flag} {_fmt(z)} is outside the {dom.kind}", tuple(z))


def _require_holc(defn, y, seed: int) -> dict:
    try:
        report = check_compact_image(defn.map, defn.domain, y, IMAGE_MARGIN, seed=seed)
    except EvaluationFailure as exc:
        raise CliError(EXIT_NOT_HOLC, str(exc), exc.witness) from None
    if not report.is_compact:
        raise CliError(
            EXIT_NOT_HOLC,
            f"image is not relatively compact: boundary margin {report.min_boundary_margin:.3e} "
            f"< {IMAGE_MARGIN} at witness {_fmt(report.witness)}", report.witness)
    return report.to_json()


# ---------------------------------------------------------------- commands


def cmd_fixpoint(args) -> tuple[dict, list[str], int]:
    defn, digest = _load(args.file)
    start = _vector(args.start, "--start")
    y = _params(defn, _vector(args.at, "--at"), required=False)
    _check_point(defn.domain, start, "--start")
    holc = _require_holc(defn, y, args.seed)
    try:
        res = iterate_to_fixed_point(defn.map, defn.domain, y, start, args.tol, args.max_iter,
                                     record_orbit=args.trace)
    except MaxIterationsExceeded as exc:
        raise CliError(EXIT_NO_CONVERGENCE, str(exc), exc.last_iterate) from None
    except IterateLeftDomain as exc:
        raise CliError(EXIT_NOT_HOLC, str(exc), exc.witness) from None
    result = res.to_json(include_orbit=args.trace)
    result["compact_image"] = holc
    if y:
        result["params"] = complex_vector_to_json(y)
    lines = [
        f"tau             = {_fmt(res.fixed_point)}",
        f"iterations      = {res.iterations}",
        f"residual        = {res.residual:.3e}",
        f"spectral radius = {res.spectral_radius:.12g}",
    ]
    code = EXIT_OK
    if not res.converged:
        lines.append("fixed point is not attracting (spectral radius >= 1)")
        code = EXIT_NO_CONVERGENCE
    return {"input_digest": digest, "result": result}, lines, code


def cmd_heins(args) -> tuple[dict, list[str], int]:
    defn, digest = _load(args.file)
    y0 = _params(defn, _vector(args.at, "--at"), required=True)
    try:
        family = ParametricFamily(defn.map, defn.domain, defn.param_domain, seed=args.seed,
                                  image_margin=IMAGE_MARGIN)
    except HolcViolation as exc:
        raise CliError(EXIT_NOT_HOLC, str(exc), exc.report.witness) from None
    except EvaluationFailure as exc:
        raise CliError(EXIT_NOT_HOLC, str(exc), exc.witness) from None
    try:
        report = heins_differential(family, y0, fd_step=args.step if args.fd_check else None)
    except PointOutsideDomain as exc:
        raise CliError(EXIT_BAD_INPUT, f"{exc} (finite-difference step too large?)", exc.point) from None
    except MaxIterationsExceeded as exc:
        raise CliError(EXIT_NO_CONVERGENCE, str(exc), exc.last_iterate) from None
    except InconsistentCertificate as exc:
        raise CliError(EXIT_NO_CONVERGENCE, str(exc)) from None
    except IterateLeftDomain as exc:
        raise CliError(EXIT_NOT_HOLC, str(exc), exc.witness) from None
    lines = [
        f"y0              = {_fmt(report.y0)}",
        f"tau             = {_fmt(report.tau)}",
        f"d_tau           = {_fmt_matrix(report.d_tau)}",
        f"spectral radius = {report.spectral_radius:.12g}",
    ]
    code = EXIT_OK
    if report.fd_agreement is not None:
        lines.append(f"fd agreement    = {report.fd_agreement:.3e} (step {args.step:g})")
        if report.fd_agreement > FD_AGREEMENT_LIMIT:
            lines.append(f"formula and finite differences disagree by more than {FD_AGREEMENT_LIMIT:g}")
            code = EXIT_FD_MISMATCH
    return {"input_digest": digest, "result": report.to_json()}, lines, code


def cmd_kobayashi(args) -> tuple[dict, list[str], int]:
    defn, digest = _load(args.file)
    z = _vector(args.z, "--from")
    w = _vector(args.w, "--to")
    _check_point(defn.domain, z, "--from")
    _check_point(defn.domain, w, "--to")
    dist = defn.domain.kobayashi_distance(z, w)
    result = {"from": complex_vector_to_json(z), "to": complex_vector_to_json(w),
              "domain": defn.domain.kind, "distance": dist}
    return {"input_digest": digest, "result": result}, [f"k(z, w) = {dist:.12g}"], EXIT_OK


def cmd_trace(args) -> tuple[dict, list[str], int]:
    defn, digest = _load(args.file)
    start = _vector(args.start, "--start")
    y = _params(defn, _vector(args.at, "--at"), required=False)
    _check_point(defn.domain, start, "--start")
    try:
        orbit = orbit_trace(defn.map, defn.domain, y, start, args.count)
    except IterateLeftDomain as exc:
        raise CliError(EXIT_NOT_HOLC, str(exc), exc.witness) from None
    except ValueError as exc:
        raise CliError(EXIT_BAD_INPUT, str(exc)) from None
    result = {"orbit": [complex_vector_to_json(p) for p in orbit]}
    lines = [f"{k:>4}  {_fmt(p)}" for k, p in enumerate(orbit, 1)]
    return {"input_digest": digest, "result": result}, lines, EXIT_OK


def cmd_verify(args) -> tuple[dict, list[str], int]:
    if args.builtin_fixtures:
        digest = "builtin-fixtures"
        checks = verify_builtin(args.seed)
    else:
        defn, digest = _load(args.file)
        y0 = None
        if args.at is not None:
            y0 = _params(defn, _vector(args.at, "--at"), required=True)
        checks = verify_definition(defn, args.seed, y0)
    counts = {s: sum(c.status == s for c in checks) for s in ("pass", "fail", "skip")}
    result = {"checks": [c.to_json() for c in checks], "summary": counts,
              "passed": counts["fail"] == 0}
    lines = [f"{c.status.upper():4}  {c.subject:<28} {c.anchor}" for c in checks]
    lines.append(f"{counts['pass']} passed, {counts['fail']} failed, {counts['skip']} skipped")
    code = EXIT_OK if counts["fail"] == 0 else EXIT_VERIFY_FAILED
    return {"input_digest": digest, "result": result}, lines, code


# --------------------------------------------------------------- formatting


def _fmt_c(c: complex) -> str:
    return f"{c.real:.12g}{c.imag:+.12g}i"


def _fmt(v) -> str:
    return "[" + ", ".join(_fmt_c(complex(c)) for c in v) + "]"


def _fmt_matrix(m) -> str:
    return "[" + ", ".join(_fmt(row) for row in m) + "]"


# ------------------------------------------------------------------- parser

COMMANDS = {
    "fixpoint": cmd_fixpoint,
    "heins": cmd_heins,
    "kobayashi": cmd_kobayashi,
    "trace": cmd_trace,
    "verify": cmd_verify,
}

# per-command flags echoed into the report
_FLAGS = {
    "fixpoint": ("start", "at", "tol", "max_iter", "trace"),
    "heins": ("at", "fd_check", "step"),
    "kobayashi": ("z", "w"),
    "trace": ("start", "at", "count"),
    "verify": ("builtin_fixtures", "at"),
}


def _uint(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def _positive_int(text: str) -> int:
    v = _uint(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _add_common(p: argparse.ArgumentParser, defaults: bool) -> None:
    kw = {} if defaults else {"default": argparse.SUPPRESS}
    p.add_argument("--seed", type=_uint, help="seed for all sampling (default 0)",
                   **({"default": 0} if defaults else kw))
    p.add_argument("--json", metavar="PATH", help="write the JSON report to PATH ('-' for stdout)",
                   **({"default": None} if defaults else kw))
    p.add_argument("--quiet", action="store_true", help="suppress the human-readable summary",
                   **({"default": False} if defaults else kw))
    p.add_argument("--timings", action="store_true",
                   help="add wall-clock times to the report (breaks byte-identical output)",
                   **({"default": False} if defaults else kw))


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="heinslab", description=__doc__.split("\n")[0],
                             formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"heinslab {__version__}")
    _add_common(parser, defaults=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    vec = "JSON vector, e.g. '[[0.5, 0]]' or '[0.5]'"

    p = sub.add_parser("fixpoint", help="iterate to the unique fixed point")
    p.add_argument("file")
    p.add_argument("--start", help=f"starting point ({vec}); default the domain center")
    p.add_argument("--at", help=f"parameter value for families ({vec}); default the parameter center")
    p.add_argument("--tol", type=_positive_float, default=1e-10)
    p.add_argument("--max-iter", type=_positive_int, default=100_000)
    p.add_argument("--trace", action="store_true", help="include the orbit in the report")

    p = sub.add_parser("heins", help="differential of the fixed point with respect to parameters")
    p.add_argument("file")
    p.add_argument("--at", help=f"base parameter y0 ({vec}); default the parameter center")
    p.add_argument("--fd-check", action="store_true", help="compare with central differences")
    p.add_argument("--step", type=_positive_float, default=1e-4, help="finite-difference step")

    p = sub.add_parser("kobayashi", help="Kobayashi distance between two points of the domain")
    p.add_argument("file")
    p.add_argument("--from", dest="z", required=True, help=vec)
    p.add_argument("--to", dest="w", required=True, help=vec)

    p = sub.add_parser("trace", help="print the first iterates of a starting point")
    p.add_argument("file")
    p.add_argument("--start", help=vec)
    p.add_argument("--at", help=vec)
    p.add_argument("--count", type=_positive_int, default=10)

    p = sub.add_parser("verify", help="run the invariant suite")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("file", nargs="?")
    src.add_argument("--builtin-fixtures", action="store_true")
    p.add_argument("--at", help="base parameter for a family file")

    for sp in sub.choices.values():
        _add_common(sp, defaults=False)
    return parser


def _report_head(args) -> dict:
    return {
        "schema": SCHEMA,
        "tool_version": __version__,
        "command": args.command,
        "seed": args.seed,
        "flags": {k: getattr(args, k) for k in _FLAGS[args.command]},
    }


def _emit(report: dict, args) -> None:
    if args.json is None:
        return
    text = dumps_report(report)
    if args.json == "-":
        sys.stdout.write(text)
    else:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    report = _report_head(args)
    t0 = time.perf_counter()
    try:
        body, lines, code = COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        report.update(status="error", exit_code=exc.code, error=str(exc),
                      witness=None if exc.witness is None else complex_vector_to_json(exc.witness))
        _emit(report, args)
        return exc.code
    report.update(body)
    report["status"] = "ok" if code == EXIT_OK else "fail"
    report["exit_code"] = code
    if args.timings:
        report["wall_time_s"] = time.perf_counter() - t0
    if not args.quiet:
        out = sys.stderr if args.json == "-" else sys.stdout
        for line in lines:
            print(line, file=out)
    _emit(report, args)
    return code


if __name__ == "__main__":
    sys.exit(main())
