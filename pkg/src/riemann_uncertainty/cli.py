"""Command-line front end.

Exit codes: 0 ok, 1 usage, 2 numeric failure, 3 direct-inequality
violation, 4 printed-form mismatch.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import mpmath

from . import __version__
from .errors import NumericError
from .fock import TruncationPolicy
from .numeric import complex_str, parse_complex, real_str, workprec
from .rh_scan import ScanConfig, run_scan, scan_csv
from .uncertainty import Classification, EvaluationMode, check_uncertainty, critical_pair, random_campaign
from .zeta_core import (PrecisionConfig, ZetaSeries, atomic_write_text, eval_zeta, find_zero_near,
                        load_or_compute_series, argument_principle_count)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VIOLATION, EXIT_MISMATCH = 0, 1, 2, 3, 4

log = logging.getLogger("riemann_uncertainty")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    command: str
    config_echo: dict
    precision: dict
    series_fingerprint: str | None = None
    wall_time_ms: int = 0
    tool_version: str = __version__
    outputs: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=1, sort_keys=True) + "\n"


class Run:
    """Per-invocation state: buffered stdout and the manifest being assembled."""

    def __init__(self, command: str, args: argparse.Namespace, argv: list[str]):
        self.command = command
        self.args = args
        self.argv = argv
        self.stdout = io.StringIO()
        self.fingerprint = None
        self.precision = {}
        self.outputs = {}

    def print(self, *parts):
        print(*parts, file=self.stdout)

    def write_file(self, path: Path, text: str):
        atomic_write_text(path, text)
        self.outputs[str(path)] = hashlib.sha256(text.encode()).hexdigest()


def _complex_arg(text: str):
    try:
        return parse_complex(text, 256)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_prec(fallback: int) -> int:
    env = os.environ.get("RIEMANN_PREC_BITS")
    return int(env) if env else fallback


def _digits(bits: int) -> int:
    return max(6, int(bits * math.log10(2)) - 6)


# ---------------------------------------------------------------- commands


def cmd_zeta(run: Run) -> int:
    a = run.args
    cfg = PrecisionConfig.for_bits(a.prec)
    run.precision = cfg.to_dict()
    val = eval_zeta(a.s, cfg)
    d = _digits(a.prec)
    with workprec(a.prec):
        if abs(val.imag) <= cfg.target_abs_err:
            run.print(mpmath.nstr(val.real, d))
        else:
            sign = "-" if val.imag < 0 else "+"
            run.print(f"{mpmath.nstr(val.real, d)}{sign}{mpmath.nstr(abs(val.imag), d)}i")
    return EXIT_OK


def _series_for(a, order: int | None = None) -> tuple[ZetaSeries, bool]:
    order = a.order if order is None else order
    cfg = PrecisionConfig(bits=a.prec, target_abs_err=max(2.0 ** -(a.prec - 20), 1e-300))
    return load_or_compute_series(order, a.radius, a.samples, cfg, a.cache_dir or None)


def cmd_coeffs(run: Run) -> int:
    a = run.args
    if not 0 < a.radius < 1:
        raise UsageError(f"--radius must lie in (0, 1), got {a.radius}")
    if a.order < 0:
        raise UsageError("--order must be >= 0")
    if a.samples is not None and a.samples < 4 * (a.order + 1):
        raise UsageError("--samples must be >= 4(order+1)")
    series, hit = _series_for(a)
    run.fingerprint = series.checksum()
    run.precision = series.precision.to_dict()
    run.print(f"cache: {'hit' if hit else 'miss'}")
    run.print(f"checksum: {series.checksum()}")
    with workprec(series.precision.bits):
        for k, c in enumerate(series.coeffs):
            run.print(f"C_{k} = {mpmath.nstr(c.real, a.digits)}")
    return EXIT_OK


def _verify_series(a) -> ZetaSeries:
    if a.series == "zeta":
        series, _ = load_or_compute_series(a.order, 0.5, None,
                                           PrecisionConfig(bits=max(a.prec, 256), target_abs_err=1e-60),
                                           a.cache_dir or None)
        return series
    if a.series == "linear":
        return ZetaSeries.custom([0, 1], label="linear", bits=a.prec)
    if a.series == "constant":
        return ZetaSeries.custom([a.constant], label="constant", bits=a.prec)
    if not a.coeffs:
        raise UsageError("--series custom needs --coeffs")
    return ZetaSeries.custom([parse_complex(c, a.prec) for c in a.coeffs.split(",")],
                             label="custom", bits=a.prec)


_EXIT_FOR = {
    Classification.CONSISTENT: EXIT_OK,
    Classification.INEQUALITY_VIOLATION_DIRECT: EXIT_VIOLATION,
    Classification.PAPER_FORM_MISMATCH: EXIT_MISMATCH,
    Classification.NUMERIC_ERROR: EXIT_NUMERIC,
}


def cmd_verify(run: Run) -> int:
    a = run.args
    if a.eps is not None or a.t is not None:
        if a.eps is None or a.t is None:
            raise UsageError("--eps and --t go together")
        if a.alpha is not None or a.beta is not None:
            raise UsageError("give either --alpha/--beta or --eps/--t")
        alpha, beta = critical_pair(a.eps, a.t, a.prec)
    else:
        if a.alpha is None:
            raise UsageError("--alpha is required (or --eps/--t)")
        alpha, beta = a.alpha, a.beta if a.beta is not None else 0
    series = _verify_series(a)
    run.fingerprint = series.checksum()
    cfg = PrecisionConfig.for_bits(a.prec)
    run.precision = cfg.to_dict()
    rep = check_uncertainty(series, alpha, beta, TruncationPolicy(a.dim), a.mode, a.tol, cfg, a.route)
    run.print(rep.to_json())
    return _EXIT_FOR[rep.classification]


def cmd_campaign(run: Run) -> int:
    a = run.args
    out = random_campaign(a.trials, a.max_order, a.dim, a.max_amplitude, a.seed, a.tol)
    out["worst_relative_slack"] = repr(out["worst_relative_slack"])
    run.precision = {"bits": 64}
    run.print(json.dumps(out, indent=1, sort_keys=True))
    return EXIT_VIOLATION if out["violations"] else EXIT_OK


def _scan(run: Run, with_f: bool) -> int:
    a = run.args
    prec = PrecisionConfig(bits=a.prec, target_abs_err=max(2.0 ** -(a.prec - 56), 1e-300))
    k_orders = tuple(int(k) for k in a.k_orders.split(",")) if a.k_study else ()
    try:
        cfg = ScanConfig(a.eps, a.t_min, a.t_max, a.step, a.order, a.dim, EvaluationMode(a.mode),
                         prec, a.bisect_tol, k_orders, a.k_stride)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    run.precision = prec.to_dict()
    coeff_cfg = PrecisionConfig(bits=max(256, a.prec), target_abs_err=1e-60)
    series, _ = load_or_compute_series(a.order, 0.5, None, coeff_cfg, a.cache_dir or None)
    run.fingerprint = series.checksum()
    report = run_scan(cfg, a.threads, series, a.cache_dir or None, with_k_study=a.k_study)
    out = Path(a.out)
    name = "fig1" if with_f else "scan"
    run.write_file(out / f"{name}.csv", scan_csv(report, with_f=with_f))
    run.write_file(out / f"{name}.json", json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n")
    run.print(json.dumps({
        "rows": len(report.points), "f": real_str(report.f_value, 64),
        "crossings": len(report.crossings), "violation_intervals": len(report.violation_intervals),
        "witnesses": len(report.witnesses), "out": str(out),
    }, sort_keys=True))
    if not report.witnesses:
        run.print("hint: no witness with Re zeta <= 0 in range; extend --t-min/--t-max")
    errors = [p for p in report.points if p.error]
    return EXIT_NUMERIC if errors and len(errors) == len(report.points) else EXIT_OK


def cmd_scan(run: Run) -> int:
    return _scan(run, with_f=False)


def cmd_fig1(run: Run) -> int:
    return _scan(run, with_f=True)


def cmd_zero_find(run: Run) -> int:
    a = run.args
    cfg = PrecisionConfig.for_bits(a.prec)
    run.precision = cfg.to_dict()
    z = find_zero_near(a.t0, cfg)
    lo, hi = max(a.t0 - 1.0, 0.5), a.t0 + 1.0
    count = argument_principle_count(0.01, 0.99, lo, hi, cfg)
    bits = a.prec
    run.print(json.dumps({
        "t": real_str(z.t, bits), "residual": real_str(z.residual, 64),
        "bracket": [real_str(z.bracket[0], bits), real_str(z.bracket[1], bits)],
        "window": [repr(lo), repr(hi)], "zeros_in_window": count,
    }, indent=1, sort_keys=True))
    return EXIT_OK


def cmd_replay(run: Run) -> int:
    path = Path(run.args.manifest_file)
    try:
        man = json.loads(path.read_text())
        argv = man["config_echo"]["argv"]
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"unreadable manifest {path}: {exc}") from None
    env = man["config_echo"].get("env", {})
    saved = {k: os.environ.get(k) for k in env}
    os.environ.update({k: v for k, v in env.items() if v is not None})
    try:
        buf = io.StringIO()
        code = main(argv + ["--manifest", os.devnull], stdout=buf)
    finally:
        for k, v in saved.items():
            if v is None:
                os.environ.pop(k, None)
            else:
                os.environ[k] = v
    text = buf.getvalue()
    sys.stdout.write(text)
    same = hashlib.sha256(text.encode()).hexdigest() == man["outputs"].get("stdout")
    for p, digest in man["outputs"].items():
        if p != "stdout":
            same &= Path(p).exists() and hashlib.sha256(Path(p).read_bytes()).hexdigest() == digest
    print(f"replay: {'identical' if same else 'DIFFERENT'}", file=sys.stderr)
    return code if same else EXIT_NUMERIC


# ------------------------------------------------------------------ parser


def _common(p, prec: int):
    p.add_argument("--prec", type=int, default=_default_prec(prec), help="mantissa bits")
    p.add_argument("--manifest", default=None, help="where to write the run manifest")
    p.add_argument("--cache-dir", default=None, help="coefficient cache directory")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="riemann-uncertainty", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("zeta", help="evaluate zeta(s)")
    p.add_argument("--s", type=_complex_arg, required=True)
    _common(p, 128)

    p = sub.add_parser("coeffs", help="Maclaurin coefficients C_k (cached)")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--digits", type=int, default=30)
    _common(p, 256)

    p = sub.add_parser("verify", help="check the uncertainty relation at (alpha, beta)")
    p.add_argument("--series", choices=["zeta", "linear", "constant", "custom"], default="zeta")
    p.add_argument("--coeffs", default=None, help="comma-separated complex literals")
    p.add_argument("--constant", type=_complex_arg, default=parse_complex("1"))
    p.add_argument("--order", type=int, default=60)
    p.add_argument("--alpha", type=_complex_arg)
    p.add_argument("--beta", type=_complex_arg)
    p.add_argument("--eps", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--mode", choices=[m.value for m in EvaluationMode], default="polynomial")
    p.add_argument("--route", choices=["auto", "matrix", "closed"], default="auto")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--dim", type=int, default=128)
    _common(p, 256)

    p = sub.add_parser("campaign", help="random Heisenberg campaign on small series")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-order", type=int, default=6)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--max-amplitude", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    _common(p, 64)

    for name, helptext in (("scan", "scan g(t; eps) against f(eps)"),
                           ("fig1", "scan with the f line as an extra CSV column")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--eps", type=float, required=True)
        p.add_argument("--t-min", type=float, default=0.0)
        p.add_argument("--t-max", type=float, default=30.0)
        p.add_argument("--step", type=float, default=0.01)
        p.add_argument("--order", type=int, default=60)
        p.add_argument("--dim", type=int, default=128)
        p.add_argument("--mode", choices=[m.value for m in EvaluationMode], default="polynomial")
        p.add_argument("--bisect-tol", type=float, default=1e-6)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--k-study", action="store_true")
        p.add_argument("--k-orders", default="40,60,80")
        p.add_argument("--k-stride", type=int, default=10)
        p.add_argument("--out", required=True)
        _common(p, 256)

    p = sub.add_parser("zero-find", help="critical-line zero nearest t0")
    p.add_argument("--t0", type=float, required=True)
    _common(p, 128)

    p = sub.add_parser("replay", help="re-run a manifest and compare outputs")
    p.add_argument("manifest_file")
    return ap


COMMANDS = {
    "zeta": cmd_zeta, "coeffs": cmd_coeffs, "verify": cmd_verify, "campaign": cmd_campaign,
    "scan": cmd_scan, "fig1": cmd_fig1, "zero-find": cmd_zero_find, "replay": cmd_replay,
}


def _manifest_path(args) -> Path:
    if getattr(args, "manifest", None):
        return Path(args.manifest)
    if getattr(args, "out", None):
        return Path(args.out) / "manifest.json"
    base = Path(os.environ.get("RIEMANN_RUN_DIR", "riemann-runs"))
    return base / f"{args.command}.manifest.json"


def _echo(args, argv) -> dict:
    echo = {}
    for k, v in sorted(vars(args).items()):
        echo[k] = v if isinstance(v, (int, float, str, bool, type(None))) else (
            complex_str(v, 256) if isinstance(v, mpmath.mpc) else str(v))
    argv = [x for i, x in enumerate(argv) if x != "--manifest" and (i == 0 or argv[i - 1] != "--manifest")]
    for i, x in enumerate(argv):
        if i and argv[i - 1] in ("--out", "--cache-dir"):
            argv[i] = str(Path(x).resolve())
    return {"argv": argv, "args": echo,
            "env": {"RIEMANN_PREC_BITS": os.environ.get("RIEMANN_PREC_BITS")}}


def main(argv: list[str] | None = None, stdout=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "replay":
        try:
            return cmd_replay(Run("replay", args, argv))
        except UsageError as exc:
            print(f"riemann-uncertainty replay: error: {exc}", file=sys.stderr)
            return EXIT_USAGE

    run = Run(args.command, args, argv)
    t0 = time.perf_counter()
    try:
        code = COMMANDS[args.command](run)
    except UsageError as exc:
        print(f"riemann-uncertainty {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"riemann-uncertainty {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_NUMERIC
    except ValueError as exc:
        print(f"riemann-uncertainty {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = run.stdout.getvalue()
    stdout.write(text)
    stdout.flush()
    run.outputs["stdout"] = hashlib.sha256(text.encode()).hexdigest()
    manifest = RunManifest(
        command=args.command, config_echo=_echo(args, argv), precision=run.precision,
        series_fingerprint=run.fingerprint,
        wall_time_ms=int(math.ceil((time.perf_counter() - t0) * 1000)), outputs=run.outputs)
    path = _manifest_path(args)
    if str(path) != os.devnull:
        atomic_write_text(path, manifest.to_json())
    return code


if __name__ == "__main__":
    sys.exit(main())
