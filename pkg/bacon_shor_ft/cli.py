"""Command-line front-end: bounds, optimization, sweeps, simulation and distillation."""

import argparse
import json
import logging
import os
import re
import sys

import pandas as pd

from bacon_shor_ft import __version__
from bacon_shor_ft.bounds import (
    GadgetConfig,
    Locality,
    Variant,
    cnot_bound,
    injection_bound,
    injection_leading_order,
)
from bacon_shor_ft.circuits import CircuitKind
from bacon_shor_ft.distill import DistillKind, DistillParams, distill_schedule, end_to_end
from bacon_shor_ft.helpers import format_log_probability
from bacon_shor_ft.noise import BaconShorError, InvalidConfigError, NoiseParams
from bacon_shor_ft.optimize import (
    DEFAULT_M,
    DEFAULT_N,
    DEFAULT_R,
    DEFAULT_REPEATS,
    NotAchievableError,
    Objective,
    SWEEP_COLUMNS,
    SearchSpace,
    iter_sweep,
    optimize,
    pareto_front,
)
from bacon_shor_ft.simulate import Verdict, check_bound, estimate

logger = logging.getLogger(__name__)

WORKERS_ENV = "BACON_SHOR_FT_WORKERS"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NEGATIVE = 2


class UsageError(Exception):
    pass


# dataclass fields whose command-line flag is not --<field with dashes>
_RENAMED_FLAGS = {"r_prime": "--rprime", "r_plus": "--rplus"}
_FIELD_MESSAGE = re.compile(r"^(search range for )?(n|m|p|r|r_prime|r_plus|eps\w*|bias|rounds)\b")


def _flag(name: str) -> str:
    return _RENAMED_FLAGS.get(name, "--" + name.replace("_", "-"))


def name_flags(message: str) -> str:
    """Rewrite a validation message that starts with a field name to name its flag."""
    match = _FIELD_MESSAGE.match(message)
    if match is None:
        return message
    prefix, name = match.groups()
    if prefix:
        flag = "--p-values" if name == "p" else f"{_flag(name)}-range"
    else:
        flag = _flag(name)
    return f"{prefix or ''}{flag}{message[match.end():]}"


class ArgumentParser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting, so run() can map it to its exit code."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not a probability in [0, 1]")
    return value


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"{text} must be positive")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return value


def odd_int(text: str) -> int:
    value = positive_int(text)
    if value % 2 == 0:
        raise argparse.ArgumentTypeError(f"{text} must be odd")
    return value


def int_range(text: str) -> tuple:
    """'a:b' (inclusive) or a comma-separated list of positive integers."""
    try:
        if ":" in text:
            lo, hi = (int(part) for part in text.split(":", 1))
            values = tuple(range(lo, hi + 1))
        else:
            values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a:b' or 'a,b,...', got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must name integers >= 1")
    return values


def float_list(text: str) -> list:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("ignoring %s=%r, not an integer", WORKERS_ENV, raw)
        return 1


def _add_output(parser):
    group = parser.add_argument_group("output")
    group.add_argument("-o", "--output", help="write to this file instead of stdout")
    group.add_argument("--format", choices=("json", "csv"), default="json")
    group.add_argument("--seed", type=int, default=0)
    group.add_argument("--workers", type=positive_int, default=_default_workers())
    group.add_argument("-v", "--verbose", action="count", default=0)
    group.add_argument("-q", "--quiet", action="store_true")


def _add_noise(parser, required: bool = True):
    group = parser.add_argument_group("noise")
    group.add_argument("--eps", type=probability, required=required, help="diagonal gate fault rate")
    nd = group.add_mutually_exclusive_group()
    nd.add_argument("--eps-nd", type=probability, help="non-diagonal gate fault rate")
    nd.add_argument("--bias", type=positive_float, help="eps / eps_nd")
    group.add_argument("--eps-s", type=probability, default=0.0)
    group.add_argument("--eps-s-nd", type=probability, default=0.0)
    group.add_argument("--eps-meas", type=probability)
    group.add_argument("--eps-psi", type=probability)


def _add_gadget(parser):
    group = parser.add_argument_group("gadget")
    group.add_argument("--n", type=odd_int, default=1)
    group.add_argument("--m", type=odd_int, default=3)
    group.add_argument("--p", type=positive_int)
    group.add_argument("--r", type=odd_int, default=1)
    group.add_argument("--rprime", type=positive_int, default=1)
    group.add_argument("--rplus", type=positive_int, default=1)
    group.add_argument("--local", action="store_true")
    group.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.A.value)


def _add_space(parser):
    group = parser.add_argument_group("search space")
    group.add_argument("--n-range", type=int_range, default=DEFAULT_N)
    group.add_argument("--m-range", type=int_range, default=DEFAULT_M)
    group.add_argument("--r-range", type=int_range, default=DEFAULT_R)
    group.add_argument("--rprime-range", type=int_range, default=DEFAULT_REPEATS)
    group.add_argument("--rplus-range", type=int_range, default=DEFAULT_REPEATS)
    group.add_argument("--p-values", type=int_range)
    group.add_argument("--local", action="store_true")
    group.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.A.value)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="bacon-shor-ft", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    bounds = sub.add_parser("bounds", help="CNOT and injection bounds for one gadget")
    _add_noise(bounds)
    _add_gadget(bounds)
    _add_output(bounds)

    opt = sub.add_parser("optimize", help="best gadget in a search space")
    _add_noise(opt)
    _add_space(opt)
    opt.add_argument("--target", type=probability, help="cheapest gadget whose bound is below this")
    _add_output(opt)

    swp = sub.add_parser("sweep", help="optimal bound over eps, bias and eps_meas grids")
    _add_noise(swp, required=False)
    _add_space(swp)
    swp.add_argument("--eps-grid", type=float_list, required=True)
    swp.add_argument("--bias-list", type=float_list, required=True)
    swp.add_argument("--eps-meas-ratios", type=float_list, default=[1.0])
    _add_output(swp)

    par = sub.add_parser("pareto", help="gate count versus bound frontier")
    _add_noise(par)
    _add_space(par)
    _add_output(par)

    sim = sub.add_parser("simulate", help="Monte-Carlo failure estimate of a gadget circuit")
    _add_noise(sim)
    _add_gadget(sim)
    sim.add_argument("--kind", choices=[k.value for k in CircuitKind], default=CircuitKind.CNOT.value)
    sim.add_argument("--trials", type=positive_int, default=10_000)
    sim.add_argument("--shards", type=positive_int, default=4)
    sim.add_argument("--check", action="store_true", help="compare against the analytic bound")
    sim.add_argument("--bound-scale", type=positive_float, default=1.0, help="evaluate the bound at scaled rates")
    _add_output(sim)

    dst = sub.add_parser("distill", help="distillation schedule")
    dst.add_argument("--kind", choices=[k.value for k in DistillKind], default=DistillKind.T.value)
    dst.add_argument("--eps-in", type=probability)
    dst.add_argument("--eps-css", type=probability)
    dst.add_argument("--rounds", type=int, default=3)
    dst.add_argument("--from-gadget", action="store_true", help="inputs from the injection and CNOT bounds")
    _add_noise(dst, required=False)
    _add_gadget(dst)
    _add_output(dst)
    return parser


def _noise(args) -> NoiseParams:
    if args.eps is None:
        raise UsageError("--eps is required")
    if args.bias is not None:
        eps_nd = args.eps / args.bias
    elif args.eps_nd is not None:
        eps_nd = args.eps_nd
    else:
        raise UsageError("one of --eps-nd or --bias is required")
    return NoiseParams(
        eps=args.eps,
        eps_nd=eps_nd,
        eps_s=args.eps_s,
        eps_s_nd=args.eps_s_nd,
        eps_meas=args.eps_meas,
        eps_psi=args.eps_psi,
    )


def _gadget(args) -> GadgetConfig:
    local = Locality.LOCAL if args.local else Locality.NONLOCAL
    p = args.p if args.p is not None else 3 * args.m
    return GadgetConfig(
        n=args.n,
        m=args.m,
        p=p,
        r=args.r,
        r_prime=args.rprime,
        r_plus=args.rplus,
        locality=local,
        variant=args.variant,
    )


def _space(args) -> SearchSpace:
    return SearchSpace(
        n=args.n_range,
        m=args.m_range,
        r=args.r_range,
        r_prime=args.rprime_range,
        r_plus=args.rplus_range,
        p=args.p_values,
        locality=Locality.LOCAL if args.local else Locality.NONLOCAL,
        variant=args.variant,
    )


def _header(args) -> dict:
    flags = {
        key: list(value) if isinstance(value, tuple) else value
        for key, value in sorted(vars(args).items())
        if key not in ("output", "verbose", "quiet", "workers")
    }
    return {"tool": "bacon-shor-ft", "version": __version__, "flags": flags, "seed": args.seed}


class Writer:
    """Writes the header first, then rows (CSV, flushed one by one) or a JSON document.

    The output file is opened on the first write, so a command that fails
    validation leaves no file behind.
    """

    def __init__(self, args):
        self.format = args.format
        self.header = _header(args)
        self.path = args.output
        self._stream = None
        self._columns = None

    @property
    def stream(self):
        if self._stream is None:
            self._stream = open(self.path, "w", newline="") if self.path else sys.stdout
        return self._stream

    def close(self):
        if self._stream is not None and self._stream is not sys.stdout:
            self._stream.close()

    def json(self, payload: dict):
        document = {"header": self.header, **payload}
        self.stream.write(json.dumps(document, sort_keys=True, indent=2) + "\n")

    def csv_header(self):
        self.stream.write("# " + json.dumps(self.header, sort_keys=True) + "\n")

    def csv_rows(self, rows, columns=None):
        frame = pd.DataFrame(rows, columns=columns)
        self.stream.write(frame.to_csv(index=False, header=self._columns is None, lineterminator="\n"))
        self._columns = list(frame.columns)
        self.stream.flush()

    def table(self, rows, columns=None, key="rows"):
        if self.format == "json":
            self.json({key: rows})
        else:
            self.csv_header()
            self.csv_rows(rows, columns)


def _flatten(prefix: str, data: dict) -> dict:
    out = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(f"{name}.", value))
        elif isinstance(value, list):
            out[name] = json.dumps(value)
        else:
            out[name] = value
    return out


def cmd_bounds(args, writer: Writer) -> int:
    noise, cfg = _noise(args), _gadget(args)
    payload = {
        "cfg": cfg.to_dict(),
        "noise": noise.to_dict(),
        "cnot": cnot_bound(cfg, noise).to_dict(),
        "injection": format_log_probability(injection_bound(cfg, noise)),
        "injection_leading_order": injection_leading_order(cfg, noise),
    }
    if writer.format == "json":
        writer.json(payload)
    else:
        writer.table([_flatten("", payload)])
    return EXIT_OK


def cmd_optimize(args, writer: Writer) -> int:
    noise, space = _noise(args), _space(args)
    objective = Objective.MIN_COST if args.target is not None else Objective.MIN_BOUND
    result = optimize(noise, space, objective, target=args.target, workers=args.workers)
    if writer.format == "json":
        writer.json({"result": result.to_dict()})
    else:
        writer.table([_flatten("", result.to_dict())])
    return EXIT_OK


# noise flags a sweep takes from its grids instead
_SWEPT_FLAGS = {
    "eps": "--eps-grid",
    "eps_nd": "--bias-list",
    "bias": "--bias-list",
    "eps_meas": "--eps-meas-ratios",
}


def cmd_sweep(args, writer: Writer) -> int:
    for name, grid in _SWEPT_FLAGS.items():
        if getattr(args, name) is not None:
            raise UsageError(f"--{name.replace('_', '-')} is swept; set it through {grid}")
    if args.eps_psi is not None:
        raise UsageError("--eps-psi does not enter the CNOT bound a sweep reports")
    template = NoiseParams(eps=0.0, eps_nd=0.0, eps_s=args.eps_s, eps_s_nd=args.eps_s_nd)
    rows = iter_sweep(
        template,
        args.eps_grid,
        args.bias_list,
        _space(args),
        eps_meas_ratios=args.eps_meas_ratios,
        workers=args.workers,
        progress=_progress(args),
    )
    if writer.format == "json":
        writer.json({"rows": list(rows)})
        return EXIT_OK
    writer.csv_header()
    for row in rows:
        writer.csv_rows([row], SWEEP_COLUMNS)
    return EXIT_OK


def cmd_pareto(args, writer: Writer) -> int:
    front = pareto_front(_noise(args), _space(args), workers=args.workers)
    writer.table([point.to_dict() for point in front], key="frontier")
    return EXIT_OK


def cmd_simulate(args, writer: Writer) -> int:
    noise, cfg = _noise(args), _gadget(args)
    options = dict(seed=args.seed, workers=args.workers, shards=args.shards, progress=_progress(args))
    if args.check:
        report = check_bound(args.kind, cfg, noise, args.trials, bound_noise_scale=args.bound_scale, **options)
        payload = report.to_dict()
        code = EXIT_NEGATIVE if report.verdict is Verdict.VIOLATED else EXIT_OK
    else:
        payload = {"empirical": estimate(args.kind, cfg, noise, args.trials, **options).to_dict()}
        code = EXIT_OK
    if writer.format == "json":
        writer.json(payload)
    else:
        writer.table([_flatten("", payload)])
    return code


def cmd_distill(args, writer: Writer) -> int:
    if args.rounds < 0:
        raise UsageError("--rounds must be >= 0")
    if args.from_gadget:
        report = end_to_end(_noise(args), _gadget(args), args.kind, rounds=args.rounds)
        schedule = report.schedule
        payload = report.to_dict()
    else:
        if args.eps_in is None or args.eps_css is None:
            raise UsageError("--eps-in and --eps-css are required without --from-gadget")
        schedule = distill_schedule(DistillParams(args.kind, args.eps_in, args.eps_css, args.rounds))
        payload = schedule.to_dict()
    if writer.format == "json":
        writer.json(payload)
    else:
        writer.csv_header()
        writer.csv_rows(schedule.to_frame())
    return EXIT_OK


COMMANDS = {
    "bounds": cmd_bounds,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "pareto": cmd_pareto,
    "simulate": cmd_simulate,
    "distill": cmd_distill,
}


def _progress(args) -> bool:
    return not args.quiet and sys.stderr.isatty()


def _configure_logging(args):
    if args.quiet:
        level = logging.ERROR
    else:
        level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)

    _configure_logging(args)
    writer = Writer(args)
    try:
        return COMMANDS[args.command](args, writer)
    except UsageError as exc:
        print(f"bacon-shor-ft {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidConfigError as exc:
        print(f"bacon-shor-ft {args.command}: error: {name_flags(str(exc))}", file=sys.stderr)
        return EXIT_USAGE
    except NotAchievableError as exc:
        print(f"bacon-shor-ft {args.command}: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except BaconShorError as exc:
        print(f"bacon-shor-ft {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        writer.close()


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
