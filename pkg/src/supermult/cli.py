"""Command-line front end: ``supermult <command> [options]``.

Every command prints its report record as one JSON line on stdout and, with
``--out``, appends it to a JSON-lines file or writes a CSV table. Sweep-type
commands also render a PNG next to the ``--out`` file.

Exit codes: 0 success, 1 internal error, 2 configuration error, 3 resource guard.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

from . import analysis
from .channels import ChannelDescriptor, RandomUnitaryChannel, conjugate
from .linalg import ResourceError
from .optimize import OptimizerConfig, certify_epsilon, epsnet_certify_upper, maximize_output_pnorm
from .reporting import ReportRecord, dumps, write_report
from .sweeps import sweep_wh

MAX_CHANNEL_DIM = 64
MAX_HAAR_ENTRIES = 5 * 10**7

CHANNEL_HELP = """\
channel specs: kind:dim[:n[:seed]]
  haar:D:N[:SEED]   N Haar-random unitaries on C^D (seed defaults to --seed)
  weyl:D            all D^2 discrete Weyl operators (exactly randomising)
  wh:D              Werner-Holevo channel (tr(rho) I - rho^T)/(D-1)
  id:D              identity channel
A JSON --config file may give any option by its long name (dashes as
underscores), plus an "optimizer" object; command-line flags win.
The default seed comes from $SUPERMULT_SEED, else 0."""

_DEFAULTS = {
    "seed": None,
    "format": "json",
    "p": [5.0],
    "witness": "max_entangled",
    "pair": "same",
    "eps": 0.5,
    "p_grid": [4.0, 6.0],
    "d": 3,
    "tol": 1e-3,
    "dims": [8, 16],
    "multipliers": [2.0, 8.0, 32.0],
    "seeds": list(range(5)),
    "grid_resolution": None,
}

_OPT_FLAGS = {
    "starts": "num_starts",
    "max_iters": "max_iters",
    "step_init": "step_init",
    "objective_tol": "objective_tol",
    "grad_tol": "grad_tol",
}

_FIGURE_COMMANDS = {"sweep-wh", "scaling", "crossover"}


class ConfigError(ValueError):
    pass


def _float_list(text):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def _int_list(text):
    out = []
    for part in text.replace(",", " ").split():
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed (default: $SUPERMULT_SEED or 0)")
    common.add_argument("--config", type=Path, help="JSON file with option values")
    common.add_argument("--out", type=Path, help="append/write the report here")
    common.add_argument("--format", choices=["json", "csv"], help="report file format (default json)")
    common.add_argument("--figure", type=Path, help="PNG path (default: next to --out for sweeps)")
    common.add_argument("--no-figure", action="store_true", help="do not render figures")
    opt = common.add_argument_group("optimizer")
    opt.add_argument("--starts", type=int, help="multistart count (default 20)")
    opt.add_argument("--max-iters", type=int, help="iterations per start (default 5000)")
    opt.add_argument("--step-init", type=float, help="initial ascent step (default 0.1)")
    opt.add_argument("--objective-tol", type=float, help="relative improvement stop (default 1e-12)")
    opt.add_argument("--grad-tol", type=float, help="tangent gradient stop (default 1e-9)")

    parser = argparse.ArgumentParser(
        prog="supermult",
        description="Maximum output p-norms of quantum channels and multiplicativity checks.",
        epilog=CHANNEL_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, help_text):
        return sub.add_parser(
            name, parents=[common], help=help_text, description=help_text,
            epilog=CHANNEL_HELP, formatter_class=argparse.RawDescriptionHelpFormatter,
        )

    def channel_arg(p):
        p.add_argument("--channel", help="channel spec, e.g. wh:3 or haar:8:16:1")

    def p_arg(p):
        p.add_argument("--p", type=_float_list, nargs="+", help="Schatten exponent(s) > 1; 'inf' allowed")

    c = add("nu-p", "estimate the maximum output p-norm (and min output Renyi entropy bound)")
    channel_arg(c)
    p_arg(c)

    c = add("certify-eps", "lower-bound the randomising parameter eps (two-sided at d <= 3 with a grid)")
    channel_arg(c)
    c.add_argument("--grid-resolution", type=int, help="also run the exhaustive grid (d in {2, 3})")

    c = add("lemma1", "maximally entangled witness for N (x) conj(N)")
    channel_arg(c)
    p_arg(c)

    c = add("lemma2-check", "nu_hat <= ((1+eps_hat)/d)^(1-1/p) consistency")
    channel_arg(c)
    p_arg(c)

    c = add("violation", "compare tensor-product norm with the product of single-copy norms")
    channel_arg(c)
    p_arg(c)
    c.add_argument("--pair", help="second channel: 'same', 'conjugate' or a channel spec")
    c.add_argument("--witness", choices=["max-entangled", "max_entangled", "optimize"])

    c = add("crossover", "smallest d where the bound chain certifies a violation")
    p_arg(c)
    c.add_argument("--eps", type=float, help="randomising parameter in (0, 1)")

    c = add("sweep-wh", "Werner-Holevo gap over a p grid with crossing refinement")
    c.add_argument("--p-grid", type=_float_list, nargs="+", help="ascending p values, e.g. '4,6'")
    c.add_argument("--d", type=int, help="dimension (default 3)")
    c.add_argument("--tol", type=float, help="bisection width for the crossing (default 1e-3)")

    c = add("scaling", "eps_hat of Haar channels with n = multiplier * d ln d")
    c.add_argument("--dims", type=_int_list, nargs="+", help="dimensions, e.g. '8,16,32'")
    c.add_argument("--multipliers", type=_float_list, nargs="+", help="multipliers, e.g. '2,8,32'")
    c.add_argument("--seeds", type=_int_list, nargs="+", help="channel seeds, e.g. '0-9'")
    p_arg(c)

    c = add("rank-check", "n < d forces eps >= 1")
    channel_arg(c)
    return parser


def _resolve(args) -> dict:
    """Merge flags over the --config file over built-in defaults."""
    cfg = {}
    if args.config is not None:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    opts = {}
    for key, value in vars(args).items():
        if key in ("config", "command"):
            continue
        if isinstance(value, list) and value and isinstance(value[0], list):
            value = [x for chunk in value for x in chunk]
        if value is None:
            value = cfg.get(key, _DEFAULTS.get(key))
        opts[key] = value
    if opts["seed"] is None:
        env = os.environ.get("SUPERMULT_SEED")
        try:
            opts["seed"] = int(env) if env else 0
        except ValueError:
            raise ConfigError(f"SUPERMULT_SEED must be an integer, got {env!r}") from None
    if isinstance(opts.get("p"), (int, float)):
        opts["p"] = [float(opts["p"])]
    optimizer = dict(cfg.get("optimizer", {}))
    for flag, name in _OPT_FLAGS.items():
        if opts.pop(flag, None) is not None:
            optimizer[name] = getattr(args, flag)
    optimizer["seed"] = opts["seed"]
    try:
        opts["optimizer"] = OptimizerConfig.from_dict(optimizer)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad optimizer settings: {exc}") from None
    for p in opts.get("p") or ():
        if not p > 1:
            raise ConfigError(f"p values must exceed 1, got {p}")
    return opts


def _descriptor(spec, seed) -> ChannelDescriptor:
    if spec is None:
        raise ConfigError("--channel is required")
    try:
        if isinstance(spec, dict):
            return ChannelDescriptor.from_dict(spec)
        return ChannelDescriptor.parse(str(spec), default_seed=seed)
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None


def _build(desc: ChannelDescriptor):
    if desc.dim > MAX_CHANNEL_DIM:
        raise ResourceError(f"channel dimension {desc.dim} exceeds {MAX_CHANNEL_DIM}")
    if desc.n is not None and desc.n * desc.dim**2 > MAX_HAAR_ENTRIES:
        raise ResourceError(f"{desc.n} unitaries of dimension {desc.dim} exceed the memory guard")
    return desc.build()


def _state(psi):
    return [[float(z.real), float(z.imag)] for z in psi]


def _need_ruc(ch, command):
    if not isinstance(ch, RandomUnitaryChannel):
        raise ConfigError(f"{command} needs a random-unitary channel (haar, weyl or id)")
    return ch


def _cmd_nu_p(o):
    desc = _descriptor(o["channel"], o["seed"])
    ch = _build(desc)
    rows = []
    for p in o["p"]:
        res = maximize_output_pnorm(ch, p, o["optimizer"])
        factor = -1.0 if math.isinf(p) else p / (1.0 - p)
        rows.append(
            {
                "p": p,
                "nu_hat": res.best_value,
                "closed_form": analysis.closed_form_nu_p(ch, p),
                "min_output_renyi_upper": factor * math.log2(res.best_value),
                "num_converged": int(res.converged_flags.sum()),
                "witness": _state(res.best_state),
            }
        )
    return {"channel": desc.to_dict()}, {"rows": rows}


def _cmd_certify(o):
    desc = _descriptor(o["channel"], o["seed"])
    ch = _build(desc)
    cert = certify_epsilon(ch, o["optimizer"])
    out = {**cert.summary(), "witness": _state(cert.witness)}
    if o["grid_resolution"]:
        lo, hi = epsnet_certify_upper(ch, o["grid_resolution"])
        out["grid"] = {"resolution": o["grid_resolution"], "eps_lower": lo, "eps_upper": hi}
    return {"channel": desc.to_dict(), "grid_resolution": o["grid_resolution"]}, out


def _cmd_lemma1(o):
    desc = _descriptor(o["channel"], o["seed"])
    ch = _need_ruc(_build(desc), "lemma1")
    rows = []
    for p in o["p"]:
        r = analysis.lemma1_lower_bound(ch, p)
        rows.append({**r.to_dict(), "holds": r.holds})
    return {"channel": desc.to_dict()}, {"rows": rows}


def _cmd_lemma2(o):
    desc = _descriptor(o["channel"], o["seed"])
    ch = _build(desc)
    rows = [analysis.lemma2_consistency(ch, p, o["optimizer"]).to_dict() for p in o["p"]]
    return {"channel": desc.to_dict()}, {"rows": rows}


def _cmd_violation(o):
    desc = _descriptor(o["channel"], o["seed"])
    c1 = _build(desc)
    pair = o["pair"]
    if pair == "same":
        c2, desc2 = c1, desc
    elif pair == "conjugate":
        c2 = conjugate(c1)
        desc2 = c2.descriptor
    else:
        desc2 = _descriptor(pair, o["seed"])
        c2 = _build(desc2)
    witness = o["witness"].replace("-", "_")
    rows = [analysis.violation_report(c1, c2, p, witness, o["optimizer"]).to_dict() for p in o["p"]]
    inputs = {"channel": desc.to_dict(), "pair": desc2.to_dict(), "witness": witness}
    return inputs, {"rows": rows}


def _cmd_crossover(o):
    rows = [analysis.crossover_certified(p, o["eps"]).to_dict() for p in o["p"]]
    return {"eps": o["eps"]}, {"rows": rows}


def _cmd_sweep(o):
    res = sweep_wh(o["p_grid"], d=o["d"], config=o["optimizer"], tol=o["tol"])
    return {"p_grid": o["p_grid"], "d": o["d"], "tol": o["tol"]}, res.to_dict()


def _cmd_scaling(o):
    recs = analysis.scaling_experiment(o["dims"], o["multipliers"], o["p"][0], o["seeds"], o["optimizer"])
    rows = []
    for r in recs:
        row = r.to_dict()
        row.pop("wall_time")
        rows.append(row)
    inputs = {"dims": o["dims"], "multipliers": o["multipliers"], "seeds": o["seeds"], "p": o["p"][0]}
    return inputs, {"rows": rows}, {"wall_time": [r.wall_time for r in recs]}


def _cmd_rank(o):
    desc = _descriptor(o["channel"], o["seed"])
    ch = _need_ruc(_build(desc), "rank-check")
    return {"channel": desc.to_dict()}, analysis.rank_necessity_check(ch, o["optimizer"]).to_dict()


COMMANDS = {
    "nu-p": _cmd_nu_p,
    "certify-eps": _cmd_certify,
    "lemma1": _cmd_lemma1,
    "lemma2-check": _cmd_lemma2,
    "violation": _cmd_violation,
    "crossover": _cmd_crossover,
    "sweep-wh": _cmd_sweep,
    "scaling": _cmd_scaling,
    "rank-check": _cmd_rank,
}


def _render_figure(command, outputs, path):
    from . import plotting

    if command == "sweep-wh":
        plotting.plot_wh_sweep(outputs["rows"], path, outputs.get("p_star"))
    elif command == "scaling":
        plotting.plot_scaling(outputs["rows"], path)
    elif command == "crossover":
        plotting.plot_crossover(outputs["rows"], path)


def run_cli(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        opts = _resolve(args)
        t0 = time.perf_counter()
        result = COMMANDS[args.command](opts)
        inputs, outputs = result[0], result[1]
        timings = dict(result[2]) if len(result) > 2 else {}
        timings["total_seconds"] = time.perf_counter() - t0
        inputs = {**inputs, "seed": opts["seed"], "optimizer": opts["optimizer"].to_dict()}
        record = ReportRecord(command=args.command, inputs=inputs, outputs=outputs, timings=timings)
        stdout.write(dumps(record.to_dict()) + "\n")
        if opts["out"] is not None:
            write_report(record, opts["out"], opts["format"])
        fig = opts["figure"]
        if fig is None and opts["out"] is not None and args.command in _FIGURE_COMMANDS:
            fig = Path(opts["out"]).with_suffix(".png")
        if fig is not None and not opts["no_figure"]:
            _render_figure(args.command, outputs, fig)
    except ResourceError as exc:
        print(f"supermult: resource guard: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"supermult: configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"supermult: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
