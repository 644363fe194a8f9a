"""Command-line surface: protocol runs, clock calibration, the rejection
recursion, chain analysis, and success-gap estimation."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .languages import LanguageId, pad
from .machine_io import load_machine
from .machines_zoo import complement, eq_machine, pal_machine, twin_machine
from .markov import analyze
from .protocols.clock import calibrate_clock
from .protocols.padded import PaddedProtocol
from .protocols.params import ProtocolParams, default_params, parse_rational
from .protocols.recursion import exhaustive_min_f1, min_f1
from .protocols.square import SquareProtocol
from .protocols.supersafe import AdversaryStrategy, SupersafeProtocol
from .harness import emit_results, estimate_gap, run_trials

PROTOCOLS = ("supersafe-eq", "padded-pal", "padded-twin", "square")


def protocol_from_name(name: str, params: ProtocolParams):
    if name == "supersafe-eq":
        return SupersafeProtocol(
            eq_machine(), params.p, params.m, member_example="ab",
            step_cap=params.step_cap,
        )
    if name == "padded-pal":
        m = pal_machine()
        return PaddedProtocol(LanguageId.PAL, m, complement(m), params)
    if name == "padded-twin":
        m = twin_machine()
        return PaddedProtocol(LanguageId.TWIN, m, complement(m), params)
    if name == "square":
        return SquareProtocol(params)
    raise ValueError(f"unknown protocol {name!r}")


def load_params(path: str | None, protocol: str) -> ProtocolParams:
    if path:
        return ProtocolParams.load(path)
    return default_params(protocol)


def cmd_run_protocol(args) -> int:
    params = load_params(args.params, args.protocol)
    if args.step_cap:
        params.step_cap = args.step_cap
    protocol = protocol_from_name(args.protocol, params)
    if args.core is not None:
        w = pad(args.core).render()
    elif args.input is not None:
        w = args.input
    else:
        print("error: one of --input or --core is required", file=sys.stderr)
        return 2
    strategy = AdversaryStrategy.parse(args.prover)
    batch = run_trials(protocol, w, strategy, args.trials, args.seed)
    if args.out:
        emit_results([batch], args.out, "csv")
        print(f"wrote {args.out}")
    hist = batch.histogram
    print(
        f"{protocol.name} on {w!r} vs {batch.prover}: "
        f"accept {hist['Accept']}/{batch.trials}, reject {hist['Reject']}, "
        f"timeout {hist['Timeout']}, mean steps {batch.steps_mean:.1f}"
    )
    return 0


def cmd_clock_calibrate(args) -> int:
    grid = tuple(int(x) for x in args.n_grid.split(","))
    result = calibrate_clock(args.c, args.t, Fraction(args.eps), n_grid=grid)
    print(json.dumps(result, indent=1, default=float))
    return 0


def cmd_f_analyze(args) -> int:
    p = parse_rational(args.p)
    t_star, value = min_f1(p, args.m, args.grid or 2)
    out = {
        "p": str(p),
        "m": args.m,
        "min_f1": f"{value.numerator}/{value.denominator}",
        "min_f1_decimal": float(value),
        "minimizing_t": list(t_star),
        "meets_1_minus_p": value >= 1 - p,
    }
    if args.grid and args.m <= 10:
        brute = exhaustive_min_f1(p, args.m, args.grid)
        out["grid_search_min"] = f"{brute.numerator}/{brute.denominator}"
        out["grid_matches"] = brute == value
    print(json.dumps(out, indent=1))
    return 0


def cmd_analyze_chain(args) -> int:
    spec = load_machine(args.machine)
    result = analyze(spec, args.x, args.y)
    rep = result.report
    payload = {
        "machine": spec.name,
        "x": args.x,
        "y": args.y,
        "c": result.c,
        "chain_size": 2 * result.c,
        "looping_configurations": len(result.looping_configs),
        "looping_chain_states": sorted(result.looping_states),
        "p_accept": f"{rep.p_accept.numerator}/{rep.p_accept.denominator}",
        "p_accept_decimal": float(rep.p_accept),
        "p_other": f"{rep.p_other.numerator}/{rep.p_other.denominator}",
        "p_other_decimal": float(rep.p_other),
        "expected_time": (
            f"{rep.expected_time.numerator}/{rep.expected_time.denominator}"
        ),
        "expected_time_decimal": float(rep.expected_time),
    }
    text = json.dumps(payload, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def cmd_estimate_gap(args) -> int:
    params = load_params(args.params, args.protocol)
    protocol = protocol_from_name(args.protocol, params)
    cores = args.cores.split(",")
    inputs = [pad(c).render() for c in cores]
    adversaries = args.adversaries.split(",")
    report = estimate_gap(
        protocol, inputs, adversaries, trials=args.trials, seed=args.seed
    )
    if args.out:
        emit_results(report, args.out, "structured-text")
        print(f"wrote {args.out}")
    print(
        f"gap estimate {report.gap:.4f} "
        f"(quantum lower {report.quantum_low:.4f}, "
        f"classical upper {report.classical_high:.4f}, "
        f"halting {report.p_halt:.4f})"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poqlab",
        description="Simulation laboratory for small-space proof-of-quantumness protocols",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rp = sub.add_parser("run-protocol", help="run trial batches of one protocol")
    rp.add_argument("--protocol", required=True, choices=PROTOCOLS)
    rp.add_argument("--input", help="raw input string")
    rp.add_argument("--core", help="core string; exponential padding is appended")
    rp.add_argument("--prover", required=True)
    rp.add_argument("--params", help="params file (JSON, rationals as num/den)")
    rp.add_argument("--trials", type=int, default=1000)
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--step-cap", type=int, default=None)
    rp.add_argument("--out", help="CSV output path")
    rp.set_defaults(func=cmd_run_protocol)

    cc = sub.add_parser("clock-calibrate", help="calibrate the walk clock")
    cc.add_argument("--c", type=int, required=True)
    cc.add_argument("--t", type=int, required=True)
    cc.add_argument("--eps", required=True)
    cc.add_argument("--n-grid", default="4,8,16")
    cc.set_defaults(func=cmd_clock_calibrate)

    fa = sub.add_parser("f-analyze", help="rejection-recursion minimum")
    fa.add_argument("--p", required=True)
    fa.add_argument("--m", type=int, required=True)
    fa.add_argument("--grid", type=int, default=None)
    fa.set_defaults(func=cmd_f_analyze)

    ac = sub.add_parser("analyze-chain", help="exact absorption analysis")
    ac.add_argument("--machine", required=True, help="machine file or builtin:<name>")
    ac.add_argument("--x", required=True)
    ac.add_argument("--y", required=True)
    ac.add_argument("--out")
    ac.set_defaults(func=cmd_analyze_chain)

    eg = sub.add_parser("estimate-gap", help="success-gap estimation")
    eg.add_argument("--protocol", required=True, choices=PROTOCOLS)
    eg.add_argument("--cores", required=True, help="comma-separated core strings")
    eg.add_argument("--adversaries", required=True, help="comma-separated strategies")
    eg.add_argument("--params")
    eg.add_argument("--trials", type=int, default=2000)
    eg.add_argument("--seed", type=int, default=0)
    eg.add_argument("--out")
    eg.set_defaults(func=cmd_estimate_gap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
