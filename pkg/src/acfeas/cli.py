"""Command-line front end.

Exit codes: 0 feasible/pass, 1 property failure, 2 input or validation error,
3 infeasible, 4 unknown, 5 method mismatch.
"""

from __future__ import annotations

import argparse
import math
import re
import sys

from . import formats
from .power_model import (
    DEFAULT_TOLERANCE,
    LineParams,
    NetworkError,
    SolutionError,
    capacity_from_delta_max,
    check_feasibility,
    delta_max_from_capacity,
)
from .reduction import (
    DEFAULT_ANGLE_TOLERANCE,
    DEFAULT_PARAMS,
    NotReductionForm,
    ReductionError,
    ReductionParams,
    SubsetSumInstance,
    WitnessError,
    decode_witness,
    encode_subset_sum,
    receiving_end_extremes,
    recognize_reduction_form,
    witness_from_subset,
)
from .solvers import (
    DEFAULT_ANGLE_STEPS,
    DEFAULT_BALANCE_TOLERANCE,
    Verdict,
    grid_feasibility_search,
    solve_reduction_brute,
    solve_reduction_instance,
    StructureError,
)
from .sweeps import run_lemma_sweeps

EXIT_OK = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_INPUT_ERROR = 2
EXIT_INFEASIBLE = 3
EXIT_UNKNOWN = 4
EXIT_METHOD_MISMATCH = 5

VERDICT_EXIT = {
    Verdict.FEASIBLE: EXIT_OK,
    Verdict.INFEASIBLE: EXIT_INFEASIBLE,
    Verdict.UNKNOWN: EXIT_UNKNOWN,
}

_PI_EXPR = re.compile(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi(?:\s*/\s*(\d+(?:\.\d*)?))?$")


class UsageError(Exception):
    pass


def parse_angle(text: str) -> float:
    """Radians from a decimal (``1.047``) or a pi fraction (``pi/3``, ``-2pi/3``)."""
    s = text.strip().replace("−", "-").lower().replace("π", "pi")
    m = _PI_EXPR.match(s)
    if m:
        coef, denom = m.groups()
        if coef in ("", "+"):
            c = 1.0
        elif coef == "-":
            c = -1.0
        else:
            c = float(coef)
        return c * math.pi / (float(denom) if denom else 1.0)
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def parse_real(text: str) -> float:
    try:
        return float(text.strip().replace("−", "-"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None


def _reduction_params(args) -> ReductionParams:
    b = DEFAULT_PARAMS.susceptance if args.susceptance is None else args.susceptance
    g = DEFAULT_PARAMS.conductance if args.conductance is None else args.conductance
    d = DEFAULT_PARAMS.delta_max if args.delta_max is None else args.delta_max
    return ReductionParams(b, g, d)


def cmd_encode(args) -> int:
    params = _reduction_params(args)
    inst = SubsetSumInstance(tuple(args.set), args.target)
    net = encode_subset_sum(inst, params)
    formats.write_instance(args.out, net)
    ext = receiving_end_extremes(params)
    load = net.loads[0]
    print(f"np_max    {ext.np_max:.17g}")
    print(f"nq_max    {ext.nq_max:.17g}")
    print(f"p_demand  {load.p_demand:.17g}")
    print(f"q_demand  {load.q_demand:.17g}")
    print(f"wrote {args.out} ({len(net.buses)} buses, {len(net.lines)} lines)")
    return EXIT_OK


def cmd_solve(args) -> int:
    net = formats.read_instance(args.instance)
    method = args.method
    if method == "auto":
        try:
            recognize_reduction_form(net)
            method = "dp"
        except NotReductionForm:
            method = "grid"
        print(f"method    {method} (auto)")
    else:
        print(f"method    {method}")
    if method in ("dp", "brute"):
        try:
            outcome = solve_reduction_instance(net) if method == "dp" else solve_reduction_brute(net)
        except NotReductionForm as exc:
            print(f"error: {method} needs a reduction-form instance: {exc}", file=sys.stderr)
            return EXIT_METHOD_MISMATCH
    else:
        outcome = grid_feasibility_search(net, args.steps, args.tol)
    print(f"verdict   {outcome.verdict.value}")
    print(f"states    {outcome.stats.states_explored}")
    print(f"runtime   {outcome.stats.runtime_note}")
    if outcome.witness is not None and args.out:
        formats.write_solution(args.out, outcome.witness)
        print(f"wrote {args.out}")
    return VERDICT_EXIT[outcome.verdict]


def cmd_check(args) -> int:
    net = formats.read_instance(args.instance)
    sol = formats.read_solution(args.solution)
    report = check_feasibility(net, sol, args.tol)
    print(f"{'bus':<12}{'constraint':<14}{'value':>24}")
    for bus_id, (rp, rq) in report.load_residuals.items():
        print(f"{bus_id:<12}{'p residual':<14}{rp:>24.6e}")
        print(f"{bus_id:<12}{'q residual':<14}{rq:>24.6e}")
    for bus_id, inj in report.generator_injections.items():
        print(f"{bus_id:<12}{'p injection':<14}{inj:>24.6e}")
    for line, excess in report.angle_violations:
        print(f"{line.name:<12}{'angle excess':<14}{excess:>24.6e}")
    print(f"max residual {report.max_residual:.3e} (tolerance {report.tolerance_used:g})")
    print("feasible" if report.feasible else "infeasible")
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_decode(args) -> int:
    net = formats.read_instance(args.instance)
    sol = formats.read_solution(args.solution)
    subset = decode_witness(net, sol, args.angle_tol)
    print("subset    " + ",".join(str(x) for x in subset))
    print(f"sum       {sum(subset)}")
    return EXIT_OK


def cmd_witness(args) -> int:
    params = _reduction_params(args)
    inst = SubsetSumInstance(tuple(args.set), args.target)
    sol = witness_from_subset(inst, params, args.subset)
    if args.out:
        formats.write_solution(args.out, sol)
        print(f"wrote {args.out}")
    else:
        import json

        print(json.dumps(formats.solution_to_dict(sol), indent=2))
    return EXIT_OK


def cmd_verify_lemmas(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    ineq, eq, lem2 = run_lemma_sweeps(args.samples, args.seed)
    unresolved = eq.notes.get("interior_below_bound", 0)
    endpoint_misses = eq.failures - unresolved
    counterexamples = ineq.failures + endpoint_misses + lem2.failures
    print(f"lemma 1 inequality   {ineq.samples - ineq.failures}/{ineq.samples} pass, worst margin {ineq.worst_margin:.3e}")
    print(f"lemma 1 equality     {eq.samples - endpoint_misses}/{eq.samples} pass")
    print(f"                     {unresolved} interior samples with |gap| below the 1e-9 bound")
    print(f"lemma 2 implication  {lem2.samples - lem2.failures}/{lem2.samples} pass, worst margin {lem2.worst_margin:.3e}")
    for result in (ineq, lem2):
        if result.counterexample is not None:
            print(f"counterexample ({result.name}): {result.counterexample}")
    if endpoint_misses:
        print(f"counterexample (lemma1_equality): {endpoint_misses} endpoint samples with |gap| above bound")
    return EXIT_PROPERTY_FAILURE if counterexamples else EXIT_OK


def cmd_capacity(args) -> int:
    if args.delta_max is not None:
        line = LineParams(args.b, args.g, args.delta_max)
        problems = line.violations()
        if problems:
            raise UsageError("; ".join(problems))
        print(f"capacity  {capacity_from_delta_max(line):.17g}")
    else:
        d = delta_max_from_capacity(args.b, args.g, args.capacity)
        branch = " (capacity above 2(b^2+g^2), clamped)" if args.capacity > 2 * (args.b**2 + args.g**2) else ""
        print(f"delta_max {d:.17g}{branch}")
    return EXIT_OK


def _add_params(p) -> None:
    p.add_argument("--susceptance", "--b", type=parse_real, default=None, help="base b (default -2)")
    p.add_argument("--conductance", "--g", type=parse_real, default=None, help="base g (default 0.5)")
    p.add_argument("--delta-max", type=parse_angle, default=None, help="angle bound (default pi/3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acfeas", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode a subset-sum instance as a star network")
    p.add_argument("--set", type=parse_int_list, required=True)
    p.add_argument("--target", type=int, required=True)
    _add_params(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("solve", help="decide feasibility of an instance file")
    p.add_argument("instance")
    p.add_argument("--method", choices=["auto", "dp", "grid", "brute"], default="auto")
    p.add_argument("--steps", type=int, default=DEFAULT_ANGLE_STEPS)
    p.add_argument("--tol", type=float, default=DEFAULT_BALANCE_TOLERANCE)
    p.add_argument("--out", help="write the witness here when feasible")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="check a solution against an instance")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("decode", help="recover the subset from a feasible witness")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--angle-tol", type=float, default=DEFAULT_ANGLE_TOLERANCE)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("witness", help="build the witness for a subset")
    p.add_argument("--set", type=parse_int_list, required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--subset", type=parse_int_list, required=True)
    _add_params(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify-lemmas", help="seeded sweeps over both lemmas")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_verify_lemmas)

    p = sub.add_parser("capacity", help="convert between angle bound and capacity")
    p.add_argument("--b", "--susceptance", dest="b", type=parse_real, required=True)
    p.add_argument("--g", "--conductance", dest="g", type=parse_real, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--delta-max", type=parse_angle)
    group.add_argument("--capacity", type=parse_real)
    p.set_defaults(func=cmd_capacity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (
        UsageError,
        formats.FormatError,
        NetworkError,
        SolutionError,
        ReductionError,
        WitnessError,
        NotReductionForm,
        StructureError,
        OSError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
