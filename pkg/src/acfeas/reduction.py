"""Subset sum to AC feasibility: encoding, witnesses, decoding and lemma checks.

A subset-sum instance ``(M, w)`` becomes a star network with one load ``l`` and
one generator ``g<x>`` per value ``x``. The line to ``g<x>`` has parameters
``(b*x, g*x, delta_max)`` and the load demands ``w`` times the flow received
over a base line at full angle separation. A feasible operating point exists
exactly when some subset of ``M`` sums to ``w``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .power_model import (
    DEFAULT_TOLERANCE,
    Bus,
    Line,
    LineParams,
    NetworkError,
    NetworkInstance,
    PhaseSolution,
    check_feasibility,
    line_flow,
    validate_network,
)

LOAD_ID = "l"
DEFAULT_ANGLE_TOLERANCE = 1e-7
RECOGNITION_RTOL = 1e-6
MAX_SCALE_SEARCH = 10_000

_GEN_ID = re.compile(r"^g(\d+)$")


class ReductionError(ValueError):
    """Bad reduction input (instance, subset or parameters)."""


class NotReductionForm(ValueError):
    """The network is not the output of the subset-sum encoding."""


class WitnessError(ValueError):
    """A phase solution cannot be decoded into a subset."""


@dataclass(frozen=True)
class SubsetSumInstance:
    values: tuple[int, ...]
    target: int

    def __post_init__(self):
        values = tuple(self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise ReductionError("value set is empty")
        for v in (*values, self.target):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ReductionError(f"{v!r} is not an integer")
            if v < 1:
                raise ReductionError(f"values and target must be positive, got {v}")
        if len(set(values)) != len(values):
            dupes = sorted({v for v in values if values.count(v) > 1})
            raise ReductionError(f"values must be distinct, repeated: {dupes}")


@dataclass(frozen=True)
class ExtremeFlows:
    np_max: float
    nq_max: float


@dataclass(frozen=True)
class ReductionParams:
    """Base line parameters for the encoding; must make the load consume power."""

    susceptance: float
    conductance: float
    delta_max: float

    def __post_init__(self):
        problems = self.line().violations()
        if problems:
            raise ReductionError("; ".join(problems))
        if not lemma2_condition_holds(self.susceptance, self.conductance, self.delta_max):
            raise ReductionError(
                "reduction condition violated: need -b > g*tan(delta_max/2), got "
                f"-b={0.0 - self.susceptance:.6g}, "
                f"g*tan(delta_max/2)={self.conductance * math.tan(self.delta_max / 2):.6g}"
            )

    def line(self, scale: float = 1) -> LineParams:
        return LineParams(self.susceptance * scale, self.conductance * scale, self.delta_max)


def receiving_end_extremes(params) -> ExtremeFlows:
    """Flow over a line at angle difference ``-delta_max``.

    Accepts anything with ``susceptance``, ``conductance`` and ``delta_max``.
    """
    line = LineParams(params.susceptance, params.conductance, params.delta_max)
    p, q = line_flow(line, -params.delta_max)
    return ExtremeFlows(p, q)


def lemma2_condition_holds(b: float, g: float, delta_max: float) -> bool:
    """True iff the extreme received real flow is negative.

    Equivalent to ``-b > g * tan(delta_max / 2)``.
    """
    p, _ = line_flow(LineParams(b, g, delta_max), -delta_max)
    return p < 0


def lemma1_gap(params, delta: float) -> float:
    """``p_ba * nq_max - q_ba * np_max`` for flows over angle difference ``-delta``.

    Non-positive on ``[0, delta_max]`` and zero only at the two endpoints.
    """
    if not 0 <= delta <= params.delta_max:
        raise ValueError(f"delta {delta} outside [0, {params.delta_max}]")
    ext = receiving_end_extremes(params)
    p_ba, q_ba = line_flow(
        LineParams(params.susceptance, params.conductance, params.delta_max), -delta
    )
    return p_ba * ext.nq_max - q_ba * ext.np_max


def lemma2_check(params, delta: float) -> bool:
    """Whether ``g(1 - cos d) - b sin d >= 0`` implies ``d >= 0`` at this ``d``."""
    p, _ = line_flow(
        LineParams(params.susceptance, params.conductance, params.delta_max), delta
    )
    return p < 0 or delta >= 0


DEFAULT_PARAMS = ReductionParams(susceptance=-2.0, conductance=0.5, delta_max=math.pi / 3)


def generator_id(value: int) -> str:
    return f"g{value}"


def encode_subset_sum(
    inst: SubsetSumInstance, params: ReductionParams = DEFAULT_PARAMS
) -> NetworkInstance:
    ext = receiving_end_extremes(params)
    w = inst.target
    buses = [Bus.load(LOAD_ID, w * ext.np_max, w * ext.nq_max)]
    lines = []
    for x in inst.values:
        buses.append(Bus.generator(generator_id(x)))
        lines.append(Line(generator_id(x), LOAD_ID, params.line(x)))
    return NetworkInstance(tuple(buses), tuple(lines))


def witness_from_subset(
    inst: SubsetSumInstance, params: ReductionParams, subset: Iterable[int]
) -> PhaseSolution:
    """Load at angle 0, chosen generators at ``delta_max``, the rest at 0."""
    chosen = list(subset)
    if len(set(chosen)) != len(chosen):
        raise ReductionError(f"subset repeats a value: {chosen}")
    unknown = [x for x in chosen if x not in inst.values]
    if unknown:
        raise ReductionError(f"subset values {unknown} are not in the instance")
    if sum(chosen) != inst.target:
        raise ReductionError(f"subset sums to {sum(chosen)}, target is {inst.target}")
    angles = {LOAD_ID: 0.0}
    chosen_set = set(chosen)
    for x in inst.values:
        angles[generator_id(x)] = params.delta_max if x in chosen_set else 0.0
    return PhaseSolution(angles)


@dataclass(frozen=True)
class ReductionForm:
    """Subset-sum data recovered from a reduction-form network.

    ``target`` is None when the demand is not an integer multiple of the
    extreme flow; ``target_estimate`` is the real multiple either way.
    """

    load_id: str
    generator_ids: tuple[str, ...]
    values: tuple[int, ...]
    params: ReductionParams
    target_estimate: float
    target: int | None


def _close(a: float, b: float, rtol: float = RECOGNITION_RTOL) -> bool:
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def _integer_scales(norms: Sequence[float], ids: Sequence[str]) -> list[int]:
    matches = [_GEN_ID.match(i) for i in ids]
    if all(matches):
        xs = [int(m.group(1)) for m in matches]
        if all(x > 0 for x in xs):
            unit = norms[0] / xs[0]
            if all(_close(n / x, unit) for n, x in zip(norms, xs)):
                return xs
    smallest = min(norms)
    ratios = [n / smallest for n in norms]
    for k in range(1, MAX_SCALE_SEARCH + 1):
        scaled = [k * r for r in ratios]
        if all(_close(s, round(s)) for s in scaled):
            return [round(s) for s in scaled]
    raise NotReductionForm("line admittances are not integer multiples of a common base")


def recognize_reduction_form(net: NetworkInstance) -> ReductionForm:
    """Recover ``(M, w, b, g, delta_max)`` from an encoded network.

    Generator values come from ``g<x>`` bus ids when those agree with the line
    admittances, otherwise from the smallest integer ratios between admittance
    magnitudes. Raises :class:`NotReductionForm` on any mismatch beyond
    ``RECOGNITION_RTOL``.
    """
    violations = validate_network(net)
    if violations:
        raise NetworkError(violations)
    loads = net.loads
    if len(loads) != 1:
        raise NotReductionForm(f"expected exactly one load, found {len(loads)}")
    load = loads[0]
    if not net.lines:
        raise NotReductionForm("network has no generators")
    gen_ids = []
    for line in net.lines:
        if load.id not in (line.a, line.b):
            raise NotReductionForm(f"line {line.name} does not touch the load")
        gen_ids.append(line.b if line.a == load.id else line.a)

    params = [line.params for line in net.lines]
    delta_max = params[0].delta_max
    norms = []
    ub = ug = 0.0
    for p in params:
        if not _close(p.delta_max, delta_max):
            raise NotReductionForm("lines have different angle bounds")
        n = math.hypot(p.susceptance, p.conductance)
        if not norms:
            ub, ug = p.susceptance / n, p.conductance / n
        elif (
            abs(p.susceptance / n - ub) > RECOGNITION_RTOL
            or abs(p.conductance / n - ug) > RECOGNITION_RTOL
        ):
            raise NotReductionForm("line susceptance/conductance ratios differ")
        norms.append(n)

    values = _integer_scales(norms, gen_ids)
    n = len(params)
    base_b = sum(p.susceptance / x for p, x in zip(params, values)) / n
    base_g = sum(p.conductance / x for p, x in zip(params, values)) / n
    try:
        base = ReductionParams(base_b, base_g, delta_max)
    except ReductionError as exc:
        raise NotReductionForm(str(exc)) from None

    ext = receiving_end_extremes(base)
    w_p = load.p_demand / ext.np_max
    w_q = load.q_demand / ext.nq_max
    if not _close(w_p, w_q):
        raise NotReductionForm(
            f"demand is not along the extreme-flow direction (w from P: {w_p:.9g}, from Q: {w_q:.9g})"
        )
    w = (w_p + w_q) / 2
    target = round(w) if _close(w, round(w)) else None
    return ReductionForm(load.id, tuple(gen_ids), tuple(values), base, w, target)


def decode_witness(
    net: NetworkInstance,
    sol: PhaseSolution,
    angle_tolerance: float = DEFAULT_ANGLE_TOLERANCE,
) -> list[int]:
    """Subset of generator values whose angle leads the load's.

    Every selected generator must sit within ``angle_tolerance`` of
    ``delta_max`` and the selection must sum to the encoded target.
    """
    form = recognize_reduction_form(net)
    report = check_feasibility(net, sol, DEFAULT_TOLERANCE)
    if not report.feasible:
        raise WitnessError(
            f"solution is not feasible (max load residual {report.max_residual:.3g})"
        )
    theta_l = sol.angles[form.load_id]
    delta_max = form.params.delta_max
    chosen = []
    for bus_id, x in zip(form.generator_ids, form.values):
        lead = sol.angles[bus_id] - theta_l
        if lead > angle_tolerance:
            if abs(lead - delta_max) > angle_tolerance:
                raise WitnessError(
                    f"generator {bus_id} leads the load by {lead:.12g}, "
                    f"neither 0 nor delta_max={delta_max:.12g}"
                )
            chosen.append(x)
    if form.target is None or sum(chosen) != form.target:
        raise WitnessError(
            f"selected values sum to {sum(chosen)}, encoded target is {form.target_estimate:.9g}"
        )
    return chosen
