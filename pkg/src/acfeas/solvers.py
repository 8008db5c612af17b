"""Feasibility deciders for star networks.

``solve_reduction_instance`` is exact on encoded subset-sum networks.
``grid_feasibility_search`` handles any single-load star but is one-sided: it
can find a witness or give up, never certify infeasibility.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .power_model import (
    DEFAULT_TOLERANCE,
    LineParams,
    NetworkInstance,
    PhaseSolution,
    check_feasibility,
    line_flow,
)
from .reduction import recognize_reduction_form

BRUTE_FORCE_LIMIT = 20
DEFAULT_ANGLE_STEPS = 201
DEFAULT_BALANCE_TOLERANCE = 1e-3
DEFAULT_MAX_STATES = 2_000_000
_PRUNE_DIRECTIONS = 32


class Verdict(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNKNOWN = "unknown"


class Method(enum.Enum):
    REDUCTION_DP = "dp"
    BRUTE_FORCE = "brute"
    GRID_SEARCH = "grid"


@dataclass(frozen=True)
class SolveStats:
    states_explored: int
    runtime_note: str


@dataclass(frozen=True)
class SolveOutcome:
    verdict: Verdict
    witness: PhaseSolution | None
    method: Method
    stats: SolveStats

    @property
    def feasible(self) -> bool:
        return self.verdict is Verdict.FEASIBLE


class StructureError(ValueError):
    """The network does not have the shape a solver requires."""


def _check_values(values: Sequence[int]) -> None:
    for v in values:
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ValueError(f"values must be positive integers, got {v!r}")


def _subset_sum_indices(values: Sequence[int], target: int) -> list[int] | None:
    if target < 0:
        return None
    mask = (1 << (target + 1)) - 1
    # reach[i] has bit s set iff some subset of values[i:] sums to s
    reach = [0] * (len(values) + 1)
    reach[-1] = 1
    for i in range(len(values) - 1, -1, -1):
        r = reach[i + 1]
        reach[i] = (r | (r << values[i])) & mask
    if not (reach[0] >> target) & 1:
        return None
    chosen = []
    s = target
    for i, v in enumerate(values):
        if (reach[i + 1] >> s) & 1:
            continue
        chosen.append(i)
        s -= v
    return chosen


def subset_sum_dp(values: Sequence[int], target: int) -> list[int] | None:
    """Pseudo-polynomial subset sum with reconstruction.

    Values are scanned in input order and each one is left out whenever the
    remaining values can still reach the residual target.
    """
    _check_values(values)
    idx = _subset_sum_indices(values, target)
    return None if idx is None else [values[i] for i in idx]


@lru_cache(maxsize=4096)
def _subset_sum_table(values: tuple[int, ...]) -> dict[int, int]:
    # first bitmask (in enumeration order) reaching each sum
    table = {0: 0}
    for i, v in enumerate(values):
        bit = 1 << i
        for s, m in list(table.items()):
            table.setdefault(s + v, m | bit)
    return table


def subset_sum_brute(values: Sequence[int], target: int) -> list[int] | None:
    """Exhaustive enumeration of all subsets; capped at 20 values."""
    _check_values(values)
    if len(values) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_LIMIT} values, got {len(values)}")
    m = _subset_sum_table(tuple(values)).get(target)
    if m is None:
        return None
    return [v for i, v in enumerate(values) if m >> i & 1]


def _solve_encoded(net: NetworkInstance, method: Method) -> SolveOutcome:
    start = time.perf_counter()
    form = recognize_reduction_form(net)
    idx = None
    if method is Method.BRUTE_FORCE:
        states = 2 ** len(form.values)
        if form.target is not None:
            subset = subset_sum_brute(form.values, form.target)
            if subset is not None:
                # values may repeat when recovered from admittances alone
                idx, pool = [], list(enumerate(form.values))
                for v in subset:
                    j = next(j for j, (_, x) in enumerate(pool) if x == v)
                    idx.append(pool.pop(j)[0])
    else:
        states = len(form.values) * (max(form.target or 0, 0) + 1)
        if form.target is not None:
            idx = _subset_sum_indices(form.values, form.target)

    def stats():
        return SolveStats(states, f"{(time.perf_counter() - start) * 1e3:.2f} ms")

    if idx is None:
        return SolveOutcome(Verdict.INFEASIBLE, None, method, stats())
    chosen = set(idx)
    angles = {form.load_id: 0.0}
    for i, bus_id in enumerate(form.generator_ids):
        angles[bus_id] = form.params.delta_max if i in chosen else 0.0
    witness = PhaseSolution(angles)
    if not check_feasibility(net, witness, DEFAULT_TOLERANCE).feasible:
        raise RuntimeError("constructed witness failed the feasibility check")
    return SolveOutcome(Verdict.FEASIBLE, witness, method, stats())


def solve_reduction_instance(net: NetworkInstance) -> SolveOutcome:
    """Exact decision for an encoded subset-sum network.

    Raises ``NotReductionForm`` when the network cannot be mapped back to a
    subset-sum instance.
    """
    return _solve_encoded(net, Method.REDUCTION_DP)


def solve_reduction_brute(net: NetworkInstance) -> SolveOutcome:
    """Same decision as :func:`solve_reduction_instance` by exhaustive enumeration."""
    return _solve_encoded(net, Method.BRUTE_FORCE)


def _star_layout(net: NetworkInstance):
    loads = net.loads
    if len(loads) != 1:
        raise StructureError(f"grid search needs exactly one load, found {len(loads)}")
    load = loads[0]
    arms = []
    for line in net.lines:
        if line.a == load.id:
            arms.append((line.b, line.params))
        elif line.b == load.id:
            arms.append((line.a, line.params))
        else:
            raise StructureError(f"line {line.name} does not touch the load; not a star")
    return load, arms


def _arm_samples(params: LineParams, steps: int):
    """Angle leads of one generator over the load, and the flows they pull out of the load."""
    d = params.delta_max
    grid = np.linspace(-d, d, steps)
    # exact endpoints and zero first so they win quantization ties
    ordered = [0.0, d, -d] + [x for x in grid.tolist() if x not in (0.0, d, -d)]
    leads, flows = [], []
    for lead in ordered:
        p_gen, _ = line_flow(params, lead)
        if p_gen < 0:
            continue
        leads.append(lead)
        flows.append(line_flow(params, -lead))
    return np.array(leads), np.array(flows).reshape(-1, 2)


def grid_feasibility_search(
    net: NetworkInstance,
    angle_steps: int = DEFAULT_ANGLE_STEPS,
    balance_tolerance: float = DEFAULT_BALANCE_TOLERANCE,
    max_states: int = DEFAULT_MAX_STATES,
) -> SolveOutcome:
    """Search discretized generator angles for a point meeting the load demand.

    Each generator's lead over the load is sampled on ``angle_steps`` points of
    ``[-delta_max, delta_max]`` (plus 0 and both endpoints), keeping samples
    with non-negative generator injection. Reachable load-flow sums are built
    one generator at a time, keeping one representative per square cell of
    side ``balance_tolerance``. Partial sums that cannot reach the demand,
    judged by support functions of the remaining generators, are dropped.
    """
    if angle_steps < 2:
        raise ValueError("angle_steps must be at least 2")
    if not balance_tolerance > 0:
        raise ValueError("balance_tolerance must be positive")
    start = time.perf_counter()
    load, arms = _star_layout(net)
    target = np.array([load.p_demand, load.q_demand])

    samples = [_arm_samples(params, angle_steps) for _, params in arms]
    angles = np.linspace(0, 2 * np.pi, _PRUNE_DIRECTIONS, endpoint=False)
    dirs = [np.column_stack([np.cos(angles), np.sin(angles)])]
    norm = np.hypot(*target)
    if norm > 0:
        normal = np.array([-target[1], target[0]]) / norm
        dirs.append(np.vstack([normal, -normal]))
    dirs = np.vstack(dirs)
    support = [flows @ dirs.T for _, flows in samples]
    # remaining[k]: support of the sum over generators k.. in each direction
    remaining = np.zeros((len(arms) + 1, len(dirs)))
    for k in range(len(arms) - 1, -1, -1):
        remaining[k] = remaining[k + 1] + support[k].max(axis=0)

    sums = np.zeros((1, 2))
    history = []
    explored = 1
    slack = math.sqrt(2) * balance_tolerance

    def give_up(note):
        elapsed = (time.perf_counter() - start) * 1e3
        return SolveOutcome(
            Verdict.UNKNOWN, None, Method.GRID_SEARCH, SolveStats(explored, f"{note}; {elapsed:.2f} ms")
        )

    for k, (leads, flows) in enumerate(samples):
        if len(leads) == 0:
            return give_up(f"generator {arms[k][0]} has no admissible angle")
        cand = (flows[:, None, :] + sums[None, :, :]).reshape(-1, 2)
        sample_idx = np.repeat(np.arange(len(leads)), len(sums))
        parent_idx = np.tile(np.arange(len(sums)), len(leads))
        explored += len(cand)
        margin = (k + 2) * slack + 1e-12 * (1 + norm)
        gap = (target - cand) @ dirs.T - remaining[k + 1]
        keep = (gap <= margin).all(axis=1)
        cand, sample_idx, parent_idx = cand[keep], sample_idx[keep], parent_idx[keep]
        if len(cand) == 0:
            return give_up("demand unreachable on this grid")
        cells = np.floor(cand / balance_tolerance).astype(np.int64)
        _, first = np.unique(cells, axis=0, return_index=True)
        first.sort()
        sums = cand[first]
        history.append((sample_idx[first], parent_idx[first]))
        if len(sums) > max_states:
            return give_up(f"state cap {max_states} exceeded")

    dist = np.abs(sums - target).max(axis=1)
    best = int(np.argmin(dist))
    if dist[best] > balance_tolerance:
        return give_up("no grid point within tolerance of the demand")

    angles_out = {load.id: 0.0}
    node = best
    for k in range(len(arms) - 1, -1, -1):
        s_idx, p_idx = history[k]
        angles_out[arms[k][0]] = float(samples[k][0][s_idx[node]])
        node = p_idx[node]
    witness = PhaseSolution(angles_out)
    if not check_feasibility(net, witness, balance_tolerance).feasible:
        return give_up("grid witness failed the feasibility check")
    elapsed = (time.perf_counter() - start) * 1e3
    return SolveOutcome(
        Verdict.FEASIBLE, witness, Method.GRID_SEARCH, SolveStats(explored, f"{elapsed:.2f} ms")
    )
