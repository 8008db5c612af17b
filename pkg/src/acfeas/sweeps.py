"""Seeded numerical sweeps over the power-flow identities and the two lemmas.

Random draws come from SplitMix64 (64-bit state, golden-ratio increment,
``(x >> 11) * 2**-53`` for uniforms in [0, 1)), so a seed reproduces the same
sample stream on any platform.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .power_model import (
    LineParams,
    apparent_power_squared,
    capacity_from_delta_max,
    check_feasibility,
    delta_max_from_capacity,
)
from .reduction import (
    DEFAULT_PARAMS,
    SubsetSumInstance,
    decode_witness,
    encode_subset_sum,
    lemma1_gap,
    lemma2_check,
    lemma2_condition_holds,
    witness_from_subset,
)
from .solvers import (
    Verdict,
    grid_feasibility_search,
    solve_reduction_instance,
    subset_sum_brute,
)

_MASK = (1 << 64) - 1
PARAM_SCALE = 5.0
ENDPOINT_TOL = 1e-9
GAP_TOL = 1e-9
IDENTITY_TOL = 1e-9
ROUND_TRIP_TOL = 1e-12


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


def sample_line(rng: SplitMix64) -> LineParams:
    """b in [-5, 0], g in [0, 5], delta_max in (0, pi/2]; never b = g = 0."""
    while True:
        b = -PARAM_SCALE * rng.uniform()
        g = PARAM_SCALE * rng.uniform()
        if b != 0 or g != 0:
            break
    delta_max = (math.pi / 2) * (1.0 - rng.uniform())
    return LineParams(b + 0.0, g, delta_max)


def sample_reduction_line(rng: SplitMix64) -> LineParams:
    while True:
        line = sample_line(rng)
        if lemma2_condition_holds(line.susceptance, line.conductance, line.delta_max):
            return line


def _pick(rng: SplitMix64, lo: float, hi: float, specials: tuple[float, ...]) -> float:
    """Mostly uniform on [lo, hi]; one draw in ten is one of ``specials``."""
    r = rng.uniform()
    if r < 0.1:
        return specials[int(r * 10 * len(specials))]
    return lo + (hi - lo) * rng.uniform()


@dataclass
class SweepResult:
    name: str
    samples: int = 0
    failures: int = 0
    worst_margin: float = -math.inf
    counterexample: dict | None = None
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, margin: float, failed: bool, example: dict) -> None:
        self.samples += 1
        if margin > self.worst_margin:
            self.worst_margin = margin
        if failed:
            self.failures += 1
            if self.counterexample is None:
                self.counterexample = example


def lemma1_sweep(samples: int, seed: int) -> tuple[SweepResult, SweepResult]:
    """Ratio inequality and equality-case detection on random lines.

    Returns ``(inequality, equality)``. The inequality fails when the gap
    exceeds ``1e-9 (1 + b^2 + g^2)``; the equality check fails when
    ``|gap|`` within that bound disagrees with ``delta`` lying within 1e-9 of
    0 or ``delta_max``. Equality mismatches where ``delta`` is interior are
    also counted in ``notes["interior_below_bound"]``.
    """
    rng = SplitMix64(seed)
    ineq = SweepResult("lemma1_inequality")
    eq = SweepResult("lemma1_equality")
    interior_small = 0
    for _ in range(samples):
        line = sample_line(rng)
        dm = line.delta_max
        delta = _pick(rng, 0.0, dm, (0.0, dm))
        gap = lemma1_gap(line, delta)
        bound = GAP_TOL * (1 + line.admittance_sq)
        example = {
            "susceptance": line.susceptance,
            "conductance": line.conductance,
            "delta_max": dm,
            "delta": delta,
            "gap": gap,
            "bound": bound,
        }
        ineq.record(gap - bound, gap > bound, example)
        at_endpoint = min(delta, dm - delta) <= ENDPOINT_TOL
        detected = abs(gap) <= bound
        mismatch = detected != at_endpoint
        if mismatch and not at_endpoint:
            interior_small += 1
        eq.record(abs(gap) - bound if at_endpoint else bound - abs(gap), mismatch, example)
    eq.notes["interior_below_bound"] = interior_small
    return ineq, eq


def lemma2_sweep(samples: int, seed: int) -> SweepResult:
    rng = SplitMix64(seed)
    result = SweepResult("lemma2_implication")
    for _ in range(samples):
        line = sample_reduction_line(rng)
        dm = line.delta_max
        delta = _pick(rng, -dm, dm, (-dm, 0.0, dm))
        ok = lemma2_check(line, delta)
        p = line.conductance * (1 - math.cos(delta)) - line.susceptance * math.sin(delta)
        example = {
            "susceptance": line.susceptance,
            "conductance": line.conductance,
            "delta_max": dm,
            "delta": delta,
            "antecedent": p,
        }
        # margin: how close a negative delta came to a non-negative antecedent
        result.record(p if delta < 0 else -math.inf, not ok, example)
    return result


def apparent_power_sweep(samples: int, seed: int) -> SweepResult:
    rng = SplitMix64(seed)
    result = SweepResult("apparent_power_identity")
    for _ in range(samples):
        line = sample_line(rng)
        delta = math.pi * (2 * rng.uniform() - 1)
        lhs = apparent_power_squared(line, delta)
        rhs = 2 * line.admittance_sq * (1 - math.cos(delta))
        err = abs(lhs - rhs) - IDENTITY_TOL * (1 + line.admittance_sq)
        result.record(err, err > 0, {"line": line, "delta": delta, "lhs": lhs, "rhs": rhs})
    return result


def capacity_round_trip_sweep(samples: int, seed: int) -> SweepResult:
    rng = SplitMix64(seed)
    result = SweepResult("capacity_round_trip")
    for _ in range(samples):
        line = sample_line(rng)
        cap = capacity_from_delta_max(line)
        back = delta_max_from_capacity(line.susceptance, line.conductance, cap)
        err = abs(back - line.delta_max)
        result.record(err - ROUND_TRIP_TOL, err > ROUND_TRIP_TOL, {"line": line, "recovered": back})
    return result


def run_lemma_sweeps(samples: int, seed: int) -> list[SweepResult]:
    ineq, eq = lemma1_sweep(samples, seed)
    return [ineq, eq, lemma2_sweep(samples, seed + 1)]


def _equivalence_chunk(sets: list[tuple[int, ...]]) -> tuple[int, int, list]:
    checked = feasible = 0
    disagreements = []
    for values in sets:
        for w in range(1, sum(values) + 1):
            outcome = solve_reduction_instance(encode_subset_sum(SubsetSumInstance(values, w)))
            expected = subset_sum_brute(values, w) is not None
            checked += 1
            feasible += expected
            if outcome.feasible != expected:
                disagreements.append((values, w, outcome.verdict.value))
    return checked, feasible, disagreements


def all_value_sets(max_size: int, max_value: int) -> list[tuple[int, ...]]:
    return [
        combo
        for k in range(1, max_size + 1)
        for combo in itertools.combinations(range(1, max_value + 1), k)
    ]


def reduction_equivalence_sweep(max_size: int = 10, max_value: int = 15, workers: int | None = None) -> SweepResult:
    """Exact solver vs brute force on every instance in the given range.

    Work is split across ``workers`` processes (default: CPU count); the
    result does not depend on the split.
    """
    sets = all_value_sets(max_size, max_value)
    workers = workers or os.cpu_count() or 1
    chunks = [sets[i::workers * 8] for i in range(workers * 8)]
    if workers == 1:
        parts = [_equivalence_chunk(chunk) for chunk in chunks]
    else:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_equivalence_chunk, chunks))
    result = SweepResult("reduction_equivalence")
    bad = []
    for checked, feasible, disagreements in parts:
        result.samples += checked
        result.notes["feasible"] = result.notes.get("feasible", 0) + feasible
        bad.extend(disagreements)
    bad.sort()
    result.failures = len(bad)
    result.counterexample = {"values": bad[0][0], "target": bad[0][1], "verdict": bad[0][2]} if bad else None
    return result


def random_solvable_instance(rng: SplitMix64, max_size: int, max_value: int):
    """Distinct values, a random non-empty subset of them, and its sum as target."""
    size = 1 + int(rng.uniform() * max_size)
    values: list[int] = []
    while len(values) < size:
        v = 1 + int(rng.uniform() * max_value)
        if v not in values:
            values.append(v)
    subset = [v for v in values if rng.uniform() < 0.5]
    if not subset:
        subset = [values[int(rng.uniform() * size)]]
    return SubsetSumInstance(tuple(values), sum(subset)), subset


def witness_validity_sweep(samples: int = 1000, seed: int = 2024, max_size: int = 12, max_value: int = 100) -> SweepResult:
    rng = SplitMix64(seed)
    result = SweepResult("witness_validity")
    for _ in range(samples):
        inst, subset = random_solvable_instance(rng, max_size, max_value)
        net = encode_subset_sum(inst, DEFAULT_PARAMS)
        sol = witness_from_subset(inst, DEFAULT_PARAMS, subset)
        report = check_feasibility(net, sol)
        bound = 1e-6 * (1 + inst.target)
        decoded = decode_witness(net, sol)
        failed = not report.feasible or report.max_residual > bound or decoded != subset
        result.record(
            report.max_residual - bound,
            failed,
            {"values": inst.values, "target": inst.target, "subset": subset, "decoded": decoded},
        )
    return result


def cross_solver_sweep(max_size: int = 5, max_value: int = 8, steps: int = 201, tol: float = 1e-3) -> SweepResult:
    """Grid search must find every DP-feasible instance and never claim the others."""
    result = SweepResult("cross_solver_agreement")
    missed = contradicted = 0
    for values in all_value_sets(max_size, max_value):
        for w in range(1, sum(values) + 1):
            net = encode_subset_sum(SubsetSumInstance(values, w))
            exact = solve_reduction_instance(net).verdict
            grid = grid_feasibility_search(net, steps, tol).verdict
            if exact is Verdict.FEASIBLE:
                failed = grid is not Verdict.FEASIBLE
                missed += failed
            else:
                failed = grid is not Verdict.UNKNOWN
                contradicted += failed
            result.record(float(failed), failed, {"values": values, "target": w, "dp": exact.value, "grid": grid.value})
    result.notes.update(missed=missed, contradicted=contradicted)
    return result
