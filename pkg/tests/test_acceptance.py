"""Exit criteria. Each test prints one PASS/FAIL line in the terminal summary."""

import time

import pytest

from conftest import ACCEPTANCE_LINES
from acfeas.sweeps import (
    apparent_power_sweep,
    capacity_round_trip_sweep,
    cross_solver_sweep,
    lemma1_sweep,
    lemma2_sweep,
    reduction_equivalence_sweep,
    witness_validity_sweep,
)

pytestmark = pytest.mark.acceptance

SEED = 42
EQUIVALENCE_BUDGET_S = 60.0


def verdict(label: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
    assert ok, f"{label}: {detail}"


@pytest.fixture(scope="module")
def equivalence():
    start = time.perf_counter()
    result = reduction_equivalence_sweep(max_size=10, max_value=15)
    return result, time.perf_counter() - start


def test_reduction_equivalence(equivalence):
    result, _ = equivalence
    verdict(
        "1 reduction equivalence (|M|<=10, values<=15)",
        result.passed,
        f"{result.samples - result.failures}/{result.samples} agree "
        f"({result.notes['feasible']} feasible), first disagreement {result.counterexample}",
    )


def test_reduction_equivalence_runtime(equivalence):
    _, elapsed = equivalence
    verdict(
        "1 reduction equivalence runtime",
        elapsed <= EQUIVALENCE_BUDGET_S,
        f"{elapsed:.1f} s (target <= {EQUIVALENCE_BUDGET_S:.0f} s)",
    )


def test_witness_validity():
    result = witness_validity_sweep(samples=1000, seed=SEED, max_size=12, max_value=100)
    verdict(
        "2 witness validity (1000 instances)",
        result.passed and result.samples == 1000,
        f"{result.failures} failures, worst residual margin {result.worst_margin:.2e} "
        f"vs 1e-6(1+w), first failure {result.counterexample}",
    )


@pytest.fixture(scope="module")
def lemma1():
    return lemma1_sweep(100_000, SEED)


def test_lemma1_inequality(lemma1):
    ineq, _ = lemma1
    verdict(
        "3a lemma 1 gap <= 1e-9(1+b^2+g^2) (1e5 samples)",
        ineq.passed and ineq.samples == 100_000,
        f"{ineq.failures} violations, worst gap - bound {ineq.worst_margin:.2e}",
    )


def test_lemma1_equality_detection(lemma1):
    _, eq = lemma1
    verdict(
        "3b lemma 1 |gap| <= bound iff delta within 1e-9 of {0, delta_max} (1e5 samples)",
        eq.passed and eq.samples == 100_000,
        f"{eq.failures} mismatches ({eq.notes['interior_below_bound']} interior samples whose "
        f"negative gap is below the absolute bound), first {eq.counterexample}",
    )


def test_lemma2_implication():
    result = lemma2_sweep(100_000, SEED + 1)
    verdict(
        "4 lemma 2 sign implication (1e5 samples)",
        result.passed and result.samples == 100_000,
        f"{result.failures} violations, first {result.counterexample}",
    )


def test_apparent_power_identity():
    result = apparent_power_sweep(100_000, SEED)
    verdict(
        "5 apparent-power identity (1e5 samples)",
        result.passed and result.samples == 100_000,
        f"{result.failures} violations, worst error - bound {result.worst_margin:.2e}",
    )


def test_capacity_round_trip():
    result = capacity_round_trip_sweep(10_000, SEED)
    verdict(
        "6 capacity round trip (1e4 samples, 1e-12)",
        result.passed and result.samples == 10_000,
        f"{result.failures} violations, worst error - 1e-12 {result.worst_margin:.2e}",
    )


def test_cross_solver_agreement():
    result = cross_solver_sweep(max_size=5, max_value=8, steps=201, tol=1e-3)
    verdict(
        "7 grid vs DP (|M|<=5, values<=8, steps=201, tol=1e-3)",
        result.passed,
        f"{result.samples} instances, {result.notes['missed']} feasible missed, "
        f"{result.notes['contradicted']} infeasible contradicted",
    )
