import itertools
import math

from acfeas.sweeps import (
    SplitMix64,
    apparent_power_sweep,
    capacity_round_trip_sweep,
    lemma1_sweep,
    lemma2_sweep,
    random_solvable_instance,
    reduction_equivalence_sweep,
)


def test_splitmix_reference_stream():
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


def test_uniform_range_and_determinism():
    a, b = SplitMix64(99), SplitMix64(99)
    xs = [a.uniform() for _ in range(1000)]
    assert xs == [b.uniform() for _ in range(1000)]
    assert all(0.0 <= x < 1.0 for x in xs)


def test_small_sweeps_pass():
    ineq, _ = lemma1_sweep(3000, 5)
    assert ineq.passed and ineq.samples == 3000
    assert lemma2_sweep(3000, 5).passed
    assert apparent_power_sweep(3000, 5).passed
    assert capacity_round_trip_sweep(3000, 5).passed


def test_equality_mismatches_are_interior_resolution_limits():
    # every equality-detection miss must be an interior point whose exact gap is
    # negative yet smaller than the absolute bound
    _, eq = lemma1_sweep(20000, 42)
    assert eq.failures == eq.notes["interior_below_bound"]
    if eq.counterexample:
        ex = eq.counterexample
        b, g, d, x = ex["susceptance"], ex["conductance"], ex["delta_max"], ex["delta"]
        exact = -4 * (b * b + g * g) * math.sin(x / 2) * math.sin(d / 2) * math.sin((d - x) / 2)
        assert exact < 0
        assert abs(exact) <= ex["bound"]
        assert min(x, d - x) > 1e-9


def test_random_instances_are_solvable():
    rng = SplitMix64(1)
    for _ in range(200):
        inst, subset = random_solvable_instance(rng, 12, 100)
        assert sum(subset) == inst.target
        assert set(subset) <= set(inst.values)
        assert 1 <= len(inst.values) <= 12


def test_equivalence_sweep_small_range():
    result = reduction_equivalence_sweep(max_size=4, max_value=7, workers=1)
    assert result.passed
    assert result.samples == sum(
        sum(c) for k in range(1, 5) for c in itertools.combinations(range(1, 8), k)
    )
