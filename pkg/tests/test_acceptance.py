"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every test appends a single ``criterion N: PASS|FAIL ...`` line to
``RESULTS``; ``conftest.py`` prints them at the end of the session, and
running this file directly prints them as well.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from seqassort.conditions import (
    Condition,
    check_condition1,
    check_condition2,
    check_condition3,
    check_substitutable,
    expected_conditions,
)
from seqassort.generators import MODEL_NAMES, random_instance, random_reward_instance
from seqassort.harness import WorstCase, exact_evaluate
from seqassort.instance import Cardinality, Knapsack, sample
from seqassort.lowerbounds import check_reduction, evaluate_thm53, make_reduction_appB
from seqassort.oracle import opt_brute, opt_mnl_revenue_ordered, opt_stats
from seqassort.policies import (
    Alg1,
    Alg2,
    Alg3,
    Alg4,
    ConvexPI,
    External,
    MonteCarlo,
    Thresholds,
    build_policy,
    compute_threshold,
    decomposition_cardinality,
    decomposition_unconstrained,
    run_policy,
)

TOL = 1e-9
RESULTS: list[str] = []


def record(n: int, ok: bool, detail: str, started: float) -> None:
    RESULTS.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail} ({time.perf_counter() - started:.2f}s)")
    print(RESULTS[-1])


def _guarantee_failures(instances, config_for):
    """Evaluate every (instance, config) pair exactly under worst-case orders."""
    failures, evaluated, tightest = [], 0, 0.0
    for label, inst in instances:
        stats = opt_stats(inst)
        for config in config_for(inst):
            rep = exact_evaluate(inst, config, WorstCase(), TOL, stats=stats)
            evaluated += 1
            if rep.opt_value > 0:
                tightest = max(tightest, rep.achieved_ratio / rep.claimed_rho)
            if not rep.passed:
                failures.append(f"{label}/{rep.policy}: rho={rep.claimed_rho:.4f} ratio={rep.achieved_ratio:.4f}")
    return failures, evaluated, tightest


# ---------------------------------------------------------------------------


def test_criterion_1_model_conditions():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1001)
    failures, checked = [], 0
    for model in MODEL_NAMES:
        for _ in range(200):
            inst = random_instance(model, int(rng.integers(1, 7)), rng, max_atoms=3)
            real = sample(inst, rng)
            for cond in expected_conditions(inst.model):
                if cond is Condition.SUBSTITUTABLE:
                    rep = check_substitutable(inst.model, real, TOL)
                elif cond is Condition.COND1:
                    rep = check_condition1(inst.model, inst, real, trials=2, rng=rng)
                elif cond is Condition.COND2:
                    rep = check_condition2(inst.model, real, TOL)
                else:
                    rep = check_condition3(inst.model, real, cond.value.rsplit("_", 1)[1], TOL)
                checked += 1
                if not rep.holds:
                    failures.append((model, cond.value, rep.worst_violation))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 30
    record(1, ok, f"{checked} condition checks on 800 instances, failures={failures[:3]}", t0)
    assert ok


def test_criterion_2_unconstrained_guarantee():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1002)
    models = ("mnl", "gam", "lcf")
    instances = [
        (models[j % 3], random_instance(models[j % 3], int(rng.integers(1, 6)), rng))
        for j in range(100)
    ]
    failures, evaluated, tight = _guarantee_failures(
        instances, lambda inst: [Alg1("gamma_tuned"), Alg1("half")]
    )
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 120
    record(2, ok, f"{evaluated} evaluations, max achieved/claimed={tight:.4f}, failures={failures[:3]}", t0)
    assert ok


def _cardinality_instances(seed):
    rng = np.random.default_rng(seed)
    out = []
    for model in MODEL_NAMES:
        for k in (1, 2, 3):
            for _ in range(20):
                n = int(rng.integers(1, 6))
                out.append((f"{model}/k={k}", random_instance(model, n, rng, max_atoms=2,
                                                               constraint=Cardinality(k),
                                                               integer_revenues=bool(rng.random() < 0.3))))
    return out


def _cardinality_configs(inst):
    if inst.model.name == "mnl":
        return [Alg2("strong")]
    return [Alg2("weak"), Alg2("gamma_weak")]


def test_criterion_3_cardinality_guarantee():
    t0 = time.perf_counter()
    failures, evaluated, tight = _guarantee_failures(_cardinality_instances(1003), _cardinality_configs)
    record(3, not failures, f"{evaluated} evaluations, max achieved/claimed={tight:.4f}, failures={failures[:3]}", t0)
    assert not failures


def _knapsack_instances(seed):
    rng = np.random.default_rng(seed)
    out = []
    for model in MODEL_NAMES:
        for beta in (0.25, 0.5):
            for _ in range(20):
                n = int(rng.integers(1, 6))
                out.append((f"{model}/beta={beta}", random_instance(model, n, rng, max_atoms=2,
                                                                     constraint=Knapsack(1.0), beta=beta)))
    return out


def _knapsack_configs(inst):
    return [Alg3("strong" if inst.model.name == "mnl" else "weak")]


def test_criterion_4_knapsack_guarantee():
    t0 = time.perf_counter()
    instances = _knapsack_instances(1004)
    betas = {compute_threshold(inst, _knapsack_configs(inst)[0]).beta for _, inst in instances}
    failures, evaluated, tight = _guarantee_failures(instances, _knapsack_configs)
    ok = not failures and betas == {0.25, 0.5}
    record(4, ok, f"{evaluated} evaluations, betas={sorted(betas)}, max achieved/claimed={tight:.4f}, failures={failures[:3]}", t0)
    assert ok


def test_criterion_5_alg4_guarantee():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1005)
    instances = []
    for model in ("mnl", "gam", "lcf"):
        for _ in range(20):
            n = int(rng.integers(2, 6))
            instances.append((model, random_instance(model, n, rng, max_atoms=2, constraint=Knapsack(1.0),
                                                     mixed_sizes=True)))
    configs = lambda inst: [Alg4("five_competitive" if inst.model.name == "mnl" else "eight_competitive")]
    failures, evaluated, tight = _guarantee_failures(instances, configs)
    record(5, not failures, f"{evaluated} evaluations over coin x orders, max achieved/claimed={tight:.4f}, failures={failures[:3]}", t0)
    assert not failures


def test_criterion_6_lower_bound():
    t0 = time.perf_counter()
    half = evaluate_thm53(1e-3, 0.5)
    near_one = evaluate_thm53(1e-3, 0.99)
    elapsed = time.perf_counter() - t0
    ok = half.ratio >= 1.49 and 0.495 <= half.gamma <= 0.505 and near_one.ratio >= 1.95 and elapsed < 1
    record(6, ok, f"ratio(k=0.5)={half.ratio:.5f} gamma={half.gamma:.5f} ratio(k=0.99)={near_one.ratio:.5f}", t0)
    assert ok


def test_criterion_7_reduction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1007)
    marginal_sets = [[[(0.5, 2.0), (0.5, 1.0)], [(0.5, 2 / 3), (0.5, 0.5)], [(0.5, 0.4), (0.5, 1 / 3)]]]
    for _ in range(9):
        # distinct inverse rewards on a grid of spacing 0.5, so attractions differ by δ^0.5 or more
        inv = 0.5 * (1 + rng.choice(10, size=6, replace=False))
        p = rng.uniform(0.1, 0.9, size=3)
        marginal_sets.append([[(p[i], 1 / inv[2 * i]), (1 - p[i], 1 / inv[2 * i + 1])] for i in range(3)])
    worst, opt_ok, sets = 0.0, True, 0
    for marginals in marginal_sets:
        chk = check_reduction(make_reduction_appB(marginals, 1e-6))
        worst = max(worst, chk.max_error)
        opt_ok &= chk.opt_matches_max and chk.skipped_realizations == 0
        sets += chk.checked
    ok = worst <= 0.01 and opt_ok
    record(7, ok, f"{len(marginal_sets)} instances, {sets} (realization, A) pairs, max |f(A)-min r|={worst:.3g}", t0)
    assert ok


def test_criterion_8_convex_prophet():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1008)
    worst, failures = np.inf, 0
    for _ in range(100):
        inst = random_reward_instance(int(rng.integers(1, 6)), rng)
        rep = exact_evaluate(inst, ConvexPI("half_expected_max"))
        margin = rep.policy_value - 0.5 * rep.opt_value
        worst = min(worst, margin)
        failures += margin < -TOL
    record(8, failures == 0, f"100 instances, min(E[min-adversary]-E[max]/2)={worst:.3g}", t0)
    assert failures == 0


def test_criterion_9_threshold_robustness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1009)
    suites = [
        [(m, random_instance(m, int(rng.integers(1, 6)), rng)) for m in ("mnl", "gam", "lcf") * 5],
        _cardinality_instances(1093)[::4],
        _knapsack_instances(1094)[::2],
    ]
    config_sets = [lambda inst: [Alg1("gamma_tuned"), Alg1("half")], _cardinality_configs, _knapsack_configs]
    failures, evaluated = [], 0
    for instances, configs in zip(suites, config_sets):
        for label, inst in instances:
            stats = opt_stats(inst)
            for config in configs(inst):
                tau = compute_threshold(inst, config, stats=stats).tau
                for alpha in (1.25, 2.0):
                    scaled = type(config)(config.variant, External(tau / alpha, alpha=alpha))
                    rep = exact_evaluate(inst, scaled, WorstCase(), TOL, stats=stats)
                    evaluated += 1
                    if not rep.passed:
                        failures.append(f"{label}/{rep.policy}/alpha={alpha}")

    mc_passes = []
    mc_instances = [random_instance(m, 4, rng, max_atoms=2) for m in ("mnl", "gam", "lcf")]
    for inst in mc_instances:
        stats = opt_stats(inst)
        passes = 0
        for seed in range(100):
            config = Alg1("gamma_tuned", MonteCarlo(100_000, seed))
            rep = exact_evaluate(inst, config, WorstCase(), TOL, stats=stats)
            passes += rep.passed
        mc_passes.append(passes)
    ok = not failures and min(mc_passes) >= 95
    record(9, ok, f"{evaluated} scaled-threshold evaluations, failures={failures[:3]}, MC passes per instance={mc_passes}/100", t0)
    assert ok


def test_criterion_10_oracle_equivalence_and_decompositions():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1010)
    worst_oracle = 0.0
    for _ in range(500):
        inst = random_instance("mnl", int(rng.integers(1, 11)), rng, integer_revenues=bool(rng.random() < 0.5))
        real = sample(inst, rng)
        a, b = opt_mnl_revenue_ordered(inst.model, real), opt_brute(inst.model, real)
        worst_oracle = max(worst_oracle, abs(a.value - b.value))
    worst_split = worst_capped = 0.0
    for j in range(1000):
        model = MODEL_NAMES[j % 4]
        k = int(rng.integers(1, 4))
        inst = random_instance(model, int(rng.integers(1, 7)), rng, constraint=Cardinality(k))
        real = sample(inst, rng)
        tau = float(rng.uniform(0.0, 8.0))
        lhs, rhs = decomposition_unconstrained(inst.model, real, tau)
        worst_split = max(worst_split, abs(lhs - rhs))
        order = rng.permutation(inst.n)
        state = run_policy(build_policy(inst, Alg2("weak"), Thresholds(tau=tau)), [real.items[i] for i in order])
        lhs, rhs = decomposition_cardinality(inst.model, real, state.collected, tau, k)
        worst_capped = max(worst_capped, abs(lhs - rhs))
    ok = worst_oracle <= 1e-12 and worst_split <= 1e-12 and worst_capped <= 1e-12
    record(10, ok, f"oracle gap={worst_oracle:.3g}, unconstrained split gap={worst_split:.3g}, cardinality split gap={worst_capped:.3g}", t0)
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
