"""Arrival orders, exact and Monte Carlo evaluation, and guarantee checks."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from seqassort.choice import ChoiceModelSpec, Realization, total_revenue
from seqassort.errors import TooLarge
from seqassort.instance import DEFAULT_ENUMERATION_CAP, Instance, joint_support, sample_indices
from seqassort.oracle import OptStats, opt_stats, parallel_map, realization_optimum
from seqassort.policies import (
    Alg4,
    ConvexPI,
    MonteCarlo,
    OnlinePolicy,
    PolicyConfig,
    PolicyState,
    Reason,
    Thresholds,
    base_rho,
    build_policy,
    compute_threshold,
    max_reward_distribution,
)

DEFAULT_ORDER_CAP = 8
MC_SIGMAS = 4.0


@dataclass(frozen=True)
class Given:
    permutation: tuple[int, ...]


@dataclass(frozen=True)
class UniformRandom:
    seed: int = 0


@dataclass(frozen=True)
class WorstCase:
    cap: int = DEFAULT_ORDER_CAP


OrderStrategy = Union[Given, UniformRandom, WorstCase]


def check_permutation(order: Sequence[int], n: int) -> tuple[int, ...]:
    perm = tuple(int(j) for j in order)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{list(perm)} is not a permutation of 0..{n - 1}")
    return perm


def order_label(order: OrderStrategy) -> str:
    if isinstance(order, Given):
        return "given:" + ",".join(map(str, order.permutation))
    return "random" if isinstance(order, UniformRandom) else "worst"


# ---------------------------------------------------------------------------
# Single runs and the worst-case adversary
# ---------------------------------------------------------------------------


def min_adversary_value(accepted_rewards: Sequence[float]) -> float:
    """Worst convex combination of the accepted rewards: their minimum, 0 if none."""
    return min(accepted_rewards) if len(accepted_rewards) else 0.0


def _value(model: ChoiceModelSpec, real: Realization, collected, convex: bool) -> float:
    if convex:
        return min_adversary_value([real.items[j].revenue for j in collected])
    return total_revenue(model, real, collected) if collected else 0.0


def run_once(
    policy: OnlinePolicy,
    model: ChoiceModelSpec,
    realization: Realization,
    order: Sequence[int],
    convex: bool = False,
) -> tuple[PolicyState, float]:
    """Feed ``realization`` to ``policy`` in ``order``; return the state and f(A)."""
    perm = check_permutation(order, len(realization))
    state = policy.start()
    for j in perm:
        policy.step(state, realization.items[j])
    return state, _value(model, realization, state.collected, convex)


def worst_case_order(
    policy: OnlinePolicy,
    model: ChoiceModelSpec,
    realization: Realization,
    cap: int = DEFAULT_ORDER_CAP,
    convex: bool = False,
) -> tuple[tuple[int, ...], float]:
    """Lexicographically smallest order minimizing f(A) over all n! orders.

    The search is exact: a policy's decision depends only on the collected
    set and the arriving item, so the value reachable from (items still to
    arrive, items collected) is memoized, visiting at most 3^n states.
    """
    n = len(realization)
    if n > cap:
        raise TooLarge(f"worst-case order search over {n} items exceeds cap {cap}")
    items = realization.items
    if policy.order_free:
        perm = tuple(range(n))
        return perm, run_once(policy, model, realization, perm, convex)[1]

    @lru_cache(maxsize=None)
    def terminal(collected: int) -> float:
        return _value(model, realization, [j for j in range(n) if collected >> j & 1], convex)

    @lru_cache(maxsize=None)
    def accepts(collected: int, j: int) -> bool:
        ids = [i for i in range(n) if collected >> i & 1]
        used = math.fsum(items[i].size for i in ids)
        return policy.decide(ids, used, items[j]) is Reason.ACCEPTED

    @lru_cache(maxsize=None)
    def best(remaining: int, collected: int) -> float:
        if remaining == 0:
            return terminal(collected)
        return min(_child(remaining, collected, j) for j in range(n) if remaining >> j & 1)

    def _child(remaining: int, collected: int, j: int) -> float:
        nxt = collected | (1 << j) if accepts(collected, j) else collected
        return best(remaining & ~(1 << j), nxt)

    full = (1 << n) - 1
    target = best(full, 0)
    remaining, collected, perm = full, 0, []
    while remaining:
        here = best(remaining, collected)
        for j in range(n):
            if remaining >> j & 1 and _child(remaining, collected, j) == here:
                if accepts(collected, j):
                    collected |= 1 << j
                remaining &= ~(1 << j)
                perm.append(j)
                break
    return tuple(perm), target


def brute_force_worst_order(
    policy: OnlinePolicy,
    model: ChoiceModelSpec,
    realization: Realization,
    convex: bool = False,
) -> tuple[tuple[int, ...], float]:
    """Reference enumeration of all n! orders (lexicographic, first minimizer kept)."""
    best_perm, best_val = None, math.inf
    for perm in itertools.permutations(range(len(realization))):
        val = run_once(policy, model, realization, perm, convex)[1]
        if val < best_val:
            best_perm, best_val = perm, val
    return best_perm, best_val


def average_over_orders(
    policy: OnlinePolicy, model: ChoiceModelSpec, realization: Realization, convex: bool = False
) -> float:
    """Exact expectation of f(A) under a uniformly random arrival order."""
    n = len(realization)
    if policy.order_free:
        return run_once(policy, model, realization, range(n), convex)[1]
    vals = [
        run_once(policy, model, realization, perm, convex)[1]
        for perm in itertools.permutations(range(n))
    ]
    return math.fsum(vals) / len(vals)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Row:
    """One realization (exact mode) or one distinct trial outcome (MC mode)."""

    prob: float
    atoms: tuple[int, ...]
    opt: float
    value: float
    orders: dict[str, list[int] | None] = field(default_factory=dict)
    collected: dict[str, list[int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "prob": self.prob,
            "atoms": list(self.atoms),
            "opt": self.opt,
            "value": self.value,
            "orders": self.orders,
            "collected": self.collected,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Row":
        return cls(d["prob"], tuple(d["atoms"]), d["opt"], d["value"], d["orders"], d["collected"])


@dataclass(frozen=True)
class EvaluationReport:
    policy: str
    policy_value: float
    opt_value: float
    gamma: float | None
    beta: float | None
    claimed_rho: float
    achieved_ratio: float
    passed: bool
    mode: str
    order: str
    tolerance: float
    slack: float = 0.0
    thresholds: dict = field(default_factory=dict)
    std_err: dict | None = None
    branch_values: dict | None = None
    trials: int | None = None
    seed: int | None = None
    rows: tuple[Row, ...] = ()

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "policy_value": self.policy_value,
            "opt_value": self.opt_value,
            "gamma": self.gamma,
            "beta": self.beta,
            "claimed_rho": self.claimed_rho,
            "achieved_ratio": self.achieved_ratio,
            "pass": self.passed,
            "mode": self.mode,
            "order": self.order,
            "tolerance": self.tolerance,
            "slack": self.slack,
            "thresholds": self.thresholds,
            "std_err": self.std_err,
            "branch_values": self.branch_values,
            "trials": self.trials,
            "seed": self.seed,
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        kw = {k: v for k, v in d.items() if k not in ("pass", "rows")}
        return cls(passed=d["pass"], rows=tuple(Row.from_dict(r) for r in d["rows"]), **kw)


def achieved_ratio(opt: float, policy: float) -> float:
    if policy > 0:
        return opt / policy
    return math.inf if opt > 0 else 1.0


def policy_label(config: PolicyConfig) -> str:
    return f"{type(config).__name__.lower()}:{config.variant}"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _branches(config: PolicyConfig, thr: Thresholds) -> list[tuple[str, float]]:
    if isinstance(config, Alg4):
        return [("H", thr.p_heads), ("T", 1.0 - thr.p_heads)]
    return [("all", 1.0)]


def _evaluate_realization(policy, model, real, order, convex):
    """``(value, order used or None, collected)`` for one realization."""
    n = len(real)
    if isinstance(order, WorstCase):
        perm, val = worst_case_order(policy, model, real, order.cap, convex)
        state, _ = run_once(policy, model, real, perm, convex)
        return val, list(perm), sorted(state.collected)
    if isinstance(order, Given):
        state, val = run_once(policy, model, real, order.permutation, convex)
        return val, list(order.permutation), sorted(state.collected)
    if n > DEFAULT_ORDER_CAP:
        raise TooLarge(f"averaging over {n}! orders exceeds cap; use mc_evaluate")
    return average_over_orders(policy, model, real, convex), None, []


def _claimed(config, thr: Thresholds, gamma: float | None) -> float:
    g = thr.gamma if thr.gamma is not None else gamma
    return thr.rho_factor * base_rho(config, g, thr.beta)


def _mc_threshold_slack(stats: OptStats | None, config, policy_value: float) -> float:
    if stats is None or stats.std_err is None:
        return 0.0
    se = stats.std_err
    if isinstance(config, Alg4):
        return MC_SIGMAS * math.hypot(se["expected_g_small"], se["expected_g_large"])
    se_gamma = se["gamma"] if config.variant in ("gamma_tuned", "gamma_weak") else 0.0
    return MC_SIGMAS * math.hypot(se["expected_opt"], policy_value * se_gamma)


def exact_evaluate(
    instance: Instance,
    config: PolicyConfig,
    order: OrderStrategy = WorstCase(),
    tolerance: float = 1e-9,
    threads: int | None = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
    stats: OptStats | None = None,
    thresholds: Thresholds | None = None,
) -> EvaluationReport:
    """Exact E[f(A)] against exact E[f(S*)] over the whole joint support.

    ``stats`` (exact) and ``thresholds`` may be supplied to share work across
    variants. With a Monte Carlo threshold source the pass test is widened
    by four combined standard errors of the estimated quantities.
    """
    if isinstance(order, Given):
        check_permutation(order.permutation, instance.n)
    convex = isinstance(config, ConvexPI)
    thr = thresholds or compute_threshold(instance, config, stats=stats, cap=cap, threads=threads)
    support = joint_support(instance, cap)
    if not convex and (stats is None or stats.mode != "exact"):
        stats = opt_stats(instance, "exact", cap=cap, threads=threads)

    branches = _branches(config, thr)
    policies = {
        b: build_policy(instance, config, thr, coin=None if b == "all" else b) for b, _ in branches
    }
    model = instance.model

    def per_realization(item):
        prob, idx = item
        real = instance.realization(idx)
        opt = max(it.revenue for it in real.items) if convex else realization_optimum(
            instance, real
        ).opt.value
        vals, orders, coll = {}, {}, {}
        for b, _ in branches:
            vals[b], orders[b], coll[b] = _evaluate_realization(
                policies[b], model, real, order, convex
            )
        return prob, idx, opt, vals, orders, coll

    results = parallel_map(per_realization, support, threads)
    rows, branch_totals = [], {b: [] for b, _ in branches}
    for prob, idx, opt, vals, orders, coll in results:
        value = math.fsum(w * vals[b] for b, w in branches)
        for b, _ in branches:
            branch_totals[b].append(prob * vals[b])
        rows.append(Row(prob, tuple(int(a) for a in idx), opt, value, orders, coll))

    branch_values = {b: math.fsum(v) for b, v in branch_totals.items()}
    policy_value = math.fsum(w * branch_values[b] for b, w in branches)
    if convex:
        opt_value = math.fsum(x * p for x, p in max_reward_distribution(instance))
        gamma = None
    else:
        opt_value, gamma = stats.expected_opt, stats.gamma
    claimed = _claimed(config, thr, gamma)
    slack = _mc_threshold_slack(thr.stats if isinstance(config.threshold_source, MonteCarlo) else None,
                                config, policy_value)
    passed = claimed * policy_value >= opt_value - tolerance - slack
    return EvaluationReport(
        policy=policy_label(config),
        policy_value=policy_value,
        opt_value=opt_value,
        gamma=gamma,
        beta=thr.beta,
        claimed_rho=claimed,
        achieved_ratio=achieved_ratio(opt_value, policy_value),
        passed=bool(passed),
        mode="exact",
        order=order_label(order),
        tolerance=tolerance,
        slack=slack,
        thresholds=thr.to_dict(),
        branch_values=branch_values if isinstance(config, Alg4) else None,
        rows=tuple(rows),
    )


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if np.all(x == x[0]):
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


def mc_evaluate(
    instance: Instance,
    config: PolicyConfig,
    order: OrderStrategy = UniformRandom(0),
    trials: int = 10_000,
    seed: int = 0,
    tolerance: float = 1e-9,
    threads: int | None = None,
    thresholds: Thresholds | None = None,
) -> EvaluationReport:
    """Seeded Monte Carlo estimate of E[f(A)] and E[f(S*)].

    Trial ``t`` uses atom draws from the per-item streams, the coin from
    ``(seed, 1, coin_seed)`` and the arrival order from ``(seed, 2)``. The
    guarantee passes when the mean of ρ·f(A) − f(S*) is at least −4 standard
    errors. Work is cached per distinct (realization, coin, order).
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    n = instance.n
    if isinstance(order, Given):
        check_permutation(order.permutation, n)
    if isinstance(order, WorstCase) and n > order.cap:
        raise TooLarge(f"worst-case order search over {n} items exceeds cap {order.cap}")
    convex = isinstance(config, ConvexPI)
    thr = thresholds or compute_threshold(instance, config, threads=threads)
    model = instance.model
    idx = sample_indices(instance, trials, seed)

    if isinstance(config, Alg4):
        coin_rng = np.random.default_rng(np.random.SeedSequence([seed, 1, config.coin_seed]))
        coins = np.where(coin_rng.random(trials) < thr.p_heads, "H", "T")
    else:
        coins = np.full(trials, "all")
    policies = {c: build_policy(instance, config, thr, None if c == "all" else c) for c in set(coins)}
    if isinstance(order, UniformRandom):
        order_rng = np.random.default_rng(np.random.SeedSequence([seed, 2, order.seed]))
        perms = [tuple(int(j) for j in order_rng.permutation(n)) for _ in range(trials)]
    else:
        perms = [None] * trials

    opt_cache: dict = {}
    val_cache: dict = {}
    keys = []
    for t in range(trials):
        row = tuple(int(a) for a in idx[t])
        key = (row, str(coins[t]), perms[t])
        keys.append(key)
        opt_cache.setdefault(row, None)
        val_cache.setdefault(key, None)

    def opt_of(row):
        real = instance.realization(row)
        if convex:
            return max(it.revenue for it in real.items), 1.0
        o = realization_optimum(instance, real).opt
        return o.value, o.purchase_prob

    def val_of(key):
        row, coin, perm = key
        real = instance.realization(row)
        pol = policies[coin]
        if perm is None and isinstance(order, WorstCase):
            return worst_case_order(pol, model, real, order.cap, convex)[1]
        return run_once(pol, model, real, perm or order.permutation, convex)[1]

    for k, v in zip(opt_cache, parallel_map(opt_of, list(opt_cache), threads)):
        opt_cache[k] = v
    for k, v in zip(val_cache, parallel_map(val_of, list(val_cache), threads)):
        val_cache[k] = v

    f_opt = np.array([opt_cache[k[0]][0] for k in keys])
    psi = np.array([opt_cache[k[0]][1] for k in keys])
    f_pol = np.array([val_cache[k] for k in keys])
    opt_value, se_opt = _mean_se(f_opt)
    policy_value, se_pol = _mean_se(f_pol)
    gamma, se_gamma = (None, None) if convex else _mean_se(psi)
    claimed = _claimed(config, thr, gamma)
    diff_mean, se_diff = _mean_se(claimed * f_pol - f_opt)
    slack = MC_SIGMAS * se_diff
    passed = diff_mean >= -slack - tolerance

    branch_values = None
    if isinstance(config, Alg4):
        branch_values = {
            c: float(f_pol[coins == c].mean()) if np.any(coins == c) else 0.0 for c in ("H", "T")
        }
    counts: dict = {}
    for k in keys:
        counts[k] = counts.get(k, 0) + 1
    rows = tuple(
        Row(
            c / trials,
            k[0],
            opt_cache[k[0]][0],
            val_cache[k],
            {k[1]: None if k[2] is None else list(k[2])},
            {},
        )
        for k, c in sorted(counts.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2] or ()))
    )
    std_err = {"policy_value": se_pol, "opt_value": se_opt, "difference": se_diff}
    if se_gamma is not None:
        std_err["gamma"] = se_gamma
    return EvaluationReport(
        policy=policy_label(config),
        policy_value=policy_value,
        opt_value=opt_value,
        gamma=gamma,
        beta=thr.beta,
        claimed_rho=claimed,
        achieved_ratio=achieved_ratio(opt_value, policy_value),
        passed=bool(passed),
        mode="monte_carlo",
        order=order_label(order),
        tolerance=tolerance,
        slack=slack,
        thresholds=thr.to_dict(),
        std_err=std_err,
        branch_values=branch_values,
        trials=trials,
        seed=seed,
        rows=rows,
    )

