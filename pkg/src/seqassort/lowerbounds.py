"""Hard instances: the two-item MNL family and the rewards-to-MNL reduction."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from seqassort.choice import Mnl, MnlAttraction, revenue_and_purchase
from seqassort.errors import NonPositiveReward
from seqassort.instance import Atom, Instance, ItemDistribution, Unconstrained, enumerate_joint
from seqassort.oracle import opt_brute, opt_stats


def make_lower_bound_thm53(delta: float, kappa: float) -> Instance:
    """Two MNL items defeating every fixed-threshold policy in the limit δ → 0.

    Item 0 is deterministic with r=1, v=1/δ. Item 1 has v=1 and revenue
    (v0+1)/δ with probability δ, else 0. The outside attraction is
    v0 = (1−κ)/(κδ), so that offering item 0 alone earns exactly κ.
    """
    if not (0 < delta < 1 and 0 < kappa < 1):
        raise ValueError(f"delta and kappa must lie in (0, 1), got {delta}, {kappa}")
    v1 = 1.0 / delta
    v0 = (1.0 - kappa) / kappa * v1
    first = ItemDistribution((Atom(1.0, 1.0, MnlAttraction(v1)),))
    second = ItemDistribution(
        (
            Atom(delta, (v0 + 1.0) / delta, MnlAttraction(1.0)),
            Atom(1.0 - delta, 0.0, MnlAttraction(1.0)),
        )
    )
    return Instance(Mnl(v0), (first, second), Unconstrained())


@dataclass(frozen=True)
class LowerBoundReport:
    delta: float
    kappa: float
    expected_opt: float
    gamma: float
    value_a1: float
    value_a2: float
    ratio: float

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "kappa": self.kappa,
            "expected_opt": self.expected_opt,
            "gamma": self.gamma,
            "value_a1": self.value_a1,
            "value_a2": self.value_a2,
            "ratio": self.ratio,
        }


def evaluate_thm53(delta: float, kappa: float) -> LowerBoundReport:
    """Exact E[f(S*)] and the two deterministic online strategies.

    Item 0 arrives first. A1 rejects it and keeps item 1; A2 keeps both.
    Any fixed-threshold policy does one of these (or worse) on item 0.
    """
    inst = make_lower_bound_thm53(delta, kappa)
    stats = opt_stats(inst, "exact")
    terms1, terms2 = [], []
    for prob, real in enumerate_joint(inst):
        terms1.append(prob * revenue_and_purchase(inst.model, real, (1,))[0])
        terms2.append(prob * revenue_and_purchase(inst.model, real, (0, 1))[0])
    a1, a2 = math.fsum(terms1), math.fsum(terms2)
    return LowerBoundReport(
        delta, kappa, stats.expected_opt, stats.gamma, a1, a2, stats.expected_opt / max(a1, a2)
    )


def make_reduction_appB(
    reward_marginals: Sequence[Sequence[tuple[float, float]]], delta: float
) -> Instance:
    """MNL instance (v0 = 0) whose revenue tends to the minimum collected reward.

    ``reward_marginals[i]`` lists ``(prob, reward)`` atoms. Each atom's
    attraction is δ^(−1/r), stored as ``log_v = −ln(δ)/r`` because it
    overflows a double quickly.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    seen: dict[float, int] = {}
    dists = []
    for i, marginal in enumerate(reward_marginals):
        atoms = []
        for p, r in marginal:
            if not r > 0:
                raise NonPositiveReward(f"item {i}: reward {r} must be positive")
            if seen.get(r, i) != i:
                warnings.warn(
                    f"reward {r} appears for items {seen[r]} and {i}; "
                    "the limit check skips realizations with ties",
                    RuntimeWarning,
                )
            seen.setdefault(r, i)
            log_v = -math.log(delta) / r
            v = math.exp(log_v) if log_v < 700 else math.inf
            atoms.append(Atom(p, r, MnlAttraction(v, log_v=log_v)))
        dists.append(ItemDistribution(tuple(atoms)))
    return Instance(Mnl(0.0), tuple(dists), Unconstrained())


@dataclass(frozen=True)
class ReductionCheck:
    max_error: float
    checked: int
    skipped_realizations: int
    opt_matches_max: bool


def check_reduction(instance: Instance) -> ReductionCheck:
    """max |f(A) − min_{i∈A} r_i| over realizations and nonempty A.

    Also asserts that the offline optimum equals the realized maximum
    reward exactly. Realizations with tied rewards are skipped.
    """
    worst, checked, skipped, opt_ok = 0.0, 0, 0, True
    n = instance.n
    for _, real in enumerate_joint(instance):
        revenues = [it.revenue for it in real.items]
        if len(set(revenues)) < n:
            skipped += 1
            continue
        for size in range(1, n + 1):
            for A in itertools.combinations(range(n), size):
                f = revenue_and_purchase(instance.model, real, A)[0]
                worst = max(worst, abs(f - min(revenues[j] for j in A)))
                checked += 1
        opt_ok &= opt_brute(instance.model, real).value == max(revenues)
    return ReductionCheck(worst, checked, skipped, opt_ok)
