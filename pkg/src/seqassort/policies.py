"""Fixed-threshold online policies and their threshold calculators.

Configurations (:class:`Alg1` … :class:`ConvexPI`) are immutable and say
*which* rule and *where* its threshold comes from. :func:`compute_threshold`
resolves them against an instance into :class:`Thresholds`, and
:func:`build_policy` produces an :class:`OnlinePolicy` whose ``decide``
method is a pure function of the collected set and the arriving item; the
harness relies on that to search arrival orders.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from seqassort.choice import (
    ChoiceModelSpec,
    RealizedItem,
    Realization,
    distribution,
    total_revenue,
)
from seqassort.errors import IncompatiblePolicy, NegativeValue
from seqassort.instance import (
    DEFAULT_ENUMERATION_CAP,
    Cardinality,
    Instance,
    Knapsack,
    Unconstrained,
    fits,
    sample_indices,
)
from seqassort.oracle import OptStats, opt_stats

TIE_RTOL = 1e-12


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Exact:
    """Thresholds from exact enumeration of the joint support."""


@dataclass(frozen=True)
class MonteCarlo:
    samples: int
    seed: int = 0


@dataclass(frozen=True)
class External:
    """A threshold supplied by the caller, claimed to lie in [τ/alpha, τ].

    For Alg4, ``value`` is the small-item threshold and ``large`` the
    large-item one (``value`` is reused when ``large`` is omitted).
    """

    value: float
    large: float | None = None
    alpha: float = 1.0


@dataclass(frozen=True)
class ApproxOracle:
    """Expected optimum from an α-approximate offline algorithm.

    ``approx_expected_opt`` replaces E[f(S*)] (E[g(Q)] for Alg4) and
    ``approx_large`` replaces E[g(V)]. γ-tuned variants also need ``gamma``.
    """

    alpha: float
    approx_expected_opt: float
    gamma: float | None = None
    approx_large: float | None = None


ThresholdSource = Union[Exact, MonteCarlo, External, ApproxOracle]


@dataclass(frozen=True)
class Alg1:
    variant: str = "gamma_tuned"
    threshold_source: ThresholdSource = Exact()
    variants = ("gamma_tuned", "half")


@dataclass(frozen=True)
class Alg2:
    variant: str = "strong"
    threshold_source: ThresholdSource = Exact()
    variants = ("strong", "weak", "gamma_weak")


@dataclass(frozen=True)
class Alg3:
    variant: str = "strong"
    threshold_source: ThresholdSource = Exact()
    variants = ("strong", "weak")


@dataclass(frozen=True)
class Alg4:
    variant: str = "five_competitive"
    threshold_source: ThresholdSource = Exact()
    coin_seed: int = 0
    variants = ("five_competitive", "eight_competitive")


@dataclass(frozen=True)
class ConvexPI:
    threshold_rule: str = "half_expected_max"
    threshold_source: ThresholdSource = Exact()
    variants = ("half_expected_max", "median_max")

    @property
    def variant(self) -> str:
        return self.threshold_rule


PolicyConfig = Union[Alg1, Alg2, Alg3, Alg4, ConvexPI]

# (P[heads], τ_Q / E[g(Q)], τ_V / E[g(V)], claimed factor)
ALG4_PARAMS = {
    "five_competitive": (3 / 5, 2 / 3, 1 / 2, 5.0),
    "eight_competitive": (5 / 8, 2 / 5, 1 / 3, 8.0),
}

_CONSTRAINT_FOR = {
    Alg1: Unconstrained,
    Alg2: Cardinality,
    Alg3: Knapsack,
    Alg4: Knapsack,
    ConvexPI: Unconstrained,
}


def check_compatible(instance: Instance, config: PolicyConfig) -> None:
    if config.variant not in config.variants:
        raise IncompatiblePolicy(f"{type(config).__name__} has no variant {config.variant!r}")
    want = _CONSTRAINT_FOR[type(config)]
    if not isinstance(instance.constraint, want):
        raise IncompatiblePolicy(
            f"{type(config).__name__} needs a {want.__name__} instance, "
            f"got {type(instance.constraint).__name__}"
        )
    src = config.threshold_source
    if isinstance(src, (External, ApproxOracle)) and src.alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {src.alpha}")


# ---------------------------------------------------------------------------
# β and thresholds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Beta:
    value: float


def compute_beta(instance: Instance) -> Beta:
    """max b/B over every atom of the declared support."""
    if not isinstance(instance.constraint, Knapsack):
        raise IncompatiblePolicy("β is only defined for knapsack instances")
    B = instance.constraint.B
    value = max((a.size / B for d in instance.distributions for a in d.atoms), default=0.0)
    if value >= 1.0:
        warnings.warn("β = 1: Alg3 thresholds carry no finite guarantee", RuntimeWarning)
    return Beta(value)


def base_rho(config: PolicyConfig, gamma: float | None = None, beta: float | None = None) -> float:
    """Competitive factor of the variant with its intended threshold."""
    if isinstance(config, Alg1):
        return 1.0 + gamma if config.variant == "gamma_tuned" else 2.0
    if isinstance(config, Alg2):
        return {"strong": 2.0, "weak": 3.0}.get(config.variant, 2.0 + (gamma or 0.0))
    if isinstance(config, Alg3):
        if beta >= 1.0:
            return math.inf
        top = 2.0 if config.variant == "strong" else 3.0
        return (top - beta) / (1.0 - beta)
    if isinstance(config, Alg4):
        return ALG4_PARAMS[config.variant][3]
    return 2.0


def _coefficient(config: PolicyConfig, gamma: float | None, beta: float | None) -> float:
    if isinstance(config, Alg1):
        return 1.0 / (1.0 + gamma) if config.variant == "gamma_tuned" else 0.5
    if isinstance(config, Alg2):
        if config.variant == "gamma_weak":
            return 1.0 / (2.0 + gamma)
        return 0.5 if config.variant == "strong" else 1.0 / 3.0
    if isinstance(config, Alg3):
        return 1.0 / ((2.0 if config.variant == "strong" else 3.0) - beta)
    raise TypeError(type(config).__name__)


def _needs_gamma(config: PolicyConfig) -> bool:
    return config.variant in ("gamma_tuned", "gamma_weak")


@dataclass(frozen=True)
class Thresholds:
    tau: float
    tau_large: float | None = None
    p_heads: float | None = None
    beta: float | None = None
    gamma: float | None = None
    rho_factor: float = 1.0
    source: str = "exact"
    stats: OptStats | None = None

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "tau_large": self.tau_large,
            "p_heads": self.p_heads,
            "beta": self.beta,
            "gamma": self.gamma,
            "rho_factor": self.rho_factor,
            "source": self.source,
            "stats": None if self.stats is None else self.stats.to_dict(),
        }


def _source_stats(instance: Instance, src: ThresholdSource, cap: int, threads) -> OptStats:
    if isinstance(src, MonteCarlo):
        return opt_stats(instance, "monte_carlo", samples=src.samples, seed=src.seed, threads=threads)
    return opt_stats(instance, "exact", cap=cap, threads=threads)


def _nonneg(*values: float | None) -> None:
    for v in values:
        if v is not None and (v < 0 or math.isnan(v)):
            raise NegativeValue(f"threshold input {v} is negative")


def compute_threshold(
    instance: Instance,
    config: PolicyConfig,
    stats: OptStats | None = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
    threads: int | None = None,
) -> Thresholds:
    """Resolve ``config`` against ``instance``.

    ``stats`` may pass precomputed exact statistics for the Exact source.
    """
    check_compatible(instance, config)
    src = config.threshold_source
    if isinstance(config, ConvexPI):
        return _convex_pi_thresholds(instance, config, cap)

    beta = compute_beta(instance).value if isinstance(config, (Alg3, Alg4)) else None
    if isinstance(src, (Exact, MonteCarlo)):
        if stats is None or (isinstance(src, MonteCarlo) != (stats.mode == "monte_carlo")):
            stats = _source_stats(instance, src, cap, threads)
        label = "exact" if isinstance(src, Exact) else "monte_carlo"
        if isinstance(config, Alg4):
            p, cq, cv, _ = ALG4_PARAMS[config.variant]
            return Thresholds(
                tau=cq * stats.expected_g_small,
                tau_large=cv * stats.expected_g_large,
                p_heads=p,
                beta=beta,
                source=label,
                stats=stats,
            )
        coef = _coefficient(config, stats.gamma, beta)
        return Thresholds(
            tau=coef * stats.expected_opt, beta=beta, gamma=stats.gamma, source=label, stats=stats
        )

    if isinstance(src, External):
        _nonneg(src.value, src.large)
        if isinstance(config, Alg4):
            p = ALG4_PARAMS[config.variant][0]
            large = src.value if src.large is None else src.large
            return Thresholds(
                src.value, large, p_heads=p, beta=beta, rho_factor=src.alpha, source="external"
            )
        return Thresholds(src.value, beta=beta, rho_factor=src.alpha, source="external")

    # ApproxOracle
    _nonneg(src.approx_expected_opt, src.approx_large, src.gamma)
    if isinstance(config, Alg4):
        if src.approx_large is None:
            raise ValueError("Alg4 with an approximate oracle needs approx_large (E[g(V)])")
        p, cq, cv, _ = ALG4_PARAMS[config.variant]
        return Thresholds(
            cq * src.approx_expected_opt,
            cv * src.approx_large,
            p_heads=p,
            beta=beta,
            rho_factor=src.alpha,
            source="approx",
        )
    if _needs_gamma(config) and src.gamma is None:
        raise ValueError(f"{config.variant} needs gamma alongside the approximate optimum")
    coef = _coefficient(config, src.gamma, beta)
    return Thresholds(
        coef * src.approx_expected_opt,
        beta=beta,
        gamma=src.gamma,
        rho_factor=src.alpha,
        source="approx",
    )


# ---------------------------------------------------------------------------
# Convex-combination prophet inequality
# ---------------------------------------------------------------------------


def max_reward_distribution(instance: Instance) -> list[tuple[float, float]]:
    """Exact ``(value, prob)`` pmf of max_i r_i via products of item CDFs."""
    values = sorted({a.revenue for d in instance.distributions for a in d.atoms})
    pmf, prev = [], 0.0
    for x in values:
        cdf = math.prod(
            math.fsum(a.prob for a in d.atoms if a.revenue <= x) for d in instance.distributions
        )
        if cdf > prev:
            pmf.append((x, cdf - prev))
        prev = cdf
    return pmf


def median_of(pmf: Sequence[tuple[float, float]]) -> float:
    """Smallest support value whose CDF reaches ½."""
    acc = 0.0
    for x, p in pmf:
        acc += p
        if acc >= 0.5 - 1e-15:
            return x
    return pmf[-1][0]


def convex_pi_threshold(instance: Instance, rule: str = "half_expected_max") -> float:
    pmf = max_reward_distribution(instance)
    if rule == "half_expected_max":
        return 0.5 * math.fsum(x * p for x, p in pmf)
    if rule == "median_max":
        return median_of(pmf)
    raise ValueError(f"unknown convex-PI rule {rule!r}")


def _convex_pi_thresholds(instance: Instance, config: ConvexPI, cap: int) -> Thresholds:
    src = config.threshold_source
    rule = config.threshold_rule
    if isinstance(src, Exact):
        return Thresholds(convex_pi_threshold(instance, rule), source="exact")
    if isinstance(src, MonteCarlo):
        idx = sample_indices(instance, src.samples, src.seed)
        revenue = [np.array([a.revenue for a in d.atoms]) for d in instance.distributions]
        maxima = np.max(np.stack([revenue[i][idx[:, i]] for i in range(instance.n)], axis=1), axis=1)
        tau = 0.5 * float(maxima.mean()) if rule == "half_expected_max" else float(
            np.sort(maxima)[math.ceil(len(maxima) / 2) - 1]
        )
        return Thresholds(tau, source="monte_carlo")
    if isinstance(src, External):
        _nonneg(src.value)
        return Thresholds(src.value, rho_factor=src.alpha, source="external")
    if rule != "half_expected_max":
        raise ValueError("the median rule cannot be derived from an approximate expectation")
    _nonneg(src.approx_expected_opt)
    return Thresholds(0.5 * src.approx_expected_opt, rho_factor=src.alpha, source="approx")


# ---------------------------------------------------------------------------
# Decisions
# ---------------------------------------------------------------------------


class Reason(str, enum.Enum):
    BELOW_THRESHOLD = "below_threshold"
    CAPACITY_FULL = "capacity_full"
    ACCEPTED = "accepted"
    WRONG_BRANCH = "wrong_branch"


@dataclass(frozen=True)
class DecisionRecord:
    item: int
    accepted: bool
    reason: Reason


@dataclass
class PolicyState:
    tau: float = 0.0
    tau_large: float | None = None
    coin: str | None = None
    collected: list[int] = field(default_factory=list)
    sizes: list[float] = field(default_factory=list)
    trace: list[DecisionRecord] = field(default_factory=list)

    @property
    def used_size(self) -> float:
        return math.fsum(self.sizes)

    @property
    def assortment(self) -> frozenset:
        return frozenset(self.collected)

    def record(self, item: RealizedItem, reason: Reason) -> bool:
        accepted = reason is Reason.ACCEPTED
        if accepted:
            self.collected.append(item.id)
            self.sizes.append(item.size)
        self.trace.append(DecisionRecord(item.id, accepted, reason))
        return accepted


def _geq(lhs: float, rhs: float) -> bool:
    # closed comparison; absorbs rounding when both sides are the same quantity
    return lhs >= rhs - TIE_RTOL * max(abs(lhs), abs(rhs))


def alg2_condition(model: ChoiceModelSpec, item: RealizedItem, k: float, tau: float) -> bool:
    """φ(i,{i})(r_i − τ) ≥ (φ(0,{i})/k) τ, evaluated from the item alone."""
    phi, phi0 = model.singleton(item)
    return item.revenue >= tau and _geq(phi * (item.revenue - tau), phi0 / k * tau)


def alg2_condition_mnl(v0: float, k: float, v: float, r: float, tau: float) -> bool:
    """MNL form: v·r / (v0/k + v) ≥ τ."""
    denom = v0 / k + v
    if denom == 0.0:
        return tau <= 0.0
    return r >= tau and _geq(v * r / denom, tau)


def alg3_condition(model: ChoiceModelSpec, item: RealizedItem, B: float, tau: float) -> bool:
    """φ(i,{i})(r_i − τ) ≥ (b_i φ(0,{i}) / B) τ."""
    phi, phi0 = model.singleton(item)
    return item.revenue >= tau and _geq(phi * (item.revenue - tau), item.size * phi0 / B * tau)


def alg1_decide(state: PolicyState, item: RealizedItem) -> bool:
    """Accept iff r_i ≥ τ; demand parameters are never read."""
    return item.revenue >= state.tau


def alg2_decide(state: PolicyState, item: RealizedItem, model: ChoiceModelSpec, k: int) -> bool:
    return alg2_condition(model, item, k, state.tau) and len(state.collected) < k


def alg3_decide(state: PolicyState, item: RealizedItem, model: ChoiceModelSpec, B: float) -> bool:
    return alg3_condition(model, item, B, state.tau) and fits(state.used_size + item.size, B)


def convex_pi_decide(state: PolicyState, reward: float) -> bool:
    return reward >= state.tau


class OnlinePolicy:
    """A configured online rule.

    ``decide`` must depend only on the collected ids, their total size and
    the arriving item.
    """

    order_free = False

    def __init__(self, tau: float, tau_large: float | None = None, coin: str | None = None):
        self.tau, self.tau_large, self.coin = tau, tau_large, coin

    def start(self) -> PolicyState:
        return PolicyState(tau=self.tau, tau_large=self.tau_large, coin=self.coin)

    def decide(self, collected: Sequence[int], used: float, item: RealizedItem) -> Reason:
        raise NotImplementedError

    def step(self, state: PolicyState, item: RealizedItem) -> bool:
        return state.record(item, self.decide(state.collected, state.used_size, item))


class Alg1Policy(OnlinePolicy):
    order_free = True

    def decide(self, collected, used, item):
        return Reason.ACCEPTED if item.revenue >= self.tau else Reason.BELOW_THRESHOLD


class Alg2Policy(OnlinePolicy):
    def __init__(self, model: ChoiceModelSpec, k: int, tau: float):
        super().__init__(tau)
        self.model, self.k = model, k

    def decide(self, collected, used, item):
        if not alg2_condition(self.model, item, self.k, self.tau):
            return Reason.BELOW_THRESHOLD
        if len(collected) >= self.k:
            return Reason.CAPACITY_FULL
        return Reason.ACCEPTED


class Alg3Policy(OnlinePolicy):
    def __init__(self, model: ChoiceModelSpec, B: float, tau: float):
        super().__init__(tau)
        self.model, self.B = model, B

    def decide(self, collected, used, item):
        if not alg3_condition(self.model, item, self.B, self.tau):
            return Reason.BELOW_THRESHOLD
        if not fits(used + item.size, self.B):
            return Reason.CAPACITY_FULL
        return Reason.ACCEPTED


class Alg4Policy(OnlinePolicy):
    """Heads: Alg3 on items with b ≤ B/2 at τ_Q. Tails: Alg2 (k=1) on b > B/2 at τ_V."""

    def __init__(self, model: ChoiceModelSpec, B: float, tau_small: float, tau_large: float, coin: str):
        if coin not in ("H", "T"):
            raise ValueError(f"coin must be 'H' or 'T', got {coin!r}")
        super().__init__(tau_small, tau_large, coin)
        self.model, self.B = model, B
        self._small = Alg3Policy(model, B, tau_small)
        self._large = Alg2Policy(model, 1, tau_large)

    def decide(self, collected, used, item):
        small = item.size <= self.B / 2
        if self.coin == "H":
            return self._small.decide(collected, used, item) if small else Reason.WRONG_BRANCH
        return Reason.WRONG_BRANCH if small else self._large.decide(collected, used, item)


class ConvexPIPolicy(OnlinePolicy):
    order_free = True

    def decide(self, collected, used, item):
        return Reason.ACCEPTED if item.revenue >= self.tau else Reason.BELOW_THRESHOLD


def draw_coin(coin_seed: int, p_heads: float) -> str:
    """Alg4's coin: a function of ``coin_seed`` alone."""
    rng = np.random.default_rng(np.random.SeedSequence([coin_seed, 1]))
    return "H" if rng.random() < p_heads else "T"


def build_policy(
    instance: Instance, config: PolicyConfig, thresholds: Thresholds, coin: str | None = None
) -> OnlinePolicy:
    model, c = instance.model, instance.constraint
    if isinstance(config, Alg1):
        return Alg1Policy(thresholds.tau)
    if isinstance(config, Alg2):
        return Alg2Policy(model, c.k, thresholds.tau)
    if isinstance(config, Alg3):
        return Alg3Policy(model, c.B, thresholds.tau)
    if isinstance(config, Alg4):
        if coin is None:
            coin = draw_coin(config.coin_seed, thresholds.p_heads)
        return Alg4Policy(model, c.B, thresholds.tau, thresholds.tau_large, coin)
    return ConvexPIPolicy(thresholds.tau)


def run_policy(policy: OnlinePolicy, items: Iterable[RealizedItem]) -> PolicyState:
    state = policy.start()
    for item in items:
        policy.step(state, item)
    return state


def alg4_run(
    items_in_order: Iterable[RealizedItem],
    model: ChoiceModelSpec,
    B: float,
    thresholds: Thresholds,
    coin: str,
) -> PolicyState:
    """Run Alg4 over ``items_in_order`` with a coin fixed before any arrival."""
    policy = Alg4Policy(model, B, thresholds.tau, thresholds.tau_large, coin)
    return run_policy(policy, items_in_order)


# ---------------------------------------------------------------------------
# Revenue decompositions used in the analysis
# ---------------------------------------------------------------------------


def decomposition_unconstrained(
    model: ChoiceModelSpec, real: Realization, tau: float
) -> tuple[float, float]:
    """``(f(A_τ), Σ_i φ(i,A_τ)(r_i − τ)^+ + ψ(A_τ)·τ)`` with A_τ = {r_i ≥ τ}."""
    A = [it.id for it in real.items if it.revenue >= tau]
    _, shares = distribution(model, real, A)
    lhs = total_revenue(model, real, A)
    rhs = math.fsum(
        shares.get(it.id, 0.0) * max(it.revenue - tau, 0.0) for it in real.items
    ) + math.fsum(shares.values()) * tau
    return lhs, rhs


def decomposition_cardinality(
    model: ChoiceModelSpec, real: Realization, collected: Iterable[int], tau: float, k: int
) -> tuple[float, float]:
    """Both sides of the Alg2 revenue split for a collected set A.

    Every member of A must have passed the threshold condition.
    """
    A = sorted(collected)
    _, shares = distribution(model, real, A)
    lhs = total_revenue(model, real, A)
    first, second = [], []
    for i in A:
        phi, phi0 = model.singleton(real.items[i])
        # φ(i,{i}) = 0 forces φ(i,A) = 0 under substitutability
        ratio = shares[i] / phi if phi > 0 else 0.0
        first.append(ratio * max(phi * max(real.items[i].revenue - tau, 0.0) - phi0 / k * tau, 0.0))
        second.append(phi0 / k * ratio)
    rhs = math.fsum(first) + (math.fsum(shares.values()) + math.fsum(second)) * tau
    return lhs, rhs
