"""Offline optimal assortments and expected-optimum statistics."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence, TypeVar

import numpy as np

from seqassort.choice import ChoiceModelSpec, Mnl, Realization, revenue_and_purchase
from seqassort.errors import ModelMismatch, TooLarge
from seqassort.instance import (
    DEFAULT_ENUMERATION_CAP,
    Cardinality,
    ConstraintSpec,
    Instance,
    Knapsack,
    Unconstrained,
    fits,
    joint_support,
    sample_indices,
)

DEFAULT_BRUTE_CAP = 20

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class OracleResult:
    best_set: tuple[int, ...]
    value: float
    purchase_prob: float


EMPTY = OracleResult(best_set=(), value=0.0, purchase_prob=0.0)


@dataclass(frozen=True)
class OptStats:
    expected_opt: float
    gamma: float
    expected_g_small: float = 0.0
    expected_g_large: float = 0.0
    mode: str = "exact"
    samples: int | None = None
    seed: int | None = None
    std_err: dict[str, float] | None = None

    def to_dict(self) -> dict:
        return {
            "expected_opt": self.expected_opt,
            "gamma": self.gamma,
            "expected_g_small": self.expected_g_small,
            "expected_g_large": self.expected_g_large,
            "mode": self.mode,
            "samples": self.samples,
            "seed": self.seed,
            "std_err": self.std_err,
        }


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int | None) -> list[R]:
    """Order-preserving map, threaded when ``threads > 1``."""
    if not threads or threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _lex_subsets(
    candidates: Sequence[int],
    sizes: Sequence[float] | None = None,
    B: float | None = None,
    kmax: int | None = None,
) -> Iterator[tuple[int, ...]]:
    """Feasible subsets of ``candidates`` in lexicographic order (∅ first)."""
    cands = sorted(candidates)

    def rec(prefix: tuple[int, ...], start: int, used: float):
        yield prefix
        if kmax is not None and len(prefix) >= kmax:
            return
        for a in range(start, len(cands)):
            j = cands[a]
            nxt = used
            if B is not None:
                nxt = used + sizes[j]
                if not fits(nxt, B):
                    continue
            yield from rec(prefix + (j,), a + 1, nxt)

    yield from rec((), 0, 0.0)


def _best_over(
    model: ChoiceModelSpec, real: Realization, subsets: Iterable[tuple[int, ...]]
) -> OracleResult:
    best = EMPTY
    for S in subsets:
        if not S:
            continue
        value, psi = revenue_and_purchase(model, real, S)
        if value > best.value:
            best = OracleResult(S, value, psi)
    return best


def opt_brute(
    model: ChoiceModelSpec,
    real: Realization,
    constraint: ConstraintSpec = Unconstrained(),
    cap: int = DEFAULT_BRUTE_CAP,
    candidates: Sequence[int] | None = None,
) -> OracleResult:
    """Best feasible assortment by exhaustive search.

    Subsets are scanned in lexicographic order and only a strict improvement
    replaces the incumbent, so ties go to the lexicographically smallest set
    (∅ when every revenue is zero).
    """
    cands = list(range(len(real))) if candidates is None else list(candidates)
    if len(cands) > cap:
        raise TooLarge(f"{len(cands)} items exceeds brute-force cap {cap}")
    if isinstance(constraint, Cardinality):
        subsets = _lex_subsets(cands, kmax=constraint.k)
    elif isinstance(constraint, Knapsack):
        sizes = [it.size for it in real.items]
        subsets = _lex_subsets(cands, sizes=sizes, B=constraint.B)
    else:
        subsets = _lex_subsets(cands)
    return _best_over(model, real, subsets)


def opt_mnl_revenue_ordered(model: ChoiceModelSpec, real: Realization) -> OracleResult:
    """Unconstrained MNL optimum over the revenue-ordered sets {i : r_i ≥ t}."""
    if not isinstance(model, Mnl):
        raise ModelMismatch(f"revenue-ordered oracle needs MNL, got {model.name}")
    levels = sorted({it.revenue for it in real.items}, reverse=True)
    candidates = [tuple(it.id for it in real.items if it.revenue >= t) for t in levels]
    candidates.sort()
    return _best_over(model, real, candidates)


def g_split(model: ChoiceModelSpec, real: Realization, B: float) -> tuple[OracleResult, OracleResult]:
    """``(g(Q), g(V))`` for small items (b ≤ B/2) and large items (b > B/2).

    Two large items never fit together, so g(V) is the best singleton.
    """
    small = [it.id for it in real.items if it.size <= B / 2]
    large = [it.id for it in real.items if it.size > B / 2]
    g_small = opt_brute(model, real, Knapsack(B), candidates=small)
    g_large = _best_over(model, real, [(j,) for j in large])
    return g_small, g_large


@dataclass(frozen=True)
class RealizationOptimum:
    opt: OracleResult
    g_small: OracleResult = EMPTY
    g_large: OracleResult = EMPTY


def realization_optimum(instance: Instance, real: Realization) -> RealizationOptimum:
    opt = opt_brute(instance.model, real, instance.constraint)
    if isinstance(instance.constraint, Knapsack):
        gq, gv = g_split(instance.model, real, instance.constraint.B)
        return RealizationOptimum(opt, gq, gv)
    return RealizationOptimum(opt)


def _weighted_mean_and_se(values: np.ndarray, counts: np.ndarray, total: int) -> tuple[float, float]:
    if np.all(values == values[0]):
        return float(values[0]), 0.0
    mean = float(np.dot(counts, values) / total)
    var = float(np.dot(counts, (values - mean) ** 2) / (total - 1))
    return mean, math.sqrt(var / total)


def opt_stats(
    instance: Instance,
    mode: str = "exact",
    samples: int | None = None,
    seed: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
    threads: int | None = None,
) -> OptStats:
    """E[f(S*)], γ = E[ψ(S*)] and, under knapsack, E[g(Q)] and E[g(V)].

    ``monte_carlo`` mode draws ``samples`` realizations from per-item seeded
    streams; as supports are finite, the oracle runs once per distinct
    realization and draws are weighted by their counts.
    """
    if mode == "exact":
        support = joint_support(instance, cap)
        optima = parallel_map(
            lambda pi: realization_optimum(instance, instance.realization(pi[1])),
            support,
            threads,
        )
        probs = [p for p, _ in support]

        def expect(get):
            return math.fsum(p * get(o) for p, o in zip(probs, optima))

        return OptStats(
            expected_opt=expect(lambda o: o.opt.value),
            gamma=expect(lambda o: o.opt.purchase_prob),
            expected_g_small=expect(lambda o: o.g_small.value),
            expected_g_large=expect(lambda o: o.g_large.value),
            mode="exact",
        )
    if mode != "monte_carlo":
        raise ValueError(f"unknown mode {mode!r}")
    if not samples or samples < 1:
        raise ValueError("monte_carlo mode needs a positive sample count")
    idx = sample_indices(instance, samples, seed)
    uniq, counts = np.unique(idx, axis=0, return_counts=True)
    optima = parallel_map(
        lambda row: realization_optimum(instance, instance.realization(row)), list(uniq), threads
    )
    stats = {}
    for name, get in (
        ("expected_opt", lambda o: o.opt.value),
        ("gamma", lambda o: o.opt.purchase_prob),
        ("expected_g_small", lambda o: o.g_small.value),
        ("expected_g_large", lambda o: o.g_large.value),
    ):
        stats[name] = _weighted_mean_and_se(np.array([get(o) for o in optima]), counts, samples)
    return OptStats(
        **{k: v[0] for k, v in stats.items()},
        mode="monte_carlo",
        samples=samples,
        seed=seed,
        std_err={k: v[1] for k, v in stats.items()},
    )
