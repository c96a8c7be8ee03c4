"""Executable checks of substitutability and the three sufficient conditions.

Each checker evaluates the choice shares of every subset of N once and then
quantifies over the relevant (S, T, i) triples, reporting the largest
deficit and the first triple (in subset-bitmask order) attaining it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from seqassort.choice import OUTSIDE, ChoiceModelSpec, Realization
from seqassort.errors import TooLarge
from seqassort.instance import Instance, enumerate_joint, sample

DEFAULT_EXHAUSTIVE_LIMIT = 10


class Condition(str, enum.Enum):
    SUBSTITUTABLE = "substitutable"
    COND1 = "cond1"
    COND2 = "cond2"
    COND3_STRONG = "cond3_strong"
    COND3_WEAK = "cond3_weak"


@dataclass(frozen=True)
class ConditionReport:
    condition: Condition
    holds: bool
    worst_violation: float
    witness: tuple | None = None
    checked: int = 0
    skipped: int = 0
    tolerance: float = 1e-9

    def to_dict(self) -> dict:
        return {
            "condition": self.condition.value,
            "holds": self.holds,
            "worst_violation": self.worst_violation,
            "witness": _witness_json(self.witness),
            "checked": self.checked,
            "skipped": self.skipped,
            "tolerance": self.tolerance,
        }


def _witness_json(w):
    if w is None:
        return None
    S, T, i = w
    return {"S": list(S), "T": None if T is None else list(T), "i": i}


def _ids(mask: int, n: int) -> tuple[int, ...]:
    return tuple(j for j in range(n) if mask >> j & 1)


class _Tracker:
    """Keeps the max deficit and its first witness."""

    def __init__(self, tolerance: float):
        self.tolerance = tolerance
        self.worst = 0.0
        self.witness = None
        self.checked = 0
        self.skipped = 0

    def add(self, deficit: float, witness) -> None:
        self.checked += 1
        if deficit > self.worst:
            self.worst, self.witness = deficit, witness

    def report(self, condition: Condition) -> ConditionReport:
        holds = self.worst <= self.tolerance
        return ConditionReport(
            condition=condition,
            holds=holds,
            worst_violation=0.0 if holds else self.worst,
            witness=None if holds else self.witness,
            checked=self.checked,
            skipped=self.skipped,
            tolerance=self.tolerance,
        )


class _ShareTable:
    """Lazily cached ``(φ(0,S), {i: φ(i,S)})`` keyed by subset bitmask."""

    def __init__(self, model: ChoiceModelSpec, real: Realization):
        self.model, self.real, self.n = model, real, len(real)
        self._cache: dict[int, tuple[float, dict[int, float]]] = {}

    def __call__(self, mask: int) -> tuple[float, dict[int, float]]:
        hit = self._cache.get(mask)
        if hit is None:
            members = _ids(mask, self.n)
            outside, shares = self.model.shares(self.real, members)
            hit = self._cache[mask] = (outside, dict(zip(members, shares)))
        return hit

    def phi(self, mask: int, i: int) -> float:
        outside, shares = self(mask)
        return outside if i == OUTSIDE else shares.get(i, 0.0)


def _subset_masks(n: int, limit: int, samples: int | None, rng) -> Iterator[int]:
    if n <= limit:
        yield from range(1 << n)
        return
    if samples is None:
        raise TooLarge(f"n={n} exceeds exhaustive limit {limit}; pass samples=")
    rng = rng if rng is not None else np.random.default_rng(0)
    for _ in range(samples):
        yield int(sum(1 << j for j in range(n) if rng.random() < 0.5))


def check_substitutable(
    model: ChoiceModelSpec,
    real: Realization,
    tolerance: float = 1e-9,
    limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
    samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> ConditionReport:
    """φ(i,S) ≥ φ(i,T) for all S ⊆ T and i ∈ S ∪ {0}.

    Above ``limit`` items, ``samples`` random supersets T are drawn and every
    subset S of T is checked.
    """
    n = len(real)
    table = _ShareTable(model, real)
    track = _Tracker(tolerance)
    for T in _subset_masks(n, limit, samples, rng):
        S = T
        while True:
            for i in (OUTSIDE, *_ids(S, n)):
                deficit = table.phi(T, i) - table.phi(S, i)
                track.add(deficit, (_ids(S, n), _ids(T, n), i))
            if S == 0:
                break
            S = (S - 1) & T
    return track.report(Condition.SUBSTITUTABLE)


def check_condition2(
    model: ChoiceModelSpec,
    real: Realization,
    tolerance: float = 1e-9,
    limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
    samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> ConditionReport:
    """φ(i,S) ≥ φ(i,{i}) · φ(0, S \\ {i}) for all S and i ∈ S."""
    n = len(real)
    table = _ShareTable(model, real)
    track = _Tracker(tolerance)
    for S in _subset_masks(n, limit, samples, rng):
        for i in _ids(S, n):
            rhs = table.phi(1 << i, i) * table.phi(S & ~(1 << i), OUTSIDE)
            track.add(rhs - table.phi(S, i), (_ids(S, n), None, i))
    return track.report(Condition.COND2)


def check_condition3(
    model: ChoiceModelSpec,
    real: Realization,
    variant: str = "strong",
    tolerance: float = 1e-9,
    limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
    samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> ConditionReport:
    """φ(0,S)/φ(i,S) versus φ(0,{i})/φ(i,{i}): equal (strong) or at most (weak).

    Pairs with a zero denominator are skipped and counted in ``skipped``.
    """
    if variant not in ("strong", "weak"):
        raise ValueError(f"variant must be 'strong' or 'weak', got {variant!r}")
    n = len(real)
    table = _ShareTable(model, real)
    track = _Tracker(tolerance)
    for S in _subset_masks(n, limit, samples, rng):
        if S == 0:
            continue
        for i in _ids(S, n):
            alone = table.phi(1 << i, i)
            together = table.phi(S, i)
            if alone == 0.0 or together == 0.0:
                track.skipped += 1
                continue
            lhs = table.phi(S, OUTSIDE) / together
            rhs = table.phi(1 << i, OUTSIDE) / alone
            deficit = abs(lhs - rhs) if variant == "strong" else lhs - rhs
            track.add(deficit, (_ids(S, n), None, i))
    return track.report(Condition.COND3_STRONG if variant == "strong" else Condition.COND3_WEAK)


def check_condition1(
    model: ChoiceModelSpec,
    instance: Instance,
    real: Realization,
    trials: int = 3,
    rng: np.random.Generator | None = None,
    limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
    samples: int | None = None,
) -> ConditionReport:
    """φ(i,S) must not move when the items outside S are redrawn.

    For every S, the parameters of N \\ S are resampled ``trials`` times
    from ``instance`` and every φ(i,S), i ∈ S ∪ {0}, must be bit-identical.
    Deterministic model data (GAM shadow attractions) stays fixed.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    n = len(real)
    track = _Tracker(0.0)
    for S in _subset_masks(n, limit, samples, rng):
        members = _ids(S, n)
        base_out, base = model.shares(real, members)
        for _ in range(trials):
            fresh = sample(instance, rng)
            mixed = Realization(
                tuple(real.items[j] if S >> j & 1 else fresh.items[j] for j in range(n))
            )
            out, shares = model.shares(mixed, members)
            diffs = [abs(out - base_out)] + [abs(a - b) for a, b in zip(shares, base)]
            for i, d in zip((OUTSIDE, *members), diffs):
                track.add(d, (members, None, i))
    return track.report(Condition.COND1)


def expected_conditions(model: ChoiceModelSpec) -> list[Condition]:
    """Conditions the model is proven to satisfy."""
    third = Condition.COND3_STRONG if model.name == "mnl" else Condition.COND3_WEAK
    return [Condition.SUBSTITUTABLE, Condition.COND1, Condition.COND2, third]


def run_checks(
    model: ChoiceModelSpec,
    instance: Instance,
    real: Realization,
    checks: list[Condition],
    tolerance: float = 1e-9,
    trials: int = 3,
    rng: np.random.Generator | None = None,
) -> list[ConditionReport]:
    out = []
    for c in checks:
        if c is Condition.SUBSTITUTABLE:
            out.append(check_substitutable(model, real, tolerance))
        elif c is Condition.COND1:
            out.append(check_condition1(model, instance, real, trials, rng))
        elif c is Condition.COND2:
            out.append(check_condition2(model, real, tolerance))
        elif c is Condition.COND3_STRONG:
            out.append(check_condition3(model, real, "strong", tolerance))
        else:
            out.append(check_condition3(model, real, "weak", tolerance))
    return out


def check_instance(
    instance: Instance,
    checks: list[Condition],
    tolerance: float = 1e-9,
    trials: int = 3,
    seed: int = 0,
    cap: int = 10**4,
) -> list[ConditionReport]:
    """Run ``checks`` on every realization of the joint support.

    Per condition, the report with the largest deficit is kept (the first
    realization in enumeration order on ties) and the counts are summed.
    """
    rng = np.random.default_rng(seed)
    merged: dict[Condition, ConditionReport] = {}
    for _, real in enumerate_joint(instance, cap):
        for rep in run_checks(instance.model, instance, real, checks, tolerance, trials, rng):
            old = merged.get(rep.condition)
            if old is None:
                merged[rep.condition] = rep
                continue
            keep = rep if rep.worst_violation > old.worst_violation else old
            merged[rep.condition] = ConditionReport(
                condition=rep.condition,
                holds=old.holds and rep.holds,
                worst_violation=keep.worst_violation,
                witness=keep.witness,
                checked=old.checked + rep.checked,
                skipped=old.skipped + rep.skipped,
                tolerance=tolerance,
            )
    return [merged[c] for c in checks if c in merged]
