"""Core domain types and evaluation of φ(i,S), ψ(S) and f(S).

A :class:`ChoiceModelSpec` turns the realized demand parameters of the
offered items into choice shares. The module-level functions
:func:`choice_prob`, :func:`purchase_prob` and :func:`total_revenue` are the
uniform entry points used by the oracle, the policies and the harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Iterable, Sequence, Union

from seqassort import models
from seqassort.errors import ModelMismatch, NormalizationError, UnknownItem

OUTSIDE = -1
"""Pseudo item id of the no-purchase option."""

NORMALIZATION_TOL = 1e-12
_NORMALIZATION_HARD_TOL = 1e-9


# ---------------------------------------------------------------------------
# Demand parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MnlAttraction:
    """MNL attraction ``v``.

    ``log_v`` optionally carries ``ln v`` for attractions beyond double range;
    when any offered item has it set, shares are computed in log space.
    """

    v: float
    log_v: float | None = None

    def log_attraction(self) -> float:
        if self.log_v is not None:
            return self.log_v
        return math.log(self.v) if self.v > 0 else -math.inf


@dataclass(frozen=True)
class GamAttraction:
    v: float


@dataclass(frozen=True)
class RumDistIndex:
    """1-based index into the item's family of utility distributions."""

    l: int


@dataclass(frozen=True)
class LcfParams:
    fare: float
    q: float


DemandParam = Union[MnlAttraction, GamAttraction, RumDistIndex, LcfParams]


@dataclass(frozen=True)
class RealizedItem:
    id: int
    revenue: float
    demand: DemandParam
    size: float = 0.0


@dataclass(frozen=True)
class Realization:
    items: tuple[RealizedItem, ...]

    def __post_init__(self):
        ids = [it.id for it in self.items]
        if ids != list(range(len(ids))):
            raise ValueError(f"realization ids must be 0..n-1 in order, got {ids}")

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i: int) -> RealizedItem:
        return self.items[i]

    def replace(self, item: RealizedItem) -> "Realization":
        items = list(self.items)
        items[item.id] = item
        return Realization(tuple(items))


Assortment = frozenset
"""Assortments are frozensets of item ids."""


# ---------------------------------------------------------------------------
# Model specs
# ---------------------------------------------------------------------------


class ChoiceModelSpec:
    """Base class of the demand models.

    Subclasses implement :meth:`_shares` on the offered items (sorted by id)
    and hence only ever see the parameters of items in S. Test doubles that
    need to break that rule override :meth:`shares` instead.
    """

    name: ClassVar[str] = "abstract"
    demand_type: ClassVar[type] = object

    def shares(self, real: Realization, members: tuple[int, ...]) -> tuple[float, list[float]]:
        items = [real.items[j] for j in members]
        for it in items:
            if not isinstance(it.demand, self.demand_type):
                raise ModelMismatch(
                    f"item {it.id} has {type(it.demand).__name__}, "
                    f"{self.name} expects {self.demand_type.__name__}"
                )
        return self._shares(items)

    def singleton(self, item: RealizedItem) -> tuple[float, float]:
        """``(φ(i,{i}), φ(0,{i}))`` from the item's own parameters."""
        if not isinstance(item.demand, self.demand_type):
            raise ModelMismatch(f"item {item.id} demand does not match {self.name}")
        outside, (share,) = self._shares([item])
        return share, outside

    def _shares(self, items: Sequence[RealizedItem]) -> tuple[float, list[float]]:
        raise NotImplementedError


@dataclass(frozen=True)
class Mnl(ChoiceModelSpec):
    v0: float = 1.0

    name: ClassVar[str] = "mnl"
    demand_type: ClassVar[type] = MnlAttraction

    def _shares(self, items):
        if any(it.demand.log_v is not None for it in items):
            log_v0 = math.log(self.v0) if self.v0 > 0 else -math.inf
            return models.mnl_shares_log(log_v0, [it.demand.log_attraction() for it in items])
        return models.mnl_shares(self.v0, [it.demand.v for it in items])


@dataclass(frozen=True)
class Gam(ChoiceModelSpec):
    v0: float
    shadow: tuple[float, ...]

    name: ClassVar[str] = "gam"
    demand_type: ClassVar[type] = GamAttraction

    def _shares(self, items):
        offered = {it.id for it in items}
        w_out = math.fsum(w for j, w in enumerate(self.shadow) if j not in offered)
        return models.gam_shares(
            self.v0,
            w_out,
            [it.demand.v for it in items],
            [self.shadow[it.id] for it in items],
        )


@dataclass(frozen=True)
class Rum(ChoiceModelSpec):
    """Independent RUM; ``families[i][l-1]`` is a tuple of (prob, utility) atoms."""

    u0: float
    families: tuple[tuple[tuple[tuple[float, float], ...], ...], ...]

    name: ClassVar[str] = "rum"
    demand_type: ClassVar[type] = RumDistIndex

    def utility_dist(self, item: RealizedItem) -> tuple[tuple[float, float], ...]:
        return self.families[item.id][item.demand.l - 1]

    def _shares(self, items):
        return models.rum_shares(self.u0, [self.utility_dist(it) for it in items])


@dataclass(frozen=True)
class Lcf(ChoiceModelSpec):
    name: ClassVar[str] = "lcf"
    demand_type: ClassVar[type] = LcfParams

    def _shares(self, items):
        return models.lcf_shares([it.demand.fare for it in items], [it.demand.q for it in items])


# ---------------------------------------------------------------------------
# Uniform evaluation
# ---------------------------------------------------------------------------


def members_of(real: Realization, S: Iterable[int]) -> tuple[int, ...]:
    members = tuple(sorted(set(S)))
    n = len(real)
    for j in members:
        if not 0 <= j < n:
            raise UnknownItem(j)
    return members


def distribution(
    model: ChoiceModelSpec, real: Realization, S: Iterable[int]
) -> tuple[float, dict[int, float]]:
    """``(φ(0,S), {i: φ(i,S)})`` with normalization checked."""
    members = members_of(real, S)
    outside, shares = model.shares(real, members)
    total = outside + math.fsum(shares)
    if abs(total - 1.0) > _NORMALIZATION_HARD_TOL or min([outside, *shares]) < 0.0:
        raise NormalizationError(f"shares sum to {total!r} on {members}")
    return outside, dict(zip(members, shares))


def choice_prob(model: ChoiceModelSpec, real: Realization, S: Iterable[int], i: int) -> float:
    """φ(i,S); ``i = OUTSIDE`` gives the no-purchase probability, ``i ∉ S`` gives 0."""
    if i != OUTSIDE and not 0 <= i < len(real):
        raise UnknownItem(i)
    outside, shares = distribution(model, real, S)
    if i == OUTSIDE:
        return outside
    return shares.get(i, 0.0)


def purchase_prob(model: ChoiceModelSpec, real: Realization, S: Iterable[int]) -> float:
    """ψ(S), summed over items (equal to 1 − φ(0,S) up to rounding)."""
    _, shares = distribution(model, real, S)
    return math.fsum(shares.values())


def total_revenue(model: ChoiceModelSpec, real: Realization, S: Iterable[int]) -> float:
    """f(S) = Σ_{i∈S} φ(i,S) · r_i."""
    _, shares = distribution(model, real, S)
    return math.fsum(p * real.items[j].revenue for j, p in shares.items())


def revenue_and_purchase(
    model: ChoiceModelSpec, real: Realization, S: Iterable[int]
) -> tuple[float, float]:
    """``(f(S), ψ(S))`` from a single share evaluation."""
    _, shares = distribution(model, real, S)
    rev = math.fsum(p * real.items[j].revenue for j, p in shares.items())
    return rev, math.fsum(shares.values())
