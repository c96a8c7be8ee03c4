"""Per-item discrete parameter distributions, sampling and joint enumeration."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from seqassort.choice import (
    ChoiceModelSpec,
    DemandParam,
    Gam,
    GamAttraction,
    Lcf,
    LcfParams,
    Mnl,
    MnlAttraction,
    RealizedItem,
    Realization,
    Rum,
    RumDistIndex,
)
from seqassort.errors import InvalidInstance, TooLarge

PROB_TOL = 1e-12
DEFAULT_ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class Atom:
    prob: float
    revenue: float
    demand: DemandParam
    size: float = 0.0


@dataclass(frozen=True)
class ItemDistribution:
    atoms: tuple[Atom, ...]

    @property
    def probs(self) -> np.ndarray:
        return np.array([a.prob for a in self.atoms], dtype=float)


@dataclass(frozen=True)
class Unconstrained:
    pass


@dataclass(frozen=True)
class Cardinality:
    k: int


@dataclass(frozen=True)
class Knapsack:
    B: float


ConstraintSpec = Union[Unconstrained, Cardinality, Knapsack]


@dataclass(frozen=True)
class Instance:
    model: ChoiceModelSpec
    distributions: tuple[ItemDistribution, ...]
    constraint: ConstraintSpec = Unconstrained()

    @property
    def n(self) -> int:
        return len(self.distributions)

    def realization(self, atom_indices: Sequence[int]) -> Realization:
        """The realization picking atom ``atom_indices[i]`` for item ``i``."""
        return Realization(
            tuple(
                _realize(i, self.distributions[i].atoms[int(a)])
                for i, a in enumerate(atom_indices)
            )
        )

    def support_size(self) -> int:
        return math.prod(len(d.atoms) for d in self.distributions)


def _realize(i: int, atom: Atom) -> RealizedItem:
    return RealizedItem(id=i, revenue=atom.revenue, demand=atom.demand, size=atom.size)


def fits(total: float, B: float) -> bool:
    """Knapsack feasibility with a relative slack of 1e-12 for summation noise."""
    return total <= B * (1.0 + 1e-12)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

_DEMAND_FOR = {Mnl: MnlAttraction, Gam: GamAttraction, Rum: RumDistIndex, Lcf: LcfParams}


def validate(instance: Instance) -> list[str]:
    """All invariant violations of ``instance``; an empty list means valid."""
    out: list[str] = []
    model, n = instance.model, instance.n
    c = instance.constraint

    if n == 0:
        out.append("instance has no items")
    if isinstance(c, Cardinality) and (int(c.k) != c.k or c.k < 1):
        out.append(f"cardinality k={c.k} must be a positive integer")
    if isinstance(c, Knapsack) and not (c.B > 0 and math.isfinite(c.B)):
        out.append(f"knapsack budget B={c.B} must be positive")

    if isinstance(model, (Mnl, Gam)) and not (model.v0 >= 0 and math.isfinite(model.v0)):
        out.append(f"v0={model.v0} must be a finite non-negative number")
    if isinstance(model, Gam):
        if len(model.shadow) != n:
            out.append(f"shadow vector has length {len(model.shadow)}, expected {n}")
        if any(not (w >= 0) for w in model.shadow):
            out.append("shadow attractions must be non-negative")
    if isinstance(model, Rum):
        if len(model.families) != n:
            out.append(f"RUM families cover {len(model.families)} items, expected {n}")
        for i, fam in enumerate(model.families):
            if not fam:
                out.append(f"item {i}: empty RUM family")
            for l, dist in enumerate(fam, start=1):
                mass = math.fsum(p for p, _ in dist)
                if not dist or abs(mass - 1.0) > PROB_TOL or any(p <= 0 for p, _ in dist):
                    out.append(f"item {i}: utility distribution {l} prob mass {mass:g} ≠ 1")

    expected = _DEMAND_FOR.get(type(model))
    for i, dist in enumerate(instance.distributions):
        if not dist.atoms:
            out.append(f"item {i}: no atoms")
            continue
        mass = math.fsum(a.prob for a in dist.atoms)
        if abs(mass - 1.0) > PROB_TOL:
            out.append(f"item {i}: prob mass {mass:g} ≠ 1")
        for k, a in enumerate(dist.atoms):
            where = f"item {i} atom {k}"
            if not (a.prob > 0):
                out.append(f"{where}: probability {a.prob} must be positive")
            if not (a.revenue >= 0 and math.isfinite(a.revenue)):
                out.append(f"{where}: revenue {a.revenue} must be finite and non-negative")
            if not (a.size >= 0):
                out.append(f"{where}: size {a.size} must be non-negative")
            if isinstance(c, Knapsack) and a.size > c.B:
                out.append(f"{where}: size {a.size} exceeds budget B={c.B}")
            if expected is not None and not isinstance(a.demand, expected):
                out.append(
                    f"{where}: demand {type(a.demand).__name__} does not match model {model.name}"
                )
                continue
            out.extend(_demand_violations(model, i, a.demand, where))
    return out


def _demand_violations(model: ChoiceModelSpec, i: int, d: DemandParam, where: str) -> list[str]:
    out = []
    if isinstance(d, MnlAttraction):
        if d.log_v is None and not (d.v >= 0 and math.isfinite(d.v)):
            out.append(f"{where}: attraction {d.v} must be finite and non-negative")
    elif isinstance(d, GamAttraction):
        if not (d.v >= 0 and math.isfinite(d.v)):
            out.append(f"{where}: attraction {d.v} must be finite and non-negative")
        if isinstance(model, Gam) and i < len(model.shadow) and d.v < model.shadow[i]:
            out.append(f"{where}: attraction {d.v} below shadow attraction {model.shadow[i]}")
    elif isinstance(d, RumDistIndex):
        family = model.families[i] if isinstance(model, Rum) and i < len(model.families) else ()
        if not 1 <= d.l <= len(family):
            out.append(f"{where}: distribution index {d.l} outside [1, {len(family)}]")
    elif isinstance(d, LcfParams):
        if not (d.fare >= 0):
            out.append(f"{where}: fare {d.fare} must be non-negative")
        if not 0 <= d.q <= 1:
            out.append(f"{where}: consideration probability {d.q} outside [0, 1]")
    return out


def ensure_valid(instance: Instance) -> Instance:
    violations = validate(instance)
    if violations:
        raise InvalidInstance(violations)
    return instance


# ---------------------------------------------------------------------------
# Sampling and enumeration
# ---------------------------------------------------------------------------


def item_seed(seed: int, item: int) -> np.random.SeedSequence:
    """Stream for one item's draws; trials index positions within the stream."""
    return np.random.SeedSequence([seed, 0, item])


def sample(instance: Instance, rng: np.random.Generator) -> Realization:
    """One realization, drawing every item independently from its atoms."""
    idx = [rng.choice(len(d.atoms), p=d.probs) for d in instance.distributions]
    return instance.realization(idx)


def sample_indices(instance: Instance, samples: int, seed: int) -> np.ndarray:
    """``(samples, n)`` atom indices; column ``i`` comes from :func:`item_seed`."""
    cols = []
    for i, d in enumerate(instance.distributions):
        rng = np.random.default_rng(item_seed(seed, i))
        cols.append(rng.choice(len(d.atoms), size=samples, p=d.probs))
    return np.stack(cols, axis=1) if cols else np.zeros((samples, 0), dtype=int)


def joint_support(
    instance: Instance, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[tuple[float, tuple[int, ...]]]:
    """``(prob, atom indices)`` over the cartesian product, in lexicographic order."""
    size = instance.support_size()
    if size > cap:
        raise TooLarge(f"joint support has {size} points, cap is {cap}")
    out = []
    ranges = [range(len(d.atoms)) for d in instance.distributions]
    for idx in itertools.product(*ranges):
        prob = math.prod(instance.distributions[i].atoms[a].prob for i, a in enumerate(idx))
        out.append((prob, idx))
    return out


def enumerate_joint(
    instance: Instance, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[tuple[float, Realization]]:
    for prob, idx in joint_support(instance, cap):
        yield prob, instance.realization(idx)
