"""Seeded random instances for tests, acceptance runs and the CLI."""

from __future__ import annotations

import numpy as np

from seqassort.choice import (
    Gam,
    GamAttraction,
    Lcf,
    LcfParams,
    Mnl,
    MnlAttraction,
    Rum,
    RumDistIndex,
)
from seqassort.instance import (
    Atom,
    Cardinality,
    ConstraintSpec,
    Instance,
    ItemDistribution,
    Knapsack,
    Unconstrained,
    ensure_valid,
)

MODEL_NAMES = ("mnl", "gam", "rum", "lcf")


def _probs(rng: np.random.Generator, m: int) -> list[float]:
    p = rng.dirichlet(np.ones(m))
    p = [float(x) for x in p]
    p[-1] = 1.0 - sum(p[:-1])
    if p[-1] <= 0:
        return [1.0 / m] * m
    return p


def _sizes(
    rng: np.random.Generator, m: int, B: float, beta: float | None, mixed: bool
) -> list[float]:
    if beta is not None:
        out = [float(rng.uniform(0.05, beta)) * B for _ in range(m)]
        return out
    if mixed:
        return [
            float(rng.uniform(0.1, 0.5) if rng.random() < 0.5 else rng.uniform(0.51, 1.0)) * B
            for _ in range(m)
        ]
    return [float(rng.uniform(0.05, 1.0)) * B for _ in range(m)]


def random_rum_family(rng: np.random.Generator, max_dists: int = 2, max_atoms: int = 3):
    fam = []
    for _ in range(int(rng.integers(1, max_dists + 1))):
        m = int(rng.integers(1, max_atoms + 1))
        utils = rng.choice(np.arange(6), size=m, replace=False)
        fam.append(tuple(zip(_probs(rng, m), (float(u) for u in utils))))
    return tuple(fam)


def random_instance(
    model: str,
    n: int,
    rng: np.random.Generator,
    max_atoms: int = 3,
    constraint: ConstraintSpec = Unconstrained(),
    beta: float | None = None,
    mixed_sizes: bool = False,
    integer_revenues: bool = False,
) -> Instance:
    """A valid instance of ``model`` with ``n`` items and 1..``max_atoms`` atoms each.

    Under a knapsack, ``beta`` caps every size at βB and pins one atom at
    exactly βB so the support's β is as requested; ``mixed_sizes`` draws
    both small (≤ B/2) and large (> B/2) items. Integer revenues, utilities
    and fares make ties common.
    """
    if model not in MODEL_NAMES:
        raise ValueError(f"unknown model {model!r}")
    B = constraint.B if isinstance(constraint, Knapsack) else None

    def revenue():
        return float(rng.integers(0, 6)) if integer_revenues else float(rng.uniform(0.0, 10.0))

    spec = None
    families = []
    demands_per_item = []
    for i in range(n):
        m = int(rng.integers(1, max_atoms + 1))
        if model == "mnl":
            dem = [MnlAttraction(float(rng.uniform(0.1, 3.0))) for _ in range(m)]
        elif model == "gam":
            dem = [GamAttraction(float(rng.uniform(0.1, 3.0))) for _ in range(m)]
        elif model == "rum":
            fam = random_rum_family(rng)
            families.append(fam)
            dem = [RumDistIndex(int(rng.integers(1, len(fam) + 1))) for _ in range(m)]
        else:
            dem = [LcfParams(float(rng.integers(1, 6)), float(rng.uniform(0.1, 0.9))) for _ in range(m)]
        demands_per_item.append(dem)

    dists = []
    for i, dem in enumerate(demands_per_item):
        m = len(dem)
        probs = _probs(rng, m)
        sizes = _sizes(rng, m, B, beta, mixed_sizes) if B is not None else [0.0] * m
        atoms = []
        for k in range(m):
            r = dem[k].fare if model == "lcf" else revenue()
            atoms.append(Atom(probs[k], r, dem[k], sizes[k]))
        dists.append(atoms)

    if B is not None and beta is not None:
        i, k = int(rng.integers(0, n)), 0
        a = dists[i][k]
        dists[i][k] = Atom(a.prob, a.revenue, a.demand, beta * B)

    if model == "mnl":
        spec = Mnl(float(rng.uniform(0.2, 3.0)))
    elif model == "gam":
        shadow = tuple(
            float(rng.uniform(0.0, 1.0)) * min(a.demand.v for a in atoms) for atoms in dists
        )
        spec = Gam(float(rng.uniform(0.2, 3.0)), shadow)
    elif model == "rum":
        spec = Rum(float(rng.integers(0, 4)), tuple(families))
    else:
        spec = Lcf()
    inst = Instance(spec, tuple(ItemDistribution(tuple(a)) for a in dists), constraint)
    return ensure_valid(inst)


def random_reward_instance(n: int, rng: np.random.Generator, max_atoms: int = 3) -> Instance:
    """Rewards-only instance, written as MNL with v0 = 0 and unit attractions."""
    dists = []
    for _ in range(n):
        m = int(rng.integers(1, max_atoms + 1))
        probs = _probs(rng, m)
        dists.append(
            ItemDistribution(
                tuple(
                    Atom(p, float(rng.integers(0, 11)), MnlAttraction(1.0)) for p in probs
                )
            )
        )
    return ensure_valid(Instance(Mnl(0.0), tuple(dists), Unconstrained()))


def random_constraint(kind: str, rng: np.random.Generator, k: int | None = None) -> ConstraintSpec:
    if kind == "unconstrained":
        return Unconstrained()
    if kind == "cardinality":
        return Cardinality(k if k is not None else int(rng.integers(1, 4)))
    if kind == "knapsack":
        return Knapsack(1.0)
    raise ValueError(f"unknown constraint kind {kind!r}")
