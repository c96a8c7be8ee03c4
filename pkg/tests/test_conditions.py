from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import mnl_realization
from seqassort.choice import Gam, GamAttraction, Mnl, MnlAttraction, RealizedItem, Realization
from seqassort.conditions import (
    Condition,
    check_condition1,
    check_condition2,
    check_condition3,
    check_instance,
    check_substitutable,
    expected_conditions,
)
from seqassort.errors import TooLarge
from seqassort.generators import MODEL_NAMES, random_instance
from seqassort.instance import Atom, Instance, ItemDistribution, sample


class InflatedMnl(Mnl):
    """Adding an item boosts the first member's share: not substitutable."""

    def shares(self, real, members):
        out, shares = super().shares(real, members)
        if len(members) >= 2:
            shift = 0.9 * out
            shares = [shares[0] + shift, *shares[1:]]
            out -= shift
        return out, shares


class PeekingMnl(Mnl):
    """Lets the attractions of unoffered items leak into the choice shares."""

    def shares(self, real, members):
        outside_mass = sum(it.demand.v for it in real.items if it.id not in members)
        vs = [real.items[j].demand.v for j in members]
        denom = self.v0 + outside_mass + sum(vs)
        return (self.v0 + outside_mass) / denom, [v / denom for v in vs]


def _random_realization(model, n, seed):
    inst = random_instance(model, n, np.random.default_rng(seed))
    return inst, sample(inst, np.random.default_rng(seed + 1))


@pytest.mark.parametrize("model", MODEL_NAMES)
@given(seed=st.integers(0, 50_000))
def test_models_satisfy_their_conditions(model, seed):
    inst, real = _random_realization(model, 4, seed)
    for cond in expected_conditions(inst.model):
        if cond is Condition.SUBSTITUTABLE:
            rep = check_substitutable(inst.model, real)
        elif cond is Condition.COND1:
            rep = check_condition1(inst.model, inst, real, trials=2, rng=np.random.default_rng(seed))
        elif cond is Condition.COND2:
            rep = check_condition2(inst.model, real)
        else:
            rep = check_condition3(inst.model, real, cond.value.rsplit("_", 1)[1])
        assert rep.holds, rep


def test_mnl_strong_ratio_is_v0_over_v():
    real = mnl_realization([1.0, 1.0, 1.0], [0.5, 2.0, 4.0])
    assert check_condition3(Mnl(1.5), real, "strong").holds


def test_singleton_condition2_is_equality():
    real = mnl_realization([1.0], [2.0])
    rep = check_condition2(Mnl(1.0), real)
    assert rep.holds and rep.checked == 1


def test_gam_with_shadow_fails_strong_but_passes_weak():
    model = Gam(1.0, (0.5, 0.3, 0.0))
    real = Realization(
        tuple(RealizedItem(i, 1.0, GamAttraction(v)) for i, v in enumerate((1.0, 2.0, 1.5)))
    )
    strong = check_condition3(model, real, "strong")
    assert not strong.holds and strong.witness is not None and strong.worst_violation > 1e-3
    assert check_condition3(model, real, "weak").holds


def test_non_substitutable_stub_is_caught():
    real = mnl_realization([1.0, 1.0], [1.0, 1.0])
    rep = check_substitutable(InflatedMnl(1.0), real)
    assert not rep.holds
    S, T, i = rep.witness
    assert set(S) <= set(T) and i == 0


def test_peeking_stub_violates_condition1():
    atoms = ItemDistribution(
        (Atom(0.5, 1.0, MnlAttraction(1.0)), Atom(0.5, 1.0, MnlAttraction(3.0)))
    )
    inst = Instance(PeekingMnl(1.0), (atoms, atoms, atoms))
    real = inst.realization((0, 0, 0))
    rep = check_condition1(inst.model, inst, real, trials=4, rng=np.random.default_rng(0))
    assert not rep.holds and rep.worst_violation > 0


def test_gam_shadow_is_fixed_data_so_condition1_holds():
    inst, real = _random_realization("gam", 4, 3)
    assert check_condition1(inst.model, inst, real, trials=5).holds


def test_zero_share_pairs_are_skipped():
    real = mnl_realization([1.0, 1.0], [0.0, 1.0])
    rep = check_condition3(Mnl(1.0), real, "strong")
    assert rep.holds and rep.skipped == 2


def test_large_n_requires_sampling():
    real = mnl_realization([1.0] * 12, [1.0] * 12)
    with pytest.raises(TooLarge):
        check_substitutable(Mnl(), real)
    assert check_substitutable(Mnl(), real, samples=5, rng=np.random.default_rng(1)).holds


def test_check_instance_aggregates_over_support():
    inst = random_instance("lcf", 3, np.random.default_rng(9))
    reports = check_instance(inst, expected_conditions(inst.model))
    assert [r.condition for r in reports] == expected_conditions(inst.model)
    assert all(r.holds for r in reports)
    assert all(r.to_dict()["witness"] is None for r in reports)
