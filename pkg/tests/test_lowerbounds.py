from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqassort.choice import total_revenue
from seqassort.errors import NonPositiveReward
from seqassort.harness import exact_evaluate
from seqassort.instance import enumerate_joint, validate
from seqassort.lowerbounds import (
    check_reduction,
    evaluate_thm53,
    make_lower_bound_thm53,
    make_reduction_appB,
)
from seqassort.oracle import opt_brute
from seqassort.policies import Alg1


def test_instance_shape():
    inst = make_lower_bound_thm53(0.5, 0.5)
    assert validate(inst) == []
    assert inst.model.v0 == 2.0
    assert [a.revenue for a in inst.distributions[1].atoms] == [6.0, 0.0]


def test_first_item_alone_earns_kappa():
    for kappa in (0.2, 0.5, 0.9):
        inst = make_lower_bound_thm53(0.01, kappa)
        _, real = next(iter(enumerate_joint(inst)))
        assert total_revenue(inst.model, real, (0,)) == pytest.approx(kappa, rel=1e-12)


def test_closed_form_expected_optimum():
    for delta, kappa in ((0.5, 0.5), (0.1, 0.3), (0.01, 0.8)):
        rep = evaluate_thm53(delta, kappa)
        assert rep.expected_opt == pytest.approx(1 + (1 - delta) * kappa, rel=1e-12)


def test_frozen_values_small_delta():
    rep = evaluate_thm53(1e-3, 0.5)
    assert rep.value_a1 == pytest.approx(1.0, rel=1e-12)
    assert rep.ratio == pytest.approx(1.4995, rel=1e-9)
    assert abs(rep.gamma - 0.5) <= 5e-3


def test_ratio_approaches_one_plus_kappa():
    for kappa in (0.3, 0.7):
        assert evaluate_thm53(1e-5, kappa).ratio == pytest.approx(1 + kappa, abs=1e-3)


def test_every_policy_in_the_suite_is_beaten():
    inst = make_lower_bound_thm53(1e-3, 0.99)
    for variant in ("gamma_tuned", "half"):
        rep = exact_evaluate(inst, Alg1(variant))
        assert rep.achieved_ratio >= 1.95


def test_parameters_checked():
    with pytest.raises(ValueError):
        make_lower_bound_thm53(0.0, 0.5)
    with pytest.raises(ValueError):
        make_lower_bound_thm53(0.5, 1.0)


def test_reduction_attractions_in_log_space():
    inst = make_reduction_appB([[(1.0, 0.5)]], 1e-6)
    d = inst.distributions[0].atoms[0].demand
    assert d.log_v == pytest.approx(-2 * math.log(1e-6))
    assert inst.model.v0 == 0.0


def test_reduction_singleton_is_exact():
    inst = make_reduction_appB([[(0.5, 0.25), (0.5, 3.0)], [(1.0, 1.0)]], 1e-6)
    for _, real in enumerate_joint(inst):
        for i in range(2):
            assert total_revenue(inst.model, real, (i,)) == real.items[i].revenue


def test_reduction_limit_and_optimum():
    marg = [[(0.5, 2.0), (0.5, 1.0)], [(0.5, 2 / 3), (0.5, 0.5)], [(0.5, 0.4), (0.5, 1 / 3)]]
    chk = check_reduction(make_reduction_appB(marg, 1e-6))
    assert chk.max_error <= 0.01 and chk.opt_matches_max
    assert chk.skipped_realizations == 0 and chk.checked == 8 * 7


@given(st.lists(st.floats(0.1, 50.0), min_size=1, max_size=4, unique=True))
def test_reduction_optimum_is_max_reward(rewards):
    inst = make_reduction_appB([[(1.0, r)] for r in rewards], 1e-6)
    _, real = next(iter(enumerate_joint(inst)))
    assert opt_brute(inst.model, real).value == max(rewards)


def test_reduction_rejects_non_positive_reward():
    with pytest.raises(NonPositiveReward):
        make_reduction_appB([[(1.0, 0.0)]], 1e-3)


def test_reduction_warns_on_shared_rewards():
    with pytest.warns(RuntimeWarning):
        inst = make_reduction_appB([[(1.0, 2.0)], [(1.0, 2.0)]], 1e-3)
    assert check_reduction(inst).skipped_realizations == 1
