import numpy as np
import pytest

from policyteach import (
    BeliefRegion,
    ConstraintSet,
    candidate_pool,
    policy_bec,
    select_baseline_curriculum,
    select_counterfactual_curriculum,
    select_feature_scaffolded,
)
from policyteach.curriculum import (
    action_feature_index,
    action_negative_prior,
    feature_mask_order,
    full_sphere_prior,
    partial_gain_target,
    sign_orthant_prior,
    tie_break,
)
from policyteach.errors import SemanticError
from policyteach.mdp import enumerate_candidate_demos

from conftest import delivery_like, unit


def test_action_negative_prior_is_half_sphere(delivery):
    prior = action_negative_prior(delivery, n_samples=20_000)
    assert prior.area().fraction == pytest.approx(0.5, abs=0.01)
    idx = action_feature_index(delivery)
    assert idx == 2


def test_sign_orthant_prior_matches_weight_signs(tiles):
    prior = sign_orthant_prior(tiles, n_samples=20_000)
    from policyteach.beliefs import sample_belief

    for w in sample_belief(prior, 50, seed=1):
        assert np.all(np.sign(w) == np.sign(tiles.weight_array))


def test_full_sphere_prior_is_everything(delivery):
    prior = full_sphere_prior(delivery, n_samples=2000)
    assert prior.area().fraction == 1.0


def test_single_demo_domain_selects_it():
    dom = delivery_like([{"id": "only", "grid": [".m.G", "...."], "start": [0, 0]}])
    cur = select_counterfactual_curriculum(dom, m=6, seed=0)
    assert [s.demo.demo_id for s in cur.steps] == ["only"]


def test_tie_break_prefers_simpler_demo(delivery):
    pool = candidate_pool(delivery)
    short = min(pool, key=lambda d: len(d.trajectory.steps))
    long = max(pool, key=lambda d: len(d.trajectory.steps))
    assert tie_break([long, short], previous=None) is short


def test_partial_gain_target_ratio_one_is_argmax():
    assert partial_gain_target([0.1, 0.5, 0.3], 1.0) == 1


def test_partial_gain_target_equal_gains_take_first():
    assert partial_gain_target([0.2, 0.2, 0.2], 1.0) == 0


def test_partial_gain_target_accepts_earliest_above_fraction():
    # 0.8 of the best gain 0.5 is 0.4; the first candidate at or above it wins.
    assert partial_gain_target([0.1, 0.45, 0.5, 0.45], 0.8) == 1


def test_counterfactual_area_weakly_decreases(delivery):
    cur = select_counterfactual_curriculum(delivery, m=8, seed=1)
    areas = cur.area_trajectory()
    assert all(b <= a + 1e-12 for a, b in zip(areas, areas[1:]))


def test_counterfactual_first_step_concerns_mud(delivery):
    """With only "action cost is negative" as prior knowledge, the opening
    demo must carry a mud tradeoff, and some later demo must upper-bound
    the mud cost (a constraint with positive mud component)."""
    from policyteach import demo_constraints_standard, solve_cached

    cur = select_counterfactual_curriculum(delivery, m=16, epsilon=2e-4, seed=7)
    first = cur.steps[0].demo
    cs = demo_constraints_standard(first, solve_cached(first.env, delivery.weight_array))
    assert any(n[0] < -1e-9 for n in cs.normals)
    later = ConstraintSet(3)
    for step in cur.steps[1:]:
        later = later.union(
            demo_constraints_standard(
                step.demo, solve_cached(step.demo.env, delivery.weight_array)
            )
        )
    assert any(n[0] > 1e-9 for n in later.normals)


def test_counterfactual_final_area_matches_policy_bec(delivery):
    from policyteach import estimate_area

    cur = select_counterfactual_curriculum(delivery, m=16, epsilon=2e-4, seed=7)
    bec = policy_bec(delivery)
    a = estimate_area(cur.final_belief.constraints, 100_000, seed=0)
    b = estimate_area(bec, 100_000, seed=0)
    assert a.agrees(b)
    assert bool(cur.final_belief.constraints.satisfies(unit(delivery.weight_array)))


def test_max_steps_truncates(delivery):
    cur = select_counterfactual_curriculum(delivery, m=8, seed=1, max_steps=2)
    assert len(cur.steps) <= 2


def test_curriculum_never_repeats_a_demo(delivery):
    cur = select_counterfactual_curriculum(delivery, m=8, seed=3)
    ids = [s.demo.demo_id for s in cur.steps]
    assert len(ids) == len(set(ids))


def test_baseline_orders_by_decreasing_demo_area(delivery):
    from policyteach import demo_constraints_standard, estimate_area, solve_cached

    cur = select_baseline_curriculum(delivery, seed=0)
    areas = []
    for step in cur.steps:
        cs = demo_constraints_standard(
            step.demo, solve_cached(step.demo.env, delivery.weight_array)
        )
        areas.append(estimate_area(cs, cur.prior.n_samples, cur.prior.seed).fraction)
    assert areas == sorted(areas, reverse=True)


def test_baseline_covers_policy_bec(delivery):
    from policyteach import demo_constraints_standard, solve_cached

    cur = select_baseline_curriculum(delivery, seed=0)
    combined = ConstraintSet(3)
    for step in cur.steps:
        combined = combined.union(
            demo_constraints_standard(
                step.demo, solve_cached(step.demo.env, delivery.weight_array)
            )
        )
    bec = policy_bec(delivery)
    W = np.random.default_rng(5).standard_normal((20_000, 3))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    assert np.array_equal(combined.satisfies(W), bec.satisfies(W))


def test_mask_order_sorts_by_constraint_participation(delivery):
    order = feature_mask_order(delivery)
    assert len(order) == 1  # k - 2 features are masked in the first phase
    # The action feature shows up in nearly every constraint, so it is never
    # the rarely-used one that gets masked first.
    assert order[0] != action_feature_index(delivery)


def test_scaffolded_needs_three_features():
    from policyteach import load_domain

    two = load_domain(
        {
            "name": "thin",
            "discount": 1.0,
            "features": [
                {"name": "mud", "trigger": {"kind": "exit", "cell": "mud"}},
                {"name": "step", "trigger": {"kind": "action"}},
            ],
            "weights": [-2.0, -1.0],
            "environments": [{"id": "c", "grid": [".m.G"], "start": [0, 0]}],
        }
    )
    with pytest.raises(SemanticError):
        select_feature_scaffolded(two)


def test_scaffolded_phases_respect_mask(delivery):
    """Demos shown while a feature is masked must convey nothing about it."""
    from policyteach import demo_constraints_standard, solve_cached

    cur = select_feature_scaffolded(delivery, "counterfactual", m=8, seed=1)
    order = cur.config["mask_order"]
    masked = set(order[: len(order)])
    pool_ids = {d.demo_id for d in candidate_pool(delivery)}
    assert all(s.demo.demo_id in pool_ids for s in cur.steps)
    first = cur.steps[0].demo
    cs = demo_constraints_standard(first, solve_cached(first.env, delivery.weight_array))
    for feature_idx in masked:
        assert np.all(np.abs(cs.normals[:, feature_idx]) < 1e-12)


def test_scaffolded_with_bec_prior_adds_nothing(delivery):
    """A learner who already holds the full policy region learns nothing."""
    bec = policy_bec(delivery)
    prior = BeliefRegion(bec, 100_000, 0)
    cur = select_feature_scaffolded(delivery, "counterfactual", prior=prior, m=8, seed=0)
    assert cur.steps == ()


def test_scaffolded_baseline_reaches_policy_bec(tiles):
    from policyteach import estimate_area

    cur = select_feature_scaffolded(tiles, "baseline", seed=0)
    bec = policy_bec(tiles)
    a = estimate_area(cur.final_belief.constraints, 100_000, seed=0)
    b = estimate_area(bec, 100_000, seed=0)
    assert a.agrees(b)


def test_unknown_inner_strategy_rejected(delivery):
    with pytest.raises(SemanticError):
        select_feature_scaffolded(delivery, "genetic")


def test_pool_deduplicates(delivery):
    pool = candidate_pool(delivery)
    demos = enumerate_candidate_demos(delivery)
    assert len(pool) == len(demos)
    keys = {(d.env.cells, tuple(d.trajectory.actions())) for d in pool}
    assert len(keys) == len(pool)
