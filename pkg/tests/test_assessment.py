import numpy as np
import pytest
from scipy.stats import spearmanr

from policyteach import (
    BeliefRegion,
    ConstraintSet,
    build_test_suite,
    candidate_pool,
    demo_constraints_standard,
    extended_bec,
    policy_bec,
    sample_belief,
    score_response,
    sign_orthant_prior,
    simulate_learner,
    solve_cached,
    tier_accuracy,
)
from policyteach.assessment import (
    INFINITE_DIFFICULTY,
    DegenerateClusters,
    PoolTooSmall,
    _kmeans_1d,
    _TIER_CLUSTERS,
)
from policyteach.assessment import TestItem as Item
from policyteach.assessment import TestSuite as Suite
from policyteach.assessment import test_difficulty as difficulty_of
from policyteach.errors import InvalidTrajectory
from policyteach.oracles import replanning_verdict

from conftest import delivery_like, unit


# A hand-constructed overlap profile with five well-separated bands. The
# easiest, middle, and hardest bands must come out as the three tiers.
HAND_OVERLAPS = np.array([0.9, 0.88, 0.5, 0.48, 0.3, 0.28, 0.1, 0.09, 0.02, 0.019])


def test_kmeans_recovers_hand_built_bands():
    labels, centroids = _kmeans_1d(HAND_OVERLAPS)
    order = np.argsort(-centroids, kind="stable")
    tiers = {}
    for tier, rank in zip(("low", "medium", "high"), _TIER_CLUSTERS):
        cluster = int(order[rank])
        tiers[tier] = sorted(HAND_OVERLAPS[labels == cluster], reverse=True)
    assert tiers["low"] == [0.9, 0.88]
    assert tiers["medium"] == [0.3, 0.28]
    assert tiers["high"] == [0.02, 0.019]


def test_kmeans_rejects_flat_input():
    with pytest.raises(DegenerateClusters):
        _kmeans_1d(np.full(10, 0.25))


def test_extended_bec_without_samples_is_standard_set(delivery):
    belief = sign_orthant_prior(delivery, n_samples=5000)
    demo = candidate_pool(delivery)[0]
    extended = extended_bec(delivery, demo, belief, m=0)
    standard = demo_constraints_standard(
        demo, solve_cached(demo.env, delivery.weight_array)
    )
    assert np.array_equal(extended.normals, standard.normals)


def test_extended_bec_grows_with_counterfactuals(delivery):
    belief = sign_orthant_prior(delivery, n_samples=5000)
    demo = next(d for d in candidate_pool(delivery) if "patch-detour" in d.demo_id)
    standard = extended_bec(delivery, demo, belief, m=0)
    extended = extended_bec(delivery, demo, belief, m=10, seed=0)
    assert len(extended.normals) >= len(standard.normals)


def test_converged_belief_overlap_equals_belief_area(delivery):
    """Once the belief has shrunk to the policy's own region, every demo
    region contains it, so overlap saturates at the belief area and the
    difficulty floor 1/area is hit everywhere."""
    belief = BeliefRegion(policy_bec(delivery), 100_000, 0)
    area = belief.area().fraction
    for demo in candidate_pool(delivery)[:4]:
        overlap, difficulty = difficulty_of(delivery, demo, belief, m=10, seed=0)
        assert overlap == area
        assert difficulty == pytest.approx(1.0 / area)


def test_impossible_demo_gets_infinite_difficulty(delivery):
    """A demo no believed weight could produce scores zero overlap."""
    pool = candidate_pool(delivery)
    demo = next(d for d in pool if d.demo_id == "patch-detour")
    # The stored demo walks around the patch. A believer for whom mud never
    # costs more than one and a half steps always cuts straight through, so
    # no believed weight reproduces the detour.
    mud_shrugger = BeliefRegion(
        ConstraintSet(
            3,
            [
                np.array([-1.0, 0.0, 0.0]),
                np.array([0.0, 1.0, 0.0]),
                np.array([0.0, 0.0, -1.0]),
                unit([1.0, 0.0, -1.5]),
            ],
        ),
        50_000,
        0,
    )
    overlap, difficulty = difficulty_of(delivery, demo, mud_shrugger, m=10, seed=0)
    assert overlap == 0.0
    assert difficulty == INFINITE_DIFFICULTY


def test_suite_shape_and_tier_monotonicity(delivery):
    suite = build_test_suite(delivery, per_tier=2, m=10, seed=0)
    assert isinstance(suite, Suite)
    assert len(suite.items) == 6
    for tier in ("low", "medium", "high"):
        assert len(suite.tier_items(tier)) == 2
    low = min(i.overlap for i in suite.tier_items("low"))
    med_hi = max(i.overlap for i in suite.tier_items("medium"))
    med_lo = min(i.overlap for i in suite.tier_items("medium"))
    high = max(i.overlap for i in suite.tier_items("high"))
    assert low > med_hi > 0.0
    assert med_lo > high > 0.0
    assert all(i.difficulty == pytest.approx(1.0 / i.overlap) for i in suite.items)


def test_suite_is_deterministic(delivery):
    a = build_test_suite(delivery, per_tier=2, m=10, seed=3)
    b = build_test_suite(delivery, per_tier=2, m=10, seed=3)
    assert [i.test_id for i in a.items] == [i.test_id for i in b.items]
    assert [i.overlap for i in a.items] == [i.overlap for i in b.items]


def test_converged_belief_has_no_tiers(delivery):
    belief = BeliefRegion(policy_bec(delivery), 100_000, 0)
    with pytest.raises(DegenerateClusters):
        build_test_suite(delivery, post_belief=belief)


def test_small_pool_is_rejected():
    dom = delivery_like(
        [
            {"id": "a", "grid": [".m.G"], "start": [0, 0]},
            {"id": "b", "grid": ["..G"], "start": [0, 0]},
        ]
    )
    with pytest.raises(PoolTooSmall):
        build_test_suite(dom)


def test_suite_lookup_by_id(delivery):
    suite = build_test_suite(delivery, per_tier=1, m=10, seed=0)
    item = suite.items[0]
    assert suite.item(item.test_id) is item
    with pytest.raises(KeyError):
        suite.item("no-such-test")


def test_overlap_ranks_track_replanning_fractions(delivery):
    """Overlap must rank demos the same way a direct simulation does: for
    each candidate, the fraction of believed weights whose replanned route
    matches the demo. Rank agreement is the whole case for using overlap
    as the difficulty score, so it is pinned here."""
    belief = sign_orthant_prior(delivery, n_samples=40_000, seed=0)
    pool = candidate_pool(delivery)
    assert len(pool) >= 20
    W = sample_belief(belief, 300, seed=11)
    overlaps = []
    fractions = []
    for demo in pool:
        overlap, _ = difficulty_of(delivery, demo, belief, m=10, seed=0)
        overlaps.append(overlap)
        verdicts = [replanning_verdict(demo.env, [demo.trajectory], w) for w in W]
        defined = [v for v in verdicts if v is not None]
        fractions.append(sum(defined) / len(defined))
    rho = spearmanr(overlaps, fractions).statistic
    assert rho >= 0.9


def test_score_optimal_response(delivery):
    suite = build_test_suite(delivery, per_tier=1, m=10, seed=0)
    item = suite.items[0]
    score = score_response(item, item.optimal.actions(), delivery.weight_array)
    assert score.optimal
    assert score.reward_gap == 0.0
    assert score.confidence is None


def test_score_reward_equal_alternative_counts_as_optimal():
    dom = delivery_like([{"id": "open", "grid": ["..", ".G"], "start": [0, 0]}])
    suite_demo = candidate_pool(dom)[0]

    item = Item(
        env=suite_demo.env,
        optimal=suite_demo.trajectory,
        overlap=0.5,
        difficulty=2.0,
        tier="low",
    )
    stored = item.optimal.actions()
    mirrored = list(reversed(stored))
    assert mirrored != stored
    score = score_response(item, mirrored, dom.weight_array)
    assert score.optimal
    assert score.reward_gap == 0.0


def test_score_suboptimal_gap_is_exact(delivery):
    env = next(e for e in delivery.environments if e.env_id == "patch-detour-wide")
    from policyteach.mdp import rollout

    optimal = rollout(env, solve_cached(env, delivery.weight_array))
    item = Item(env=env, optimal=optimal, overlap=0.1, difficulty=10.0, tier="low")
    # Straight through the mud: four actions and one mud exit against the
    # optimal six clean actions. In raw units that is (-3 - 4) - (-6), one
    # step short; stored weights are unit norm, so the gap shrinks by the
    # norm of the raw vector.
    through = ["right", "right", "right", "right"]
    score = score_response(item, through, delivery.weight_array)
    assert not score.optimal
    assert score.reward_gap == pytest.approx(1.0 / np.linalg.norm([-3.0, 3.5, -1.0]))


def test_score_rejects_illegal_actions(delivery):
    suite = build_test_suite(delivery, per_tier=1, m=10, seed=0)
    item = suite.items[0]
    with pytest.raises(InvalidTrajectory):
        score_response(item, ["up"] * 50, delivery.weight_array)


def test_score_rejects_foreign_start(delivery):
    """A trajectory built on a different environment fails the start-state
    check before any stepping happens."""
    suite = build_test_suite(delivery, per_tier=1, m=10, seed=0)
    item = suite.items[0]
    donor = candidate_pool(delivery)
    mismatch = next(
        d.trajectory for d in donor if d.trajectory.start != item.optimal.start
    )
    with pytest.raises(InvalidTrajectory):
        score_response(item, mismatch, delivery.weight_array)


def test_score_confidence_bounds(delivery):
    suite = build_test_suite(delivery, per_tier=1, m=10, seed=0)
    item = suite.items[0]
    good = score_response(item, item.optimal.actions(), delivery.weight_array, confidence=4)
    assert good.confidence == 4
    for bad in (0, 6):
        with pytest.raises(ValueError):
            score_response(item, item.optimal.actions(), delivery.weight_array, confidence=bad)


def test_simulated_expert_answers_everything(delivery):
    """A learner whose belief has collapsed onto the policy region replans
    correctly on every test."""
    belief = BeliefRegion(policy_bec(delivery), 100_000, 0)
    suite = build_test_suite(delivery, per_tier=2, m=10, seed=0)
    accuracy = simulate_learner(delivery, belief, suite, m=40, seed=0)
    assert set(accuracy) == {i.test_id for i in suite.items}
    assert all(v == 1.0 for v in accuracy.values())


def test_simulated_novice_struggles_on_hard_tier(delivery):
    belief = sign_orthant_prior(delivery, n_samples=40_000, seed=0)
    suite = build_test_suite(delivery, per_tier=2, m=10, seed=0)
    accuracy = simulate_learner(delivery, belief, suite, m=60, seed=0)
    tiers = tier_accuracy(suite, accuracy)
    assert set(tiers) == {"low", "medium", "high"}
    assert tiers["low"] > tiers["high"]


def test_tier_accuracy_is_plain_mean(delivery):
    suite = build_test_suite(delivery, per_tier=2, m=10, seed=0)
    fake = {item.test_id: 0.25 * (i + 1) for i, item in enumerate(suite.items)}
    tiers = tier_accuracy(suite, fake)
    for tier in ("low", "medium", "high"):
        expected = np.mean([fake[i.test_id] for i in suite.tier_items(tier)])
        assert tiers[tier] == pytest.approx(expected)
