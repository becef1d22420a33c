"""Test difficulty scoring, tiered test suites, and response grading.

A test asks the learner to produce the optimal trajectory in an unseen
environment. How hard that is depends not on the environment alone but on
how much of the learner's current belief region would still produce the
right answer: the overlap between the belief and the demonstration's
extended constraint region. Difficulty is the reciprocal of that overlap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beliefs import (
    DEFAULT_BELIEF_SAMPLES,
    BeliefRegion,
    estimate_overlap,
    sample_belief,
)
from .constraints import (
    ConstraintSet,
    demo_constraints_counterfactual,
    demo_constraints_standard,
)
from .curriculum import candidate_pool, sign_orthant_prior
from .errors import (
    CycleDetected,
    DegenerateClusters,
    InvalidTrajectory,
    NonTerminating,
    PoolTooSmall,
)
from .mdp import (
    Demonstration,
    Domain,
    GridEnvironment,
    Trajectory,
    apply_action,
    legal_actions,
    make_trajectory,
    rollout,
    solve_cached,
)

INFINITE_DIFFICULTY = float("inf")
OPTIMALITY_TOL = 1e-9
TIERS = ("low", "medium", "high")

_KMEANS_K = 5
_KMEANS_MAX_ITERS = 100
# Tiers come from the 1st, 3rd, and 5th cluster once clusters are ordered by
# descending centroid overlap: the easiest, middle, and hardest bands.
_TIER_CLUSTERS = (0, 2, 4)


def extended_bec(
    domain: Domain,
    demo: Demonstration,
    belief: BeliefRegion,
    m: int = DEFAULT_BELIEF_SAMPLES,
    seed: int = 0,
    style: str = "suffix",
) -> ConstraintSet:
    """Constraints a learner could extract from `demo`: the one-action
    deviations against the optimal policy, extended by counterfactual
    comparisons against m weight vectors sampled from `belief`.

    With m = 0 this is exactly the standard deviation set.
    """
    policy = solve_cached(demo.env, domain.weight_array)
    combined = demo_constraints_standard(demo, policy)
    if m > 0:
        for w in sample_belief(belief, m, seed=seed):
            extra = demo_constraints_counterfactual(demo, w, style=style)
            combined = combined.union(extra)
    return combined


def test_difficulty(
    domain: Domain,
    demo: Demonstration,
    belief: BeliefRegion,
    m: int = DEFAULT_BELIEF_SAMPLES,
    seed: int = 0,
    style: str = "suffix",
) -> tuple[float, float]:
    """(overlap, difficulty) of asking for `demo` after teaching.

    Overlap is the sphere fraction inside both the belief and the demo's
    extended constraint region; difficulty is its reciprocal. A demo no
    believable weight vector would produce gets the +inf sentinel.
    """
    region = extended_bec(domain, demo, belief, m=m, seed=seed, style=style)
    est = estimate_overlap(belief, region, n_samples=belief.n_samples, seed=belief.seed)
    if est.fraction <= 0.0:
        return 0.0, INFINITE_DIFFICULTY
    return est.fraction, 1.0 / est.fraction


@dataclass(frozen=True)
class TestItem:
    """One test environment with its hidden answer and difficulty labels."""

    env: GridEnvironment
    optimal: Trajectory
    overlap: float
    difficulty: float
    tier: str

    @property
    def test_id(self) -> str:
        return self.env.env_id


@dataclass(frozen=True)
class TestSuite:
    domain_name: str
    items: tuple[TestItem, ...]
    per_tier: int
    m: int
    seed: int

    def tier_items(self, tier: str) -> tuple[TestItem, ...]:
        return tuple(item for item in self.items if item.tier == tier)

    def item(self, test_id: str) -> TestItem:
        for item in self.items:
            if item.test_id == test_id:
                return item
        raise KeyError(test_id)


def _kmeans_1d(values: np.ndarray, k: int = _KMEANS_K) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic 1-D k-means: quantile initialization, mean updates,
    empty clusters keep their previous centroid. Returns (labels, centroids).
    """
    if float(np.ptp(values)) < 1e-15:
        raise DegenerateClusters(
            "all overlaps are equal; there are no difficulty tiers to form"
        )
    centroids = np.quantile(values, np.linspace(0.0, 1.0, k))
    for _ in range(_KMEANS_MAX_ITERS):
        labels = np.argmin(np.abs(values[:, None] - centroids[None, :]), axis=1)
        updated = centroids.copy()
        for j in range(k):
            members = values[labels == j]
            if members.size:
                updated[j] = members.mean()
        if np.allclose(updated, centroids, atol=1e-15):
            break
        centroids = updated
    labels = np.argmin(np.abs(values[:, None] - centroids[None, :]), axis=1)
    return labels, centroids


def build_test_suite(
    domain: Domain,
    post_belief: BeliefRegion | None = None,
    per_tier: int = 2,
    m: int = DEFAULT_BELIEF_SAMPLES,
    seed: int = 0,
    style: str = "suffix",
    pool: list[Demonstration] | None = None,
) -> TestSuite:
    """Select 3 x per_tier test items spanning low, medium, and high difficulty.

    Overlaps for the whole candidate pool are clustered into five bands by
    1-D k-means; the easiest, middle, and hardest bands supply the tiers.
    Within a band the items closest to its centroid are taken, ties broken
    by environment id. Demos with zero overlap are dropped: the modeled
    learner cannot produce them at all, so they measure nothing.

    `post_belief` defaults to the sign-correct orthant, the conservative
    model of a learner who has been told each weight's sign but nothing else.
    """
    if per_tier < 1:
        raise ValueError("per_tier must be >= 1")
    if post_belief is None:
        post_belief = sign_orthant_prior(domain)
    if pool is None:
        pool = candidate_pool(domain)
    scored = []
    for demo in pool:
        overlap, difficulty = test_difficulty(
            domain, demo, post_belief, m=m, seed=seed, style=style
        )
        if overlap > 0.0:
            scored.append((demo, overlap, difficulty))
    if len(scored) < _KMEANS_K:
        raise PoolTooSmall(
            f"{domain.name}: {len(scored)} usable demos; "
            f"clustering needs at least {_KMEANS_K}"
        )
    overlaps = np.array([s[1] for s in scored])
    labels, centroids = _kmeans_1d(overlaps)
    order = np.argsort(-centroids, kind="stable")
    items: list[TestItem] = []
    for tier, rank in zip(TIERS, _TIER_CLUSTERS):
        cluster = int(order[rank])
        members = [s for s, lab in zip(scored, labels) if lab == cluster]
        members.sort(key=lambda s: (abs(s[1] - centroids[cluster]), s[0].demo_id))
        if len(members) < per_tier:
            raise PoolTooSmall(
                f"{domain.name}: {tier}-difficulty band has {len(members)} "
                f"demos, need {per_tier}"
            )
        for demo, overlap, difficulty in sorted(
            members[:per_tier], key=lambda s: s[0].demo_id
        ):
            items.append(
                TestItem(
                    env=demo.env,
                    optimal=demo.trajectory,
                    overlap=overlap,
                    difficulty=difficulty,
                    tier=tier,
                )
            )
    return TestSuite(
        domain_name=domain.name,
        items=tuple(items),
        per_tier=per_tier,
        m=m,
        seed=seed,
    )


@dataclass(frozen=True)
class ResponseScore:
    optimal: bool
    reward_gap: float
    confidence: int | None = None


def trajectory_from_actions(env: GridEnvironment, actions) -> Trajectory:
    """Replay an action list from the environment start, validating each move.

    Raises InvalidTrajectory on an illegal action or a path that stops short
    of the goal.
    """
    state = env.start_state
    steps = []
    for i, action in enumerate(actions):
        if action not in legal_actions(env, state):
            raise InvalidTrajectory(
                f"{env.env_id}: action {i} ({action!r}) is illegal at "
                f"({state.x}, {state.y})"
            )
        nxt = apply_action(env, state, action)
        steps.append((state, action, nxt))
        state = nxt
    if (state.x, state.y) != env.goal:
        raise InvalidTrajectory(f"{env.env_id}: trajectory does not reach the goal")
    return make_trajectory(env, steps)


def score_response(
    test: TestItem,
    response,
    weights,
    confidence: int | None = None,
) -> ResponseScore:
    """Grade a response trajectory against the test's hidden optimum.

    `response` is an action list or a Trajectory starting at the test
    environment's start. The reward gap is measured under the true weights;
    any reward-equal route counts as optimal, not only the stored one.
    """
    env = test.env
    if isinstance(response, Trajectory):
        if not response.steps or response.steps[0][0] != env.start_state:
            raise InvalidTrajectory(
                f"{env.env_id}: trajectory does not start at the start cell"
            )
        actions = response.actions()
    else:
        actions = list(response)
    trajectory = trajectory_from_actions(env, actions)
    if confidence is not None and not 1 <= int(confidence) <= 5:
        raise ValueError("confidence must be an integer from 1 to 5")
    w = np.asarray(weights, dtype=float)
    gap = max(0.0, test.optimal.reward(w) - trajectory.reward(w))
    return ResponseScore(
        optimal=gap <= OPTIMALITY_TOL,
        reward_gap=gap,
        confidence=None if confidence is None else int(confidence),
    )


def simulate_learner(
    domain: Domain,
    belief: BeliefRegion,
    suite: TestSuite,
    m: int = 100,
    seed: int = 0,
) -> dict[str, float]:
    """Predicted accuracy per test: the fraction of m belief samples whose
    replanned trajectory is reward-optimal under the true weights.

    A sampled weight vector that admits no finite-value plan counts as
    wrong; it cannot reproduce any finite demonstration.
    """
    W = sample_belief(belief, m, seed=seed)
    w_star = domain.weight_array
    accuracy: dict[str, float] = {}
    for item in suite.items:
        target = item.optimal.reward(w_star)
        correct = 0
        for w in W:
            try:
                policy = solve_cached(item.env, w)
                produced = rollout(item.env, policy)
            except (NonTerminating, CycleDetected):
                continue
            if target - produced.reward(w_star) <= OPTIMALITY_TOL:
                correct += 1
        accuracy[item.test_id] = correct / len(W)
    return accuracy


def tier_accuracy(suite: TestSuite, accuracy: dict[str, float]) -> dict[str, float]:
    """Mean predicted accuracy per difficulty tier."""
    means: dict[str, float] = {}
    for tier in TIERS:
        values = [accuracy[item.test_id] for item in suite.tier_items(tier)]
        if values:
            means[tier] = float(np.mean(values))
    return means
