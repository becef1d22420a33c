"""Curriculum selection: belief-driven counterfactual teaching, the greedy
BEC-area baseline, and feature-masked phase wrappers around either.

The counterfactual selector runs the sample-beliefs / union-counterfactuals /
argmax-gain loop until the best achievable gain drops to the Monte Carlo
noise floor. The baseline reconstructs the classic condition: cover the
policy's minimal constraint set with demos, then present them least
informative first.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .beliefs import (
    DEFAULT_BELIEF_SAMPLES,
    DEFAULT_SAMPLES,
    BeliefRegion,
    estimate_area,
    information_gain,
    sample_belief,
)
from .constraints import (
    ConstraintSet,
    demo_constraints_counterfactual,
    demo_constraints_standard,
    minimal_constraint_set,
    resolve_conflicts,
)
from .errors import CoverageFailure, EmptyPool, SemanticError
from .mdp import (
    EMPTY,
    Demonstration,
    Domain,
    enumerate_candidate_demos,
    solve_cached,
)

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-3
DEFAULT_POOL_CAP = 200
MASK_TOL = 1e-9


# ---------------------------------------------------------------------------
# Candidate pool and priors


def candidate_pool(
    domain: Domain, cap: int = DEFAULT_POOL_CAP, seed: int = 0
) -> list[Demonstration]:
    """All candidate demos, subsampled evenly over environments past `cap`."""
    demos = enumerate_candidate_demos(domain)
    if not demos:
        raise EmptyPool(f"{domain.name}: no candidate demonstrations")
    if len(demos) <= cap:
        return demos
    rng = np.random.default_rng(seed)
    order = list(rng.permutation(len(demos)))
    picked = sorted(order[:cap])
    log.info("%s: pool capped at %d of %d demos", domain.name, cap, len(demos))
    return [demos[i] for i in picked]


def action_feature_index(domain: Domain) -> int:
    for i, f in enumerate(domain.features):
        if f.trigger.kind == "action":
            return i
    raise SemanticError(f"{domain.name}: no action feature")


def action_negative_prior(
    domain: Domain, n_samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> BeliefRegion:
    """The learner knows only that each action costs something."""
    e = np.zeros(domain.num_features)
    e[action_feature_index(domain)] = -1.0
    return BeliefRegion(ConstraintSet(domain.num_features, [e]), n_samples, seed)


def sign_orthant_prior(
    domain: Domain, n_samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> BeliefRegion:
    """The learner knows the sign of every (nonzero) true weight."""
    normals = []
    for i, w in enumerate(domain.weight_array):
        if abs(w) <= MASK_TOL:
            continue
        e = np.zeros(domain.num_features)
        e[i] = math.copysign(1.0, w)
        normals.append(e)
    return BeliefRegion(ConstraintSet(domain.num_features, normals), n_samples, seed)


def full_sphere_prior(
    domain: Domain, n_samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> BeliefRegion:
    return BeliefRegion(ConstraintSet(domain.num_features), n_samples, seed)


# ---------------------------------------------------------------------------
# Curriculum types


@dataclass(frozen=True)
class CurriculumStep:
    demo: Demonstration
    constraints: ConstraintSet
    info_gain: float
    belief_after: BeliefRegion
    gain_ratio: float | None = None


@dataclass(frozen=True)
class Curriculum:
    strategy: str  # "counterfactual" or "baseline"
    scaffolded: bool
    prior: BeliefRegion
    steps: tuple[CurriculumStep, ...]
    final_belief: BeliefRegion
    config: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return f"{self.strategy}/{'feature_scaffolded' if self.scaffolded else 'flat'}"

    @property
    def demos(self) -> list[Demonstration]:
        return [s.demo for s in self.steps]

    def area_trajectory(self) -> list[float]:
        """Prior area followed by each step's snapshot area (shared stream)."""
        return [self.prior.area().fraction] + [
            s.belief_after.area().fraction for s in self.steps
        ]


# ---------------------------------------------------------------------------
# Visual tie-breaking


def _complexity(demo: Demonstration) -> int:
    return sum(
        1 for row in demo.env.cells for cell in row if cell != EMPTY
    )


def _dissimilarity(demo: Demonstration, previous: Demonstration | None) -> float:
    if previous is None:
        return math.inf
    a, b = demo.env.cells, previous.env.cells
    if len(a) != len(b) or len(a[0]) != len(b[0]):
        return math.inf
    return sum(
        1
        for ra, rb in zip(a, b)
        for ca, cb in zip(ra, rb)
        if ca != cb
    )


def tie_break(
    candidates: list[Demonstration], previous: Demonstration | None = None
) -> Demonstration:
    """Most visually continuous, then simplest, then lowest env id."""
    if not candidates:
        raise ValueError("tie_break needs at least one candidate")
    return min(
        candidates,
        key=lambda d: (_dissimilarity(d, previous), _complexity(d), d.demo_id),
    )


def _tie_break_order(
    candidates: list[Demonstration], previous: Demonstration | None
) -> list[Demonstration]:
    return sorted(
        candidates,
        key=lambda d: (_dissimilarity(d, previous), _complexity(d), d.demo_id),
    )


def partial_gain_target(gains: list[float], ratio: float) -> int:
    """Index of the smallest gain at or above ratio * max(gains).

    Falls back to the max-gain index when nothing clears the target; equal
    gains resolve to the earliest index, so callers pass gains in their
    preferred tie order.
    """
    if not gains:
        raise ValueError("gains must be non-empty")
    if not 0.0 < ratio <= 1.0:
        raise ValueError("ratio must be in (0, 1]")
    target = ratio * max(gains)
    eligible = [(g, i) for i, g in enumerate(gains) if g >= target]
    if not eligible:
        eligible = [(g, i) for i, g in enumerate(gains) if g == max(gains)]
    return min(eligible)[1]


# ---------------------------------------------------------------------------
# Feature masking


def feature_mask_order(domain: Domain, pool: list[Demonstration] | None = None) -> tuple[int, ...]:
    """The first k-2 features, sorted by how rarely constraints mention them.

    Counts, per feature, the nonzero entries across the standard constraints
    of every candidate demo; fewest first, ties to the lower index. Scale
    invariance requires at least two visible features, hence the k-2 cut.
    """
    k = domain.num_features
    if k <= 2:
        return ()
    if pool is None:
        pool = candidate_pool(domain)
    counts = np.zeros(k, dtype=int)
    for demo in pool:
        policy = solve_cached(demo.env, domain.weight_array)
        normals = demo_constraints_standard(demo, policy).normals
        if len(normals):
            counts += (np.abs(normals) > MASK_TOL).sum(axis=0)
    order = sorted(range(k), key=lambda i: (counts[i], i))
    return tuple(order[: k - 2])


def _respects_mask(normals: np.ndarray, masked: tuple[int, ...]) -> np.ndarray:
    """Row mask of constraint vectors with zero entries at masked features."""
    if not masked or not len(normals):
        return np.ones(len(normals), dtype=bool)
    return (np.abs(normals[:, list(masked)]) <= MASK_TOL).all(axis=1)


def _admissible(demo_standard: ConstraintSet, masked: tuple[int, ...]) -> bool:
    return bool(_respects_mask(demo_standard.normals, masked).all())


def _filter_mask(cs: ConstraintSet, masked: tuple[int, ...]) -> ConstraintSet:
    if not masked or not len(cs):
        return cs
    keep = _respects_mask(cs.normals, masked)
    return ConstraintSet(cs.dim, cs.normals[keep])


# ---------------------------------------------------------------------------
# Counterfactual selection (the belief-driven loop)


def _counterfactual_phase(
    domain: Domain,
    pool: list[Demonstration],
    belief: BeliefRegion,
    previous: Demonstration | None,
    m: int,
    epsilon: float,
    rng: np.random.Generator,
    style: str,
    gain_ratio: float,
    masked: tuple[int, ...],
    max_steps: int | None,
    steps: list[CurriculumStep],
):
    """Run the selection loop over `pool` until the best gain hits epsilon.

    Mutates `steps`, returns (remaining pool, belief, previous demo).
    """
    remaining = list(pool)
    while remaining and (max_steps is None or len(steps) < max_steps):
        iter_seed = int(rng.integers(2**63))
        W = sample_belief(belief, m, seed=iter_seed)

        ordered = _tie_break_order(remaining, previous)
        unions: list[ConstraintSet] = []
        for demo in ordered:
            combined = ConstraintSet(domain.num_features)
            for w in W:
                combined = combined.union(
                    demo_constraints_counterfactual(demo, w, style=style)
                )
            unions.append(_filter_mask(combined, masked))
        gains = [
            information_gain(belief, cs, n_samples=belief.n_samples, seed=iter_seed)
            for cs in unions
        ]

        best_idx = max(range(len(gains)), key=lambda i: gains[i].gain)
        best = gains[best_idx].gain
        if best <= epsilon:
            break
        if gain_ratio < 1.0:
            idx = partial_gain_target([g.gain for g in gains], gain_ratio)
        else:
            # Candidates within joint noise of the best are ties; the list
            # is already in tie-break preference, so take the first.
            tied = [
                i for i, g in enumerate(gains)
                if best - g.gain <= g.ci + gains[best_idx].ci
            ]
            idx = min(tied)

        chosen = ordered[idx]
        conveyed = unions[idx]
        updated = resolve_conflicts(
            belief.constraints.union(conveyed), n_samples=belief.n_samples, seed=iter_seed
        )
        belief = BeliefRegion(updated, belief.n_samples, belief.seed)
        steps.append(
            CurriculumStep(
                demo=chosen,
                constraints=conveyed,
                info_gain=gains[idx].gain,
                belief_after=belief,
                gain_ratio=gain_ratio if gain_ratio < 1.0 else None,
            )
        )
        previous = chosen
        remaining = [d for d in remaining if d is not chosen]
    return remaining, belief, previous


def select_counterfactual_curriculum(
    domain: Domain,
    prior: BeliefRegion | None = None,
    m: int = DEFAULT_BELIEF_SAMPLES,
    epsilon: float = DEFAULT_EPSILON,
    seed: int = 0,
    *,
    style: str = "suffix",
    gain_ratio: float = 1.0,
    max_steps: int | None = None,
    pool: list[Demonstration] | None = None,
) -> Curriculum:
    """Pick demos by maximal belief-area reduction against sampled beliefs.

    Each iteration samples m weight vectors from the current belief, builds
    every candidate's counterfactual constraint union against those weights,
    and selects the demo with the largest common-random-number area gain
    (or, with gain_ratio < 1, the smallest gain above that fraction of the
    maximum). Stops when no candidate clears epsilon.
    """
    if pool is None:
        pool = candidate_pool(domain, seed=seed)
    if not pool:
        raise EmptyPool(f"{domain.name}: no candidate demonstrations")
    if prior is None:
        prior = action_negative_prior(domain)
    rng = np.random.default_rng(seed)
    steps: list[CurriculumStep] = []
    _, belief, _ = _counterfactual_phase(
        domain, pool, prior, None, m, epsilon, rng, style, gain_ratio,
        masked=(), max_steps=max_steps, steps=steps,
    )
    config = {"m": m, "epsilon": epsilon, "seed": seed, "style": style,
              "gain_ratio": gain_ratio}
    return Curriculum("counterfactual", False, prior, tuple(steps), belief, config)


# ---------------------------------------------------------------------------
# Baseline selection (set cover, then least informative first)


def _cover_targets(target: ConstraintSet, covered_by: ConstraintSet) -> set[int]:
    """Indices of target normals matched by some normal in covered_by."""
    if not len(target) or not len(covered_by):
        return set()
    cos = target.normals @ covered_by.normals.T
    return set(np.nonzero((cos >= 1.0 - 1e-9).any(axis=1))[0].tolist())


def _baseline_cover(
    pool: list[Demonstration],
    standard: dict[str, ConstraintSet],
    target: ConstraintSet,
    areas: dict[str, float],
) -> list[Demonstration]:
    """Greedy cover of target normals; most new constraints first, ties to
    the smaller demo BEC area, then env id."""
    uncovered = set(range(len(target)))
    chosen: list[Demonstration] = []
    remaining = list(pool)
    while uncovered:
        scored = []
        for demo in remaining:
            hits = _cover_targets(target, standard[demo.demo_id]) & uncovered
            if hits:
                scored.append((-len(hits), areas[demo.demo_id], demo.demo_id, demo, hits))
        if not scored:
            raise CoverageFailure(
                f"{len(uncovered)} of {len(target)} policy constraints not"
                " coverable by any remaining demonstration"
            )
        scored.sort(key=lambda t: t[:3])
        _, _, _, demo, hits = scored[0]
        chosen.append(demo)
        remaining = [d for d in remaining if d is not demo]
        uncovered -= hits
    return chosen


def select_baseline_curriculum(
    domain: Domain,
    seed: int = 0,
    *,
    prior: BeliefRegion | None = None,
    max_steps: int | None = None,
    pool: list[Demonstration] | None = None,
) -> Curriculum:
    """Cover the policy's minimal constraint set, then order the chosen
    demos by decreasing individual BEC area (least informative first)."""
    if pool is None:
        pool = candidate_pool(domain, seed=seed)
    if not pool:
        raise EmptyPool(f"{domain.name}: no candidate demonstrations")
    if prior is None:
        prior = full_sphere_prior(domain)

    standard = {}
    combined = ConstraintSet(domain.num_features)
    for demo in pool:
        policy = solve_cached(demo.env, domain.weight_array)
        cs = demo_constraints_standard(demo, policy)
        standard[demo.demo_id] = cs
        combined = combined.union(cs)
    target = minimal_constraint_set(combined, n_samples=prior.n_samples, seed=seed)
    areas = {
        demo.demo_id: estimate_area(standard[demo.demo_id], prior.n_samples, prior.seed).fraction
        for demo in pool
    }

    chosen = _baseline_cover(pool, standard, target, areas)
    chosen.sort(key=lambda d: (-areas[d.demo_id], d.demo_id))

    steps, belief = _accumulate_baseline_steps(chosen, standard, prior, max_steps)
    return Curriculum("baseline", False, prior, tuple(steps), belief,
                      {"seed": seed})


def _accumulate_baseline_steps(
    chosen: list[Demonstration],
    standard: dict[str, ConstraintSet],
    prior: BeliefRegion,
    max_steps: int | None,
    steps: list[CurriculumStep] | None = None,
    belief: BeliefRegion | None = None,
):
    """Fold demos into belief snapshots; zero-gain demos still contribute
    their constraints (coverage is exact) but do not appear as steps."""
    steps = [] if steps is None else steps
    belief = prior if belief is None else belief
    for demo in chosen:
        if max_steps is not None and len(steps) >= max_steps:
            break
        cs = standard[demo.demo_id]
        before = belief.area().fraction
        updated = belief.with_constraints(cs)
        gain = before - updated.area().fraction
        belief = updated
        if gain <= 0.0:
            log.info("baseline: %s adds no area gain; folded silently", demo.demo_id)
            continue
        steps.append(CurriculumStep(demo, cs, gain, belief))
    return steps, belief


# ---------------------------------------------------------------------------
# Feature scaffolding (mask phases around either inner strategy)


def select_feature_scaffolded(
    domain: Domain,
    inner_strategy: str = "counterfactual",
    prior: BeliefRegion | None = None,
    m: int = DEFAULT_BELIEF_SAMPLES,
    epsilon: float = DEFAULT_EPSILON,
    seed: int = 0,
    *,
    style: str = "suffix",
    gain_ratio: float = 1.0,
    max_steps: int | None = None,
) -> Curriculum:
    """Run the inner strategy in phases that mask rarely-constrained
    features first, unmasking one per phase until the full pool is in play."""
    if domain.num_features < 3:
        raise SemanticError("feature scaffolding needs at least three features")
    if inner_strategy not in ("counterfactual", "baseline"):
        raise SemanticError(f"unknown inner strategy {inner_strategy!r}")

    pool = candidate_pool(domain, seed=seed)
    order = feature_mask_order(domain, pool)
    standard = {}
    for demo in pool:
        policy = solve_cached(demo.env, domain.weight_array)
        standard[demo.demo_id] = demo_constraints_standard(demo, policy)

    if prior is None:
        prior = (
            action_negative_prior(domain)
            if inner_strategy == "counterfactual"
            else full_sphere_prior(domain)
        )
    # Phase j masks order[: len(order)-j]; the final phase masks nothing.
    phases = [tuple(order[: len(order) - j]) for j in range(len(order) + 1)]

    rng = np.random.default_rng(seed)
    steps: list[CurriculumStep] = []
    belief = prior
    previous: Demonstration | None = None
    shown: set[str] = set()

    if inner_strategy == "baseline":
        combined = ConstraintSet(domain.num_features)
        for d in pool:
            combined = combined.union(standard[d.demo_id])
        target = minimal_constraint_set(combined, n_samples=prior.n_samples, seed=seed)
        areas = {
            d.demo_id: estimate_area(standard[d.demo_id], prior.n_samples, prior.seed).fraction
            for d in pool
        }
        uncovered = set(range(len(target)))

    for phase_idx, masked in enumerate(phases):
        phase_pool = [
            d for d in pool
            if d.demo_id not in shown and _admissible(standard[d.demo_id], masked)
        ]
        if not phase_pool:
            log.info("%s: no admissible demos with masked features %s; phase skipped",
                     domain.name, list(masked))
            continue
        if inner_strategy == "counterfactual":
            _, belief, previous = _counterfactual_phase(
                domain, phase_pool, belief, previous, m, epsilon, rng, style,
                gain_ratio, masked=masked, max_steps=max_steps, steps=steps,
            )
        else:
            final_phase = phase_idx == len(phases) - 1
            chosen, uncovered = _baseline_cover_partial(
                phase_pool, standard, target, areas, uncovered,
                must_finish=final_phase,
            )
            chosen.sort(key=lambda d: (-areas[d.demo_id], d.demo_id))
            steps, belief = _accumulate_baseline_steps(
                chosen, standard, prior, max_steps, steps, belief
            )
        shown = {s.demo.demo_id for s in steps}
        if max_steps is not None and len(steps) >= max_steps:
            break

    config = {"seed": seed, "mask_order": list(order)}
    if inner_strategy == "counterfactual":
        config.update(m=m, epsilon=epsilon, style=style, gain_ratio=gain_ratio)
    return Curriculum(inner_strategy, True, prior, tuple(steps), belief, config)


def _baseline_cover_partial(
    pool: list[Demonstration],
    standard: dict[str, ConstraintSet],
    target: ConstraintSet,
    areas: dict[str, float],
    uncovered: set[int],
    must_finish: bool = False,
) -> tuple[list[Demonstration], set[int]]:
    """Greedy cover restricted to `pool`; leftover target constraints stay
    uncovered for later phases unless must_finish demands completion."""
    chosen: list[Demonstration] = []
    remaining = list(pool)
    uncovered = set(uncovered)
    while uncovered:
        scored = []
        for demo in remaining:
            hits = _cover_targets(target, standard[demo.demo_id]) & uncovered
            if hits:
                scored.append((-len(hits), areas[demo.demo_id], demo.demo_id, demo, hits))
        if not scored:
            if must_finish:
                raise CoverageFailure(
                    f"{len(uncovered)} of {len(target)} policy constraints not"
                    " coverable by any remaining demonstration"
                )
            break
        scored.sort(key=lambda t: t[:3])
        _, _, _, demo, hits = scored[0]
        chosen.append(demo)
        remaining = [d for d in remaining if d is not demo]
        uncovered -= hits
    return chosen, uncovered
