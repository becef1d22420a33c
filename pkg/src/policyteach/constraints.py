"""Half-space constraints on reward weights recovered from demonstrations.

Every constraint is a unit normal n with predicate w . n >= 0, so a set of
constraints carves a spherical cone out of the unit sphere of weight vectors.
Standard constraints compare a demonstrated action against each one-action
deviation (completed optimally); counterfactual constraints compare the
demonstration suffix against what a believed weight vector would do instead.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import CycleDetected, InfeasibleSet, NonTerminating
from .mdp import (
    Demonstration,
    Domain,
    GridEnvironment,
    Policy,
    enumerate_candidate_demos,
    legal_actions,
    rollout,
    solve_cached,
    successor_features,
    transition_features,
    verify_demo,
)

log = logging.getLogger(__name__)

# Two unit normals are treated as the same constraint above this cosine.
DEDUP_COSINE = 1.0 - 1e-9
# Directions shorter than this carry no information and are dropped.
ZERO_NORM = 1e-9
# A constraint is redundant when the region it would exclude (relative to
# the rest of the set) has estimated area below this sphere fraction.
REDUNDANCY_AREA = 1e-4


def normalize_constraint(direction) -> np.ndarray | None:
    """Unit-normalize a direction; None when it is (nearly) zero."""
    d = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(d))
    if norm < ZERO_NORM:
        return None
    return d / norm


@dataclass(frozen=True)
class HalfSpaceConstraint:
    """w . normal >= 0 with a unit-length normal."""

    normal: tuple[float, ...]

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if abs(float(np.linalg.norm(n)) - 1.0) > 1e-12:
            raise ValueError("constraint normal must be unit length")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.normal)

    def satisfies(self, w, tol: float = 0.0) -> bool:
        return float(np.dot(np.asarray(w, dtype=float), self.array)) >= -tol


class ConstraintSet:
    """An immutable, deduplicated collection of half-space constraints.

    Normals are stored row-wise in a canonical (lexicographic) order so that
    equal sets serialize identically regardless of insertion order.
    """

    def __init__(self, dim: int, normals=()):
        if dim < 2:
            raise ValueError("constraint sets live on a sphere: dim >= 2")
        self.dim = dim
        rows: list[np.ndarray] = []
        for n in normals:
            v = normalize_constraint(n)
            if v is None:
                continue
            if v.shape != (dim,):
                raise ValueError(f"normal of dimension {v.shape}, expected ({dim},)")
            if not any(float(np.dot(v, r)) > DEDUP_COSINE for r in rows):
                rows.append(v)
        rows.sort(key=lambda r: tuple(np.round(r, 12)))
        self._normals = np.array(rows).reshape(len(rows), dim)

    def __len__(self) -> int:
        return self._normals.shape[0]

    def __iter__(self):
        return iter(self._normals)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ConstraintSet)
            and self.dim == other.dim
            and self._normals.shape == other._normals.shape
            and bool(np.allclose(self._normals, other._normals, atol=1e-12))
        )

    def __repr__(self) -> str:
        return f"ConstraintSet(dim={self.dim}, n={len(self)})"

    @property
    def normals(self) -> np.ndarray:
        """(m, dim) array of unit normals (read-only view)."""
        view = self._normals.view()
        view.flags.writeable = False
        return view

    def union(self, other: "ConstraintSet | list") -> "ConstraintSet":
        extra = other.normals if isinstance(other, ConstraintSet) else other
        return ConstraintSet(self.dim, list(self._normals) + list(extra))

    def without(self, index: int) -> "ConstraintSet":
        keep = [r for i, r in enumerate(self._normals) if i != index]
        return ConstraintSet(self.dim, keep)

    def satisfies(self, W, tol: float = 0.0) -> np.ndarray:
        """Boolean mask over rows of W (n, dim): inside the cone or not."""
        W = np.atleast_2d(np.asarray(W, dtype=float))
        if len(self) == 0:
            return np.ones(W.shape[0], dtype=bool)
        return (W @ self._normals.T >= -tol).all(axis=1)

    def contains(self, w, tol: float = 1e-9) -> bool:
        return bool(self.satisfies(np.asarray(w, dtype=float)[None, :], tol=tol)[0])

    def to_lists(self) -> list[list[float]]:
        return [[float(x) for x in row] for row in self._normals]


def interior_radius(cs: ConstraintSet) -> float:
    """LP certificate of strict feasibility: the largest t such that some x
    with max-norm <= 1 satisfies n . x >= t for every constraint. Positive
    t means the cone has interior; ~0 means empty or measure zero."""
    if len(cs) == 0:
        return 1.0
    m, k = cs.normals.shape
    # Variables [x_1..x_k, t]; maximize t s.t. -N x + t <= 0, |x_i| <= 1.
    c = np.zeros(k + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-cs.normals, np.ones((m, 1))])
    b_ub = np.zeros(m)
    bounds = [(-1.0, 1.0)] * k + [(0.0, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        return 0.0
    return float(-res.fun)


def is_feasible(cs: ConstraintSet) -> bool:
    return interior_radius(cs) > 1e-9


def _sphere_samples(dim: int, n: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, dim))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def minimal_constraint_set(
    cs: ConstraintSet, n_samples: int = 100_000, seed: int = 0
) -> ConstraintSet:
    """Drop constraints that do not bound the region.

    A constraint is redundant when the rest of the set, intersected with its
    open violation side, has estimated spherical area below REDUNDANCY_AREA.
    Constraints are tested in their canonical order against the surviving
    set, with one shared sample stream, so the result is deterministic.
    """
    if not is_feasible(cs):
        raise InfeasibleSet("constraint set admits no strictly interior unit vector")
    if len(cs) <= 1:
        return cs
    W = _sphere_samples(cs.dim, int(n_samples), seed)
    dots = W @ cs.normals.T  # (n, m)
    inside = dots >= 0
    active = list(range(len(cs)))
    for i in range(len(cs)):
        if i not in active:
            continue
        others = [j for j in active if j != i]
        if not others:
            break
        # Samples satisfying every other active constraint but violating i.
        carved = inside[:, others].all(axis=1) & (dots[:, i] < 0)
        if float(carved.mean()) < REDUNDANCY_AREA:
            active.remove(i)
    return ConstraintSet(cs.dim, [cs.normals[i] for i in active])


def resolve_conflicts(
    cs: ConstraintSet, n_samples: int = 100_000, seed: int = 0
) -> ConstraintSet:
    """Make a constraint set feasible by greedily dropping the constraint
    whose removal restores the largest feasible area. Conflicting unions are
    rare (they need inconsistent counterfactual batches) and always logged."""
    if is_feasible(cs):
        return cs
    current = cs
    while len(current) and not is_feasible(current):
        W = _sphere_samples(current.dim, int(n_samples), seed)
        best_idx, best_area = 0, -1.0
        for i in range(len(current)):
            reduced = current.without(i)
            area = float(reduced.satisfies(W).mean()) if is_feasible(reduced) else -0.5
            if area > best_area:
                best_idx, best_area = i, area
        dropped = current.normals[best_idx]
        log.warning(
            "dropping conflicting constraint %s (restored area %.4f)",
            np.round(dropped, 4).tolist(),
            max(best_area, 0.0),
        )
        current = current.without(best_idx)
    return current


# ---------------------------------------------------------------------------
# Constraint extraction from demonstrations


def demo_constraints_standard(demo: Demonstration, policy: Policy) -> ConstraintSet:
    """One-action-deviation constraints: at every demo state, the taken
    action (completed by the optimal policy) must be at least as good as each
    alternative action (also completed by the optimal policy)."""
    env = demo.env
    verify_demo(demo, policy)
    directions = []
    for s, a, _ in demo.trajectory.steps:
        mu_taken = successor_features(env, policy, s, a)
        for b in legal_actions(env, s):
            if b == a:
                continue
            mu_alt = successor_features(env, policy, s, b)
            directions.append(mu_taken - mu_alt)
    return ConstraintSet(env.num_features, directions)


def demo_constraints_counterfactual(
    demo: Demonstration,
    believed_weights,
    style: str = "suffix",
    tol: float = 1e-8,
) -> ConstraintSet:
    """Constraints from comparing the demo against a believed weight vector.

    style="suffix" (default): at each demo state, compare the remaining demo
    suffix against the full rollout of the believed policy from that state.
    style="deviation": compare one-action deviations completed by the
    believed policy instead (the taken action versus each alternative, both
    followed by the believed policy).

    A belief equal to the true weights reproduces the demo and yields an
    empty set. A belief under which no finite-value policy exists (say, a
    positive weight that makes circling profitable forever) has no
    counterfactual trajectory to offer and also yields an empty set; such
    beliefs are excluded later by constraints from well-defined ones.
    """
    if style not in ("suffix", "deviation"):
        raise ValueError(f"unknown counterfactual style {style!r}")
    env = demo.env
    directions = []
    try:
        believed = solve_cached(env, believed_weights, tol)
        if style == "suffix":
            suffix = np.zeros(env.num_features)
            suffixes = []
            for s, a, s2 in reversed(demo.trajectory.steps):
                suffix = transition_features(env, s, a, s2) + env.discount * suffix
                suffixes.append(suffix)
            suffixes.reverse()
            for (s, _, _), mu_demo in zip(demo.trajectory.steps, suffixes):
                mu_believed = trajectory_features_of_rollout(env, believed, s)
                directions.append(mu_demo - mu_believed)
        else:
            for s, a, _ in demo.trajectory.steps:
                mu_taken = successor_features(env, believed, s, a)
                for b in legal_actions(env, s):
                    if b == a:
                        continue
                    directions.append(mu_taken - successor_features(env, believed, s, b))
    except (NonTerminating, CycleDetected):
        return ConstraintSet(env.num_features)
    return ConstraintSet(env.num_features, directions)


def trajectory_features_of_rollout(
    env: GridEnvironment, policy: Policy, start
) -> np.ndarray:
    return rollout(env, policy, start).feature_array


def policy_bec(
    domain: Domain, n_samples: int = 100_000, seed: int = 0
) -> ConstraintSet:
    """The minimal constraint set of the whole policy over a domain: the
    union of standard constraints from every candidate demonstration,
    reduced to its non-redundant core."""
    combined = ConstraintSet(domain.num_features)
    w_star = domain.weight_array
    for demo in enumerate_candidate_demos(domain):
        policy = solve_cached(demo.env, w_star)
        combined = combined.union(demo_constraints_standard(demo, policy))
    return minimal_constraint_set(combined, n_samples=n_samples, seed=seed)
