"""Monte Carlo geometry on the unit sphere of weight vectors.

Belief regions are spherical cones (constraint sets) whose sizes are
estimated as the fraction of uniform sphere samples they contain. Area
comparisons that must be exactly monotone (information gains, per-step
curriculum areas) share one sample stream: adding constraints can then only
shrink the accepted subset, never jitter it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constraints import ConstraintSet
from .errors import DegenerateRegion

DEFAULT_SAMPLES = 100_000
DEFAULT_BELIEF_SAMPLES = 10
# Rejection sampling gives up after this many attempts.
REJECTION_CAP = 10_000_000

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


def sample_sphere(dim: int, n: int, seed) -> np.ndarray:
    """n points uniform on the unit (dim-1)-sphere: normalized Gaussians."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, dim))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


@dataclass(frozen=True)
class AreaEstimate:
    """A binomial estimate of a sphere fraction with its 95% CI half-width."""

    fraction: float
    ci: float
    n_samples: int

    def agrees(self, other: "AreaEstimate", num_cis: float = 2.0) -> bool:
        return abs(self.fraction - other.fraction) <= num_cis * max(self.ci, other.ci)


def _binomial_ci(p: float, n: int) -> float:
    return _Z95 * float(np.sqrt(max(p * (1.0 - p), 0.0) / n))


def estimate_area(
    cs: ConstraintSet, n_samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> AreaEstimate:
    """Sphere fraction satisfying every constraint. An empty set is exactly 1."""
    n_samples = int(n_samples)
    if n_samples < 1_000:
        raise ValueError("n_samples must be at least 1000")
    W = sample_sphere(cs.dim, n_samples, seed)
    p = float(cs.satisfies(W).mean())
    return AreaEstimate(p, _binomial_ci(p, n_samples), n_samples)


@dataclass(frozen=True)
class BeliefRegion:
    """A spherical cone of weight vectors the learner may still hold."""

    constraints: ConstraintSet
    n_samples: int = DEFAULT_SAMPLES
    seed: int = 0
    _area: list = field(default_factory=list, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.constraints.dim

    def area(self) -> AreaEstimate:
        """Cached area estimate under this region's own sample stream."""
        if not self._area:
            self._area.append(estimate_area(self.constraints, self.n_samples, self.seed))
        return self._area[0]

    def with_constraints(self, extra) -> "BeliefRegion":
        return BeliefRegion(self.constraints.union(extra), self.n_samples, self.seed)

    def contains(self, w, tol: float = 1e-9) -> bool:
        return self.constraints.contains(w, tol=tol)


def sample_belief(
    region: BeliefRegion, m: int = DEFAULT_BELIEF_SAMPLES, seed: int = 0
) -> np.ndarray:
    """m weight vectors uniform over the region, by rejection from the sphere.

    Raises DegenerateRegion when the acceptance rate stays below 1e-6 over
    the attempt cap; callers should treat that as "shrink no further".
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    accepted: list[np.ndarray] = []
    attempts = 0
    batch = max(4 * m, 4096)
    stream = np.random.SeedSequence(seed).spawn(REJECTION_CAP // batch + 1)
    for chunk_seed in stream:
        if attempts >= REJECTION_CAP:
            break
        W = sample_sphere(region.dim, batch, chunk_seed)
        attempts += batch
        hits = W[region.constraints.satisfies(W)]
        accepted.extend(hits)
        if len(accepted) >= m:
            return np.array(accepted[:m])
    rate = len(accepted) / max(attempts, 1)
    raise DegenerateRegion(
        f"rejection sampling accepted {len(accepted)}/{attempts} "
        f"(rate {rate:.2e}); region is (near) empty"
    )


def estimate_overlap(
    region: BeliefRegion,
    cs: ConstraintSet,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> AreaEstimate:
    """Sphere fraction inside both the region and the constraint set."""
    n_samples = int(n_samples)
    if n_samples < 1_000:
        raise ValueError("n_samples must be at least 1000")
    W = sample_sphere(region.dim, n_samples, seed)
    both = region.constraints.satisfies(W) & cs.satisfies(W)
    p = float(both.mean())
    return AreaEstimate(p, _binomial_ci(p, n_samples), n_samples)


@dataclass(frozen=True)
class GainEstimate:
    gain: float
    area_before: AreaEstimate
    area_after: AreaEstimate

    @property
    def ci(self) -> float:
        # The gain is itself a binomial proportion (samples cut), so it gets
        # its own interval rather than propagating the two area intervals.
        return _binomial_ci(self.gain, self.area_before.n_samples)


def information_gain(
    region: BeliefRegion,
    new_constraints,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> GainEstimate:
    """Area removed from `region` by the new constraints, measured with
    common random numbers: a redundant constraint yields exactly 0.0 and the
    gain can never be negative."""
    n_samples = int(n_samples)
    cs = region.constraints
    W = sample_sphere(cs.dim, n_samples, seed)
    before = cs.satisfies(W)
    extra = (
        new_constraints
        if isinstance(new_constraints, ConstraintSet)
        else ConstraintSet(cs.dim, new_constraints)
    )
    after = before & extra.satisfies(W)
    p_before = float(before.mean())
    p_after = float(after.mean())
    return GainEstimate(
        gain=p_before - p_after,
        area_before=AreaEstimate(p_before, _binomial_ci(p_before, n_samples), n_samples),
        area_after=AreaEstimate(p_after, _binomial_ci(p_after, n_samples), n_samples),
    )
