import numpy as np
import pytest

from policyteach import (
    BeliefRegion,
    ConstraintSet,
    estimate_area,
    estimate_overlap,
    information_gain,
    sample_belief,
)
from policyteach.beliefs import sample_sphere
from policyteach.errors import DegenerateRegion

from conftest import unit


def test_sphere_samples_are_unit_norm():
    W = sample_sphere(4, 100_000, seed=0)
    assert np.allclose(np.linalg.norm(W, axis=1), 1.0, atol=1e-12)


def test_sphere_samples_are_centered():
    W = sample_sphere(3, 100_000, seed=1)
    sigma = 1.0 / np.sqrt(3 * len(W))
    assert np.all(np.abs(W.mean(axis=0)) < 3 * sigma)


def test_hemisphere_fraction_is_half():
    W = sample_sphere(3, 100_000, seed=2)
    assert (W[:, 2] <= 0).mean() == pytest.approx(0.5, abs=0.01)


def test_sampling_deterministic_per_seed():
    assert np.array_equal(sample_sphere(3, 500, seed=9), sample_sphere(3, 500, seed=9))
    assert not np.array_equal(
        sample_sphere(3, 500, seed=9), sample_sphere(3, 500, seed=10)
    )


def test_estimate_area_empty_set_is_one():
    est = estimate_area(ConstraintSet(3), 2000, seed=0)
    assert est.fraction == 1.0
    assert est.ci == 0.0


def test_estimate_area_requires_enough_samples():
    with pytest.raises(ValueError):
        estimate_area(ConstraintSet(3), 100, seed=0)


def test_belief_sampling_respects_constraints():
    region = BeliefRegion(ConstraintSet(3, [unit([0.0, 0.0, -1.0])]), 2000, 0)
    samples = sample_belief(region, 200, seed=4)
    assert samples.shape == (200, 3)
    assert np.all(samples[:, 2] <= 0)


def test_belief_sampling_unconstrained_is_whole_sphere():
    region = BeliefRegion(ConstraintSet(3), 2000, 0)
    samples = sample_belief(region, 50, seed=4)
    assert np.allclose(np.linalg.norm(samples, axis=1), 1.0)


def test_tiny_region_raises_degenerate():
    squeeze = [
        unit([1.0, 0.0, 1e-8]),
        unit([-1.0, 0.0, 1e-8]),
        unit([0.0, 1.0, 1e-8]),
        unit([0.0, -1.0, 1e-8]),
    ]
    region = BeliefRegion(ConstraintSet(3, squeeze), 2000, 0)
    with pytest.raises(DegenerateRegion):
        sample_belief(region, 10, seed=0)


def test_overlap_with_empty_set_is_region_area():
    region = BeliefRegion(ConstraintSet(3, [unit([0.0, 0.0, -1.0])]), 50_000, 0)
    overlap = estimate_overlap(region, ConstraintSet(3), 50_000, seed=0)
    assert overlap.fraction == pytest.approx(region.area().fraction, abs=1e-12)


def test_overlap_idempotent_on_own_constraints():
    cs = ConstraintSet(3, [unit([0.0, 0.0, -1.0])])
    region = BeliefRegion(cs, 50_000, 0)
    overlap = estimate_overlap(region, cs, 50_000, seed=0)
    assert overlap.fraction == pytest.approx(region.area().fraction, abs=1e-12)


def test_orthogonal_hemispheres_overlap_quarter():
    region = BeliefRegion(ConstraintSet(3, [unit([0.0, 0.0, -1.0])]), 100_000, 0)
    overlap = estimate_overlap(region, ConstraintSet(3, [unit([-1.0, 0.0, 0.0])]),
                               100_000, seed=0)
    assert overlap.fraction == pytest.approx(0.25, abs=0.01)


def test_gain_of_redundant_constraint_is_exactly_zero():
    cs = ConstraintSet(3, [unit([0.0, 0.0, -1.0])])
    region = BeliefRegion(cs, 20_000, 0)
    gain = information_gain(region, ConstraintSet(3, [unit([0.0, 0.0, -1.0])]))
    assert gain.gain == 0.0


def test_gain_of_fresh_hemisphere_is_half():
    region = BeliefRegion(ConstraintSet(3), 100_000, 0)
    gain = information_gain(region, ConstraintSet(3, [unit([1.0, 0.0, 0.0])]))
    assert gain.gain == pytest.approx(0.5, abs=0.01)


def test_gain_never_negative():
    region = BeliefRegion(ConstraintSet(3, [unit([0.0, 0.0, -1.0])]), 5000, 3)
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = unit(rng.normal(size=3))
        gain = information_gain(region, ConstraintSet(3, [n]))
        assert gain.gain >= 0.0


def test_area_estimates_agree_within_two_cis():
    cs = ConstraintSet(3, [unit([0.0, -1.0, -1.0]), unit([1.0, 0.0, -1.0])])
    a = estimate_area(cs, 50_000, seed=1)
    b = estimate_area(cs, 50_000, seed=2)
    assert a.agrees(b)
