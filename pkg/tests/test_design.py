import numpy as np
import pytest

from spectralforge import (
    BistochasticMatrix,
    Spectrum,
    TargetVector,
    analytic_design,
    apply_weights,
    edge_range,
    lp_max_range_design,
    min_edge_range,
    reduction_study,
    spectral_range,
    target_ratios,
)
from spectralforge.design import (
    build_design_lp,
    sample_study_spectrum,
    sample_study_target,
    solve_standard_form,
)
from spectralforge.errors import (
    DegenerateRangeError,
    IndexOutOfRangeError,
    NoDirectionError,
    ValidationError,
)

from helpers import majorization_max_range


def random_task(rng, n):
    levels = rng.uniform(-3.0, 4.0, size=n)
    levels[np.argmin(levels)] = -3.0
    levels[np.argmax(levels)] = 4.0
    return Spectrum(levels), TargetVector(sample_study_target(rng, n))


class TestAnalyticDesign:
    def test_own_ratios_are_always_feasible(self, rng):
        for n in (2, 3, 5):
            s = Spectrum(rng.uniform(0, 4, size=n) + np.linspace(0, 4, n))
            result = analytic_design(s, target_ratios(s))
            assert np.allclose(
                target_ratios(result.effective).ratios,
                target_ratios(s).ratios,
                atol=1e-7,
            )

    def test_merge_top_levels(self):
        result = analytic_design(Spectrum([0.0, 1.0, 2.0]), TargetVector([0, 1, 1]))
        a, b, b2 = result.effective.levels
        assert b == pytest.approx(b2, abs=1e-9)
        assert a < b
        assert np.allclose(target_ratios(result.effective).ratios, [0, 1, 1], atol=1e-7)

    def test_ratio_invariance_under_scaling(self):
        s = Spectrum([0.0, 1.0, 2.0, 4.0])
        t = TargetVector([0.0, 0.6, 0.2, 1.0])
        full = analytic_design(s, t)
        direction = full.weights.entries - 1.0 / s.n
        for fraction in (0.1, 0.5, 1.0):
            scaled = BistochasticMatrix(1.0 / s.n + fraction * direction)
            eff = apply_weights(scaled, s)
            assert np.allclose(target_ratios(eff).ratios, t.ratios, atol=1e-7)

    def test_degenerate_range_rejected(self):
        with pytest.raises(DegenerateRangeError):
            analytic_design(Spectrum([1.0, 1.0]), TargetVector([0.0, 1.0]))


class TestLpDesign:
    def test_worst_case_compression(self):
        result = lp_max_range_design(Spectrum([0, 0, 0, 3]), TargetVector([0, 1, 1, 1]))
        assert result.achieved_range == pytest.approx(1.0, abs=1e-9)

    def test_two_level_identity(self):
        result = lp_max_range_design(Spectrum([0.0, 1.0]), TargetVector([0.0, 1.0]))
        assert result.achieved_range == pytest.approx(1.0, abs=1e-12)

    def test_identity_target_is_optimal(self):
        s = Spectrum([0, 1, 2, 3])
        result = lp_max_range_design(s, target_ratios(s))
        assert result.achieved_range == pytest.approx(3.0, abs=1e-9)

    def test_edge_targets_reach_edge_range(self, rng):
        for n in (3, 4, 6):
            levels = rng.uniform(-2, 5, size=n)
            levels[np.argmax(levels)] = levels.min() + 6.0
            s = Spectrum(np.sort(levels))
            for m in range(1, n):
                t = TargetVector(np.concatenate([np.zeros(m), np.ones(n - m)]))
                result = lp_max_range_design(s, t)
                assert result.achieved_range == pytest.approx(
                    edge_range(s, m), abs=1e-8
                )

    def test_matches_majorization_oracle(self, rng):
        for _ in range(60):
            n = int(rng.integers(2, 9))
            s, t = random_task(rng, n)
            result = lp_max_range_design(s, t)
            oracle = majorization_max_range(s.levels, t.ratios)
            assert result.achieved_range == pytest.approx(oracle, abs=1e-9)

    def test_compression_floor(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 8))
            s, t = random_task(rng, n)
            result = lp_max_range_design(s, t)
            assert result.achieved_range >= spectral_range(s) / (n - 1) - 1e-8

    def test_lp_dominates_analytic(self, rng):
        for _ in range(15):
            n = int(rng.integers(3, 7))
            s, t = random_task(rng, n)
            lp = lp_max_range_design(s, t)
            try:
                an = analytic_design(s, t)
            except NoDirectionError:
                continue
            assert lp.achieved_range >= an.achieved_range - 1e-8

    def test_affine_shift_invariance(self, rng):
        s, t = random_task(rng, 5)
        base = lp_max_range_design(s, t).achieved_range
        shifted = lp_max_range_design(Spectrum(s.levels + 17.5), t).achieved_range
        assert base == pytest.approx(shifted, abs=1e-8)

    def test_standard_form_agrees_on_small_cases(self, rng):
        for n in (2, 3, 4):
            s, t = random_task(rng, n)
            problem, _ = build_design_lp(s, t)
            native = lp_max_range_design(s, t).achieved_range
            _, doubled = solve_standard_form(problem)
            assert native == pytest.approx(doubled, abs=1e-8)

    def test_cost_vector_block_structure(self, rng):
        s, t = random_task(rng, 5)
        problem, order = build_design_lp(s, t)
        n = s.n
        cost = problem.cost.reshape(n, n)
        assert np.allclose(cost[0], -s.levels)
        assert np.allclose(cost[n - 1], s.levels)
        assert np.allclose(cost[1 : n - 1], 0.0)
        assert problem.a_eq.shape == (3 * n - 3, n * n)


class TestEdgeRanges:
    def test_edge_range_examples(self):
        s = Spectrum([0, 0, 0, 3])
        assert edge_range(s, 1) == pytest.approx(1.0)
        assert edge_range(s, 3) == pytest.approx(3.0)
        assert edge_range(Spectrum([0, 1]), 1) == pytest.approx(1.0)

    def test_edge_range_bounds_checked(self):
        with pytest.raises(IndexOutOfRangeError):
            edge_range(Spectrum([0, 1, 2]), 3)
        with pytest.raises(IndexOutOfRangeError):
            edge_range(Spectrum([0, 1, 2]), 0)

    def test_edge_range_requires_canonical(self):
        with pytest.raises(ValidationError):
            edge_range(Spectrum([3, 0, 1]), 1)

    def test_min_edge_range_examples(self):
        assert min_edge_range(Spectrum([0, 0, 0, 3])) == (pytest.approx(1.0), 1)
        value, m = min_edge_range(Spectrum([0, 1, 2, 3]))
        assert value == pytest.approx(2.0)
        assert m == 1  # ties break toward the smaller split
        assert min_edge_range(Spectrum([0.0, 2.5])) == (pytest.approx(2.5), 1)


class TestReductionStudy:
    def test_two_levels_exact(self):
        row = reduction_study([2], samples=25, seed=3)[0]
        assert row.mean_min_range == pytest.approx(1.0, abs=1e-12)
        assert row.mean_range == pytest.approx(1.0, abs=1e-12)

    def test_deterministic_and_worker_independent(self):
        a = reduction_study([3, 4], samples=40, seed=11, jobs=1)
        b = reduction_study([3, 4], samples=40, seed=11, jobs=2)
        for ra, rb in zip(a, b):
            assert ra.mean_range == rb.mean_range
            assert ra.mean_min_range == rb.mean_min_range

    def test_row_invariants(self):
        for row in reduction_study([3, 5], samples=30, seed=7):
            assert 0 <= row.mean_min_range <= row.mean_range <= row.n - 1

    def test_sampling_laws(self, rng):
        lam = sample_study_spectrum(rng, 6)
        assert lam.min() == 0.0
        assert lam.max() == pytest.approx(5.0)
        t = sample_study_target(rng, 6)
        assert t.min() == 0.0 and t.max() == 1.0
