"""Tests for Z_n selection and the inner-product, norm and distance estimators."""

from __future__ import annotations

import math

import numpy as np
import pytest

from sobolev.core.estimators import (
    ZnRule,
    choose_zn,
    estimate_inner_product,
    estimate_squared_distance,
    estimate_squared_norm,
    split_halves,
    weighted_pairing,
)
from sobolev.core.fourier import CoeffAccumulator, accumulate, fit_rescale
from sobolev.core.lattice import LatticeSpec, sobolev_weights
from sobolev.errors import InputDataError, InvalidParameterError, SpecMismatchError
from sobolev.models.reports import QuantityTag


class TestChooseZn:
    def test_optimal_rule(self) -> None:
        assert choose_zn(10_000, 0.0, 1, ZnRule.optimal(1.0)) == 40
        assert choose_zn(10, 1.0, 1, ZnRule.optimal(3.0)) == 1

    def test_optimal_scale_constant(self) -> None:
        assert choose_zn(10_000, 0.0, 1, ZnRule.optimal(1.0, c=0.5)) == 20

    def test_budget_rule(self) -> None:
        assert choose_zn(10_000, 0.0, 2, ZnRule.budget(0.5)) == 10
        assert choose_zn(10_000, 0.0, 1, ZnRule.budget(0.5)) == 100
        assert choose_zn(2, 0.0, 3, ZnRule.budget(0.1)) == 1

    def test_manual_rule(self) -> None:
        assert choose_zn(50, 0.0, 1, ZnRule.manual(5)) == 5
        assert choose_zn(50, 0.0, 1, ZnRule.manual(0)) == 0

    def test_optimal_needs_smoother_density(self) -> None:
        with pytest.raises(InvalidParameterError, match="exceed"):
            choose_zn(100, 1.0, 1, ZnRule.optimal(1.0))

    @pytest.mark.parametrize("theta", [0.0, -0.2, 1.5])
    def test_budget_theta_range(self, theta: float) -> None:
        with pytest.raises(InvalidParameterError):
            choose_zn(100, 0.0, 1, ZnRule.budget(theta))

    def test_too_few_samples(self) -> None:
        with pytest.raises(InvalidParameterError):
            choose_zn(1, 0.0, 1, ZnRule.budget(0.5))

    def test_describe(self) -> None:
        assert ZnRule.budget(0.5).describe() == "budget(theta=0.5)"
        assert ZnRule.manual(3).describe() == "manual(3)"
        assert ZnRule.optimal(2.0).describe() == "optimal(s'=2, c=1)"


class TestInnerProduct:
    def test_point_masses_at_origin(self) -> None:
        spec = LatticeSpec(1, 2)
        acc = CoeffAccumulator(spec).update(0.0)
        assert estimate_inner_product(acc, acc, 0.0).value == 5.0
        assert estimate_inner_product(acc, acc, 1.0).value == 10.0

    def test_report_fields(self, rng: np.random.Generator) -> None:
        spec = LatticeSpec(2, 2)
        acc_p = accumulate(spec, rng.uniform(-3, 3, size=(20, 2)))
        acc_q = accumulate(spec, rng.uniform(-3, 3, size=(30, 2)))
        report = estimate_inner_product(acc_p, acc_q, 0.5)
        assert report.quantity is QuantityTag.INNER_PRODUCT
        assert report.n == [20, 30]
        assert report.zn == 2
        assert report.dimension == 2
        assert report.imag_residual >= 0.0

    def test_matches_direct_weighted_sum(self, rng: np.random.Generator) -> None:
        spec = LatticeSpec(1, 4)
        x = rng.uniform(-3, 3, size=(25, 1))
        y = rng.uniform(-3, 3, size=(25, 1))
        ks = np.arange(-4, 5)
        p_hat = np.exp(-1j * np.outer(x[:, 0], ks)).mean(axis=0)
        q_hat = np.exp(-1j * np.outer(y[:, 0], ks)).mean(axis=0)
        expected = np.sum(ks.astype(float) ** 2 * p_hat * np.conj(q_hat)).real
        report = estimate_inner_product(accumulate(spec, x), accumulate(spec, y), 1.0)
        assert report.value == pytest.approx(expected, rel=1e-12, abs=1e-13)

    def test_different_lattices_raise(self) -> None:
        a = CoeffAccumulator(LatticeSpec(1, 1)).update(0.0)
        b = CoeffAccumulator(LatticeSpec(1, 2)).update(0.0)
        with pytest.raises(SpecMismatchError):
            estimate_inner_product(a, b, 0.0)

    def test_swapping_arguments_keeps_value(self, rng: np.random.Generator) -> None:
        spec = LatticeSpec(2, 2)
        acc_p = accumulate(spec, rng.uniform(-3, 3, size=(15, 2)))
        acc_q = accumulate(spec, rng.uniform(-3, 3, size=(15, 2)))
        forward = estimate_inner_product(acc_p, acc_q, 1.0).value
        backward = estimate_inner_product(acc_q, acc_p, 1.0).value
        assert forward == pytest.approx(backward, rel=1e-12, abs=1e-14)

    def test_row_order_does_not_change_value(self, rng: np.random.Generator) -> None:
        spec = LatticeSpec(1, 4)
        x = rng.uniform(-3, 3, size=(300, 1))
        y = rng.uniform(-3, 3, size=(300, 1))
        ordered = estimate_inner_product(accumulate(spec, x), accumulate(spec, y), 1.0).value
        shuffled = estimate_inner_product(
            accumulate(spec, x[rng.permutation(300)]),
            accumulate(spec, y[rng.permutation(300)]),
            1.0,
        ).value
        assert shuffled == pytest.approx(ordered, rel=1e-10, abs=1e-12)

    def test_weighted_pairing_splits_parts(self) -> None:
        value, residual = weighted_pairing(
            np.array([1.0 + 1.0j]), np.array([1.0 + 0.0j]), np.array([2.0])
        )
        assert value == 2.0
        assert residual == 2.0

    def test_unbiased_for_truncated_target(self) -> None:
        # Two-point law on {-1, 2}: p~(z) = (exp(iz) + exp(-2iz)) / 2.
        support = np.array([-1.0, 2.0])
        spec = LatticeSpec(1, 3)
        ks = np.arange(-3, 4)
        p_tilde = np.exp(-1j * np.outer(support, ks)).mean(axis=0)
        target = float(np.sum(sobolev_weights(spec, 1.0) * np.abs(p_tilde) ** 2))

        gen = np.random.default_rng(5)
        trials = 2000
        values = np.empty(trials)
        for t in range(trials):
            x = gen.choice(support, size=(40, 1))
            y = gen.choice(support, size=(40, 1))
            values[t] = estimate_inner_product(accumulate(spec, x), accumulate(spec, y), 1.0).value
        standard_error = values.std(ddof=1) / math.sqrt(trials)
        assert abs(values.mean() - target) <= 4.0 * standard_error


class TestSquaredNorm:
    def test_two_points_at_origin(self) -> None:
        report = estimate_squared_norm(np.zeros((2, 1)), 0.0, LatticeSpec(1, 1))
        assert report.value == 3.0
        assert report.quantity is QuantityTag.SQUARED_NORM
        assert report.n == [2]

    def test_split_sizes(self, rng: np.random.Generator) -> None:
        first, second = split_halves(rng.normal(size=(7, 2)), 1)
        assert first.shape == (3, 2)
        assert second.shape == (4, 2)

    def test_split_without_shuffle_keeps_order(self) -> None:
        data = np.arange(6, dtype=float)[:, None]
        first, second = split_halves(data, None, shuffle=False)
        np.testing.assert_array_equal(first[:, 0], [0, 1, 2])
        np.testing.assert_array_equal(second[:, 0], [3, 4, 5])

    def test_unshuffled_norm_ignores_order_within_halves(
        self, rng: np.random.Generator
    ) -> None:
        samples = rng.uniform(-3, 3, size=(200, 1))
        spec = LatticeSpec(1, 5)
        reordered = np.vstack(
            [samples[:100][rng.permutation(100)], samples[100:][rng.permutation(100)]]
        )
        ordered = estimate_squared_norm(samples, 0.0, spec, shuffle=False)
        permuted = estimate_squared_norm(reordered, 0.0, spec, shuffle=False)
        assert permuted.value == pytest.approx(ordered.value, rel=1e-10, abs=1e-12)

    def test_split_needs_two_samples(self) -> None:
        with pytest.raises(InputDataError):
            split_halves(np.zeros((1, 1)), 0)

    def test_seed_determinism(self, rng: np.random.Generator) -> None:
        samples = rng.uniform(-3, 3, size=(101, 1))
        spec = LatticeSpec(1, 5)
        first = estimate_squared_norm(samples, 0.0, spec, seed=9)
        second = estimate_squared_norm(samples, 0.0, spec, seed=9)
        assert first.value == second.value
        assert first.seed == 9

    def test_workers_do_not_change_value(self, rng: np.random.Generator) -> None:
        samples = rng.uniform(-3, 3, size=(2000, 2))
        spec = LatticeSpec(2, 4)
        serial = estimate_squared_norm(samples, 1.0, spec, seed=2)
        threaded = estimate_squared_norm(samples, 1.0, spec, seed=2, workers=4)
        assert threaded.value == pytest.approx(serial.value, rel=1e-10, abs=1e-12)

    def test_rescale_provenance_attached(self, rng: np.random.Generator) -> None:
        raw = rng.uniform(10.0, 20.0, size=(20, 1))
        mapping = fit_rescale(raw, "minmax")
        report = estimate_squared_norm(mapping.apply(raw), 0.0, LatticeSpec(1, 2), rescale=mapping)
        assert report.rescale is not None
        assert report.rescale.mode == "minmax"


class TestSquaredDistance:
    def test_decomposes_into_norms_and_cross_term(self, rng: np.random.Generator) -> None:
        spec = LatticeSpec(1, 3)
        x = rng.uniform(-3, 3, size=(60, 1))
        y = rng.uniform(-2, 2, size=(50, 1))
        report = estimate_squared_distance(x, y, 0.0, spec, seed=4)
        norm_x = estimate_squared_norm(x, 0.0, spec, seed=4).value
        norm_y = estimate_squared_norm(y, 0.0, spec, seed=4).value
        cross = estimate_inner_product(accumulate(spec, x), accumulate(spec, y), 0.0).value
        assert report.value == pytest.approx(norm_x - 2 * cross + norm_y, rel=1e-12, abs=1e-12)
        assert report.n == [60, 50]
        assert report.quantity is QuantityTag.SQUARED_DISTANCE

    def test_clamped_value(self, rng: np.random.Generator) -> None:
        spec = LatticeSpec(1, 2)
        for seed in range(5):
            x = rng.uniform(-3, 3, size=(10, 1))
            report = estimate_squared_distance(x, x.copy(), 0.0, spec, seed=seed)
            assert report.clamped_value == max(report.value, 0.0)

    def test_point_masses_at_distinct_points(self) -> None:
        # delta_0 against delta_pi over |z| <= 1: norms 3 and 3, cross term -1.
        spec = LatticeSpec(1, 1)
        x = np.zeros((2, 1))
        y = np.full((2, 1), math.pi)
        report = estimate_squared_distance(x, y, 0.0, spec)
        assert report.value == pytest.approx(8.0, abs=1e-12)
