"""Bound evaluators: exact identities, scaling laws, and dominance checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kanto import (
    EvalGrid,
    FunctionProfile,
    MissingProfileEntry,
    apply_gbs,
    apply_gw,
    apply_sw,
    b_differential_estimate,
    build_bound_report,
    convergence_study,
    fn_lookup,
    gbs_differential_bound,
    gbs_modulus_bound,
    gw_error_bound,
    inverse_result_probe,
    kfunctional_constants,
    mixed_modulus_estimate,
    polynomial_reproduction_check,
    sw_remainder_bound,
)
from kanto.kernel2d import MomentTable

rng = np.random.default_rng(3)

UNIT_BOX = (0.0, 0.0, 1.0, 1.0)
# wide enough that the interior margin of the widest kernel at w=5 stays real
WIDE_BOX = (-1.0, -1.0, 2.0, 2.0)


def interior_points(n=10, seed=4):
    gen = np.random.default_rng(seed)
    return gen.uniform(0.2, 0.8, size=(n, 2))


class TestFunctionProfile:
    def test_polynomial_entries(self):
        profile = FunctionProfile.from_function(fn_lookup("x2"))
        assert profile.entry((2, 0)) == pytest.approx(2.0, abs=1e-12)
        assert profile.entry((1, 0)) == pytest.approx(4.0, abs=1e-9)
        assert profile.entry((0, 2)) == 0.0
        assert profile.second_order_max == pytest.approx(2.0, abs=1e-12)

    def test_box_override(self):
        profile = FunctionProfile.from_function(fn_lookup("x2"), box=UNIT_BOX)
        # sup of the first partial 2x over [0,1]^2 instead of the default box
        assert profile.entry((1, 0)) == pytest.approx(2.0, abs=1e-9)
        assert profile.box == UNIT_BOX

    def test_missing_entry(self):
        empty = FunctionProfile(sup_norms={}, box=UNIT_BOX)
        with pytest.raises(MissingProfileEntry):
            empty.entry((2, 0))

    def test_profile_covers_bound_orders(self):
        profile = FunctionProfile.from_function(fn_lookup("sin_x_cos_y"))
        for idx in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (0, 3), (2, 2)]:
            assert profile.entry(idx) >= 0.0


class TestRateBound:
    def test_zero_for_constant(self, chibar3):
        profile = FunctionProfile.from_function(fn_lookup("const1"))
        assert gw_error_bound(profile, chibar3, 3, 21.75, 10.0) == 0.0

    def test_derivative_factor_composition(self, chibar3):
        # H = A_r + B_r + sum_i C(r,i) A_{r-i} B_i with all sups equal to 1
        ones = {idx: 1.0 for idx in [(1, 0), (0, 1), (2, 0), (0, 2), (3, 0), (0, 3)]}
        profile = FunctionProfile(sup_norms=ones, box=UNIT_BOX)
        got = gw_error_bound(profile, chibar3, 3, 1.0, 1.0, grid_n=16)
        from kanto.kernel2d import max_moment

        h = 1.0 + 1.0 + math.comb(3, 1) + math.comb(3, 2)
        assert got == pytest.approx(
            (1.0 / 6.0) * max_moment(chibar3, 3, 16) * h, rel=1e-12
        )

    def test_rate_scaling_is_exact(self, chibar3):
        profile = FunctionProfile.from_function(fn_lookup("sin_x_cos_y"))
        b10 = gw_error_bound(profile, chibar3, 3, 21.75, 10.0)
        b20 = gw_error_bound(profile, chibar3, 3, 21.75, 20.0)
        assert b10 / b20 == pytest.approx(8.0, rel=1e-12)

    def test_invalid_order(self, chibar3):
        profile = FunctionProfile.from_function(fn_lookup("x2"))
        with pytest.raises(ValueError):
            gw_error_bound(profile, chibar3, 0, 1.0, 10.0)

    def test_dominates_observed_error(self, chibar3):
        f = fn_lookup("sin_x_cos_y")
        profile = FunctionProfile.from_function(f)
        table = MomentTable.compute(chibar3, eta_max=3, grid_n=64)
        c = table.rth_moment_constant(3)
        for w in (5.0, 10.0, 20.0):
            grid = EvalGrid.regular(UNIT_BOX, 8, w)
            err = np.abs(
                apply_gw(f, chibar3, grid)
                - np.array([float(f(x, y)) for x, y in grid.points])
            ).max()
            assert err <= gw_error_bound(profile, chibar3, 3, c, w)


class TestRemainderBound:
    def test_formula(self, m3_tensor):
        from kanto.kernel2d import absolute_moment

        profile = FunctionProfile.from_function(fn_lookup("x2"))
        w = 10.0
        expected = (7.0 * 2.0 / (12.0 * w * w)) * absolute_moment(m3_tensor, 0, 0, 64)
        assert sw_remainder_bound(profile, m3_tensor, w) == pytest.approx(
            expected, rel=1e-12
        )

    def test_scaling(self, chibar3):
        profile = FunctionProfile.from_function(fn_lookup("xy"))
        assert sw_remainder_bound(profile, chibar3, 10.0) / sw_remainder_bound(
            profile, chibar3, 20.0
        ) == pytest.approx(4.0, rel=1e-12)


class TestKFunctionalConstants:
    def test_combination_kernel_closed_form(self, chibar3):
        w = 10.0
        kf = kfunctional_constants(chibar3, w)
        assert kf.sq_x == pytest.approx(1.0 / (3.0 * w * w), abs=1e-12)
        assert kf.sq_y == pytest.approx(1.0 / (3.0 * w * w), abs=1e-12)
        assert kf.sq_xy == pytest.approx(1.0 / (9.0 * w**4), abs=1e-14)

    def test_plain_spline_closed_form(self, m3_tensor):
        w = 10.0
        kf = kfunctional_constants(m3_tensor, w)
        assert kf.sq_x == pytest.approx(7.0 / (12.0 * w * w), abs=1e-14)

    def test_identity_against_direct_application(self, chibar3, m3_tensor):
        # the constants are exact values of the average series applied to
        # squared offsets, so recompute them operator-side at random points
        w = 10.0
        for kernel in (chibar3, m3_tensor):
            kf = kfunctional_constants(kernel, w)
            for x0, y0 in interior_points(5):
                single = EvalGrid(points=[(x0, y0)], w=w)
                sq_x = apply_sw(
                    lambda u, v, x0=x0: (u - x0) ** 2, kernel, single
                )[0]
                sq_xy = apply_sw(
                    lambda u, v, x0=x0, y0=y0: (u - x0) ** 2 * (v - y0) ** 2,
                    kernel,
                    single,
                )[0]
                assert kf.sq_x == pytest.approx(sq_x, abs=1e-8)
                assert kf.sq_xy == pytest.approx(sq_xy, abs=1e-8)

    def test_scaling_laws(self, chibar3):
        k10 = kfunctional_constants(chibar3, 10.0)
        k20 = kfunctional_constants(chibar3, 20.0)
        assert k10.sq_x / k20.sq_x == pytest.approx(4.0, rel=1e-12)
        assert k10.sq_xy / k20.sq_xy == pytest.approx(16.0, rel=1e-12)


class TestModulusMachinery:
    def test_product_modulus_exact_on_grid_multiples(self):
        f = fn_lookup("xy")
        got = mixed_modulus_estimate(f, 0.25, 0.5, UNIT_BOX, grid_n=33)
        assert got == pytest.approx(0.125, abs=1e-14)

    def test_estimate_is_lower_bound_for_product(self):
        f = fn_lookup("xy")
        for d1, d2 in [(0.1, 0.1), (0.3, 0.2), (0.07, 0.6)]:
            got = mixed_modulus_estimate(f, d1, d2, UNIT_BOX, grid_n=33)
            assert got <= d1 * d2 + 1e-14

    def test_zero_for_additive_functions(self):
        f = fn_lookup("sin_x_plus_cos_y")
        assert mixed_modulus_estimate(f, 0.5, 0.5, UNIT_BOX) <= 1e-14

    @settings(max_examples=40, deadline=None)
    @given(
        d1=st.floats(min_value=0.01, max_value=0.9),
        d2=st.floats(min_value=0.01, max_value=0.9),
        grow1=st.floats(min_value=0.0, max_value=0.5),
        grow2=st.floats(min_value=0.0, max_value=0.5),
    )
    def test_monotone_in_both_deltas(self, d1, d2, grow1, grow2):
        f = fn_lookup("sin_x_cos_y")
        small = mixed_modulus_estimate(f, d1, d2, UNIT_BOX, grid_n=17)
        large = mixed_modulus_estimate(f, d1 + grow1, d2 + grow2, UNIT_BOX, grid_n=17)
        assert small <= large + 1e-15

    def test_differential_estimate_product(self):
        assert b_differential_estimate(
            fn_lookup("xy"), 0.3, 0.7, 0.1
        ) == pytest.approx(1.0, abs=1e-9)

    def test_differential_estimate_matches_closed_form(self):
        # forward mixed difference, so the truncation error is O(h)
        f = fn_lookup("gaussian")
        closed = float(f.partial(1, 1)(0.2, 0.4))
        coarse = abs(b_differential_estimate(f, 0.2, 0.4, 1e-3) - closed)
        fine = abs(b_differential_estimate(f, 0.2, 0.4, 1e-4) - closed)
        assert coarse <= 2e-3
        assert fine <= 2e-4
        assert fine < coarse / 5.0

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            mixed_modulus_estimate(fn_lookup("xy"), -0.1, 0.1, UNIT_BOX)
        with pytest.raises(ValueError):
            b_differential_estimate(fn_lookup("xy"), 0.0, 0.0, 0.0)


class TestBooleanSumBounds:
    def test_modulus_bound_dominates_product_error(self, m3_tensor):
        f = fn_lookup("xy")
        for w in (5.0, 10.0, 20.0):
            delta = 1.0 / w
            grid = EvalGrid.regular(UNIT_BOX, 5, w)
            err = np.abs(
                apply_gbs(f, m3_tensor, grid)
                - np.array([x * y for x, y in grid.points])
            ).max()
            bound = gbs_modulus_bound(m3_tensor, w, delta, delta, delta * delta)
            assert err <= bound

    def test_modulus_bound_scaling_pieces(self, m3_tensor):
        # with omega fixed, the three kernel constants scale as 1/w, 1/w, 1/w^2
        b10 = gbs_modulus_bound(m3_tensor, 10.0, 0.1, 0.1, 1.0) - 1.0
        b20 = gbs_modulus_bound(m3_tensor, 20.0, 0.1, 0.1, 1.0) - 1.0
        assert b10 > b20
        with pytest.raises(ValueError):
            gbs_modulus_bound(m3_tensor, 10.0, 0.0, 0.1, 1.0)

    def test_differential_bound_with_vanishing_modulus(self, m3_tensor):
        # a target with constant mixed differential: only the first term is live
        w = 10.0
        bound = gbs_differential_bound(m3_tensor, w, 0.1, 0.1, 1.0, 0.0)
        mom = MomentTable.compute(m3_tensor, eta_max=4, grid_n=64).absolute_sup
        bilin = (
            mom[(0, 0)] + 2 * mom[(1, 0)] + 2 * mom[(0, 1)] + 4 * mom[(1, 1)]
        ) / (4 * w * w)
        assert bound == pytest.approx(3.0 * bilin, rel=1e-12)

    def test_differential_bound_dominates_product_error(self, m3_tensor):
        f = fn_lookup("xy")
        for w in (5.0, 10.0):
            grid = EvalGrid.regular(UNIT_BOX, 5, w)
            err = np.abs(
                apply_gbs(f, m3_tensor, grid)
                - np.array([x * y for x, y in grid.points])
            ).max()
            bound = gbs_differential_bound(m3_tensor, w, 1.0 / w, 1.0 / w, 1.0, 0.0)
            assert err <= bound


class TestConvergence:
    def test_linear_average_series_slope(self, chibar3):
        f = fn_lookup("x_plus_y")
        table = convergence_study(
            f, chibar3, "sw", [5.0, 10.0, 20.0, 40.0], WIDE_BOX, grid_n=5
        )
        assert table.fitted_slope == pytest.approx(-1.0, abs=1e-3)
        assert table.fit_residual <= 1e-6
        for w, e in table.rows:
            assert w * e == pytest.approx(1.0, abs=1e-6)

    def test_sample_series_third_order(self, chibar3):
        f = fn_lookup("sin_x_cos_y")
        table = convergence_study(
            f, chibar3, "gw", [5.0, 10.0, 20.0, 40.0], WIDE_BOX, grid_n=6
        )
        assert -3.5 <= table.fitted_slope <= -2.5

    def test_ridge_function_superconvergence(self, chibar3):
        probe = inverse_result_probe(
            np.sin, chibar3, [5.0, 10.0, 20.0, 40.0], WIDE_BOX, grid_n=5
        )
        assert probe.fitted_slope <= -1.7
        assert probe.w_error_decreasing

    def test_rows_and_csv(self, tmp_path, m3_tensor):
        f = fn_lookup("sin_x_cos_y")
        table = convergence_study(f, m3_tensor, "gw", [5.0, 10.0], WIDE_BOX, grid_n=4)
        path = tmp_path / "conv.csv"
        table.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "w,sup_error"
        assert lines[1].startswith("5,")
        assert lines[-1].startswith("slope,")
        assert len(lines) == 4

    def test_input_validation(self, m3_tensor):
        f = fn_lookup("x")
        with pytest.raises(ValueError):
            convergence_study(f, m3_tensor, "gw", [10.0], UNIT_BOX)
        with pytest.raises(ValueError):
            convergence_study(f, m3_tensor, "gw", [10.0, 5.0], UNIT_BOX)
        with pytest.raises(ValueError):
            convergence_study(f, m3_tensor, "nope", [5.0, 10.0], UNIT_BOX)


class TestPolynomialReproduction:
    def test_sample_series_exact(self, chibar3):
        worst = polynomial_reproduction_check(chibar3, 3, 10.0, WIDE_BOX)
        assert worst <= 1e-9

    def test_average_series_image_stays_polynomial(self, chibar3):
        worst = polynomial_reproduction_check(
            chibar3, 3, 10.0, WIDE_BOX, operator="sw"
        )
        assert worst <= 1e-8

    def test_plain_spline_sample_series(self, m3_tensor):
        worst = polynomial_reproduction_check(m3_tensor, 2, 8.0, UNIT_BOX)
        assert worst <= 1e-10

    def test_unknown_operator(self, m3_tensor):
        with pytest.raises(ValueError):
            polynomial_reproduction_check(m3_tensor, 2, 8.0, UNIT_BOX, operator="gbs")


class TestBoundReport:
    EXPECTED_KEYS = [
        "rate_deriv_factor",
        "rate_bound",
        "remainder",
        "mod_lin_x",
        "mod_lin_y",
        "mod_bilin",
        "diff_bilin",
        "diff_x",
        "diff_y",
        "diff_bilin2",
        "kfun_x",
        "kfun_y",
        "kfun_xy",
    ]

    def test_keys_and_positivity(self, chibar3):
        profile = FunctionProfile.from_function(fn_lookup("sin_x_cos_y"))
        report = build_bound_report(chibar3, 10.0, profile)
        assert list(report.constants) == self.EXPECTED_KEYS
        for key in ("rate_bound", "remainder", "mod_bilin", "diff_bilin2"):
            assert report.constants[key] > 0.0
        assert report.inputs["w"] == 10.0
        assert report.inputs["r"] == 3.0

    def test_symmetric_kernel_symmetric_constants(self, m3_tensor):
        profile = FunctionProfile.from_function(fn_lookup("gaussian"))
        report = build_bound_report(m3_tensor, 10.0, profile)
        assert report.constants["mod_lin_x"] == report.constants["mod_lin_y"]
        assert report.constants["diff_x"] == report.constants["diff_y"]
        assert report.constants["kfun_x"] == report.constants["kfun_y"]

    def test_csv_output(self, tmp_path, m3_tensor):
        profile = FunctionProfile.from_function(fn_lookup("x2"))
        report = build_bound_report(m3_tensor, 10.0, profile)
        path = tmp_path / "bounds.csv"
        report.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "name,value"
        assert lines[1].split(",")[0] == "rate_deriv_factor"
        assert any(line.startswith("input_w,") for line in lines)

    def test_plain_spline_uses_its_own_order(self, m3_tensor):
        profile = FunctionProfile.from_function(fn_lookup("sin_x_cos_y"))
        report = build_bound_report(m3_tensor, 10.0, profile)
        assert report.inputs["r"] == 2.0
        assert report.constants["kfun_x"] == pytest.approx(
            7.0 / 1200.0, abs=1e-14
        )
