"""Radial model math: forward/inverse mapping, monotonicity, sampling, files."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fisheyeflow import camera
from fisheyeflow.camera import (
    DEFAULT_RANGES,
    DEFAULT_R_MAX,
    InversionError,
    ModelKind,
    ParamRanges,
    RadialModel,
    SamplingError,
    SingularityError,
    forward_radius,
    identity_model,
    invert_radius,
    is_monotone,
    load_model,
    sample_model,
    save_model,
)


def poly(*coeffs):
    return RadialModel(ModelKind.POLYNOMIAL, coeffs)


def division(*coeffs):
    return RadialModel(ModelKind.DIVISION, coeffs)


def bisect_oracle(model, target, lo=0.0, hi=4.0, iters=200):
    """Independent scalar bisection on the forward map."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if forward_radius(model, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestForwardRadius:
    def test_identity(self):
        assert forward_radius(poly(1, 0, 0, 0), 0.5) == 0.5

    def test_polynomial_example(self):
        # 0.8 + 0.5 * 0.8**3
        assert forward_radius(poly(1, 0.5, 0, 0), 0.8) == pytest.approx(1.056, abs=1e-12)

    def test_division_zero_coeffs(self):
        assert forward_radius(division(0, 0, 0, 0), 0.7) == 0.7

    def test_division_formula(self):
        m = division(0.3, 0.1, 0, 0)
        r = 0.6
        expected = r / (1 + 0.3 * r + 0.1 * r**3)
        assert forward_radius(m, r) == pytest.approx(expected, rel=1e-14)

    def test_origin_fixed_point(self):
        assert forward_radius(poly(1.1, 0.4, 0.1, 0.05), 0.0) == 0.0
        assert forward_radius(division(0.2, 0.1, 0, 0), 0.0) == 0.0

    def test_vectorized_matches_scalar(self):
        m = poly(0.95, 0.3, -0.02, 0.01)
        rs = np.linspace(0, 1.4, 17)
        vec = forward_radius(m, rs)
        for r, v in zip(rs, vec):
            assert v == forward_radius(m, float(r))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            forward_radius(poly(1, 0, 0, 0), np.nan)
        with pytest.raises(ValueError):
            forward_radius(poly(1, 0, 0, 0), -0.1)

    def test_division_singularity(self):
        # denominator 1 - r hits zero at r = 1
        with pytest.raises(SingularityError):
            forward_radius(division(-1.0, 0, 0, 0), 1.0)


class TestInvertRadius:
    def test_identity_exact(self):
        assert invert_radius(identity_model(), 0.3, tol=1e-10) == 0.3

    def test_against_bisection_oracle(self):
        m = poly(1, 0.5, 0, 0)
        got = invert_radius(m, 1.056, tol=1e-10)
        assert got == pytest.approx(bisect_oracle(m, 1.056), abs=1e-9)
        assert got == pytest.approx(0.8, abs=1e-9)

    def test_zero_maps_to_zero(self):
        assert invert_radius(poly(0.9, 0.4, 0.1, 0.0), 0.0) == 0.0

    def test_round_trip_tolerance(self):
        m = poly(1.05, 0.45, 0.12, -0.01)
        ru = np.linspace(0.0, forward_radius(m, DEFAULT_R_MAX), 200)
        rd = invert_radius(m, ru, tol=1e-9)
        assert np.max(np.abs(forward_radius(m, rd) - ru)) <= 1e-9

    def test_out_of_range(self):
        # decreasing beyond its hump: sup(forward) < 5
        with pytest.raises(InversionError):
            invert_radius(poly(1, -2, 0, 0), 5.0)

    def test_target_beyond_monotone_validation(self):
        # root sits below sqrt(2) even though the tail dips afterwards
        m = poly(0.9, 0.15, -0.05, -0.01)
        assert is_monotone(m, DEFAULT_R_MAX)
        top = forward_radius(m, DEFAULT_R_MAX)
        rd = invert_radius(m, top * 0.999)
        assert forward_radius(m, rd) == pytest.approx(top * 0.999, abs=1e-9)

    def test_division_inverse(self):
        m = division(0.25, 0.05, 0, 0)
        ru = forward_radius(m, 0.9)
        assert invert_radius(m, ru) == pytest.approx(0.9, abs=1e-9)

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            invert_radius(identity_model(), 0.5, tol=0.0)


class TestIsMonotone:
    def test_identity(self):
        assert is_monotone(poly(1, 0, 0, 0), 1.5)

    def test_decreasing(self):
        # derivative 1 - 6 r**2 < 0 for r > 1/sqrt(6)
        assert not is_monotone(poly(1, -2, 0, 0), 1.0)

    def test_increasing(self):
        # derivative 1 + 1.5 r**2 > 0 everywhere
        assert is_monotone(poly(1, 0.5, 0, 0), 1.5)

    def test_matches_dense_forward_sampling(self):
        for coeffs in [(1, -2, 0, 0), (1, 0.5, 0, 0), (0.9, 0.1, -0.05, -0.01)]:
            m = poly(*coeffs)
            grid = np.linspace(0, 1.2, 4000)
            vals = forward_radius(m, grid)
            strictly_increasing = bool(np.all(np.diff(vals) > 0))
            assert is_monotone(m, 1.2) == strictly_increasing

    def test_division_singular_region_not_monotone(self):
        assert not is_monotone(division(-1.0, 0, 0, 0), 2.0)

    def test_bad_r_max(self):
        with pytest.raises(ValueError):
            is_monotone(identity_model(), 0.0)


class TestSampleModel:
    def test_deterministic(self):
        a = sample_model(42)
        b = sample_model(42)
        assert a == b

    def test_degenerate_ranges_force_identity(self):
        ranges = ParamRanges(((1, 1), (0, 0), (0, 0), (0, 0)))
        m = sample_model(0, ranges=ranges)
        assert m.coeffs == (1.0, 0.0, 0.0, 0.0)

    def test_all_draws_monotone(self):
        for seed in range(100):
            m = sample_model(seed)
            assert is_monotone(m, DEFAULT_R_MAX)
            # corner radius attainable within the validated domain
            assert forward_radius(m, DEFAULT_R_MAX) >= DEFAULT_R_MAX

    def test_exhausted_attempts(self):
        ranges = ParamRanges(((1, 1), (-2, -2), (0, 0), (0, 0)), max_attempts=5)
        with pytest.raises(SamplingError):
            sample_model(0, ranges=ranges)

    def test_generator_state_advances(self):
        rng = np.random.default_rng(3)
        a = sample_model(rng)
        b = sample_model(rng)
        assert a != b

    def test_frame_binding(self):
        m = sample_model(5, size=128)
        assert m.norm_radius == 64.0
        assert m.center == (63.5, 63.5)


class TestProperties:
    @given(st.integers(min_value=0, max_value=10_000), st.floats(0.0, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, seed, frac):
        m = sample_model(seed)
        ru = frac * forward_radius(m, DEFAULT_R_MAX)
        rd = invert_radius(m, ru, tol=1e-9)
        assert abs(forward_radius(m, rd) - ru) <= 1e-9

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=30, deadline=None)
    def test_monotone_ordering(self, seed):
        m = sample_model(seed)
        grid = np.linspace(0, DEFAULT_R_MAX, 64)
        vals = forward_radius(m, grid)
        assert np.all(np.diff(vals) > 0)

    def test_identity_is_exact_everywhere(self):
        m = identity_model()
        grid = np.linspace(0, 2.0, 101)
        assert np.array_equal(forward_radius(m, grid), grid)


class TestModelValidation:
    def test_empty_coeffs(self):
        with pytest.raises(ValueError):
            RadialModel(ModelKind.POLYNOMIAL, ())

    def test_too_many_coeffs(self):
        with pytest.raises(ValueError):
            RadialModel(ModelKind.POLYNOMIAL, (1,) * 9)

    def test_bad_norm_radius(self):
        with pytest.raises(ValueError):
            RadialModel(ModelKind.POLYNOMIAL, (1, 0), norm_radius=0.0)

    def test_rescaled_identity_frame(self):
        m = identity_model(256)
        assert m.rescaled(256) == m
        half = m.rescaled(128)
        assert half.norm_radius == 64.0
        assert half.center == (63.5, 63.5)


class TestModelFile:
    def test_round_trip(self, tmp_path):
        m = RadialModel(
            ModelKind.POLYNOMIAL,
            (1.0547912097111927, 0.3194392198760262, -0.0123456789012345, 0.05),
            center=(127.5, 126.25),
            norm_radius=128.0,
        )
        path = tmp_path / "model.txt"
        save_model(path, m)
        assert load_model(path) == m

    def test_round_trip_many_random(self, tmp_path):
        rng = np.random.default_rng(0)
        for i in range(50):
            kind = ModelKind.POLYNOMIAL if i % 2 else ModelKind.DIVISION
            m = RadialModel(
                kind,
                tuple(rng.uniform(-1, 1, 4)),
                center=tuple(rng.uniform(0, 256, 2)),
                norm_radius=float(rng.uniform(1, 300)),
            )
            path = tmp_path / f"m{i}.txt"
            save_model(path, m)
            assert load_model(path) == m

    def test_format_lines(self, tmp_path):
        path = tmp_path / "model.txt"
        save_model(path, identity_model(256))
        lines = path.read_text().splitlines()
        assert lines[0] == "kind polynomial"
        assert lines[1].startswith("coeffs 1 ")
        assert lines[2] == "center 127.5 127.5"
        assert lines[3] == "norm_radius 128"

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("kind polynomial\n")
        with pytest.raises(ValueError):
            load_model(path)
