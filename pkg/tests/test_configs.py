import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kakeya_lab.configs import (
    ConfigError, Constant, SampledGrid, TangentCircle, TrigPolynomial, UnorientedDirection, canonicalize,
    eval_config, random_even_trig, resample, spec_from_dict, spec_to_dict, translate_config,
    trig_from_harmonics, validate_spec,
)

finite = st.floats(-10, 10, allow_nan=False)
angles = st.floats(0.0, 2 * math.pi, allow_nan=False)


def double_angle():
    return trig_from_harmonics({2: [(1.0, 0.0), (0.0, 1.0)]})


# oracle examples

def test_constant_evaluates_to_point():
    c = Constant([1.0, 0.0])
    assert np.array_equal(eval_config(c, UnorientedDirection.from_angle(1.234)), [1.0, 0.0])


def test_double_angle_at_quarter_pi():
    assert np.allclose(double_angle().evaluate(math.pi / 4), [0.0, 1.0], atol=1e-15)


def test_tangent_circle_base_point():
    tc = TangentCircle(1.0, 1)
    assert np.allclose(tc.evaluate(0.0), [0.0, 1.0], atol=1e-15)


def test_validate_even_passes_and_odd_fails():
    assert validate_spec(double_angle()).ok
    odd = trig_from_harmonics({1: [(1.0, 0.0), (0.0, 0.0)]})
    rep = validate_spec(odd)
    assert not rep.ok
    # sigma(theta + pi) - sigma(theta) = -2 cos(theta) e1, sup 2
    assert any(abs(v.defect - 2.0) < 1e-6 for v in rep.violations)


def test_open_sampled_grid_fails_validation():
    theta = np.linspace(0, math.pi, 9)
    values = np.column_stack([theta, np.zeros_like(theta)])
    assert not validate_spec(SampledGrid(theta, values, True)).ok


def test_translate_constant_to_zero():
    t = translate_config(Constant([1.0, 0.0]), [1.0, 0.0])
    assert np.allclose(t.evaluate(np.linspace(0, math.pi, 7)), 0.0)


def test_dimension_mismatch_rejected():
    with pytest.raises(ConfigError):
        translate_config(Constant([1.0, 0.0]), [1.0, 0.0, 0.0])


def test_json_roundtrip():
    spec = random_even_trig(np.random.default_rng(3), degree=6)
    back = spec_from_dict(spec_to_dict(spec))
    th = np.linspace(0, math.pi, 50)
    assert np.array_equal(back.evaluate(th), spec.evaluate(th))
    assert spec_to_dict(spec)["kind"] == "TrigPolynomial"


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError):
        spec_from_dict({"kind": "Nope"})


# properties

@given(st.lists(finite, min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_canonicalize_idempotent(v):
    c = canonicalize(v)
    assert abs(np.linalg.norm(c) - 1.0) <= 1e-12
    assert np.array_equal(canonicalize(c), c)
    assert c[np.flatnonzero(np.abs(c) > 1e-12)[0]] > 0


@given(st.integers(0, 2 ** 32 - 1))
def test_antipodal_evenness(seed):
    rng = np.random.default_rng(seed)
    spec = random_even_trig(rng, degree=16)
    th = rng.uniform(0, 2 * math.pi, 1000)
    assert np.max(np.linalg.norm(spec.evaluate(th + math.pi) - spec.evaluate(th), axis=1)) <= 1e-9


@given(st.integers(0, 2 ** 32 - 1), finite, finite)
def test_translation_equivariance(seed, a, b):
    rng = np.random.default_rng(seed)
    spec = random_even_trig(rng, degree=8)
    x = np.array([a, b])
    th = rng.uniform(0, math.pi, 64)
    moved = translate_config(spec, x)
    assert np.allclose(moved.evaluate(th) + x, spec.evaluate(th), rtol=1e-12, atol=1e-12)
    back = translate_config(moved, -x)
    assert np.allclose(back.evaluate(th), spec.evaluate(th), atol=1e-12)


def test_resample_interpolation_low_degree(rng):
    spec = double_angle()
    grid = resample(spec, 4096)
    th = rng.uniform(0, math.pi, 500)
    assert np.max(np.abs(grid.evaluate(th) - spec.evaluate(th))) <= 1e-6


@given(st.integers(0, 2 ** 32 - 1))
def test_resample_error_within_linear_interpolation_bound(seed):
    rng = np.random.default_rng(seed)
    spec = random_even_trig(rng, degree=8)
    grid = resample(spec, 4096)
    th = rng.uniform(0, math.pi, 500)
    h = math.pi / 4096
    k2 = np.arange(spec.degree + 1) ** 2
    second = np.sum(np.hypot(spec.cos, spec.sin) * k2, axis=1)
    err = np.max(np.abs(grid.evaluate(th) - spec.evaluate(th)), axis=0)
    assert np.all(err <= h * h / 8 * second + 1e-12)


def test_trig_polynomial_matches_direct_sum(rng):
    spec = random_even_trig(rng, degree=6)
    th = rng.uniform(0, math.pi, 20)
    direct = np.array([[sum(spec.cos[j, k] * math.cos(k * t) + spec.sin[j, k] * math.sin(k * t)
                            for k in range(spec.cos.shape[1])) for j in range(2)] for t in th])
    assert np.allclose(spec.evaluate(th), direct, atol=1e-12)
