import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from kakeya_lab.configs import Constant, random_even_trig, random_polynomial, trig_from_harmonics
from kakeya_lab.liegroups import (
    Affine, BranchAmbiguityWarning, Cylinder, GroupConfig, GroupError, Heisenberg, Rotation, Torus,
    certify_cover_group, certify_identity_cylinder, certify_identity_torus, get_group,
    group_config_from_dict, is_taut, one_param, torus_winding, CylinderPath, _cylinder_values,
)
from kakeya_lab.topo_zero import find_zero_unoriented_2d

H, A, C, T, R = Heisenberg(), Affine(), Cylinder(), Torus(), Rotation()
seeds = st.integers(0, 2 ** 32 - 1)
vec3 = st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3)
vec2 = st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=2)


def affine_matrix(g):
    return np.array([[g[0], g[1]], [0.0, 1.0]])


# closed forms against matrix oracles

@given(vec3)
def test_heisenberg_exp_matches_expm(X):
    assert np.allclose(H.matrix(H.exp(X)), expm(H.algebra_matrix(X)), atol=1e-12, rtol=0)


@given(vec3)
def test_heisenberg_exp_matches_series(X):
    M = H.algebra_matrix(X)
    # nilpotent of step 2: the series stops at M^2 / 2
    assert np.allclose(H.matrix(H.exp(X)), np.eye(3) + M + M @ M / 2, atol=1e-12, rtol=0)


@given(vec3, vec3)
def test_heisenberg_mul_matches_matrix_product(g, h):
    assert np.allclose(H.matrix(H.mul(g, h)), H.matrix(g) @ H.matrix(h), atol=1e-10)


@given(vec2)
def test_affine_exp_matches_expm(X):
    M = np.array([[X[0], X[1]], [0.0, 0.0]])
    assert np.allclose(affine_matrix(A.exp(X)), expm(M), rtol=1e-11, atol=1e-11)


@given(st.lists(st.floats(0.1, 5), min_size=2, max_size=2), vec2)
def test_affine_mul_matches_matrix_product(g, h):
    h = [abs(h[0]) + 0.1, h[1]]
    assert np.allclose(affine_matrix(A.mul(g, h)), affine_matrix(g) @ affine_matrix(h))


def test_closed_form_examples():
    assert np.allclose(H.exp([1.0, 1.0, 0.0]), [1.0, 1.0, 0.5])
    assert np.allclose(A.exp([1.0, 1.0]), [math.e, math.e - 1.0])
    assert np.allclose(A.exp([0.0, 3.0]), [1.0, 3.0])
    assert np.allclose(T.exp([7.0, -1.0]), [7.0 - 2 * math.pi, 2 * math.pi - 1.0])


def test_roundtrips_vectorised(rng):
    X = rng.normal(size=(1000, 3))
    X *= rng.uniform(0, 5, (1000, 1)) / np.linalg.norm(X, axis=1, keepdims=True)
    assert np.max(np.abs(H.log(H.exp(X)) - X)) <= 1e-10
    Y = X[:, :2]
    assert np.max(np.abs(A.log(A.exp(Y)) - Y)) <= 1e-10
    Z = np.column_stack([rng.uniform(-3, 3, 1000), rng.uniform(-math.pi + 0.1, math.pi - 0.1, 1000)])
    assert np.max(np.abs(C.log(C.exp(Z)) - Z)) <= 1e-10
    assert np.max(np.abs(T.log(T.exp(Z)) - Z)) <= 1e-10


@given(vec3)
def test_rotation_roundtrip(w):
    w = np.asarray(w)
    if np.linalg.norm(w) >= math.pi - 0.1:
        w = w / np.linalg.norm(w) * (math.pi - 0.2)
    assert np.allclose(R.log(R.exp(w)), w, atol=1e-9)


def test_rotation_pi_branch_warns():
    with pytest.warns(BranchAmbiguityWarning):
        R.log(R.exp([math.pi, 0.0, 0.0]))


def test_cylinder_log_of_zero_rejected():
    with pytest.raises(GroupError):
        C.log([0.0, 0.0])


# one-parameter subgroups

def test_one_param_examples():
    assert np.allclose(one_param(H, [0, 0, 1], 2.5).value, [0.0, 0.0, 2.5])
    assert np.allclose(one_param(C, [0, 1], 2 * math.pi).value, [1.0, 0.0], atol=1e-12)
    t = 0.7
    assert np.allclose(one_param(A, [1, 0], t).value, [math.exp(t), 0.0])


@given(st.sampled_from(["heisenberg", "affine", "cylinder", "torus"]), vec3, st.floats(-3, 3), st.floats(-3, 3))
def test_one_param_homomorphism(name, L, s, t):
    G = get_group(name)
    L = np.asarray(L[:G.algebra_dim])
    if np.linalg.norm(L) < 1e-3:
        return
    lhs = G.mul(one_param(G, L, s).value, one_param(G, L, t).value)
    rhs = one_param(G, L, s + t).value
    assert G.distance(lhs, rhs) <= 1e-10 * (1 + abs(s) + abs(t)) ** 2


# cover certificates

def test_heisenberg_identity_examples():
    cfg = GroupConfig(H, Constant([0.0, 0.0, 0.0], 3, True))
    cert = certify_cover_group(cfg)
    assert cert.covered and cert.residual == 0.0
    cert = certify_cover_group(cfg, [0.0, 0.0, 5.0])
    assert cert.covered
    assert np.allclose(np.abs(cert.direction.vector), [0, 0, 1], atol=1e-6)
    assert abs(abs(cert.t) - 5.0) <= 1e-6


def test_affine_double_angle_matches_planar_oracle():
    mu = trig_from_harmonics({2: [(1.0, 0.0), (0.0, 1.0)]})
    cert = certify_cover_group(GroupConfig(A, mu))
    zero = find_zero_unoriented_2d(mu)
    assert cert.covered
    assert abs(cert.direction.angle - zero.direction.angle) <= 1e-12


@given(seeds)
def test_heisenberg_random_cover_sound(seed):
    rng = np.random.default_rng(seed)
    cfg = GroupConfig(H, random_polynomial(rng, n=3, degree=2, even=True))
    g = rng.uniform(-3, 3, 3)
    cert = certify_cover_group(cfg, g)
    assert cert.covered and cert.residual <= 1e-8
    e = np.asarray(cert.direction.vector)
    sigma = cfg.values(e)[0]
    assert H.distance(H.mul(sigma, H.exp(cert.t * e)), g) <= 1e-8


@given(seeds)
def test_left_translation_covariance(seed):
    rng = np.random.default_rng(seed)
    cfg = GroupConfig(A, random_even_trig(rng, degree=4, scale=0.5))
    g = A.exp(rng.uniform(-1, 1, 2))
    h = A.exp(rng.uniform(-1, 1, 2))
    a = certify_cover_group(cfg, g)
    b = certify_cover_group(cfg.translate(h), A.mul(h, g))
    assert a.covered and b.covered
    assert abs(a.direction.angle - b.direction.angle) <= 1e-9
    assert abs(a.t - b.t) <= 1e-9


def test_group_config_json_roundtrip(rng):
    cfg = GroupConfig(H, random_polynomial(rng, n=3, degree=2, even=True)).translate([1.0, 2.0, 3.0])
    back = group_config_from_dict(cfg.to_dict())
    pts = rng.normal(size=(10, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    assert np.allclose(back.values(pts), cfg.values(pts))


def test_unknown_group_tag():
    with pytest.raises(GroupError):
        get_group("lorentz")


def test_certify_cover_group_rejects_cylinder():
    with pytest.raises(GroupError):
        certify_cover_group(GroupConfig(C, Constant([0.0, 0.0])))


# tautness

def test_taut_examples():
    assert is_taut(GroupConfig(H, Constant([0.0, 0.0, 0.0], 3, True)), 1e-6).taut
    minus_one = GroupConfig(C, Constant([-1.0, 0.0]), "element")
    assert not is_taut(minus_one, math.pi / 2).taut


def test_taut_mesh_supremum(rng):
    spec = random_even_trig(rng, degree=4, scale=0.3, dim=3)
    cfg = GroupConfig(A, random_even_trig(rng, degree=4, scale=0.3))
    rep = is_taut(cfg, 100.0)
    assert rep.taut
    assert is_taut(cfg, rep.sup_norm + 1e-9).taut
    assert not is_taut(cfg, rep.sup_norm * 0.99).taut
    assert spec.dim == 3


def test_taut_radius_bound_on_cylinder():
    with pytest.raises(GroupError):
        is_taut(GroupConfig(C, Constant([0.0, 0.0])), 4.0)


# cylinder

def test_cylinder_sigma_one():
    cert = certify_identity_cylinder(GroupConfig(C, Constant([1.0, 0.0]), "element"))
    assert cert.covered and cert.extra["kernel_index"] == 0 and cert.extra["path_t"] == 0.0
    assert cert.residual == 0.0


def test_cylinder_half_i():
    cert = certify_identity_cylinder(GroupConfig(C, Constant([0.0, 0.5])))
    assert cert.covered
    assert cert.extra["kernel_index"] == 0
    # d_0(t) = -0.5 cos t vanishes first at t = pi / 2
    assert abs(cert.extra["path_t"] - math.pi / 2) <= 1e-9
    assert cert.residual <= 1e-9


def test_cylinder_trig_matches_dense_scan():
    mu = trig_from_harmonics({2: [(0.3, 0.0), (0.0, 0.3)]})
    cfg = GroupConfig(C, mu)
    cert = certify_identity_cylinder(cfg)
    assert cert.covered
    # dense (t, n) scan of the distance from 2 pi i n to the line through p(t) at angle t
    p = CylinderPath(_cylinder_values(cfg), 8192)
    t = p.t
    best = min(np.min(np.abs(np.real(np.conj(1j * np.exp(1j * t)) * (2j * math.pi * n - p.samples))))
               for n in range(-2, 3))
    assert best <= 1e-3
    assert cert.extra["lift_residual"] <= 1e-9


@given(seeds)
def test_cylinder_random_sound(seed):
    rng = np.random.default_rng(seed)
    cfg = GroupConfig(C, random_even_trig(rng, degree=6, scale=1.0))
    cert = certify_identity_cylinder(cfg)
    assert cert.covered and cert.residual <= 1e-8
    assert cert.extra["lift_residual"] <= 1e-8


def test_cylinder_target_translation(rng):
    cfg = GroupConfig(C, random_even_trig(rng, degree=4, scale=1.0))
    target = C.exp([0.3, 1.0])
    cert = certify_identity_cylinder(cfg, target=target)
    assert cert.covered
    e = np.asarray(cert.direction.vector)
    sigma = cfg.values(cert.direction.angle)[0]
    assert C.distance(C.mul(sigma, C.exp(cert.t * e)), target) <= 1e-8


# torus

def _torus_config(a, b, c0=(0.0, 0.0)):
    """theta -> (2a theta + c0_1, 2b theta + c0_2) in element chart (cos, sin, cos, sin)."""
    h = {0: [(math.cos(c0[0]), 0), (math.sin(c0[0]), 0), (math.cos(c0[1]), 0), (math.sin(c0[1]), 0)]}
    if a == 0 and b == 0:
        return GroupConfig(T, trig_from_harmonics(h), "element")
    harm = {}
    for j, (k, c) in enumerate([(a, c0[0]), (b, c0[1])]):
        if k == 0:
            harm.setdefault(0, [(0, 0)] * 4)
            lst = harm[0]
            lst[2 * j] = (math.cos(c), 0)
            lst[2 * j + 1] = (math.sin(c), 0)
        else:
            kk = 2 * abs(k)
            lst = harm.setdefault(kk, [(0, 0)] * 4)
            sgn = 1 if k > 0 else -1
            lst[2 * j] = (math.cos(c), -sgn * math.sin(c))
            lst[2 * j + 1] = (math.sin(c), sgn * math.cos(c))
    return GroupConfig(T, trig_from_harmonics(harm), "element")


def test_torus_winding_examples():
    assert torus_winding(_torus_config(0, 0, (1.0, 2.0))).winding == (0, 0)
    rep = torus_winding(_torus_config(1, 0))
    assert rep.winding == (1, 0) and rep.decision == "lift-to-cylinder"


@pytest.mark.parametrize("a,b", [(0, 0), (1, 0), (0, 1), (1, 3), (-2, 1), (2, 2)])
def test_torus_identity_cover(a, b):
    cfg = _torus_config(a, b, (0.4, -1.1))
    assert torus_winding(cfg).winding == (a, b)
    cert = certify_identity_torus(cfg)
    assert cert.covered and cert.residual <= 1e-8


def test_torus_winding_refinement(rng):
    cfg = GroupConfig(T, random_even_trig(rng, degree=2, scale=0.5), "algebra")
    assert torus_winding(cfg, 2048).winding == torus_winding(cfg, 16384).winding
