import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kakeya_lab.homog import (
    BASE_POINT, LiftError, SphereMap, antipodal_map, cap_map, constant_map, identity_map, lift_omitting_point,
    liftability_s2, quotient_curve, swept_membership_s2,
)
from kakeya_lab.icosphere import fibonacci_sphere, icosphere
from kakeya_lab.liegroups import orthonormality_defect
from kakeya_lab.topo_zero import map_degree_s2

unit3 = st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 1e-2).map(lambda v: np.asarray(v) / np.linalg.norm(v))
E1, E2, E3 = np.eye(3)


# quotient curves

def test_quotient_curve_examples():
    eq = quotient_curve(E3, E1).samples(100)
    assert np.allclose(eq[:, 2], 0.0) and np.allclose(np.linalg.norm(eq, axis=1), 1.0)
    c = quotient_curve(E3, E3)
    assert c.constant and np.allclose(c.samples(20), E3)
    mer = quotient_curve(E1, E3).samples(100)
    assert np.allclose(mer[:, 0], 0.0, atol=1e-15)
    assert mer[:, 2].max() > 0.999 and mer[:, 2].min() < -0.999


@given(unit3, unit3, st.floats(-10, 10))
def test_quotient_curve_period_and_rotation_oracle(axis, base, t):
    c = quotient_curve(axis, base)
    assert np.allclose(c(t), c(t + 2 * math.pi), atol=1e-10)
    from scipy.spatial.transform import Rotation
    oracle = Rotation.from_rotvec(t * axis).apply(base)
    assert np.allclose(c(t)[0], oracle, atol=1e-10)


# liftability

@pytest.mark.parametrize("smap,deg,liftable", [(constant_map(E3), 0, True), (identity_map(), 1, False),
                                               (antipodal_map(), -1, False)])
def test_liftability_examples(smap, deg, liftable):
    rep = liftability_s2(smap)
    assert rep.degree.degree == deg and rep.degree.certified and rep.degree.depth <= 6
    assert rep.liftable is liftable


def test_cap_map_degree_zero():
    rep = liftability_s2(cap_map([0.3, -0.2, 0.9], 0.6))
    assert rep.liftable is True


# lifting

def test_constant_lift_is_constant():
    lift = lift_omitting_point(constant_map(E3), -E3)
    pts = fibonacci_sphere(50)
    R = lift(pts)
    assert np.allclose(R, R[0]) and lift.residual <= 1e-12
    assert np.allclose(R[0] @ BASE_POINT, E3)


@given(unit3, st.floats(0.05, 1.2), st.floats(0.2, 3.0))
def test_cap_lift_residual(center, radius, twist):
    smap = cap_map(center, radius, twist)
    lift = lift_omitting_point(smap, -center, depth=4)
    assert lift.residual <= 1e-9
    pts = fibonacci_sphere(500)
    R = lift(pts)
    assert np.max(np.linalg.norm(R @ BASE_POINT - smap(pts), axis=1)) <= 1e-9
    assert max(orthonormality_defect(r) for r in R) <= 1e-10
    assert np.allclose(np.linalg.det(R), 1.0)


def test_lifted_projection_has_degree_zero():
    smap = cap_map([1.0, 1.0, 0.0], 0.8)
    lift = lift_omitting_point(smap, [-1.0, -1.0, 0.0])
    assert map_degree_s2(lift.project, depth=4).degree == 0


def test_lift_is_continuous_on_mesh():
    smap = cap_map([0.0, 1.0, 0.0], 1.0, 2.0)
    lift = lift_omitting_point(smap, [0.0, -1.0, 0.0], depth=4)
    verts, faces = icosphere(4)
    R = lift(verts)
    jumps = [np.linalg.norm(R[a] - R[b]) for a, b in faces[:, :2]]
    assert max(jumps) < 0.5


@pytest.mark.parametrize("smap", [identity_map(), antipodal_map()])
def test_surjective_maps_are_rejected(smap):
    with pytest.raises(LiftError):
        lift_omitting_point(smap, E3)


def test_lift_rejects_nearby_omitted_point():
    with pytest.raises(LiftError):
        lift_omitting_point(constant_map(E3), E3)


# swept membership

def test_swept_north_pole_examples():
    smap = constant_map(E3)
    on_circle = np.array([math.sin(0.7), 0.0, math.cos(0.7)])
    assert swept_membership_s2(smap, on_circle).covered
    res = swept_membership_s2(smap, E3)
    assert res.covered and res.witness_count > 1


@given(unit3)
def test_swept_witnesses_are_sound(target):
    smap = cap_map([0.2, 0.5, 0.8], 0.7)
    res = swept_membership_s2(smap, target, depth=3)
    for w in res.witnesses:
        p = smap(w.axis[None])[0]
        reached = quotient_curve(w.axis, p)(w.t)[0]
        assert np.linalg.norm(reached - target) <= 1e-9


def test_swept_refinement_agreement(rng):
    smap = cap_map([0.0, 0.0, 1.0], 0.9, 1.7)
    for _ in range(6):
        y = rng.normal(size=3)
        a = swept_membership_s2(smap, y, depth=3)
        b = swept_membership_s2(smap, y, depth=5)
        assert a.covered == b.covered


def test_sphere_map_json_roundtrip():
    smap = constant_map([0.0, 0.6, 0.8])
    back = SphereMap.from_dict(smap.to_dict())
    assert back.to_dict()["target"] == "sphere"
    assert np.allclose(back(E1[None]), smap(E1[None]))
