"""The rotation group acting on the sphere: quotient curves, liftability, swept sets.

SO(3) maps onto S^2 by R -> R b0 with the base point b0 = e3.  A
configuration of one-parameter subgroups of SO(3) (axis v, rotation
exp(t v)) projects to the curves t -> exp(t v) p on the sphere, which are
circles about v; they collapse to a point when p = +-v.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .configs import ConfigError, ConfigSpec, Constant, Mapped, spec_from_dict
from .icosphere import icosphere
from .liegroups import orthonormality_defect, orthonormalize, rodrigues
from .topo_zero import DegreeReport, map_degree_s2

BASE_POINT = np.array([0.0, 0.0, 1.0])
UNIT_TOL = 1e-10
OMIT_MARGIN = 1e-6
LIFT_TOL = 1e-9
DEGREE_DEPTHS = (4, 5, 6)


class SphereMapError(ValueError):
    """A sphere map produced a zero or non-finite vector."""


class LiftError(ValueError):
    """The map comes too close to the point it is supposed to omit."""


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not n > 0 or not np.isfinite(n):
        raise ValueError("vector must be nonzero and finite")
    return v / n


@dataclass(eq=False)
class SphereMap:
    """x -> m(x)/|m(x)| for an R^3-valued spec (or callable) on S^2."""

    spec: ConfigSpec
    label: str = ""
    depth: int = 5

    def __post_init__(self):
        if self.spec.direction_dim != 3 or self.spec.dim != 3:
            raise ConfigError("sphere maps need a spec from S^2 to R^3")

    @classmethod
    def from_callable(cls, func: Callable[[np.ndarray], np.ndarray], label: str = "callable",
                      depth: int = 5) -> "SphereMap":
        return cls(Mapped(func, 3, 3, False, label), label, depth)

    def raw(self, pts: np.ndarray) -> np.ndarray:
        return np.atleast_2d(self.spec.evaluate(np.atleast_2d(pts)))

    def __call__(self, pts) -> np.ndarray:
        m = self.raw(pts)
        n = np.linalg.norm(m, axis=1)
        if not np.all(np.isfinite(n)) or np.any(n <= 1e-12):
            raise SphereMapError("map vanishes or is non-finite; cannot normalize onto S^2")
        return m / n[:, None]

    def to_dict(self) -> dict:
        return {"target": "sphere", "label": self.label, "depth": self.depth, "spec": self.spec.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "SphereMap":
        payload = d.get("spec", d)
        spec = spec_from_dict(payload)
        return cls(spec, d.get("label", ""), int(d.get("depth", 5)))


def constant_map(p) -> SphereMap:
    return SphereMap(Constant(_unit(p), 3, False), "constant")


def identity_map() -> SphereMap:
    return SphereMap.from_callable(lambda x: np.asarray(x, dtype=float), "identity")


def antipodal_map() -> SphereMap:
    return SphereMap.from_callable(lambda x: -np.asarray(x, dtype=float), "antipodal")


def cap_map(center, radius: float = 0.5, twist: float = 1.0) -> SphereMap:
    """A smooth map whose image lies in the open cap of angular ``radius`` about ``center``."""
    c = _unit(center)
    u = np.cross(c, [1.0, 0.0, 0.0] if abs(c[0]) < 0.9 else [0.0, 1.0, 0.0])
    u /= np.linalg.norm(u)
    w = np.cross(c, u)
    scale = math.tan(radius) / 2.0

    def f(x):
        x = np.asarray(x, dtype=float)
        a = np.sin(twist * x[:, 0] + x[:, 2])
        b = np.cos(twist * x[:, 1]) * x[:, 0]
        return c[None, :] + scale * (a[:, None] * u[None, :] + b[:, None] * w[None, :])

    return SphereMap.from_callable(f, f"cap(r={radius})")


# ---------------------------------------------------------------------------
# quotient curves
# ---------------------------------------------------------------------------

@dataclass
class GreatCircleCurve:
    """t -> exp(t axis) base on S^2; a circle about ``axis``, of period 2 pi."""

    base: np.ndarray
    axis: np.ndarray
    t_range: tuple[float, float] = (0.0, 2.0 * math.pi)

    @property
    def constant(self) -> bool:
        return bool(abs(abs(float(np.dot(self.base, self.axis))) - 1.0) <= UNIT_TOL)

    @property
    def is_great_circle(self) -> bool:
        return bool(abs(float(np.dot(self.base, self.axis))) <= UNIT_TOL)

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k, p = self.axis, self.base
        kp = np.cross(k, p)
        along = np.dot(k, p) * k
        c, s = np.cos(t)[:, None], np.sin(t)[:, None]
        return along[None, :] + c * (p - along)[None, :] + s * kp[None, :]

    def samples(self, count: int = 256) -> np.ndarray:
        return self(np.linspace(self.t_range[0], self.t_range[1], count))

    def to_dict(self) -> dict:
        return {"base": self.base.tolist(), "axis": self.axis.tolist(), "constant": self.constant,
                "great_circle": self.is_great_circle}


def quotient_curve(axis, base) -> GreatCircleCurve:
    a, b = np.asarray(axis, dtype=float), np.asarray(base, dtype=float)
    if abs(np.linalg.norm(a) - 1.0) > 1e-9 or abs(np.linalg.norm(b) - 1.0) > 1e-9:
        raise ValueError("axis and base must be unit vectors")
    return GreatCircleCurve(b, a)


# ---------------------------------------------------------------------------
# liftability
# ---------------------------------------------------------------------------

@dataclass
class LiftabilityReport:
    degree: DegreeReport
    liftable: bool | None

    @property
    def decision(self) -> str:
        return {True: "liftable", False: "not-liftable", None: "undecided"}[self.liftable]

    def to_dict(self) -> dict:
        d = self.degree
        return {"decision": self.decision, "degree": d.degree, "degree_status": d.status,
                "raw": d.raw, "depth": d.depth, "min_magnitude": d.min_magnitude,
                "max_image_edge": d.max_image_edge}


def liftability_s2(smap: SphereMap, depth: int | None = None) -> LiftabilityReport:
    """A map S^2 -> S^2 lifts through SO(3) -> S^2 iff its degree is 0.

    Without an explicit depth, meshes of depth 4, 5 and 6 are tried until
    the degree is certified.
    """
    depths = (depth,) if depth is not None else DEGREE_DEPTHS
    rep = None
    for d in depths:
        rep = map_degree_s2(smap.spec, d)
        if rep.status == "certified":
            return LiftabilityReport(rep, rep.degree == 0)
    return LiftabilityReport(rep, None)


def _carry(b: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minimal rotations taking unit b to each row of y (undefined at y = -b)."""
    k = np.cross(b[None, :], y)
    c = y @ b
    K = np.zeros((len(y), 3, 3))
    K[:, 0, 1], K[:, 0, 2], K[:, 1, 2] = -k[:, 2], k[:, 1], -k[:, 0]
    K[:, 1, 0], K[:, 2, 0], K[:, 2, 1] = k[:, 2], -k[:, 1], k[:, 0]
    return np.eye(3)[None] + K + (K @ K) / (1.0 + c)[:, None, None]


def _image_contains(y: np.ndarray, faces: np.ndarray, q: np.ndarray) -> bool:
    """Does q fall inside the spherical triangle spanned by the image of some face?"""
    a, b, c = y[faces[:, 0]], y[faces[:, 1]], y[faces[:, 2]]
    near = (a @ q > 0) | (b @ q > 0) | (c @ q > 0)
    s1 = np.einsum("ij,ij->i", np.cross(a, b), np.broadcast_to(q, a.shape))
    s2 = np.einsum("ij,ij->i", np.cross(b, c), np.broadcast_to(q, a.shape))
    s3 = np.einsum("ij,ij->i", np.cross(c, a), np.broadcast_to(q, a.shape))
    inside = ((s1 >= 0) & (s2 >= 0) & (s3 >= 0)) | ((s1 <= 0) & (s2 <= 0) & (s3 <= 0))
    # a collapsed image triangle contains only its own point, which the alignment test handles
    spread = np.maximum(np.maximum(np.abs(s1), np.abs(s2)), np.abs(s3)) > 1e-15
    return bool(np.any(inside & near & spread))


@dataclass(eq=False)
class RotationLift:
    """SO(3)-valued lift x -> R(x) with R(x) e3 = sigma(x), defined off one point of the image sphere."""

    smap: SphereMap
    omitted: np.ndarray
    offset: np.ndarray            # fixed rotation with offset e3 = -omitted
    residual: float
    alignment: float
    depth: int
    meta: dict = field(default_factory=dict)

    def __call__(self, pts) -> np.ndarray:
        y = self.smap(pts)
        b = -self.omitted
        R = _carry(b, y) @ self.offset[None]
        for i in np.flatnonzero([orthonormality_defect(r) > 1e-10 for r in R]):
            R[i] = orthonormalize(R[i])
        return R

    def project(self, pts) -> np.ndarray:
        return self(pts) @ BASE_POINT

    def to_dict(self) -> dict:
        return {"omitted": self.omitted.tolist(), "residual": self.residual, "alignment": self.alignment,
                "depth": self.depth, "map": self.smap.label, **self.meta}


def lift_omitting_point(smap: SphereMap, omitted, depth: int = 5) -> RotationLift:
    """Explicit lift of a map whose image misses ``omitted``.

    On S^2 minus the omitted point q the minimal rotation carrying b = -q to
    y is continuous; composing with a fixed rotation Q (Q e3 = b) gives a
    section of R -> R e3 there, and R(x) = carry(b, sigma(x)) Q.
    """
    q = _unit(omitted)
    verts, faces = icosphere(depth)
    y = smap(verts)
    alignment = float(np.max(y @ q))
    if alignment >= 1.0 - OMIT_MARGIN:
        raise LiftError(f"image comes within {1.0 - alignment:.2e} of the omitted point "
                        f"(needs alignment < 1 - {OMIT_MARGIN})")
    if _image_contains(y, faces, q):
        raise LiftError("the omitted point lies inside the image of a mesh triangle")
    b = -q
    if np.dot(b, BASE_POINT) > -1.0 + 1e-9:
        offset = _carry(BASE_POINT, b[None, :])[0]
    else:
        offset = rodrigues([math.pi, 0.0, 0.0])
    lift = RotationLift(smap, q, offset, math.nan, alignment, depth)
    R = lift(verts)
    lift.residual = float(np.max(np.linalg.norm(R @ BASE_POINT - y, axis=1)))
    lift.meta["orthonormality_defect"] = float(max(orthonormality_defect(r) for r in R))
    if lift.residual > LIFT_TOL:
        raise LiftError(f"projection residual {lift.residual:.3e} exceeds {LIFT_TOL}")
    return lift


# ---------------------------------------------------------------------------
# swept set on S^2
# ---------------------------------------------------------------------------

@dataclass
class SphereWitness:
    axis: np.ndarray
    t: float
    residual: float
    constant_curve: bool

    def to_dict(self) -> dict:
        return {"axis": self.axis.tolist(), "t": self.t, "residual": self.residual,
                "constant_curve": self.constant_curve}


@dataclass
class SweptResult:
    covered: bool
    target: np.ndarray
    witnesses: list[SphereWitness]
    witness_count: int
    depth: int
    tol: float
    note: str = ""

    @property
    def status(self) -> str:
        return "covered" if self.covered else "uncovered-at-resolution"

    def to_dict(self) -> dict:
        return {"status": self.status, "target": self.target.tolist(), "witness_count": self.witness_count,
                "witnesses": [w.to_dict() for w in self.witnesses], "depth": self.depth, "tol": self.tol,
                "note": self.note}


def _witness(v: np.ndarray, p: np.ndarray, y: np.ndarray, tol: float) -> SphereWitness:
    """Rotation angle about v taking p towards y, and the miss distance."""
    a = float(np.dot(p, v))
    pp, yy = p - a * v, y - float(np.dot(y, v)) * v
    constant = float(np.linalg.norm(pp)) <= 1e-9
    t = 0.0 if constant or np.linalg.norm(yy) <= 1e-12 else \
        math.atan2(float(np.dot(v, np.cross(pp, yy))), float(np.dot(pp, yy)))
    reached = GreatCircleCurve(p, v)(t)[0]
    return SphereWitness(v, t, float(np.linalg.norm(reached - y)), constant)


def swept_membership_s2(smap: SphereMap, target, tol: float = 1e-9, depth: int = 4,
                        max_witnesses: int = 64) -> SweptResult:
    """Is ``target`` on some curve t -> exp(t v) sigma(v)?

    The curve through sigma(v) about v is the circle {p : p.v = sigma(v).v},
    so v is a witness exactly when h(v) = (y - sigma(v)).v vanishes.  h is
    sampled on an icosphere; every mesh edge with a sign change is bisected
    along its arc.  A mesh without sign change reports uncovered at that
    resolution only.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    y = _unit(target)
    verts, faces = icosphere(depth)
    sig = smap(verts)
    h = verts @ y - np.einsum("ij,ij->i", sig, verts)
    edges = np.unique(np.sort(np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]]), axis=1),
                      axis=0)

    def h_at(v):
        v = v / np.linalg.norm(v)
        return float(v @ y - smap(v[None])[0] @ v), v

    found: list[SphereWitness] = []
    count = 0
    for i in np.flatnonzero(np.abs(h) <= tol):
        count += 1
        if len(found) < max_witnesses:
            w = _witness(verts[i], sig[i], y, tol)
            if w.residual <= tol:
                found.append(w)
    i0, i1 = edges[:, 0], edges[:, 1]
    change = (h[i0] * h[i1] < 0) & (np.abs(h[i0]) > tol) & (np.abs(h[i1]) > tol)
    for a, b in edges[change]:
        count += 1
        if len(found) >= max_witnesses:
            continue
        lo, hi, hlo = verts[a], verts[b], h[a]
        v = lo
        for _ in range(200):
            hm, v = h_at(lo + hi)
            if abs(hm) <= 1e-3 * tol:
                break
            if (hm < 0) == (hlo < 0):
                lo, hlo = v, hm
            else:
                hi = v
        w = _witness(v, smap(v[None])[0], y, tol)
        if w.residual <= tol:
            found.append(w)
    covered = bool(found)
    note = "" if covered else "no witness at this mesh resolution; not a proof of non-coverage"
    return SweptResult(covered, y, found, count, depth, tol, note)
