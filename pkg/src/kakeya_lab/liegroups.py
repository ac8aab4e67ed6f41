"""Concrete Lie groups and coverage certificates for configurations in them.

Groups are a closed list, each with closed-form exp/log:

========== ============================ =====================
group      element coordinates          algebra coordinates
========== ============================ =====================
euclidean  vector in R^n                vector in R^n
heisenberg (x, y, z) of [[1,x,z],       (p, q, r)
           [0,1,y],[0,0,1]]
affine     (a, b) of [[a,b],[0,1]]      (u, v)
cylinder   nonzero complex w            complex (u + iv)
torus      angles (phi1, phi2) mod 2pi  R^2
rotation   3x3 orthogonal, det 1        R^3 (cross-product so(3))
========== ============================ =====================

A :class:`GroupConfig` is a configuration on P(g) with values in the group,
given either by an algebra-valued spec (``chart="algebra"``, sigma =
exp o spec) or by a spec returning element coordinates (``chart="element"``).
The torus element chart uses four coordinates, (cos, sin) of each angle.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .configs import (ConfigError, ConfigSpec, Mapped, TWO_PI, UnorientedDirection, frame,
                      spec_from_dict)
from .topo_zero import _bisect, find_zero_oriented_s2, find_zero_unoriented_2d, find_zero_unoriented_3d


class GroupError(ValueError):
    """Invalid group element or unsupported operation."""


class BranchAmbiguityWarning(UserWarning):
    """log of a rotation by angle pi: the axis sign is not determined."""


def _wrap(a):
    return (np.asarray(a) + math.pi) % TWO_PI - math.pi


def _hat(w: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def rodrigues(w) -> np.ndarray:
    """exp of the so(3) element with axis-angle vector w."""
    w = np.asarray(w, dtype=float)
    theta = float(np.linalg.norm(w))
    K = _hat(w)
    if theta < 1e-8:
        return np.eye(3) + K + 0.5 * K @ K
    return np.eye(3) + (math.sin(theta) / theta) * K + ((1.0 - math.cos(theta)) / theta ** 2) * (K @ K)


def orthonormalize(R: np.ndarray) -> np.ndarray:
    """Gram-Schmidt on the columns, keeping det = +1."""
    q1 = R[:, 0] / np.linalg.norm(R[:, 0])
    q2 = R[:, 1] - np.dot(q1, R[:, 1]) * q1
    q2 /= np.linalg.norm(q2)
    return np.column_stack([q1, q2, np.cross(q1, q2)])


def orthonormality_defect(R: np.ndarray) -> float:
    return float(np.max(np.abs(R.T @ R - np.eye(3))))


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------

class LieGroup:
    """Closed-form group law, exp and log.

    Elements and algebra vectors are float arrays whose last axis holds the
    coordinates, so every operation broadcasts over leading axes (rotations
    use trailing (3, 3) matrices).
    """

    name = "abstract"
    algebra_dim = 0

    def identity(self) -> np.ndarray:
        return self.exp(np.zeros(self.algebra_dim))

    def mul(self, g, h):
        raise NotImplementedError

    def inv(self, g):
        raise NotImplementedError

    def exp(self, X):
        raise NotImplementedError

    def log(self, g):
        raise NotImplementedError

    def check(self, g) -> None:
        """Raise GroupError if g violates the element invariants."""

    def distance(self, g, h) -> float:
        """Left-invariant distance |log(g^-1 h)|."""
        return float(np.linalg.norm(self.log(self.mul(self.inv(g), h))))

    def encode(self, g) -> np.ndarray:
        """Element as a flat float array (for JSON)."""
        return np.asarray(g, dtype=float).reshape(-1)

    def decode(self, a) -> np.ndarray:
        g = np.asarray(a, dtype=float).reshape(-1)
        self.check(g)
        return g


class Euclidean(LieGroup):
    name = "euclidean"

    def __init__(self, n: int):
        self.algebra_dim = n

    def mul(self, g, h):
        return np.asarray(g, dtype=float) + np.asarray(h, dtype=float)

    def inv(self, g):
        return -np.asarray(g, dtype=float)

    def exp(self, X):
        return np.array(X, dtype=float)

    def log(self, g):
        return np.array(g, dtype=float)


class Heisenberg(LieGroup):
    name = "heisenberg"
    algebra_dim = 3

    def mul(self, g, h):
        g, h = np.asarray(g, dtype=float), np.asarray(h, dtype=float)
        out = g + h
        out[..., 2] += g[..., 0] * h[..., 1]
        return out

    def inv(self, g):
        g = np.asarray(g, dtype=float)
        out = -g
        out[..., 2] += g[..., 0] * g[..., 1]
        return out

    def exp(self, X):
        out = np.array(X, dtype=float)
        out[..., 2] += 0.5 * out[..., 0] * out[..., 1]
        return out

    def log(self, g):
        out = np.array(g, dtype=float)
        out[..., 2] -= 0.5 * out[..., 0] * out[..., 1]
        return out

    @staticmethod
    def matrix(g) -> np.ndarray:
        x, y, z = g
        return np.array([[1.0, x, z], [0.0, 1.0, y], [0.0, 0.0, 1.0]])

    @staticmethod
    def algebra_matrix(X) -> np.ndarray:
        p, q, r = X
        return np.array([[0.0, p, r], [0.0, 0.0, q], [0.0, 0.0, 0.0]])


def _expm1_over(u):
    """(e^u - 1)/u with the u -> 0 limit."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-12
    safe = np.where(small, 1.0, u)
    return np.where(small, 1.0 + 0.5 * u, np.expm1(safe) / safe)


class Affine(LieGroup):
    name = "affine"
    algebra_dim = 2

    def check(self, g):
        if not np.all(np.asarray(g)[..., 0] > 0):
            raise GroupError("affine element needs a > 0")

    def mul(self, g, h):
        g, h = np.asarray(g, dtype=float), np.asarray(h, dtype=float)
        return np.stack([g[..., 0] * h[..., 0], g[..., 0] * h[..., 1] + g[..., 1]], axis=-1)

    def inv(self, g):
        g = np.asarray(g, dtype=float)
        return np.stack([1.0 / g[..., 0], -g[..., 1] / g[..., 0]], axis=-1)

    def exp(self, X):
        X = np.asarray(X, dtype=float)
        return np.stack([np.exp(X[..., 0]), X[..., 1] * _expm1_over(X[..., 0])], axis=-1)

    def log(self, g):
        g = np.asarray(g, dtype=float)
        self.check(g)
        u = np.log(g[..., 0])
        return np.stack([u, g[..., 1] / _expm1_over(u)], axis=-1)


class Cylinder(LieGroup):
    """C^* under multiplication; elements and algebra written as (Re, Im)."""

    name = "cylinder"
    algebra_dim = 2

    @staticmethod
    def to_complex(g):
        g = np.asarray(g, dtype=float)
        return g[..., 0] + 1j * g[..., 1]

    @staticmethod
    def from_complex(w):
        w = np.asarray(w)
        return np.stack([w.real, w.imag], axis=-1).astype(float)

    def check(self, g):
        if np.any(np.abs(self.to_complex(g)) <= 1e-300):
            raise GroupError("cylinder element must be nonzero")

    def mul(self, g, h):
        return self.from_complex(self.to_complex(g) * self.to_complex(h))

    def inv(self, g):
        return self.from_complex(1.0 / self.to_complex(g))

    def exp(self, X):
        return self.from_complex(np.exp(self.to_complex(X)))

    def log(self, g):
        self.check(g)
        return self.from_complex(np.log(self.to_complex(g)))


class Torus(LieGroup):
    name = "torus"
    algebra_dim = 2

    def mul(self, g, h):
        return (np.asarray(g, dtype=float) + np.asarray(h, dtype=float)) % TWO_PI

    def inv(self, g):
        return (-np.asarray(g, dtype=float)) % TWO_PI

    def exp(self, X):
        return np.asarray(X, dtype=float) % TWO_PI

    def log(self, g):
        return _wrap(np.asarray(g, dtype=float))


class Rotation(LieGroup):
    name = "rotation"
    algebra_dim = 3

    def identity(self):
        return np.eye(3)

    def check(self, g):
        R = np.asarray(g, dtype=float).reshape(3, 3)
        if orthonormality_defect(R) > 1e-10 or np.linalg.det(R) < 0:
            raise GroupError("rotation must be orthogonal with det 1")

    def mul(self, g, h):
        R = np.asarray(g, dtype=float).reshape(3, 3) @ np.asarray(h, dtype=float).reshape(3, 3)
        return orthonormalize(R) if orthonormality_defect(R) > 1e-10 else R

    def inv(self, g):
        return np.asarray(g, dtype=float).reshape(3, 3).T

    def exp(self, X):
        return rodrigues(X)

    def log(self, g):
        R = np.asarray(g, dtype=float).reshape(3, 3)
        c = min(1.0, max(-1.0, (np.trace(R) - 1.0) / 2.0))
        theta = math.acos(c)
        w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
        if theta < 1e-8:
            return w / 2.0
        if math.pi - theta < 1e-6:
            warnings.warn("rotation by pi: axis sign is ambiguous", BranchAmbiguityWarning, stacklevel=2)
            B = (R + np.eye(3)) / 2.0
            k = int(np.argmax(np.diag(B)))
            axis = B[:, k] / np.linalg.norm(B[:, k])
            if np.dot(axis, w) < 0:
                axis = -axis
            return theta * axis
        return theta / (2.0 * math.sin(theta)) * w

    def distance(self, g, h) -> float:
        rel = self.mul(self.inv(g), h)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BranchAmbiguityWarning)
            return float(np.linalg.norm(self.log(rel)))

    def decode(self, a):
        R = np.asarray(a, dtype=float).reshape(3, 3)
        self.check(R)
        return R


GROUPS = {"heisenberg": Heisenberg(), "affine": Affine(), "cylinder": Cylinder(),
          "torus": Torus(), "rotation": Rotation()}


def get_group(name: str, dim: int | None = None) -> LieGroup:
    key = name.lower()
    if key in ("euclidean", "r2", "r3") or key.startswith("euclidean"):
        n = dim or (int(key[-1]) if key[-1].isdigit() else 2)
        return Euclidean(n)
    if key not in GROUPS:
        raise GroupError(f"unknown group tag {name!r}")
    return GROUPS[key]


@dataclass
class GroupElement:
    group: LieGroup
    value: np.ndarray

    def to_dict(self) -> dict:
        return {"group": self.group.name, "value": self.group.encode(self.value).tolist()}


@dataclass
class AlgebraVector:
    group: LieGroup
    coords: np.ndarray

    def to_dict(self) -> dict:
        return {"group": self.group.name, "coords": np.asarray(self.coords).tolist()}


def exp_map(X: AlgebraVector) -> GroupElement:
    coords = np.asarray(X.coords, dtype=float)
    if not np.all(np.isfinite(coords)):
        raise GroupError("algebra coordinates must be finite")
    return GroupElement(X.group, X.group.exp(coords))


def log_map(g: GroupElement) -> AlgebraVector:
    return AlgebraVector(g.group, g.group.log(g.value))


def one_param(group: LieGroup, L, t: float) -> GroupElement:
    """exp(t X_L) for the unit vector X_L spanning the direction L."""
    v = np.asarray(L.vector if hasattr(L, "vector") else L, dtype=float)
    v = v / np.linalg.norm(v)
    return GroupElement(group, group.exp(t * v))


# ---------------------------------------------------------------------------
# configurations
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class GroupConfig:
    group: LieGroup
    spec: ConfigSpec
    chart: str = "algebra"
    left: np.ndarray | None = None  # optional left translation applied to every value

    def __post_init__(self):
        if self.chart not in ("algebra", "element"):
            raise ConfigError("chart must be 'algebra' or 'element'")
        if self.spec.direction_dim != self.group.algebra_dim:
            raise ConfigError(f"{self.group.name} configurations need directions in "
                              f"R^{self.group.algebra_dim}")

    @property
    def unoriented(self) -> bool:
        return self.spec.unoriented

    def values(self, points) -> np.ndarray:
        """Group elements at the given directions, stacked along axis 0."""
        raw = np.atleast_2d(self.spec.evaluate(points))
        G = self.group
        if self.chart == "algebra":
            g = np.stack([G.exp(r) for r in raw]) if isinstance(G, Rotation) else G.exp(raw)
        elif isinstance(G, Torus):
            g = np.arctan2(raw[:, [1, 3]], raw[:, [0, 2]]) % TWO_PI
        elif isinstance(G, Rotation):
            g = np.stack([G.decode(r) for r in raw])
        else:
            g = np.asarray(raw, dtype=float)
            G.check(g)
        if self.left is not None:
            g = np.stack([G.mul(self.left, x) for x in g]) if isinstance(G, Rotation) else G.mul(self.left, g)
        return g

    def translate(self, h) -> "GroupConfig":
        """Left translate every value by h."""
        h = np.asarray(h, dtype=float)
        left = h if self.left is None else self.group.mul(h, self.left)
        return GroupConfig(self.group, self.spec, self.chart, left)

    def to_dict(self) -> dict:
        d = {"group": self.group.name, "chart": self.chart, "spec": self.spec.to_dict()}
        if isinstance(self.group, Euclidean):
            d["group"] = f"euclidean{self.group.algebra_dim}"
        if self.left is not None:
            d["left"] = self.group.encode(self.left).tolist()
        return d


def group_config_from_dict(d: dict) -> GroupConfig:
    spec = spec_from_dict(d["spec"])
    group = get_group(d["group"], spec.direction_dim)
    left = np.asarray(d["left"], dtype=float) if "left" in d else None
    return GroupConfig(group, spec, d.get("chart", "algebra"), left)


@dataclass
class GroupCoverCertificate:
    group: str
    target: np.ndarray
    direction: Any
    t: float
    residual: float
    method: str
    status: str = "covered"
    tol: float = 0.0
    note: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def covered(self) -> bool:
        return self.status == "covered"

    def to_dict(self) -> dict:
        d = {"group": self.group, "status": self.status, "target": np.asarray(self.target).tolist(),
             "t": self.t, "residual": self.residual, "method": self.method, "tol": self.tol}
        if self.direction is not None:
            d["direction"] = list(self.direction.vector)
        if self.note:
            d["note"] = self.note
        d.update(self.extra)
        return d


def _lifted(config: GroupConfig, g) -> Mapped:
    """mu(L) = log(g^-1 * sigma(L)) as an algebra-valued configuration."""
    G = config.group
    ginv = G.inv(np.asarray(g, dtype=float))

    def mu(points):
        return G.log(G.mul(ginv, config.values(points)))

    return Mapped(mu, G.algebra_dim, G.algebra_dim, config.unoriented, "log-lift")


def certify_cover_group(config: GroupConfig, g=None, tol: float = 1e-9, **kw) -> GroupCoverCertificate:
    """Witness g in sigma(L*) exp(t* L*) for euclidean, Heisenberg or affine configurations.

    exp is a global diffeomorphism for these groups, so L -> log(g^-1 sigma(L))
    is an algebra-valued configuration; a zero of its perpendicular section
    gives log(g^-1 sigma(L*)) = -t* X_{L*}.
    """
    G = config.group
    if not isinstance(G, (Euclidean, Heisenberg, Affine)):
        raise GroupError(f"certify_cover_group handles euclidean, heisenberg and affine, not {G.name}")
    g = G.identity() if g is None else G.decode(g)
    mu = _lifted(config, g)
    n = G.algebra_dim
    if n not in (2, 3):
        raise GroupError("guaranteed mode covers algebras of dimension 2 and 3")
    # the zero is found in the algebra; the group product can magnify its
    # residual a little, so the inner tolerance is tightened when needed
    for inner in _inner_tolerances(tol):
        if n == 2:
            zero = find_zero_unoriented_2d(mu, inner, **kw)
        else:
            zero = (find_zero_unoriented_3d(mu, inner, **kw) if config.unoriented
                    else find_zero_oriented_s2(mu, inner, **kw))
        e = zero.direction.as_array()
        point = zero.direction.angle if n == 2 else e
        m = mu.evaluate(point)
        t = -float(np.dot(m, e))
        sigma = config.values(point)[0]
        reached = G.mul(sigma, G.exp(t * e))
        residual = G.distance(reached, g)
        if residual <= tol:
            break
    status = "covered" if residual <= tol else "not-found"
    return GroupCoverCertificate(G.name, G.encode(g), zero.direction, t, residual, zero.method, status,
                                 tol, zero.note)


def _inner_tolerances(tol: float) -> tuple[float, ...]:
    return tuple(max(tol * f, 1e-15) for f in (1.0, 1e-2, 1e-4))


@dataclass
class TautReport:
    taut: bool
    sup_norm: float
    radius: float
    witness: Any = None

    def __bool__(self) -> bool:
        return self.taut


def is_taut(config: GroupConfig, radius: float, mesh: int = 2048) -> TautReport:
    """Does sigma stay inside the log-ball of the given radius about e?"""
    G = config.group
    if isinstance(G, (Cylinder, Torus)) and radius >= math.pi:
        raise GroupError("radius must stay below pi on the angular coordinate")
    if isinstance(G, Rotation) and radius >= math.pi:
        raise GroupError("radius must stay below pi for rotations")
    if config.spec.direction_dim == 2:
        points = np.linspace(0.0, config.spec.period, mesh, endpoint=False)
    else:
        from .icosphere import fibonacci_sphere
        points = fibonacci_sphere(mesh) if config.spec.direction_dim == 3 else \
            np.random.default_rng(0).standard_normal((mesh, config.spec.direction_dim))
    sup = 0.0
    for p, s in zip(points, config.values(points)):
        try:
            norm = float(np.linalg.norm(G.log(s)))
        except GroupError:
            return TautReport(False, math.inf, radius, p)
        if norm > sup:
            sup = norm
            arg = p
    return TautReport(sup <= radius, sup, radius, None if sup <= radius else arg)


# ---------------------------------------------------------------------------
# cylinder: lifting along the path
# ---------------------------------------------------------------------------

@dataclass
class LiftReport:
    decision: str
    winding: tuple[int, int] | None = None
    path: np.ndarray | None = None
    kernel_index: int | None = None

    def to_dict(self) -> dict:
        d: dict = {"decision": self.decision}
        if self.winding is not None:
            d["winding"] = list(self.winding)
        if self.kernel_index is not None:
            d["kernel_index"] = self.kernel_index
        return d


class CylinderPath:
    """Continuous lift p: [0, 2pi] -> C of a configuration in C^*.

    The unoriented configuration is read on the doubled interval with
    sigma(u) = sigma(u + pi); the branch of log is continued from the principal
    value at t = 0 along a dense grid, and evaluated between grid nodes by
    snapping the principal argument to the nearest continued value.
    """

    def __init__(self, values_fn, grid: int = 4096):
        self.values_fn = values_fn
        self.grid = grid
        self.t = np.linspace(0.0, TWO_PI, 2 * grid + 1)
        w = values_fn(self.t)
        if np.any(np.abs(w) <= 1e-300):
            raise GroupError("configuration passes through 0 in C^*")
        arg = np.angle(w)
        step = _wrap(np.diff(arg))
        if np.max(np.abs(step)) >= 0.5 * math.pi:
            raise GroupError("grid too coarse to continue the logarithm; increase grid")
        self.arg = np.concatenate([[arg[0]], arg[0] + np.cumsum(step)])
        self.logabs = np.log(np.abs(w))

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        w = self.values_fn(t)
        ref = np.interp(t, self.t, self.arg)
        a = np.angle(w)
        a = a + TWO_PI * np.round((ref - a) / TWO_PI)
        return np.log(np.abs(w)) + 1j * a

    @property
    def samples(self) -> np.ndarray:
        return self.logabs + 1j * self.arg

    @property
    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))

    @property
    def winding(self) -> int:
        """Turns of sigma over one pass of the direction space [0, pi]."""
        return int(round((self.arg[self.grid] - self.arg[0]) / TWO_PI))


def _cylinder_values(config: GroupConfig):
    G = config.group

    def fn(t):
        return G.to_complex(config.values(np.asarray(t) % config.spec.period))

    return fn


def _cylinder_search(p: CylinderPath, window: range, tol: float):
    """Smallest |n| (then smallest t) with d_n(t) = (2 pi i n - p(t)).n(t) = 0."""
    t = p.t
    P = p.samples
    nt = 1j * np.exp(1j * t)
    for k in sorted(window, key=lambda k: (abs(k), k)):
        d = np.real(np.conj(nt) * (2j * math.pi * k - P))

        def d1(s, k=k):
            return float(np.real(np.conj(1j * np.exp(1j * s)) * (2j * math.pi * k - p(s)[0])))

        small = np.abs(d[:-1]) <= tol
        change = d[:-1] * d[1:] < 0
        hits = np.flatnonzero(small | change)
        if hits.size == 0:
            continue
        i = int(hits[0])
        if small[i]:
            return k, float(t[i]), abs(d1(t[i])), 0
        ts, r, it = _bisect(d1, t[i], t[i + 1], d[i], tol)
        return k, ts, r, it
    return None


def certify_identity_cylinder(config: GroupConfig, grid: int = 4096, tol: float = 1e-9,
                              target=None) -> GroupCoverCertificate:
    """Witness that the identity (or ``target``) lies on |sigma| in C^*.

    The lifted path p carries at p(t) a line at angle t; the identity is
    reached when that line meets the kernel 2 pi i Z of exp.
    """
    G = config.group
    if not isinstance(G, Cylinder):
        raise GroupError("certify_identity_cylinder needs a cylinder configuration")
    if target is not None:
        target = G.decode(target)
        config = config.translate(G.inv(target))
    p = CylinderPath(_cylinder_values(config), grid)
    bound = math.ceil(p.sup_abs / TWO_PI) + 2
    hit = _cylinder_search(p, range(-bound, bound + 1), tol)
    escalated = False
    if hit is None:
        escalated = True
        p = CylinderPath(_cylinder_values(config), 2 * grid)
        bound += 4
        hit = _cylinder_search(p, range(-bound, bound + 1), tol)
    goal = G.identity() if target is None else target
    if hit is None:
        return GroupCoverCertificate(G.name, G.encode(goal), None, math.nan, math.inf, "cylinder-lift",
                                     "not-found", tol,
                                     f"no kernel hit for |n| <= {bound} after escalation; "
                                     "not a proof of non-coverage",
                                     {"window": bound, "grid": p.grid})
    for inner in _inner_tolerances(tol):
        if inner < tol:
            hit = _cylinder_search(p, range(-bound, bound + 1), inner) or hit
        k, ts, r, it = hit
        pt = complex(p(ts)[0])
        e = np.exp(1j * ts)
        s = float(np.real(np.conj(e) * (2j * math.pi * k - pt)))
        lift_residual = abs(pt + s * e - 2j * math.pi * k)
        # report in terms of the unoriented direction theta in [0, pi)
        theta, time = (ts, s) if ts < math.pi else (ts - math.pi, -s)
        direction = UnorientedDirection.from_angle(theta)
        u = direction.as_array()
        sigma = config.values(theta)[0]
        reached = G.mul(sigma, G.exp(time * u))
        residual = G.distance(reached, G.identity())
        if residual <= tol:
            break
    status = "covered" if residual <= tol else "not-found"
    return GroupCoverCertificate(
        G.name, G.encode(goal), direction, time, residual, "cylinder-lift", status, tol,
        "window escalated" if escalated else "",
        {"path_t": ts, "kernel_index": k, "s": s, "lift_residual": lift_residual,
         "winding": p.winding, "iterations": it})


# ---------------------------------------------------------------------------
# torus
# ---------------------------------------------------------------------------

def _torus_angles(config: GroupConfig, theta: np.ndarray) -> np.ndarray:
    return config.values(theta)


def torus_winding(config: GroupConfig, mesh: int = 4096) -> LiftReport:
    """Coordinate winding numbers of theta in [0, pi] -> sigma(theta) in T^2."""
    if not isinstance(config.group, Torus):
        raise GroupError("torus_winding needs a torus configuration")
    theta = np.linspace(0.0, math.pi, mesh + 1)
    phi = _torus_angles(config, theta)
    step = _wrap(np.diff(phi, axis=0))
    if np.max(np.abs(step)) >= 0.5 * math.pi:
        raise GroupError("mesh too coarse: consecutive angle steps must stay below pi/2")
    w = np.rint(step.sum(axis=0) / TWO_PI).astype(int)
    winding = (int(w[0]), int(w[1]))
    decision = "lift-to-plane" if winding == (0, 0) else "lift-to-cylinder"
    return LiftReport(decision, winding)


def _unimodular_for(w: tuple[int, int]) -> np.ndarray:
    """Integer A with det 1 and A w = (0, gcd)."""
    a, b = w
    g = math.gcd(a, b)
    a, b = a // g, b // g

    def egcd(x, y):
        if y == 0:
            return (x, 1, 0) if x >= 0 else (-x, -1, 0)
        q, r = divmod(x, y)
        d, s, t = egcd(y, r)
        return d, t, s - q * t

    _, x, y = egcd(a, b)
    return np.array([[b, -a], [x, y]], dtype=float)


def certify_identity_torus(config: GroupConfig, tol: float = 1e-9, mesh: int = 4096) -> GroupCoverCertificate:
    """Identity coverage on T^2, by lifting to the plane or to a cylinder cover."""
    G = config.group
    report = torus_winding(config, mesh)
    theta = np.linspace(0.0, math.pi, mesh + 1)
    phi_grid = _torus_angles(config, theta)
    cont = phi_grid[0] + np.vstack([np.zeros(2), np.cumsum(_wrap(np.diff(phi_grid, axis=0)), axis=0)])

    def lifted_angles(th):
        th = np.atleast_1d(np.asarray(th, dtype=float)) % math.pi
        ph = _torus_angles(config, th)
        ref = np.column_stack([np.interp(th, theta, cont[:, j]) for j in range(2)])
        return ph + TWO_PI * np.round((ref - ph) / TWO_PI)

    if report.decision == "lift-to-plane":
        mu = Mapped(lambda th: lifted_angles(th), 2, 2, True, "torus-plane-lift")
        method = "torus-plane-lift"
        extra = {"winding": list(report.winding)}

        def attempt(inner):
            zero = find_zero_unoriented_2d(mu, inner)
            e = zero.direction.as_array()
            return zero.direction, -float(np.dot(mu.evaluate(zero.direction.angle), e)), None
    else:
        A = _unimodular_for(report.winding)
        Ainv = np.linalg.inv(A)
        method = "torus-cylinder-lift"
        extra = {"winding": list(report.winding)}

        def old_angle(tp):
            v = np.stack([np.cos(tp), np.sin(tp)], axis=-1) @ Ainv.T
            return np.arctan2(v[..., 1], v[..., 0]) % math.pi

        def cyl_values(tp):
            tp = np.atleast_1d(tp)
            psi = lifted_angles(old_angle(tp)) @ A.T
            w = np.exp(psi[:, 0] + 1j * psi[:, 1])
            return np.column_stack([w.real, w.imag])

        cyl = GroupConfig(GROUPS["cylinder"], Mapped(cyl_values, 2, 2, True, "torus-cylinder"), "element")

        def attempt(inner):
            cert = certify_identity_cylinder(cyl, tol=inner)
            if not cert.covered:
                return None, math.nan, cert
            tp = cert.direction.angle
            dvec = np.array([math.cos(tp), math.sin(tp)]) @ Ainv.T
            direction = UnorientedDirection.from_angle(math.atan2(dvec[1], dvec[0]) % math.pi)
            extra["kernel_index"] = cert.extra.get("kernel_index")
            # moving by t along tp upstairs moves by t A^-1 e(tp) on the torus
            return direction, cert.t * float(np.dot(dvec, direction.as_array())), cert

    # the change of coordinates can magnify the inner residual; tighten if needed
    residual = math.inf
    for inner in _inner_tolerances(tol):
        found, found_time, cert = attempt(inner)
        if found is None:
            if math.isfinite(residual):
                break
            cert.group = G.name
            return cert
        direction, time = found, found_time
        sigma = config.values(direction.angle)[0]
        reached = G.mul(sigma, G.exp(time * direction.as_array()))
        residual = float(np.linalg.norm(_wrap(reached)))
        if residual <= tol:
            break
    status = "covered" if residual <= tol else "not-found"
    return GroupCoverCertificate(G.name, np.zeros(2), direction, time, residual, method, status, tol,
                                 "", extra)
