"""Direction spaces and evaluable line configurations.

A configuration assigns to every direction (a point of RP^{n-1} for the
unoriented case, of S^{n-1} for the oriented case) a displacement in R^n; the
line through that displacement in the given direction is the line used by the
configuration.  Planar families are parametrised by the angle of the
direction, higher-dimensional ones by the unit direction vector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
ZERO_COORD = 1e-12
NORM_TOL = 1e-12
DEFAULT_MAX_HARMONICS = 64
EVENNESS_TOL = 1e-9
_VALIDATION_MESH = 1024


class ConfigError(ValueError):
    """Raised for malformed configurations or mismatched dimensions."""


# ---------------------------------------------------------------------------
# directions
# ---------------------------------------------------------------------------

def canonicalize(v: Sequence[float]) -> np.ndarray:
    """Canonical antipodal representative: first nonzero coordinate positive."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0.0:
        raise ConfigError("direction vector must be finite and nonzero")
    # skip renormalising unit vectors so that canonicalize is idempotent bit for bit
    if abs(norm - 1.0) > 1e-15:
        v = v / norm
    for c in v:
        if abs(c) > ZERO_COORD:
            return v if c > 0 else -v
    return v


@dataclass(frozen=True)
class UnorientedDirection:
    """A line through the origin.

    In the plane the line is stored by its angle in [0, pi); in higher
    dimensions by the unit vector whose first nonzero coordinate is positive.
    """

    vector: tuple[float, ...]
    angle: float | None = None

    @classmethod
    def from_angle(cls, theta: float) -> "UnorientedDirection":
        theta = float(theta) % math.pi
        if theta >= math.pi:  # round-off at the seam
            theta = 0.0
        return cls((math.cos(theta), math.sin(theta)), theta)

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "UnorientedDirection":
        v = np.asarray(v, dtype=float)
        if v.shape == (2,):
            if not np.any(v):
                raise ConfigError("direction vector must be nonzero")
            return cls.from_angle(math.atan2(v[1], v[0]))
        return cls(tuple(float(c) for c in canonicalize(v)))

    @property
    def dim(self) -> int:
        return len(self.vector)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vector, dtype=float)


@dataclass(frozen=True)
class OrientedDirection:
    """A unit vector; the oriented line runs from the origin through it."""

    vector: tuple[float, ...]

    def __post_init__(self):
        norm = math.sqrt(sum(c * c for c in self.vector))
        if abs(norm - 1.0) > NORM_TOL:
            raise ConfigError(f"oriented direction must be a unit vector (norm {norm})")

    @classmethod
    def from_angle(cls, theta: float) -> "OrientedDirection":
        return cls((math.cos(theta), math.sin(theta)))

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "OrientedDirection":
        v = np.asarray(v, dtype=float)
        n = np.linalg.norm(v)
        if n == 0.0:
            raise ConfigError("direction vector must be nonzero")
        return cls(tuple(float(c) for c in v / n))

    @property
    def dim(self) -> int:
        return len(self.vector)

    @property
    def angle(self) -> float:
        if self.dim != 2:
            raise ConfigError("angle is defined for planar directions only")
        return math.atan2(self.vector[1], self.vector[0]) % TWO_PI

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vector, dtype=float)


Direction = UnorientedDirection | OrientedDirection


def frame(theta):
    """Moving frame e(theta) = (cos, sin), n(theta) = (-sin, cos)."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([c, s], axis=-1), np.stack([-s, c], axis=-1)


# ---------------------------------------------------------------------------
# configuration families
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConfigSpec:
    """Base class of evaluable configurations.

    Subclasses implement either ``_eval_angles`` (planar families) or
    ``_eval_vectors``; the other is derived.  ``evaluate`` accepts a 1-D array
    of angles when ``direction_dim == 2`` and an ``(N, n)`` array of unit
    vectors otherwise.
    """

    kind = "abstract"

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def direction_dim(self) -> int:
        return self.dim

    @property
    def unoriented(self) -> bool:
        raise NotImplementedError

    @property
    def period(self) -> float:
        """Angular period of the planar direction space."""
        return math.pi if self.unoriented else TWO_PI

    def evaluate(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.direction_dim == 2 and points.ndim <= 1:
            out = self._eval_angles(np.atleast_1d(points))
            return out[0] if points.ndim == 0 else out
        pts = np.atleast_2d(points)
        if pts.shape[-1] != self.direction_dim:
            raise ConfigError(
                f"direction dimension {pts.shape[-1]} does not match spec dimension {self.direction_dim}")
        out = self._eval_vectors(pts)
        return out[0] if points.ndim == 1 else out

    def _eval_angles(self, theta: np.ndarray) -> np.ndarray:
        if self.direction_dim != 2:
            raise ConfigError("angle evaluation needs a planar direction space")
        return self._eval_vectors(np.stack([np.cos(theta), np.sin(theta)], axis=-1))

    def _eval_vectors(self, x: np.ndarray) -> np.ndarray:
        if self.direction_dim == 2:
            return self._eval_angles(np.arctan2(x[:, 1], x[:, 0]) % TWO_PI)
        raise NotImplementedError

    def __call__(self, points) -> np.ndarray:
        return self.evaluate(points)

    def to_dict(self) -> dict:
        raise ConfigError(f"{self.kind} configurations are not serializable")

    @cached_property
    def evenness_defect(self) -> float:
        return _evenness_defect(self) if self.unoriented else 0.0


def _sphere_mesh(n: int, count: int, seed: int = 12345) -> np.ndarray:
    x = np.random.default_rng(seed).standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _evenness_defect(spec: ConfigSpec, count: int = _VALIDATION_MESH) -> float:
    if spec.direction_dim == 2:
        theta = np.linspace(0.0, math.pi, count, endpoint=False)
        diff = spec._eval_angles(theta + math.pi) - spec._eval_angles(theta)
    else:
        x = _sphere_mesh(spec.direction_dim, count)
        diff = spec._eval_vectors(-x) - spec._eval_vectors(x)
    return float(np.max(np.linalg.norm(diff, axis=1)))


@dataclass(frozen=True, eq=False)
class Constant(ConfigSpec):
    point: np.ndarray
    direction_dim_: int | None = None
    unoriented_: bool = True

    kind = "Constant"

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float).reshape(-1))

    @property
    def dim(self) -> int:
        return self.point.size

    @property
    def direction_dim(self) -> int:
        return self.direction_dim_ or self.dim

    @property
    def unoriented(self) -> bool:
        return self.unoriented_

    def _eval_angles(self, theta):
        return np.broadcast_to(self.point, (theta.size, self.dim)).copy()

    def _eval_vectors(self, x):
        return np.broadcast_to(self.point, (x.shape[0], self.dim)).copy()

    def to_dict(self):
        d = {"kind": self.kind, "dim": self.dim, "unoriented": self.unoriented,
             "point": self.point.tolist()}
        if self.direction_dim_ is not None:
            d["direction_dim"] = self.direction_dim_
        return d


@dataclass(frozen=True, eq=False)
class TrigPolynomial(ConfigSpec):
    """sigma_j(theta) = sum_k cos[j, k] cos(k theta) + sin[j, k] sin(k theta)."""

    cos: np.ndarray
    sin: np.ndarray
    unoriented_: bool = True
    max_harmonics: int = DEFAULT_MAX_HARMONICS

    kind = "TrigPolynomial"

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.cos, dtype=float))
        s = np.atleast_2d(np.asarray(self.sin, dtype=float))
        width = max(c.shape[1], s.shape[1])
        c = np.pad(c, ((0, 0), (0, width - c.shape[1])))
        s = np.pad(s, ((0, 0), (0, width - s.shape[1])))
        if c.shape[0] != s.shape[0]:
            raise ConfigError("cos and sin coefficient lists must cover the same coordinates")
        if width - 1 > self.max_harmonics:
            raise ConfigError(f"degree {width - 1} exceeds the harmonic cap {self.max_harmonics}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(s))):
            raise ConfigError("coefficients must be finite")
        s[:, 0] = 0.0
        object.__setattr__(self, "cos", c)
        object.__setattr__(self, "sin", s)

    @property
    def dim(self) -> int:
        return self.cos.shape[0]

    @property
    def direction_dim(self) -> int:
        return 2

    @property
    def unoriented(self) -> bool:
        return self.unoriented_

    @property
    def degree(self) -> int:
        return self.cos.shape[1] - 1

    def _eval_angles(self, theta):
        kt = np.multiply.outer(theta, np.arange(self.degree + 1))
        return np.cos(kt) @ self.cos.T + np.sin(kt) @ self.sin.T

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "unoriented": self.unoriented,
                "cos": self.cos.tolist(), "sin": self.sin.tolist(),
                "max_harmonics": self.max_harmonics}


@dataclass(frozen=True, eq=False)
class TangentCircle(ConfigSpec):
    """Oriented tangent lines to the circle of radius ``radius``.

    The oriented line in direction theta passes through
    ``orientation * radius * n(theta)``; with orientation +1 the circle lies to
    the right of each line and the tangency point turns counterclockwise.
    """

    radius: float
    orientation: int = 1

    kind = "TangentCircle"

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError("tangent circle radius must be positive")
        if self.orientation not in (1, -1):
            raise ConfigError("orientation must be +1 or -1")

    @property
    def dim(self) -> int:
        return 2

    @property
    def unoriented(self) -> bool:
        return False

    def _eval_angles(self, theta):
        return self.orientation * self.radius * np.stack([-np.sin(theta), np.cos(theta)], axis=-1)

    def to_dict(self):
        return {"kind": self.kind, "dim": 2, "unoriented": False,
                "radius": self.radius, "orientation": self.orientation}


@dataclass(frozen=True, eq=False)
class SampledGrid(ConfigSpec):
    """Piecewise-linear interpolation of planar samples.

    ``angles`` must be increasing; a closed loop has
    ``angles[-1] - angles[0]`` equal to the period and matching end values.
    """

    angles: np.ndarray
    values: np.ndarray
    unoriented_: bool = True

    kind = "SampledGrid"

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float).reshape(-1)
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if a.size < 2 or v.shape[0] != a.size:
            raise ConfigError("SampledGrid needs at least two samples, one value row per angle")
        if np.any(np.diff(a) <= 0):
            raise ConfigError("SampledGrid angles must be strictly increasing")
        object.__setattr__(self, "angles", a)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def direction_dim(self) -> int:
        return 2

    @property
    def unoriented(self) -> bool:
        return self.unoriented_

    @property
    def closure_defect(self) -> tuple[float, float]:
        span = abs(self.angles[-1] - self.angles[0] - self.period)
        return span, float(np.linalg.norm(self.values[-1] - self.values[0]))

    def _eval_angles(self, theta):
        a0 = self.angles[0]
        t = a0 + np.mod(theta - a0, self.period)
        return np.stack([np.interp(t, self.angles, self.values[:, j]) for j in range(self.dim)],
                        axis=-1)

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "unoriented": self.unoriented,
                "angles": self.angles.tolist(), "values": self.values.tolist()}


@dataclass(frozen=True, eq=False)
class Polynomial(ConfigSpec):
    """Vector polynomial in the coordinates of the unit direction vector.

    Each term is ``coef * prod(x_i ** powers_i)``.  Terms of even total degree
    only give an antipodally even (unoriented) configuration.
    """

    powers: np.ndarray
    coefs: np.ndarray
    unoriented_: bool = True

    kind = "Polynomial"

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.powers, dtype=int))
        c = np.atleast_2d(np.asarray(self.coefs, dtype=float))
        if p.shape[0] != c.shape[0]:
            raise ConfigError("one coefficient vector per monomial is required")
        if np.any(p < 0):
            raise ConfigError("monomial powers must be nonnegative")
        object.__setattr__(self, "powers", p)
        object.__setattr__(self, "coefs", c)

    @property
    def dim(self) -> int:
        return self.coefs.shape[1]

    @property
    def direction_dim(self) -> int:
        return self.powers.shape[1]

    @property
    def unoriented(self) -> bool:
        return self.unoriented_

    def _eval_vectors(self, x):
        # table of integer powers x_i^k, then one product per monomial
        table = np.ones((int(self.powers.max(initial=0)) + 1,) + x.shape)
        for k in range(1, table.shape[0]):
            table[k] = table[k - 1] * x
        mono = np.ones((x.shape[0], self.powers.shape[0]))
        for i in range(x.shape[1]):
            mono *= table[self.powers[:, i], :, i].T
        return mono @ self.coefs

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "unoriented": self.unoriented,
                "direction_dim": self.direction_dim,
                "terms": [{"powers": p.tolist(), "coef": c.tolist()}
                          for p, c in zip(self.powers, self.coefs)]}


@dataclass(frozen=True, eq=False)
class Translated(ConfigSpec):
    base: ConfigSpec
    offset: np.ndarray

    kind = "Translated"

    def __post_init__(self):
        off = np.asarray(self.offset, dtype=float).reshape(-1)
        if off.size != self.base.dim:
            raise ConfigError(f"offset dimension {off.size} does not match spec dimension {self.base.dim}")
        object.__setattr__(self, "offset", off)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def direction_dim(self) -> int:
        return self.base.direction_dim

    @property
    def unoriented(self) -> bool:
        return self.base.unoriented

    def _eval_angles(self, theta):
        return self.base._eval_angles(theta) - self.offset

    def _eval_vectors(self, x):
        return self.base._eval_vectors(x) - self.offset

    @cached_property
    def evenness_defect(self) -> float:
        return self.base.evenness_defect

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "unoriented": self.unoriented,
                "base": self.base.to_dict(), "offset": self.offset.tolist()}


@dataclass(frozen=True, eq=False)
class Mapped(ConfigSpec):
    """Configuration given by a vectorised callable (internal, not serialized)."""

    func: Callable[[np.ndarray], np.ndarray]
    dim_: int
    direction_dim_: int
    unoriented_: bool = True
    label: str = field(default="mapped")

    kind = "Mapped"

    @property
    def dim(self) -> int:
        return self.dim_

    @property
    def direction_dim(self) -> int:
        return self.direction_dim_

    @property
    def unoriented(self) -> bool:
        return self.unoriented_

    def _eval_angles(self, theta):
        if self.direction_dim != 2:
            raise ConfigError("angle evaluation needs a planar direction space")
        return np.asarray(self.func(theta), dtype=float).reshape(theta.size, self.dim)

    def _eval_vectors(self, x):
        if self.direction_dim == 2:
            return self._eval_angles(np.arctan2(x[:, 1], x[:, 0]) % TWO_PI)
        return np.asarray(self.func(x), dtype=float).reshape(x.shape[0], self.dim)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def eval_config(spec: ConfigSpec, d: Direction) -> np.ndarray:
    """sigma(d) for a single direction object."""
    if d.dim != spec.direction_dim:
        raise ConfigError(f"direction dimension {d.dim} does not match spec dimension {spec.direction_dim}")
    if isinstance(d, UnorientedDirection):
        if not spec.unoriented:
            raise ConfigError("unoriented direction given to an oriented configuration")
        if spec.evenness_defect > EVENNESS_TOL:
            raise ConfigError(
                f"configuration is not antipodally even (defect {spec.evenness_defect:.3g})")
    if spec.direction_dim == 2:
        theta = d.angle if d.angle is not None else math.atan2(d.vector[1], d.vector[0])
        return spec.evaluate(theta)
    return spec.evaluate(d.as_array())


@dataclass
class Violation:
    invariant: str
    defect: float
    detail: str = ""


@dataclass
class ValidationReport:
    ok: bool
    violations: list[Violation]

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"ok": self.ok,
                "violations": [{"invariant": v.invariant, "defect": v.defect, "detail": v.detail}
                               for v in self.violations]}


def validate_spec(spec: ConfigSpec) -> ValidationReport:
    violations: list[Violation] = []
    if isinstance(spec, Translated):
        inner = validate_spec(spec.base)
        violations.extend(inner.violations)
        if not np.all(np.isfinite(spec.offset)):
            violations.append(Violation("finite", math.inf, "offset has non-finite entries"))
        return ValidationReport(not violations, violations)
    if spec.unoriented:
        defect = spec.evenness_defect
        if not defect <= EVENNESS_TOL:
            violations.append(Violation("antipodal-evenness", defect,
                                        "sigma(-L) differs from sigma(L)"))
    if isinstance(spec, SampledGrid):
        span, gap = spec.closure_defect
        if span > 1e-9 or gap > EVENNESS_TOL:
            violations.append(Violation("closed-loop", max(span, gap),
                                        f"angle span mismatch {span:.3g}, end-value gap {gap:.3g}"))
        if not np.all(np.isfinite(spec.values)):
            violations.append(Violation("finite", math.inf, "non-finite sample values"))
    if isinstance(spec, TrigPolynomial) and spec.unoriented:
        odd = np.abs(spec.cos[:, 1::2]).sum() + np.abs(spec.sin[:, 1::2]).sum()
        if odd > 0 and not any(v.invariant == "antipodal-evenness" for v in violations):
            violations.append(Violation("even-harmonics", float(odd), "odd harmonics present"))
    return ValidationReport(not violations, violations)


def translate_config(spec: ConfigSpec, x) -> Translated:
    """Configuration whose lines are those of ``spec`` shifted by ``-x``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != spec.dim:
        raise ConfigError(f"translation dimension {x.size} does not match spec dimension {spec.dim}")
    return Translated(spec, x)


def resample(spec: ConfigSpec, cells: int = 4096) -> SampledGrid:
    """Piecewise-linear resampling of a planar configuration."""
    if spec.direction_dim != 2:
        raise ConfigError("only planar configurations can be resampled")
    theta = np.linspace(0.0, spec.period, cells + 1)
    values = spec.evaluate(theta)
    values[-1] = values[0]
    return SampledGrid(theta, values, spec.unoriented)


def trig_from_harmonics(harmonics: dict[int, Sequence[tuple[float, float]]], dim: int | None = None,
                        unoriented: bool = True) -> TrigPolynomial:
    """Build a trig polynomial from ``{k: [(a_k, b_k) per coordinate]}``.

    ``dim`` defaults to the longest coordinate list (at least 2).
    """
    degree = max(harmonics) if harmonics else 0
    if dim is None:
        dim = max([2] + [len(p) for p in harmonics.values()])
    c = np.zeros((dim, degree + 1))
    s = np.zeros((dim, degree + 1))
    for k, pairs in harmonics.items():
        for j, (a, b) in enumerate(pairs):
            c[j, k] = a
            s[j, k] = b
    return TrigPolynomial(c, s, unoriented)


def random_even_trig(rng: np.random.Generator, degree: int = 16, scale: float = 2.0,
                     dim: int = 2) -> TrigPolynomial:
    """Random trig polynomial with even harmonics 0, 2, ..., <= degree."""
    c = np.zeros((dim, degree + 1))
    s = np.zeros((dim, degree + 1))
    even = np.arange(0, degree + 1, 2)
    c[:, even] = rng.uniform(-scale, scale, (dim, even.size))
    s[:, even] = rng.uniform(-scale, scale, (dim, even.size))
    return TrigPolynomial(c, s, True)


def random_polynomial(rng: np.random.Generator, n: int = 3, degree: int = 2, scale: float = 1.0,
                      even: bool = True, dim: int | None = None) -> Polynomial:
    """Random vector polynomial on S^{n-1}; ``even`` keeps only even total degrees."""
    import itertools

    dim = dim or n
    powers = [p for p in itertools.product(range(degree + 1), repeat=n)
              if sum(p) <= degree and (not even or sum(p) % 2 == 0)]
    coefs = rng.uniform(-scale, scale, (len(powers), dim))
    return Polynomial(np.array(powers), coefs, even)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def spec_from_dict(d: dict[str, Any]) -> ConfigSpec:
    kind = d.get("kind")
    unoriented = bool(d.get("unoriented", True))
    try:
        if kind == "Constant":
            return Constant(d["point"], d.get("direction_dim"), unoriented)
        if kind == "TrigPolynomial":
            return TrigPolynomial(d["cos"], d["sin"], unoriented,
                                  int(d.get("max_harmonics", DEFAULT_MAX_HARMONICS)))
        if kind == "TangentCircle":
            return TangentCircle(float(d["radius"]), int(d.get("orientation", 1)))
        if kind == "SampledGrid":
            return SampledGrid(d["angles"], d["values"], unoriented)
        if kind == "Polynomial":
            terms = d["terms"]
            return Polynomial([t["powers"] for t in terms], [t["coef"] for t in terms], unoriented)
        if kind == "Translated":
            return Translated(spec_from_dict(d["base"]), d["offset"])
    except KeyError as exc:
        raise ConfigError(f"{kind} spec is missing field {exc}") from None
    raise ConfigError(f"unknown configuration kind {kind!r}")


def spec_to_dict(spec: ConfigSpec) -> dict[str, Any]:
    return spec.to_dict()
