"""Zero localisation for perpendicular sections and tangent fields.

Every coverage certificate in the package reduces to finding a direction L
with sigma(L) on L, i.e. a zero of L -> P_{L-perp}(sigma(L)).  In the plane
this is a sign change of a scalar function; on S^2 it is located by triangle
indices of the tangent field; above that only a heuristic search is offered.
Degrees of sphere maps and winding numbers of planar loops live here too.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import least_squares

from .configs import (ConfigError, ConfigSpec, Direction, OrientedDirection, TWO_PI,
                      UnorientedDirection, eval_config, frame)
from .icosphere import icosphere

TOL_2D = 1e-9
TOL_S2 = 1e-6
GRID_2D = 256
START_DEPTH = 4
MAX_DEPTH = 12
EDGE_SAMPLES = 16
MAX_EDGE_SAMPLES = 1024
# adjacent samples must turn by less than this for the winding count to be trusted
SAFE_TURN = 0.5 * math.pi


@dataclass
class ZeroCertificate:
    direction: Direction | None
    residual: float
    iterations: int
    method: str
    status: str = "found"
    tol: float = 0.0
    note: str = ""
    index_sum: int | None = None
    depth: int | None = None

    @property
    def found(self) -> bool:
        return self.status == "found"

    def to_dict(self) -> dict:
        d = {"status": self.status, "residual": self.residual, "iterations": self.iterations,
             "method": self.method, "tol": self.tol}
        if self.direction is not None:
            d["direction"] = list(self.direction.vector)
            if self.direction.dim == 2:
                d["angle"] = self.direction.angle
            d["oriented"] = isinstance(self.direction, OrientedDirection)
        if self.note:
            d["note"] = self.note
        if self.index_sum is not None:
            d["index_sum"] = self.index_sum
        if self.depth is not None:
            d["depth"] = self.depth
        return d


@dataclass
class DegreeReport:
    degree: int
    depth: int
    min_magnitude: float
    status: str
    raw: float
    max_image_edge: float = 0.0
    triangles: int = 0

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def to_dict(self) -> dict:
        return {"degree": self.degree, "depth": self.depth, "min_magnitude": self.min_magnitude,
                "status": self.status, "raw": self.raw, "max_image_edge": self.max_image_edge,
                "triangles": self.triangles}


# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------

def perp_section(spec: ConfigSpec, L: Direction) -> np.ndarray:
    """P_{L-perp}(sigma(L)); the component of sigma(L) orthogonal to L."""
    s = eval_config(spec, L)
    e = L.as_array()
    return s - np.dot(s, e) * e


def normal_component(spec: ConfigSpec, theta) -> np.ndarray:
    """g(theta) = sigma(theta) . n(theta) for planar specs (signed perpendicular part)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    _, n = frame(theta)
    return np.einsum("ij,ij->i", spec._eval_angles(theta), n)


def tangent_field(spec: ConfigSpec) -> Callable[[np.ndarray], np.ndarray]:
    """x -> sigma(x) - (sigma(x).x) x on S^2, vectorised over rows."""
    if spec.direction_dim != 3 or spec.dim != 3:
        raise ConfigError("tangent fields need a configuration S^2 -> R^3")

    def v(x):
        s = spec._eval_vectors(x)
        return s - np.einsum("ij,ij->i", s, x)[:, None] * x

    return v


# ---------------------------------------------------------------------------
# planar bisection
# ---------------------------------------------------------------------------

def _bisect(g: Callable[[float], float], lo: float, hi: float, glo: float, tol: float,
            max_iter: int = 200) -> tuple[float, float, int]:
    ghi = g(hi)
    best = (lo, glo) if abs(glo) <= abs(ghi) else (hi, ghi)
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return best[0], abs(best[1]), it
        gm = g(mid)
        if abs(gm) < abs(best[1]):
            best = (mid, gm)
        if abs(gm) <= tol:
            return mid, abs(gm), it
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return best[0], abs(best[1]), max_iter


def find_zero_unoriented_2d(spec: ConfigSpec, tol: float = TOL_2D, cells: int = GRID_2D) -> ZeroCertificate:
    """Zero of g(theta) = sigma(theta).n(theta) on [0, pi].

    sigma(pi) = sigma(0) while n(pi) = -n(0), so g(pi) = -g(0) and a sign
    change always exists; the smallest-theta sign change is bisected.
    """
    if spec.direction_dim != 2:
        raise ConfigError("planar finder needs a planar configuration")
    if not spec.unoriented:
        raise ConfigError("planar finder needs an unoriented configuration")
    if tol <= 0:
        raise ConfigError("tolerance must be positive")
    theta = np.linspace(0.0, math.pi, cells + 1)
    g = normal_component(spec, theta)

    def g1(t: float) -> float:
        return float(normal_component(spec, t)[0])

    for i in range(cells):
        if abs(g[i]) <= tol:
            return ZeroCertificate(UnorientedDirection.from_angle(theta[i]), float(abs(g[i])), 0,
                                   "bisection-2d", tol=tol)
        if g[i] * g[i + 1] < 0:
            t, r, it = _bisect(g1, theta[i], theta[i + 1], g[i], tol)
            status = "found" if r <= tol else "not-found"
            return ZeroCertificate(UnorientedDirection.from_angle(t), r, it, "bisection-2d", status, tol,
                                   "" if r <= tol else "bisection stalled at floating-point resolution")
    i = int(np.argmin(np.abs(g)))
    r = float(abs(g[i]))
    return ZeroCertificate(UnorientedDirection.from_angle(theta[i]), r, 0, "bisection-2d",
                           "found" if r <= tol else "not-found", tol,
                           "no sign change on grid; returned argmin |g|")


# ---------------------------------------------------------------------------
# S^2: triangle indices
# ---------------------------------------------------------------------------

def _tangent_frames(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = c / np.linalg.norm(c, axis=-1, keepdims=True)
    helper = np.where(np.abs(c[:, :1]) < 0.9, np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    u1 = helper - np.einsum("ij,ij->i", helper, c)[:, None] * c
    u1 /= np.linalg.norm(u1, axis=1, keepdims=True)
    u2 = np.cross(c, u1)
    return u1, u2


def _boundary_points(tris: np.ndarray, k: int) -> np.ndarray:
    """(T, 3k, 3) points along the three arcs a->b->c->a, k per arc, arc end excluded."""
    s = (np.arange(k) / k)[None, :, None]
    pts = []
    for i in range(3):
        a, b = tris[:, i][:, None, :], tris[:, (i + 1) % 3][:, None, :]
        p = (1.0 - s) * a + s * b
        pts.append(p / np.linalg.norm(p, axis=2, keepdims=True))
    return np.concatenate(pts, axis=1)


@dataclass
class _IndexResult:
    index: np.ndarray
    degenerate: tuple[np.ndarray, float] | None = None
    unresolved: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    samples: int = 0


def triangle_indices(v: Callable[[np.ndarray], np.ndarray], tris: np.ndarray, tol: float,
                     samples: int = EDGE_SAMPLES) -> _IndexResult:
    """Index of the tangent field ``v`` around each spherical triangle (T, 3, 3).

    The field is read in the tangent frame at the triangle centroid; per-edge
    sampling doubles for triangles whose boundary turns too fast.  A boundary
    sample with |v| <= tol is reported as a degeneracy.
    """
    T = tris.shape[0]
    index = np.zeros(T, dtype=int)
    todo = np.arange(T)
    k = samples
    used = 0
    while todo.size:
        sub = tris[todo]
        pts = _boundary_points(sub, k)
        vals = v(pts.reshape(-1, 3)).reshape(pts.shape)
        used += pts.shape[0] * pts.shape[1]
        mag = np.linalg.norm(vals, axis=2)
        small = mag <= tol
        if small.any():
            flat = int(np.argmax(small.reshape(-1)))
            t_i, p_i = divmod(flat, pts.shape[1])
            return _IndexResult(index, (pts[t_i, p_i], float(mag[t_i, p_i])), samples=used)
        u1, u2 = _tangent_frames(sub.sum(axis=1))
        ang = np.arctan2(np.einsum("tpj,tj->tp", vals, u2), np.einsum("tpj,tj->tp", vals, u1))
        d = np.diff(np.concatenate([ang, ang[:, :1]], axis=1), axis=1)
        d = (d + math.pi) % TWO_PI - math.pi
        ok = np.max(np.abs(d), axis=1) < SAFE_TURN
        index[todo[ok]] = np.rint(d[ok].sum(axis=1) / TWO_PI).astype(int)
        todo = todo[~ok]
        k *= 2
        if k > MAX_EDGE_SAMPLES and todo.size:
            return _IndexResult(index, None, todo, used)
    return _IndexResult(index, samples=used)


def poincare_hopf_sum(spec: ConfigSpec, depth: int = START_DEPTH, tol: float = TOL_S2) -> int | None:
    """Sum of triangle indices of the tangent field over the depth-``depth`` mesh.

    ``None`` when the field is within ``tol`` of zero on some edge.
    """
    verts, faces = icosphere(depth)
    res = triangle_indices(tangent_field(spec), verts[faces], tol)
    if res.degenerate is not None or res.unresolved.size:
        return None
    return int(res.index.sum())


def _split(tri: np.ndarray) -> np.ndarray:
    a, b, c = tri

    def mid(p, q):
        m = p + q
        return m / np.linalg.norm(m)

    ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
    return np.array([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]])


def _polish(v: Callable[[np.ndarray], np.ndarray], x0: np.ndarray) -> tuple[np.ndarray, float, int]:
    x0 = x0 / np.linalg.norm(x0)
    u1, u2 = (w[0] for w in _tangent_frames(x0[None, :]))

    def point(p):
        x = x0 + p[0] * u1 + p[1] * u2
        return x / np.linalg.norm(x)

    def resid(p):
        return v(point(p)[None, :])[0]

    r0 = float(np.linalg.norm(resid(np.zeros(2))))
    try:
        sol = least_squares(resid, np.zeros(2), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=400)
        x = point(sol.x)
        r = float(np.linalg.norm(v(x[None, :])[0]))
        if r <= r0:
            return x, r, int(sol.nfev)
    except ValueError:
        pass
    return x0, r0, 0


def _s2_zero(v: Callable[[np.ndarray], np.ndarray], tol: float, max_depth: int,
             start_depth: int = START_DEPTH) -> tuple[np.ndarray, float, int, str, int | None, int]:
    """Core S^2 search: returns (x, residual, iterations, note, index_sum, depth)."""
    verts, faces = icosphere(start_depth)
    tris = verts[faces]
    res = triangle_indices(v, tris, tol)
    if res.degenerate is not None:
        x, r = res.degenerate
        return x, r, 0, "edge degeneracy", None, start_depth
    index_sum = None if res.unresolved.size else int(res.index.sum())
    nz = np.flatnonzero(res.index)
    if nz.size == 0:
        cand = res.unresolved if res.unresolved.size else np.arange(len(tris))
        centroids = tris[cand].mean(axis=1)
        mags = np.linalg.norm(v(centroids / np.linalg.norm(centroids, axis=1, keepdims=True)), axis=1)
        x, r, nfev = _polish(v, centroids[int(np.argmin(mags))])
        return x, r, nfev, "no nonzero-index triangle; polished argmin", index_sum, start_depth
    # deterministic choice among nonzero-index triangles: highest centroid (z, then y, then x)
    cz = tris[nz].mean(axis=1)
    pick = nz[np.lexsort((cz[:, 0], cz[:, 1], cz[:, 2]))[-1]]
    tri = tris[pick]
    depth = start_depth
    iterations = 0
    note = ""
    while depth < max_depth:
        kids = _split(tri)
        kres = triangle_indices(v, kids, tol)
        iterations += 1
        if kres.degenerate is not None:
            x, r = kres.degenerate
            return x, r, iterations, "edge degeneracy", index_sum, depth + 1
        knz = np.flatnonzero(kres.index)
        if knz.size == 0:
            note = "index lost under subdivision; polished at current depth"
            break
        tri = kids[knz[0]]
        depth += 1
    x, r, nfev = _polish(v, tri.sum(axis=0))
    return x, r, iterations + nfev, note, index_sum, depth


def find_zero_oriented_s2(spec: ConfigSpec, tol: float = TOL_S2, max_depth: int = MAX_DEPTH,
                          start_depth: int = START_DEPTH) -> ZeroCertificate:
    """Zero of the tangent field sigma(x) - (sigma(x).x)x on S^2."""
    if tol <= 0:
        raise ConfigError("tolerance must be positive")
    v = tangent_field(spec)
    x, r, it, note, isum, depth = _s2_zero(v, tol, max_depth, start_depth)
    return ZeroCertificate(OrientedDirection.from_vector(x), r, it, "index-subdivision-s2",
                           "found" if r <= tol else "not-found", tol, note, isum, depth)


def find_zero_unoriented_3d(spec: ConfigSpec, tol: float = TOL_S2, max_depth: int = MAX_DEPTH,
                            start_depth: int = START_DEPTH) -> ZeroCertificate:
    """Zero of the perpendicular section over RP^2 via its even tangent field."""
    if not spec.unoriented:
        raise ConfigError("unoriented finder needs an unoriented configuration")
    cert = find_zero_oriented_s2(spec, tol, max_depth, start_depth)
    cert.direction = UnorientedDirection.from_vector(cert.direction.vector)
    return cert


def find_zero_highdim(spec: ConfigSpec, tol: float = TOL_2D, restarts: int = 32,
                      seed: int = 0) -> ZeroCertificate | None:
    """Multi-start least squares on |P_{L-perp} sigma(L)|^2.

    Returns ``None`` when no start reaches ``tol``; that is not evidence that
    no zero exists.
    """
    n = spec.direction_dim
    rng = np.random.default_rng(seed)

    def resid(y):
        x = y / np.linalg.norm(y)
        s = spec._eval_vectors(x[None, :])[0]
        return s - np.dot(s, x) * x

    best: tuple[float, np.ndarray, int] | None = None
    total = 0
    for _ in range(restarts):
        y0 = rng.standard_normal(n)
        r0 = float(np.linalg.norm(resid(y0)))
        if r0 <= tol:
            cand = (r0, y0 / np.linalg.norm(y0), 0)
        else:
            sol = least_squares(resid, y0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=500)
            y = sol.x / np.linalg.norm(sol.x)
            cand = (float(np.linalg.norm(resid(y))), y, int(sol.nfev))
        total += cand[2]
        if best is None or cand[0] < best[0]:
            best = cand
        if best[0] <= tol:
            break
    if best is None or best[0] > tol:
        return None
    d = (UnorientedDirection.from_vector(best[1]) if spec.unoriented
         else OrientedDirection.from_vector(best[1]))
    return ZeroCertificate(d, best[0], total, "heuristic-highdim", tol=tol)


def find_zero(spec: ConfigSpec, tol: float | None = None, **kw) -> ZeroCertificate | None:
    """Dispatch to the finder matching the configuration's direction space."""
    n = spec.direction_dim
    if n == 2:
        if not spec.unoriented:
            raise ConfigError("oriented planar configurations need not have a zero")
        return find_zero_unoriented_2d(spec, tol or TOL_2D, **kw)
    if n == 3:
        if spec.unoriented:
            return find_zero_unoriented_3d(spec, tol or TOL_S2, **kw)
        return find_zero_oriented_s2(spec, tol or TOL_S2, **kw)
    return find_zero_highdim(spec, tol or TOL_2D, **kw)


# ---------------------------------------------------------------------------
# degree and winding
# ---------------------------------------------------------------------------

def signed_solid_angles(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Signed solid angle of unit-vector triangles (Van Oosterom-Strackee)."""
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = 1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return 2.0 * np.arctan2(num, den)


def map_degree_s2(spec: ConfigSpec | Callable[[np.ndarray], np.ndarray], depth: int = START_DEPTH,
                  margin: float = 0.1) -> DegreeReport:
    """Degree of x -> m(x)/|m(x)| from the signed area of the image mesh."""
    verts, faces = icosphere(depth)
    raw = spec._eval_vectors(verts) if isinstance(spec, ConfigSpec) else np.asarray(spec(verts), dtype=float)
    if raw.shape != verts.shape:
        raise ConfigError("degree needs a map S^2 -> R^3")
    mag = np.linalg.norm(raw, axis=1)
    min_mag = float(mag.min())
    if not min_mag > 1e-12:
        return DegreeReport(0, depth, min_mag, "low-confidence", math.nan, math.nan, len(faces))
    img = raw / mag[:, None]
    a, b, c = img[faces[:, 0]], img[faces[:, 1]], img[faces[:, 2]]
    value = float(signed_solid_angles(a, b, c).sum() / (4.0 * math.pi))
    dots = np.clip(np.concatenate([np.einsum("ij,ij->i", a, b), np.einsum("ij,ij->i", b, c),
                                   np.einsum("ij,ij->i", c, a)]), -1.0, 1.0)
    max_edge = float(np.arccos(dots.min()))
    degree = int(round(value))
    ok = abs(value - degree) <= margin and max_edge < 0.5 * math.pi
    return DegreeReport(degree, depth, min_mag, "certified" if ok else "low-confidence", value,
                        max_edge, len(faces))


class WindingError(ValueError):
    """The sampled loop is too coarse or passes through the origin."""


def winding_number(loop) -> int:
    """Winding number about the origin of a closed polygonal loop (N, 2)."""
    if np.iscomplexobj(loop):
        loop = np.asarray(loop).reshape(-1)
        loop = np.stack([loop.real, loop.imag], axis=1)
    z = np.asarray(loop, dtype=float)
    if z.ndim != 2 or z.shape[1] != 2 or len(z) < 3:
        raise WindingError("loop must be an (N, 2) array with N >= 3")
    if np.any(np.linalg.norm(z, axis=1) == 0.0):
        raise WindingError("loop passes through the origin")
    nxt = np.roll(z, -1, axis=0)
    cross = z[:, 0] * nxt[:, 1] - z[:, 1] * nxt[:, 0]
    dot = np.einsum("ij,ij->i", z, nxt)
    turn = np.arctan2(cross, dot)
    if np.any(np.abs(turn) >= math.pi - 1e-9):
        raise WindingError("adjacent samples subtend an angle >= pi; refine the loop")
    total = turn.sum() / TWO_PI
    w = int(round(total))
    if abs(total - w) > 1e-6:
        raise WindingError(f"turning total {total} is not integral")
    return w
