"""Coverage certificates, membership and needle-set measure in R^n."""
from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .configs import (ConfigError, ConfigSpec, Direction, OrientedDirection, TangentCircle,
                      UnorientedDirection, frame, translate_config)
from .topo_zero import (TOL_2D, TOL_S2, ZeroCertificate, _bisect, find_zero_highdim,
                        find_zero_oriented_s2, find_zero_unoriented_2d, find_zero_unoriented_3d)

MEMBERSHIP_CELLS = 4096
REFINE = 4
DEFAULT_SAMPLES = 100_000
# direction grid for batched Monte Carlo membership (zeros interpolated, not bisected)
AREA_CELLS = 1024
Z95 = 1.959963984540054


@dataclass
class CoverCertificate:
    target: np.ndarray
    direction: Direction | None
    t: float
    residual: float
    method: str
    status: str = "covered"
    tol: float = 0.0
    note: str = ""
    zero: ZeroCertificate | None = None

    @property
    def covered(self) -> bool:
        return self.status == "covered"

    def to_dict(self) -> dict:
        d = {"status": self.status, "target": np.asarray(self.target).tolist(), "t": self.t,
             "residual": self.residual, "method": self.method, "tol": self.tol}
        if self.direction is not None:
            d["direction"] = list(self.direction.vector)
            if self.direction.dim == 2:
                d["angle"] = self.direction.angle
        if self.note:
            d["note"] = self.note
        if self.zero is not None and self.zero.index_sum is not None:
            d["index_sum"] = self.zero.index_sum
        return d


def _certificate(spec: ConfigSpec, x: np.ndarray, zero: ZeroCertificate | None, tol: float,
                 method: str) -> CoverCertificate:
    if zero is None or zero.direction is None:
        return CoverCertificate(x, None, math.nan, math.inf, method, "not-found", tol,
                                "heuristic search found no zero; this is not a proof of non-coverage")
    e = zero.direction.as_array()
    base = spec.evaluate(zero.direction.angle if spec.direction_dim == 2 else e)
    t = float(np.dot(x - base, e))
    residual = float(np.linalg.norm(x - base - t * e))
    status = "covered" if residual <= tol else "not-found"
    return CoverCertificate(x, zero.direction, t, residual, method, status, tol, zero.note, zero)


def certify_cover_unoriented(spec: ConfigSpec, x, tol: float | None = None, **kw) -> CoverCertificate:
    """Witness that x lies on one of the lines of an unoriented configuration.

    The configuration is shifted by -x; a zero of its perpendicular section is
    a line through the origin of the shifted family, i.e. through x.
    """
    if not spec.unoriented:
        raise ConfigError("configuration is oriented; use certify_cover_oriented")
    x = np.asarray(x, dtype=float).reshape(-1)
    shifted = translate_config(spec, x)
    n = spec.direction_dim
    if spec.dim != n:
        raise ConfigError("configuration must map directions of R^n into R^n")
    if n == 2:
        tol = tol or TOL_2D
        zero = find_zero_unoriented_2d(shifted, tol, **kw)
    elif n == 3:
        tol = tol or TOL_S2
        zero = find_zero_unoriented_3d(shifted, tol, **kw)
    else:
        tol = tol or TOL_2D
        zero = find_zero_highdim(shifted, tol, **kw)
    return _certificate(spec, x, zero, tol, zero.method if zero else "heuristic-highdim")


def certify_cover_oriented(spec: ConfigSpec, x, tol: float | None = None, **kw) -> CoverCertificate:
    """As :func:`certify_cover_unoriented` for oriented configurations in odd dimension."""
    x = np.asarray(x, dtype=float).reshape(-1)
    n = spec.direction_dim
    if n % 2 == 0:
        raise ConfigError("oriented coverage holds only in odd dimension "
                          "(see tangent_circle_config for the even-dimensional failure)")
    if spec.dim != n:
        raise ConfigError("configuration must map directions of R^n into R^n")
    shifted = translate_config(spec, x)
    if n == 3:
        tol = tol or TOL_S2
        zero = find_zero_oriented_s2(shifted, tol, **kw)
    else:
        tol = tol or TOL_2D
        zero = find_zero_highdim(shifted, tol, **kw)
        if zero is not None:
            zero.direction = OrientedDirection.from_vector(zero.direction.vector)
    return _certificate(spec, x, zero, tol, zero.method if zero else "heuristic-highdim")


def tangent_circle_config(C: float, orientation: int = 1) -> TangentCircle:
    if not C > 0:
        raise ConfigError("radius must be positive")
    return TangentCircle(float(C), orientation)


# ---------------------------------------------------------------------------
# planar membership
# ---------------------------------------------------------------------------

@dataclass
class Witness:
    angle: float
    t: float
    residual: float

    def to_dict(self) -> dict:
        return {"angle": self.angle, "t": self.t, "residual": self.residual}


@dataclass
class MembershipResult:
    covered: bool
    witnesses: list[Witness]
    R: float
    cells: int
    target: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __bool__(self) -> bool:
        return self.covered

    def to_dict(self) -> dict:
        return {"covered": self.covered, "R": self.R if math.isfinite(self.R) else "inf",
                "grid_cells": self.cells, "target": np.asarray(self.target).tolist(),
                "witnesses": [w.to_dict() for w in self.witnesses]}


def _s_and_t(spec: ConfigSpec, x: np.ndarray, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    e, n = frame(theta)
    d = x - spec._eval_angles(theta)
    return np.einsum("ij,ij->i", d, n), np.einsum("ij,ij->i", d, e)


def _refine_extremum(f, lo: float, hi: float, sign: float, iters: int = 80) -> float:
    """Golden-section search for the minimum of sign * f on [lo, hi]."""
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = sign * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = sign * f(d)
        if b - a < 1e-15:
            break
    return 0.5 * (a + b)


def zeros_of_normal(spec: ConfigSpec, x, tol: float = TOL_2D,
                    cells: int = MEMBERSHIP_CELLS) -> list[Witness]:
    """All zeros of s(theta) = (x - sigma(theta)).n(theta) over the direction space.

    Sign changes are located on a grid refined x4 around each change and then
    bisected; touching zeros (local extrema of s with |s| <= tol) are picked up
    by golden-section refinement.
    """
    x = np.asarray(x, dtype=float)
    period = spec.period
    theta = np.linspace(0.0, period, cells + 1)
    s, _ = _s_and_t(spec, x, theta)

    def s1(t: float) -> float:
        return float(_s_and_t(spec, x, np.array([t]))[0][0])

    found: list[float] = []
    h = period / cells
    for i in range(cells):
        if s[i] == 0.0:
            found.append(theta[i])
            continue
        if s[i] * s[i + 1] < 0:
            sub = np.linspace(theta[i], theta[i + 1], REFINE + 1)
            ss, _ = _s_and_t(spec, x, sub)
            for j in range(REFINE):
                if ss[j] == 0.0:
                    found.append(sub[j])
                elif ss[j] * ss[j + 1] < 0:
                    found.append(_bisect(s1, sub[j], sub[j + 1], ss[j], tol)[0])
    # touching zeros: interior local extrema of s that come within tol of zero
    # s(period) = s(0) for oriented specs and -s(0) for unoriented ones
    wrap = 1.0 if not spec.unoriented else -1.0
    ring = np.concatenate([[wrap * s[cells - 1]], s[:cells], [s[cells]]])
    for i in range(cells):
        left, mid, right = ring[i], ring[i + 1], ring[i + 2]
        if (mid - left) * (right - mid) > 0 or mid == 0.0:
            continue
        # the dip between nodes is bounded by the second difference
        if abs(mid) > tol + abs(left - 2.0 * mid + right):
            continue
        sign = 1.0 if mid > 0 else -1.0
        t = _refine_extremum(s1, theta[i] - h, theta[i] + h, sign)
        if abs(s1(t)) <= tol:
            found.append(t)
    # the seam: theta = period is the same direction as 0 (up to reversal of n)
    out: list[Witness] = []
    for t in sorted(set(float(v) % period for v in found)):
        if out and min(abs(t - out[-1].angle), period - abs(t - out[-1].angle)) < 1e-12:
            continue
        sv, tv = _s_and_t(spec, x, np.array([t]))
        out.append(Witness(t, float(tv[0]), float(abs(sv[0]))))
    if len(out) > 1 and period - out[-1].angle + out[0].angle < 1e-12:
        out.pop()
    return [w for w in out if w.residual <= tol]


def membership_test_2d(spec: ConfigSpec, x, R: float = math.inf, tol: float = TOL_2D,
                       cells: int = MEMBERSHIP_CELLS) -> MembershipResult:
    """Is x on the R-elongated needle set (R = inf: on some full line)?"""
    if spec.direction_dim != 2 or spec.dim != 2:
        raise ConfigError("membership_test_2d needs a planar configuration")
    x = np.asarray(x, dtype=float).reshape(-1)
    zeros = zeros_of_normal(spec, x, tol, cells)
    witnesses = [w for w in zeros if abs(w.t) <= R / 2.0 + tol]
    return MembershipResult(bool(witnesses), witnesses, R, cells, x)


def line_distance_infimum(spec: ConfigSpec, x=(0.0, 0.0), cells: int = MEMBERSHIP_CELLS) -> Witness:
    """Closest approach of the lines sigma(theta) + R e(theta) to x.

    Returns the minimising angle, the foot parameter t and the distance
    |s(theta)| as the witness residual.
    """
    if spec.direction_dim != 2 or spec.dim != 2:
        raise ConfigError("line_distance_infimum needs a planar configuration")
    x = np.asarray(x, dtype=float).reshape(-1)
    theta = np.linspace(0.0, spec.period, cells + 1)
    s, _ = _s_and_t(spec, x, theta)
    i = int(np.argmin(np.abs(s[:-1])))
    h = spec.period / cells

    def absdist(t: float) -> float:
        return abs(float(_s_and_t(spec, x, np.array([t]))[0][0]))

    best = _refine_extremum(absdist, theta[i] - h, theta[i] + h, 1.0) % spec.period
    if absdist(best) > abs(s[i]):
        best = float(theta[i])
    sv, tv = _s_and_t(spec, x, np.array([best]))
    return Witness(float(best), float(tv[0]), float(abs(sv[0])))


@dataclass
class ElongationReport:
    R_min: float | None = None
    witness: Witness | None = None
    estimate: float | None = None
    ci_halfwidth: float | None = None
    samples: int | None = None
    R: float | None = None
    seed: int | None = None
    box: tuple[float, float, float, float] | None = None
    hits: int | None = None

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if v is not None and k != "witness"}
        if self.R is not None and not math.isfinite(self.R):
            d["R"] = "inf"
        if self.witness is not None:
            d["witness"] = self.witness.to_dict()
        return d


def elongation_required(spec: ConfigSpec, x, tol: float = TOL_2D,
                        cells: int = MEMBERSHIP_CELLS) -> ElongationReport:
    """Smallest R whose R-elongation contains x: twice the least |t| over all witnesses."""
    if not spec.unoriented or spec.direction_dim != 2:
        raise ConfigError("elongation_required needs an unoriented planar configuration")
    zeros = zeros_of_normal(spec, x, tol, cells)
    if not zeros:
        # cannot happen for a valid unoriented spec; fall back to the certified zero
        cert = certify_cover_unoriented(spec, x, tol)
        zeros = [Witness(cert.direction.angle, cert.t, cert.residual)]
    best = min(zeros, key=lambda w: abs(w.t))
    return ElongationReport(R_min=2.0 * abs(best.t), witness=best)


# ---------------------------------------------------------------------------
# Monte Carlo area
# ---------------------------------------------------------------------------

def _threads() -> int:
    try:
        return max(1, int(os.environ.get("KAKEYA_LAB_THREADS", "1")))
    except ValueError:
        return 1


def needle_bounding_box(spec: ConfigSpec, R: float, cells: int = MEMBERSHIP_CELLS,
                        inflate: float = 0.01) -> tuple[float, float, float, float]:
    if not math.isfinite(R):
        raise ConfigError("full lines are unbounded; pass an explicit box for R = inf")
    theta = np.linspace(0.0, spec.period, cells + 1)
    base = spec._eval_angles(theta)
    e, _ = frame(theta)
    ends = np.vstack([base + 0.5 * R * e, base - 0.5 * R * e])
    lo, hi = ends.min(axis=0), ends.max(axis=0)
    pad = inflate * np.maximum(hi - lo, 1e-12) / 2.0
    return (float(lo[0] - pad[0]), float(hi[0] + pad[0]), float(lo[1] - pad[1]), float(hi[1] + pad[1]))


def _batch_membership(base: np.ndarray, e: np.ndarray, n: np.ndarray, pts: np.ndarray,
                      half: float) -> np.ndarray:
    """Vectorised membership for many points on a shared direction grid.

    Zero positions are linearly interpolated inside each sign-change cell and
    t is evaluated only there.
    """
    c = np.einsum("ij,ij->i", base, n)
    a = np.einsum("ij,ij->i", base, e)
    s = pts @ n.T
    s -= c
    neg = s < 0
    rows, cols = np.nonzero(neg[:, :-1] != neg[:, 1:])
    sa, sb = s[rows, cols], s[rows, cols + 1]
    w = sa / (sa - sb)
    p = pts[rows]
    ta = np.einsum("ij,ij->i", p, e[cols]) - a[cols]
    tb = np.einsum("ij,ij->i", p, e[cols + 1]) - a[cols + 1]
    inside = np.abs(ta + w * (tb - ta)) <= half
    out = np.zeros(len(pts), dtype=bool)
    out[rows[inside]] = True
    return out


def needle_area_2d(spec: ConfigSpec, R: float, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                   box: tuple[float, float, float, float] | None = None,
                   cells: int = AREA_CELLS, chunk: int = 4000) -> ElongationReport:
    """Monte Carlo area of the R-elongated needle set with a normal-approximation 95% CI."""
    if samples < 100:
        raise ConfigError("at least 100 samples are required")
    if spec.direction_dim != 2 or spec.dim != 2:
        raise ConfigError("needle_area_2d needs a planar configuration")
    if box is None:
        box = needle_bounding_box(spec, R, cells)
    x0, x1, y0, y1 = box
    rng = np.random.default_rng(seed)
    pts = np.column_stack([rng.uniform(x0, x1, samples), rng.uniform(y0, y1, samples)])
    theta = np.linspace(0.0, spec.period, cells + 1)
    base = spec._eval_angles(theta)
    e, n = frame(theta)
    half = R / 2.0 if math.isfinite(R) else math.inf
    chunks = [pts[i:i + chunk] for i in range(0, samples, chunk)]

    def work(p):
        return int(_batch_membership(base, e, n, p, half).sum())

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            hits = sum(pool.map(work, chunks))
    else:
        hits = sum(map(work, chunks))
    area_box = (x1 - x0) * (y1 - y0)
    p = hits / samples
    return ElongationReport(estimate=area_box * p,
                            ci_halfwidth=Z95 * area_box * math.sqrt(p * (1.0 - p) / samples),
                            samples=samples, R=R, seed=seed, box=box, hits=hits)


def spec_hash(spec: ConfigSpec) -> str:
    blob = json.dumps(spec.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def area_csv_row(spec: ConfigSpec, report: ElongationReport) -> dict:
    return {"spec_hash": spec_hash(spec),
            "R": report.R if math.isfinite(report.R) else "inf",
            "estimate": report.estimate, "ci": report.ci_halfwidth,
            "samples": report.samples, "seed": report.seed}
