"""Static SVG figures; every file carries its run manifest in the SVG metadata."""
from __future__ import annotations

import io
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .configs import ConfigSpec, frame  # noqa: E402
from .outputs import RunManifest, atomic_write_bytes, to_jsonable  # noqa: E402

plt.rcParams["svg.hashsalt"] = "kakeya-lab"


def save_svg(fig, path, manifest: RunManifest | None = None, title: str = "") -> Path:
    meta = {"Title": title or (manifest.subcommand if manifest else "kakeya-lab"), "Date": None}
    if manifest is not None:
        meta["Description"] = json.dumps(to_jsonable(manifest.to_dict()), sort_keys=True)
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata=meta, bbox_inches="tight")
    plt.close(fig)
    return atomic_write_bytes(path, buf.getvalue())


def _segments(spec: ConfigSpec, R: float, count: int):
    theta = np.linspace(0.0, spec.period, count, endpoint=False)
    base = spec._eval_angles(theta)
    e, _ = frame(theta)
    return theta, base, e, R / 2.0


def plot_config_2d(spec: ConfigSpec, path, manifest: RunManifest | None = None, *, target=None,
                   certificate: dict | None = None, R: float = 4.0, count: int = 96,
                   box: tuple[float, float, float, float] | None = None) -> Path:
    """Sampled lines of a planar configuration, the target and the certified line."""
    theta, base, e, half = _segments(spec, R, count)
    fig, ax = plt.subplots(figsize=(6, 6))
    colors = plt.cm.twilight(theta / spec.period)
    for b, d, c in zip(base, e, colors):
        ax.plot([b[0] - half * d[0], b[0] + half * d[0]], [b[1] - half * d[1], b[1] + half * d[1]],
                color=c, lw=0.6, alpha=0.7)
    dense = spec._eval_angles(np.linspace(0.0, spec.period, 512))
    ax.plot(dense[:, 0], dense[:, 1], "k-", lw=1.2, label="sigma")
    if target is not None:
        ax.plot(*np.asarray(target)[:2], "r*", ms=12, label="target")
    if certificate and "direction" in certificate and "angle" in certificate:
        th = certificate["angle"]
        b = spec._eval_angles(np.array([th]))[0]
        d = np.array(certificate["direction"])
        span = max(R, 2.0 * abs(certificate.get("t", 0.0)) + 1.0)
        ax.plot([b[0] - span * d[0], b[0] + span * d[0]], [b[1] - span * d[1], b[1] + span * d[1]],
                "r-", lw=1.8, label="certified line")
    if box is not None:
        ax.set_xlim(box[0], box[1])
        ax.set_ylim(box[2], box[3])
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title("planar line configuration")
    return save_svg(fig, path, manifest)


def plot_needle_set(spec: ConfigSpec, R: float, path, manifest: RunManifest | None = None, *,
                    box=None, estimate: float | None = None, ci: float | None = None,
                    count: int = 720) -> Path:
    theta, base, e, half = _segments(spec, R, count)
    fig, ax = plt.subplots(figsize=(6, 6))
    for b, d in zip(base, e):
        ax.plot([b[0] - half * d[0], b[0] + half * d[0]], [b[1] - half * d[1], b[1] + half * d[1]],
                color="tab:blue", lw=0.4, alpha=0.5)
    if box is not None:
        x0, x1, y0, y1 = box
        ax.plot([x0, x1, x1, x0, x0], [y0, y0, y1, y1, y0], "k--", lw=0.8)
    title = f"R = {R:g} needle set"
    if estimate is not None:
        title += f": area {estimate:.4f}" + (f" +/- {ci:.4f}" if ci is not None else "")
    ax.set_title(title)
    ax.set_aspect("equal")
    return save_svg(fig, path, manifest)


def plot_cylinder_lift(samples: np.ndarray, path, manifest: RunManifest | None = None, *,
                       hit: dict | None = None) -> Path:
    """The lifted path p in C with the kernel 2 pi i Z and the certified line."""
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(samples.real, samples.imag, "k-", lw=1.0, label="lifted path")
    lo, hi = samples.imag.min(), samples.imag.max()
    ks = np.arange(math.floor(lo / (2 * math.pi)) - 1, math.ceil(hi / (2 * math.pi)) + 2)
    ax.plot(np.zeros_like(ks), 2 * math.pi * ks, "bo", ms=4, label="kernel 2 pi i n")
    if hit is not None:
        t, k, s = hit["path_t"], hit["kernel_index"], hit["s"]
        e = np.exp(1j * t)
        p = 2j * math.pi * k - s * e
        seg = p + np.linspace(-1.5 * abs(s) - 1, 1.5 * abs(s) + 1, 2) * e
        ax.plot(seg.real, seg.imag, "r-", lw=1.5, label="certified line")
        ax.plot([0], [2 * math.pi * k], "r*", ms=12)
    ax.set_aspect("equal")
    ax.legend(fontsize=8)
    ax.set_title("cylinder identity certificate")
    return save_svg(fig, path, manifest)


def plot_cover_heatmap(table: np.ndarray, elements: list[int], labels: list[str], path,
                       manifest: RunManifest | None = None, title: str = "") -> Path:
    """Cayley table with the cells whose product lies in E highlighted."""
    m = table.shape[0]
    member = np.zeros(m, dtype=bool)
    member[elements] = True
    fig, ax = plt.subplots(figsize=(min(12, 2 + 0.3 * m), min(12, 2 + 0.3 * m)))
    ax.imshow(member[table], cmap="Blues", vmin=0, vmax=1.4, interpolation="nearest")
    if m <= 32:
        ax.set_xticks(range(m), labels, rotation=90, fontsize=6)
        ax.set_yticks(range(m), labels, fontsize=6)
        for i in np.flatnonzero(member):
            ax.get_yticklabels()[i].set_color("tab:red")
            ax.get_xticklabels()[i].set_color("tab:red")
    ax.set_title(title or f"|E| = {len(elements)} of {m}")
    return save_svg(fig, path, manifest)


def plot_sphere_curves(curves: list[np.ndarray], path, manifest: RunManifest | None = None,
                       points: np.ndarray | None = None, title: str = "quotient curves") -> Path:
    """Curves on S^2 in longitude/latitude coordinates."""
    fig, ax = plt.subplots(figsize=(8, 4))
    for c in curves:
        lon = np.degrees(np.arctan2(c[:, 1], c[:, 0]))
        lat = np.degrees(np.arcsin(np.clip(c[:, 2], -1.0, 1.0)))
        jumps = np.flatnonzero(np.abs(np.diff(lon)) > 180.0) + 1
        for part_lon, part_lat in zip(np.split(lon, jumps), np.split(lat, jumps)):
            ax.plot(part_lon, part_lat, "-", lw=1.2)
        if np.ptp(c, axis=0).max() < 1e-9:
            ax.plot(lon[:1], lat[:1], "o", ms=6)
    if points is not None:
        ax.plot(np.degrees(np.arctan2(points[:, 1], points[:, 0])),
                np.degrees(np.arcsin(np.clip(points[:, 2], -1, 1))), "r*", ms=10)
    ax.set_xlim(-180, 180)
    ax.set_ylim(-90, 90)
    ax.set_xlabel("longitude (deg)")
    ax.set_ylabel("latitude (deg)")
    ax.set_title(title)
    return save_svg(fig, path, manifest)
