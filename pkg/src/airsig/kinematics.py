"""Kinematic synthesis: give a bare 3D trajectory a human-like velocity.

The path is re-interpolated at uniform arc-length steps, salient points
are found as multiscale curvature peaks in the xy/xz/yz projections,
moment-matched lognormals are laid between consecutive salient points,
and the path is resampled by integrating the synthesized speed.  The same
primitives back a lightweight parameter estimator used for duplication.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks, peak_widths

from .model import (Trajectory3D, lognormal_area, snr_t, snr_v,
                    unit_lognormal)
from .plan import ActionPlan, fit_planar_arc, cpg_intervals
from .synthesis import plan_to_signature, render_full_signature

CURVATURE_FLOOR = 1e-12
PEAK_RATIO_DIVISOR = 45.0
N_SCALES = 12

_PLANE_AXES = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}


@dataclass(frozen=True, eq=False)
class DensePath3D:
    """Polyline re-interpolated at (approximately) uniform arc-length steps."""

    points: np.ndarray            # (M, 3)
    cumulative_length: np.ndarray  # (M,) arc length prefix, [0 .. Ls]
    step: float                    # nominal spacing

    @property
    def length(self) -> float:
        return float(self.cumulative_length[-1])

    def __len__(self) -> int:
        return len(self.points)

    def position_at(self, s):
        """Position(s) at arc length s by linear interpolation."""
        s = np.asarray(s, dtype=float)
        return np.column_stack([np.interp(s, self.cumulative_length, self.points[:, a])
                                for a in range(3)])


@dataclass(frozen=True, eq=False)
class SalientPointSet:
    """Sorted dense-path indices of curvature peaks, endpoints included."""

    indices: np.ndarray
    provenance: dict   # index -> frozenset of plane tags ("xy", "xz", "yz", "end")

    def __len__(self) -> int:
        return len(self.indices)


def _polyline_arclength(points: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def densify_path(source, step: float = 1.0) -> DensePath3D:
    """Re-interpolate a trajectory or (N, 3) array at uniform arc length.

    Duplicate consecutive points are removed first; the realized step is
    Ls / round(Ls / step) so the spacing stays uniform.
    """
    pts = source.points if isinstance(source, Trajectory3D) else np.asarray(source, dtype=float)
    if len(pts) < 2:
        raise ValueError("need at least 2 points")
    keep = np.concatenate([[True], np.linalg.norm(np.diff(pts, axis=0), axis=1) > 0.0])
    pts = pts[keep]
    if len(pts) < 2:
        raise ValueError("path has zero total length")
    cum = _polyline_arclength(pts)
    total = float(cum[-1])
    n = max(1, int(round(total / step)))
    grid = np.linspace(0.0, total, n + 1)
    dense = np.column_stack([np.interp(grid, cum, pts[:, a]) for a in range(3)])
    return DensePath3D(points=dense,
                       cumulative_length=_polyline_arclength(dense),
                       step=total / n)


def plane_curvature(path: DensePath3D, plane: str, scale: int) -> np.ndarray:
    """Planar curvature |y''x' - x''y'| / (x'^2 + y'^2)^(3/2).

    Derivatives are central differences spanning `scale` points each side;
    the first/last `scale` values repeat the nearest interior value.
    """
    if scale < 1:
        raise ValueError("scale must be >= 1")
    ax, ay = _PLANE_AXES[plane]
    m = len(path)
    if m <= 2 * scale:
        raise ValueError("path too short for scale %d" % scale)
    x = path.points[:, ax]
    y = path.points[:, ay]
    h = float(scale)
    sl_p = slice(2 * scale, m)
    sl_m = slice(0, m - 2 * scale)
    sl_c = slice(scale, m - scale)
    dx = (x[sl_p] - x[sl_m]) / (2.0 * h)
    dy = (y[sl_p] - y[sl_m]) / (2.0 * h)
    ddx = (x[sl_p] - 2.0 * x[sl_c] + x[sl_m]) / (h * h)
    ddy = (y[sl_p] - 2.0 * y[sl_c] + y[sl_m]) / (h * h)
    denom = np.maximum((dx * dx + dy * dy) ** 1.5, CURVATURE_FLOOR)
    kappa_core = np.abs(ddy * dx - ddx * dy) / denom
    kappa = np.empty(m)
    kappa[sl_c] = kappa_core
    kappa[:scale] = kappa_core[0]
    kappa[m - scale:] = kappa_core[-1]
    return kappa


def _summed_curvature(path: DensePath3D, plane: str) -> np.ndarray:
    m = len(path)
    scales = np.unique(np.round(np.linspace(1, m // 2, N_SCALES)).astype(int))
    scales = scales[(scales >= 1) & (scales <= (m - 1) // 2)]
    c = np.zeros(m)
    for s in scales:
        c += plane_curvature(path, plane, int(s))
    return c


def _plane_peaks(c: np.ndarray, flat_floor: float) -> np.ndarray:
    spread = float(c.max() - c.min())
    # below the floor the projection is flat and any variation is roundoff
    if spread <= flat_floor:
        return np.array([], dtype=int)
    peaks, props = find_peaks(c, prominence=0.0)
    if len(peaks) == 0:
        return peaks
    with warnings.catch_warnings():
        # plateau peaks report width 0; they are floored below anyway
        warnings.simplefilter("ignore")
        widths = peak_widths(c, peaks, rel_height=0.5)[0]
    heights = props["prominences"]
    good = heights / np.maximum(widths, 1.0) > spread / PEAK_RATIO_DIVISOR
    return peaks[good]


def detect_salient_points(path: DensePath3D) -> SalientPointSet:
    """Union of per-plane multiscale curvature peaks plus both endpoints.

    Points closer than 2 samples are merged, keeping the one with the
    largest total summed curvature (endpoints always survive).
    """
    m = len(path)
    if m < 24:
        raise ValueError("path too short for salient point detection")
    # summed-curvature spread of an arc with radius 1000x the path length
    flat_floor = 1e-3 * N_SCALES / (m * path.step)
    tags: dict[int, set] = {0: {"end"}, m - 1: {"end"}}
    total_c = np.zeros(m)
    for plane in ("xy", "xz", "yz"):
        c = _summed_curvature(path, plane)
        total_c += c
        for idx in _plane_peaks(c, flat_floor):
            tags.setdefault(int(idx), set()).add(plane)

    merged: list[int] = []
    for idx in sorted(tags):
        if merged and idx - merged[-1] < 2:
            prev = merged[-1]
            if "end" in tags[prev] or idx == m - 1:
                winner = prev if "end" in tags[prev] else idx
            else:
                winner = prev if total_c[prev] >= total_c[idx] else idx
            loser = idx if winner == prev else prev
            tags.setdefault(winner, set()).update(tags.pop(loser))
            merged[-1] = winner
        else:
            merged.append(idx)
    if merged[-1] != m - 1:
        merged.append(m - 1)
    indices = np.array(sorted(set(merged)), dtype=int)
    return SalientPointSet(indices=indices,
                           provenance={i: frozenset(tags.get(i, set())) for i in indices})


def moments_to_lognormal(m_mean: float, v_var: float):
    """(mu, sigma2) of the lognormal with the given mean and variance."""
    if m_mean <= 0.0 or v_var <= 0.0:
        raise ValueError("moments must be positive")
    sigma2 = float(np.log1p(v_var / (m_mean * m_mean)))
    mu = float(np.log(m_mean) - 0.5 * sigma2)
    return mu, sigma2


@dataclass(frozen=True, eq=False)
class VelocityProfile:
    """Sum of amplitude-weighted lognormals with an area correction omega."""

    D: np.ndarray
    t0: np.ndarray
    mu: np.ndarray
    sigma2: np.ndarray
    omega: float
    duration: float

    @property
    def n_strokes(self) -> int:
        return len(self.D)

    def speed(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        v = np.zeros_like(t)
        for j in range(self.n_strokes):
            v += self.D[j] * unit_lognormal(t, self.t0[j], self.mu[j], self.sigma2[j])
        return self.omega * v

    def distance(self, t) -> np.ndarray:
        """Distance traveled by time t: the integral of speed from 0."""
        t = np.asarray(t, dtype=float)
        d = np.zeros_like(t)
        for j in range(self.n_strokes):
            w0 = lognormal_area(0.0, self.t0[j], self.mu[j], self.sigma2[j])
            d += self.D[j] * (lognormal_area(t, self.t0[j], self.mu[j], self.sigma2[j]) - w0)
        return self.omega * d


def synthesize_velocity(sps: SalientPointSet, path: DensePath3D, seed,
                        mean_gap: float = 0.1, sd_gap: float = 0.005) -> VelocityProfile:
    """Moment-matched lognormal speed between consecutive salient points.

    Salient points get rhythmic timestamps, each segment's lognormal mean
    sits at the segment center (in stroke-local time, onset 0.5 s before
    the segment starts) with sd = duration / 4, and omega rescales the
    total area to the path length.
    """
    if len(sps) < 2:
        raise ValueError("need at least 2 salient points")
    rng = np.random.default_rng(seed)
    ts = np.concatenate([[0.0], np.cumsum(cpg_intervals(len(sps) - 1, rng,
                                                        mean_gap, sd_gap))])
    seg_len = np.diff(path.cumulative_length[sps.indices])
    t0 = ts[:-1] - 0.5
    mu = np.empty(len(seg_len))
    sigma2 = np.empty(len(seg_len))
    for j in range(len(seg_len)):
        center = 0.5 * (ts[j] + ts[j + 1])
        sd = 0.25 * (ts[j + 1] - ts[j])
        mu[j], sigma2[j] = moments_to_lognormal(center - t0[j], sd * sd)

    duration = max(t0[j] + np.exp(mu[j] + 5.0 * np.sqrt(sigma2[j]))
                   for j in range(len(seg_len)))
    raw_area = sum(seg_len[j] * (lognormal_area(duration, t0[j], mu[j], sigma2[j])
                                 - lognormal_area(0.0, t0[j], mu[j], sigma2[j]))
                   for j in range(len(seg_len)))
    omega = path.length / float(raw_area)
    return VelocityProfile(D=seg_len, t0=t0, mu=mu, sigma2=sigma2,
                           omega=omega, duration=float(duration))


def resample_with_velocity(path: DensePath3D, vp: VelocityProfile,
                           fm: float) -> Trajectory3D:
    """Sample the path at the arc lengths the velocity profile dictates."""
    if fm <= 0.0:
        raise ValueError("fm must be positive")
    t = np.arange(int(np.floor(vp.duration * fm)) + 1) / fm
    d = vp.distance(t)
    if np.any(d > path.length * 1.005):
        raise ValueError("velocity profile overruns the path length")
    d = np.minimum(d, path.length)
    return Trajectory3D(times=t, points=path.position_at(d), fm=fm)


def synthesize_kinematics(source, fm: float, seed, step: float | None = None):
    """Full KS pipeline for a bare path: returns (trajectory, profile, sps)."""
    pts = source.points if isinstance(source, Trajectory3D) else np.asarray(source, dtype=float)
    if step is None:
        step = _default_step(pts)
    dense = densify_path(pts, step)
    sps = detect_salient_points(dense)
    vp = synthesize_velocity(sps, dense, seed)
    return resample_with_velocity(dense, vp, fm), vp, sps


def _default_step(pts: np.ndarray) -> float:
    total = float(_polyline_arclength(np.asarray(pts, dtype=float))[-1])
    if total <= 0.0:
        raise ValueError("path has zero total length")
    return total / 1024.0


def _segment_midpoint(points: np.ndarray, i0: int, i1: int) -> np.ndarray:
    """Interior point farthest from the chord (chord middle if none)."""
    p0 = points[i0]
    p1 = points[i1]
    if i1 - i0 < 2:
        return 0.5 * (p0 + p1)
    interior = points[i0 + 1:i1]
    chord = p1 - p0
    nrm = np.linalg.norm(chord)
    if nrm == 0.0:
        return 0.5 * (p0 + p1)
    off = interior - p0
    perp = off - np.outer(off @ (chord / nrm), chord / nrm)
    return interior[int(np.argmax(np.linalg.norm(perp, axis=1)))]


def _observed_speed(traj: Trajectory3D) -> np.ndarray:
    t = traj.times
    vel = np.column_stack([np.gradient(traj.points[:, a], t) for a in range(3)])
    return np.linalg.norm(vel, axis=1)


def _speed_minima_boundaries(traj: Trajectory3D, prominence: float):
    """Stroke boundaries of a timed trajectory: interior speed minima.

    Interior boundary times are refined to sub-sample precision with a
    parabola through the speed valley; trailing dead samples (speed below
    1% of the peak) are trimmed so the last stroke is not stretched.
    """
    t = traj.times
    speed = _observed_speed(traj)
    # movement ends where the path length saturates (99.99% covered)
    cum = _polyline_arclength(traj.points)
    settled = np.nonzero(cum[-1] - cum <= 1e-4 * cum[-1])[0]
    last = int(settled[0]) if len(settled) else len(t) - 1
    last = min(max(last, 2), len(t) - 1)
    minima, _ = find_peaks(-speed[:last + 1], prominence=prominence * speed.max())

    indices = [0]
    times = [float(t[0])]
    for i in minima:
        if i < 2 or last - i < 2 or i - indices[-1] < 2:
            continue
        y0, y1, y2 = speed[i - 1], speed[i], speed[i + 1]
        denom = y0 - 2.0 * y1 + y2
        delta = 0.5 * (y0 - y2) / denom if abs(denom) > 1e-12 else 0.0
        delta = float(np.clip(delta, -0.5, 0.5))
        gap = (t[i + 1] - t[i]) if delta > 0 else (t[i] - t[i - 1])
        indices.append(int(i))
        times.append(float(t[i] + delta * gap))
    indices.append(last)
    times.append(float(t[last]))
    return np.asarray(indices, dtype=int), np.asarray(times)


def estimate_parameters(traj: Trajectory3D, step: float | None = None,
                        trust_timing: bool = True, seed=0,
                        fm: float | None = None,
                        minimum_prominence: float = 0.01):
    """Sigma-Lognormal estimate of an observed trajectory.

    With trusted timing, strokes are delimited at the observed speed
    minima and solved from the observed segment timings; without it,
    multiscale-curvature salient points delimit the strokes and rhythmic
    timestamps are drawn.  Either way each segment's arc is fitted through
    its endpoints and its farthest-from-chord interior point.  Returns
    (signature, report) with the SNRs of the reconstruction vs the input.
    """
    if len(traj) < 5:
        raise ValueError("trajectory too short to estimate")
    times = traj.times - traj.times[0]
    shifted = Trajectory3D(times=times, points=traj.points, fm=traj.fm)

    if trust_timing:
        idx, ts = _speed_minima_boundaries(shifted, minimum_prominence)
        points = traj.points
        # boundary targets interpolated at the refined boundary times
        targets = np.column_stack([np.interp(ts, times, points[:, a])
                                   for a in range(3)])
        ts = _force_increasing(ts)
    else:
        if step is None:
            step = _default_step(traj.points)
        dense = densify_path(traj.points, step)
        sps = detect_salient_points(dense)
        if len(sps) < 2:
            raise ValueError("too few salient points")
        idx = sps.indices
        points = dense.points
        targets = points[idx]
        rng = np.random.default_rng(seed)
        ts = np.concatenate([[0.0], np.cumsum(cpg_intervals(len(idx) - 1, rng))])

    # drop boundaries that would create zero-length links
    keep = [0]
    for k in range(1, len(idx)):
        if np.linalg.norm(targets[k] - targets[keep[-1]]) > 1e-9 \
                and ts[k] > ts[keep[-1]]:
            keep.append(k)
    if len(keep) < 2:
        raise ValueError("trajectory collapses to a point")
    idx = idx[keep]
    ts = ts[keep]
    targets = targets[keep]

    midpoints = np.array([_segment_midpoint(points, idx[j], idx[j + 1])
                          for j in range(len(idx) - 1)])
    links = tuple(fit_planar_arc(targets[j], targets[j + 1], midpoints[j])
                  for j in range(len(targets) - 1))
    plan = ActionPlan(targets=targets, midpoints=midpoints, links=links,
                      timestamps=ts)
    sig = plan_to_signature(plan)

    render_fm = fm or traj.fm
    if render_fm is None:
        render_fm = 1.0 / float(np.median(np.diff(times)))
    recon, _ = render_full_signature(sig, render_fm)
    report = {
        "n_salient": len(idx),
        "snr_v": snr_v(shifted, recon),
        "snr_t": snr_t(shifted, recon),
        "path_length": float(_polyline_arclength(traj.points)[-1]),
        "duration": float(ts[-1]),
    }
    return sig, report


def _force_increasing(ts: np.ndarray, min_gap: float = 1e-6) -> np.ndarray:
    out = ts.copy()
    for i in range(1, len(out)):
        if out[i] <= out[i - 1]:
            out[i] = out[i - 1] + min_gap
    return out
