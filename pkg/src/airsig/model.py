"""Core 3D Sigma-Lognormal primitives.

A movement is a time-overlapped sum of strokes.  Each stroke has a
unit-area lognormal speed profile scaled by an amplitude D and a direction
that sweeps a planar arc between start and end azimuth/polar angles.  This
module evaluates strokes, rebuilds velocity and trajectory from a
signature, and scores reconstructions with velocity/trajectory SNRs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import erf

from .plan import ActionPlan

SNR_CAP_DB = 100.0
# tail margin: reconstruction grids run to t0 + exp(mu + TAIL_SIGMAS * sigma)
TAIL_SIGMAS = 5.0


@dataclass(frozen=True)
class LognormalStroke:
    """One stroke: amplitude, lognormal timing and arc direction angles."""

    D: float          # stroke amplitude (path length)
    t0: float         # onset time, s
    mu: float         # log-time delay
    sigma2: float     # log response time, > 0
    theta_s: float    # start azimuth, rad
    theta_e: float    # end azimuth, rad
    phi_s: float      # start polar angle, rad
    phi_e: float      # end polar angle, rad

    def __post_init__(self):
        if self.sigma2 <= 0.0:
            raise ValueError("sigma2 must be positive")
        if self.D <= 0.0:
            raise ValueError("stroke amplitude D must be positive")

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))


@dataclass(frozen=True, eq=False)
class Trajectory3D:
    """Timestamped ordered 3D point sequence."""

    times: np.ndarray       # (N,) seconds
    points: np.ndarray      # (N, 3)
    fm: float | None = None  # sampling rate, when known

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 3 or len(t) != len(p):
            raise ValueError("points must be (N, 3) matching times")
        if len(t) >= 2 and np.any(np.diff(t) <= 0.0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", p)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def path_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))


@dataclass(frozen=True, eq=False)
class SigmaLogSignature:
    """An action plan plus one lognormal stroke per link."""

    plan: ActionPlan
    strokes: tuple

    def __post_init__(self):
        if len(self.strokes) == 0:
            raise ValueError("signature has no strokes")
        if len(self.strokes) != len(self.plan.links):
            raise ValueError("one stroke per plan link required")
        onsets = [s.t0 for s in self.strokes]
        if any(b < a for a, b in zip(onsets, onsets[1:])):
            raise ValueError("stroke onsets must be nondecreasing")

    @property
    def n_strokes(self) -> int:
        return len(self.strokes)


def unit_lognormal(t, t0: float, mu: float, sigma2: float):
    """Unit-area lognormal speed profile; 0 at and before the onset t0."""
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    t = np.asarray(t, dtype=float)
    dt = t - t0
    out = np.zeros_like(dt)
    pos = dt > 0.0
    dtp = dt[pos]
    sigma = np.sqrt(sigma2)
    out[pos] = np.exp(-(np.log(dtp) - mu) ** 2 / (2.0 * sigma2)) \
        / (sigma * np.sqrt(2.0 * np.pi) * dtp)
    return out if out.ndim else float(out)


def lognormal_area(t, t0: float, mu: float, sigma2: float):
    """Fraction of the stroke completed by time t (closed form via erf)."""
    t = np.asarray(t, dtype=float)
    dt = t - t0
    out = np.zeros_like(dt)
    pos = dt > 0.0
    out[pos] = 0.5 * (1.0 + erf((np.log(dt[pos]) - mu) / (np.sqrt(2.0 * sigma2))))
    return out if out.ndim else float(out)


def wrap_angle(d):
    """Reduce an angle difference into [-pi, pi]; +/-pi are preserved."""
    d = np.asarray(d, dtype=float)
    out = d - 2.0 * np.pi * np.round(d / (2.0 * np.pi))
    return out if out.ndim else float(out)


def _stroke_direction(stroke: LognormalStroke, w):
    """Unit direction at completed-area fraction w along the stroke's arc."""
    theta = stroke.theta_s + wrap_angle(stroke.theta_e - stroke.theta_s) * w
    phi = stroke.phi_s + (stroke.phi_e - stroke.phi_s) * w
    sp = np.sin(phi)
    return np.stack([sp * np.cos(theta), sp * np.sin(theta), np.cos(phi)], axis=-1)


def stroke_velocity_vector(t, stroke: LognormalStroke):
    """Velocity vector(s) of one stroke at time(s) t."""
    t = np.asarray(t, dtype=float)
    lam = np.atleast_1d(unit_lognormal(t, stroke.t0, stroke.mu, stroke.sigma2))
    w = np.atleast_1d(lognormal_area(t, stroke.t0, stroke.mu, stroke.sigma2))
    v = stroke.D * lam[..., None] * _stroke_direction(stroke, w)
    return v if t.ndim else v[0]


def reconstruct_velocity(sig: SigmaLogSignature, time_grid) -> np.ndarray:
    """Summed stroke velocities on a time grid."""
    t = np.asarray(time_grid, dtype=float)
    if len(t) >= 2 and np.any(np.diff(t) <= 0.0):
        raise ValueError("time grid must be increasing")
    v = np.zeros((len(t), 3))
    for stroke in sig.strokes:
        v += stroke_velocity_vector(t, stroke)
    return v


def signature_horizon(sig: SigmaLogSignature, tail_sigmas: float = TAIL_SIGMAS) -> float:
    """Time by which every stroke's lognormal tail has decayed."""
    return max(s.t0 + np.exp(s.mu + tail_sigmas * s.sigma) for s in sig.strokes)


def reconstruct_trajectory(sig: SigmaLogSignature, fm: float,
                           origin=(0.0, 0.0, 0.0)) -> Trajectory3D:
    """Trapezoidal integration of the reconstructed velocity from 0 at 1/fm."""
    if fm <= 0.0:
        raise ValueError("fm must be positive")
    origin = np.asarray(origin, dtype=float)
    horizon = signature_horizon(sig)
    n = int(np.ceil(horizon * fm)) if horizon > 0.0 else 0
    t = np.arange(n + 1) / fm
    if n == 0:
        return Trajectory3D(times=t, points=origin[None, :], fm=fm)
    v = reconstruct_velocity(sig, t)
    pos = origin + cumulative_trapezoid(v, t, axis=0, initial=0.0)
    return Trajectory3D(times=t, points=pos, fm=fm)


def _resample_to(traj: Trajectory3D, times: np.ndarray) -> np.ndarray:
    return np.column_stack([np.interp(times, traj.times, traj.points[:, a])
                            for a in range(3)])


def snr_v(observed: Trajectory3D, reconstructed: Trajectory3D) -> float:
    """Velocity signal-to-noise ratio in dB, capped at +100.

    The reconstruction is linearly resampled onto the observed timestamps
    and both velocities come from first differences.
    """
    if len(observed) < 3:
        raise ValueError("need at least 3 observed samples")
    t = observed.times
    rec = _resample_to(reconstructed, t)
    dt = np.diff(t)
    v_o = np.diff(observed.points, axis=0) / dt[:, None]
    v_r = np.diff(rec, axis=0) / dt[:, None]
    num = float(np.sum(np.sum(v_o ** 2, axis=1) * dt))
    den = float(np.sum(np.sum((v_o - v_r) ** 2, axis=1) * dt))
    if num == 0.0:
        raise ValueError("observed trajectory has zero velocity power")
    if den <= 0.0:
        return SNR_CAP_DB
    return min(10.0 * np.log10(num / den), SNR_CAP_DB)


def snr_t(observed: Trajectory3D, reconstructed: Trajectory3D) -> float:
    """Trajectory signal-to-noise ratio in dB, capped at +100.

    Signal power is the observed position's variance around its time
    average; noise power is the observed-vs-reconstructed gap.
    """
    if len(observed) < 3:
        raise ValueError("need at least 3 observed samples")
    t = observed.times
    s_o = observed.points
    s_r = _resample_to(reconstructed, t)
    span = t[-1] - t[0]
    s_bar = np.trapezoid(s_o, t, axis=0) / span
    num = float(np.trapezoid(np.sum((s_o - s_bar) ** 2, axis=1), t))
    den = float(np.trapezoid(np.sum((s_o - s_r) ** 2, axis=1), t))
    if num == 0.0:
        raise ValueError("observed trajectory is degenerate (constant position)")
    if den <= 0.0:
        return SNR_CAP_DB
    return min(10.0 * np.log10(num / den), SNR_CAP_DB)
