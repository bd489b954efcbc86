"""Full synthesis: from a timed action plan to a rendered 3D signature.

Each link becomes a stroke whose lognormal completes at the link's end
timestamp (erf(3) ~ 1 reading) and peaks at the link's temporal center.
Rendering advances along each link's arc by the stroke's completed-area
fraction and sums the time-overlapped displacements.
"""

from __future__ import annotations

import numpy as np

from .model import (LognormalStroke, SigmaLogSignature, Trajectory3D,
                    lognormal_area, unit_lognormal)
from .plan import ActionPlan, PlanarArc

_3SQRT2 = 3.0 * np.sqrt(2.0)
ONSET_LEAD = 0.5   # stroke onset precedes its start timestamp by this, s


def solve_sigma(ts_prev: float, ts_cur: float, t0: float,
                paper_exact: bool = False) -> float:
    """Positive root of sigma^2 + 3*sqrt(2)*sigma - ln(r) = 0.

    r = (ts_cur - t0) / (mid - t0) with mid the temporal center of the
    stroke, which places the lognormal peak at the stroke center for any
    duration.  `paper_exact` pins r = 3/2, the unit-duration constant.
    """
    if ts_cur <= ts_prev:
        raise ValueError("zero-duration stroke")
    if ts_prev <= t0:
        raise ValueError("stroke start must follow the onset t0")
    if paper_exact:
        k = np.log(1.5)
    else:
        mid = 0.5 * (ts_prev + ts_cur)
        k = np.log((ts_cur - t0) / (mid - t0))
    return float((-_3SQRT2 + np.sqrt(_3SQRT2 ** 2 + 4.0 * k)) / 2.0)


def solve_mu(ts_cur: float, t0: float, sigma: float) -> float:
    """mu = ln(ts_cur - t0) - 3*sqrt(2)*sigma (stroke complete at ts_cur)."""
    if ts_cur <= t0:
        raise ValueError("ts_cur must exceed t0")
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    return float(np.log(ts_cur - t0) - _3SQRT2 * sigma)


def _arc_angles(arc: PlanarArc, samples: int = 129):
    """Start/end azimuth and polar angles of the arc tangent.

    The end azimuth is continued along the arc (unwrapped) so the angle
    difference reflects the real tangent turning, not an atan2 wrap.
    """
    if arc.is_degenerate_segment:
        t = arc.tangent_at_fraction(0.0)
        theta = float(np.arctan2(t[1], t[0]))
        phi = float(np.arccos(np.clip(t[2], -1.0, 1.0)))
        return theta, theta, phi, phi
    f = np.linspace(0.0, 1.0, samples)
    tang = arc.tangent_at_fraction(f)
    azim = np.unwrap(np.arctan2(tang[:, 1], tang[:, 0]))
    polar = np.arccos(np.clip(tang[:, 2], -1.0, 1.0))
    return float(azim[0]), float(azim[-1]), float(polar[0]), float(polar[-1])


def plan_to_signature(plan: ActionPlan, paper_exact: bool = False) -> SigmaLogSignature:
    """Solve the per-link lognormal parameters of a timed plan."""
    if not plan.is_timed:
        raise ValueError("plan must be timed (see assign_timestamps)")
    ts = plan.timestamps
    strokes = []
    for j, arc in enumerate(plan.links):
        t0 = float(ts[j]) - ONSET_LEAD
        sigma = solve_sigma(float(ts[j]), float(ts[j + 1]), t0, paper_exact)
        mu = solve_mu(float(ts[j + 1]), t0, sigma)
        theta_s, theta_e, phi_s, phi_e = _arc_angles(arc)
        strokes.append(LognormalStroke(D=arc.length, t0=t0, mu=mu,
                                       sigma2=sigma * sigma,
                                       theta_s=theta_s, theta_e=theta_e,
                                       phi_s=phi_s, phi_e=phi_e))
    return SigmaLogSignature(plan=plan, strokes=tuple(strokes))


def render_full_signature(sig: SigmaLogSignature, fm: float):
    """Render the signature trajectory and its speed profile at fm Hz.

    Per stroke, the pen advances along the link's arc by the completed
    lognormal area; overlapping strokes contribute displacements relative
    to their own start target, anchored at the first target.
    """
    if fm <= 0.0:
        raise ValueError("fm must be positive")
    plan = sig.plan
    # every stroke is complete (erf(3) level) by t0 + exp(mu + 3*sqrt(2)*sigma)
    horizon = max(s.t0 + np.exp(s.mu + _3SQRT2 * s.sigma) for s in sig.strokes)
    n = max(1, int(np.ceil(horizon * fm)))
    t = np.arange(n + 1) / fm

    pos = np.tile(plan.targets[0], (len(t), 1))
    vel = np.zeros((len(t), 3))
    for j, (arc, stroke) in enumerate(zip(plan.links, sig.strokes)):
        w = np.clip(lognormal_area(t, stroke.t0, stroke.mu, stroke.sigma2), 0.0, 1.0)
        pos += arc.point_at_fraction(w) - plan.targets[j]
        lam = unit_lognormal(t, stroke.t0, stroke.mu, stroke.sigma2)
        vel += stroke.D * lam[:, None] * arc.tangent_at_fraction(w)
    speed = np.linalg.norm(vel, axis=1)
    return Trajectory3D(times=t, points=pos, fm=fm), speed
