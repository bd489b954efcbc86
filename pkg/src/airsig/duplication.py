"""Duplicated synthesis: perturbed genuine-like or forgery-like variants.

A duplicate perturbs the lognormal parameters, edits the virtual target
points, warps them sinusoidally, optionally rotates and displaces the
whole plan, re-solves stroke amplitudes from the refitted arcs and
re-renders.  One deformation level m in (0, 1) controls every stage.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import LognormalStroke, SigmaLogSignature
from .plan import ActionPlan, fit_planar_arc
from .synthesis import _arc_angles, render_full_signature, solve_mu, solve_sigma

DEFAULT_M = {"genuine": 0.15, "forgery": 0.5}
SIGMA2_FLOOR = 1e-4


@dataclass(frozen=True)
class DuplicationConfig:
    """Knobs of the duplication pipeline.

    m = None picks the per-kind default (genuine 0.15, forgery 0.5).
    `paper_literal_distortion` keeps the printed absolute sinusoid
    amplitudes instead of the dimensionless relative form.
    """

    m: float | None = None
    kind: str = "genuine"
    insert_remove_max_fraction: float = 0.05
    affine_enabled: bool = True
    rotation_scale: float = np.pi / 100.0
    displacement_max: float = 0.02
    seed: int = 0
    paper_literal_distortion: bool = False

    def __post_init__(self):
        if self.kind not in DEFAULT_M:
            raise ValueError("kind must be 'genuine' or 'forgery'")
        if self.m is not None and not 0.0 <= self.m < 1.0:
            raise ValueError("m must lie in [0, 1)")
        if not 0.0 <= self.insert_remove_max_fraction <= 0.05:
            raise ValueError("insert/remove fraction capped at 0.05")

    @property
    def effective_m(self) -> float:
        return DEFAULT_M[self.kind] if self.m is None else self.m


def _perturb(sig: SigmaLogSignature, m: float, rng) -> SigmaLogSignature:
    n = sig.n_strokes
    g = {name: rng.standard_normal(n)
         for name in ("mu", "sigma2", "t0", "theta_e", "theta_s", "phi_e", "phi_s")}
    mu = np.array([s.mu for s in sig.strokes]) * (1.0 + 0.01 * m * g["mu"])
    sigma2 = np.array([s.sigma2 for s in sig.strokes]) * (1.0 + 0.01 * m * g["sigma2"])
    sigma2 = np.maximum(sigma2, SIGMA2_FLOOR)
    t0 = np.array([s.t0 for s in sig.strokes]) * (1.0 + 0.001 * m * g["t0"])
    t0 = np.sort(t0)   # perturbation must not reorder stroke onsets
    ang = {}
    for name in ("theta_e", "theta_s", "phi_e", "phi_s"):
        vals = np.array([getattr(s, name) for s in sig.strokes])
        ang[name] = vals * (1.0 + 0.001 * m * g[name])
    strokes = tuple(LognormalStroke(D=s.D, t0=float(t0[j]), mu=float(mu[j]),
                                    sigma2=float(sigma2[j]),
                                    theta_s=float(ang["theta_s"][j]),
                                    theta_e=float(ang["theta_e"][j]),
                                    phi_s=float(ang["phi_s"][j]),
                                    phi_e=float(ang["phi_e"][j]))
                    for j, s in enumerate(sig.strokes))
    return SigmaLogSignature(plan=sig.plan, strokes=strokes)


def perturb_parameters(sig: SigmaLogSignature, cfg: DuplicationConfig) -> SigmaLogSignature:
    """Multiplicative lognormal-parameter perturbation (identity at m = 0)."""
    return _perturb(sig, cfg.effective_m, np.random.default_rng(cfg.seed))


def _sub_arc_midpoint(arc, f0: float, f1: float) -> np.ndarray:
    return arc.point_at_fraction(0.5 * (f0 + f1))


def _edit(plan: ActionPlan, cfg: DuplicationConfig, rng):
    """Remove/insert targets; returns (plan, provenance) where provenance
    maps each new link to its source link index (None = rebuilt link)."""
    if plan.n_targets < 3:
        raise ValueError("target editing needs at least 3 targets")
    n = plan.n_targets
    cap = int(np.floor(cfg.insert_remove_max_fraction * n))
    n_remove = int(rng.integers(0, cap + 1))
    if cfg.kind == "forgery":
        n_insert = int(rng.integers(1, cap + 2))
    else:
        n_insert = int(rng.integers(0, cap + 1))

    targets = [np.array(p) for p in plan.targets]
    midpoints = [np.array(p) for p in plan.midpoints]
    ts = list(plan.timestamps) if plan.is_timed else None
    links = list(plan.links)
    prov: list[int | None] = list(range(len(links)))

    if n_remove == 0 and n_insert == 0:
        return plan, prov

    for _ in range(n_remove):
        if len(targets) <= 3:
            break
        gaps = [min(np.linalg.norm(targets[j] - targets[j - 1]),
                    np.linalg.norm(targets[j] - targets[j + 1]))
                for j in range(1, len(targets) - 1)]
        j = 1 + int(np.argmin(gaps))
        removed = targets.pop(j)
        if ts is not None:
            ts.pop(j)
        # merged link bows through the removed target
        midpoints[j - 1:j + 1] = [removed]
        links[j - 1:j + 1] = [fit_planar_arc(targets[j - 1], targets[j], removed)]
        prov[j - 1:j + 1] = [None]

    for _ in range(n_insert):
        li = int(rng.integers(0, len(links)))
        from_end = bool(rng.integers(0, 2))
        u = float(rng.uniform(0.0, cfg.insert_remove_max_fraction))
        f = 1.0 - u if from_end else u
        f = min(max(f, 1e-3), 1.0 - 1e-3)
        arc = links[li]
        new_pt = arc.point_at_fraction(f)
        mid_a = _sub_arc_midpoint(arc, 0.0, f)
        mid_b = _sub_arc_midpoint(arc, f, 1.0)
        targets.insert(li + 1, new_pt)
        midpoints[li:li + 1] = [mid_a, mid_b]
        links[li:li + 1] = [fit_planar_arc(targets[li], new_pt, mid_a),
                            fit_planar_arc(new_pt, targets[li + 2], mid_b)]
        prov[li:li + 1] = [None, None]
        if ts is not None:
            ts.insert(li + 1, ts[li] + f * (ts[li + 1] - ts[li]))

    new_plan = ActionPlan(targets=np.asarray(targets),
                          midpoints=np.asarray(midpoints),
                          links=tuple(links),
                          timestamps=None if ts is None else np.asarray(ts))
    return new_plan, prov


def edit_target_points(plan: ActionPlan, cfg: DuplicationConfig) -> ActionPlan:
    """Randomly drop the most crowded targets and add near-target ones."""
    new_plan, _ = _edit(plan, cfg, np.random.default_rng(cfg.seed))
    return new_plan


def _warp_points(pts: np.ndarray, extents: np.ndarray, m: float,
                 paper_literal: bool) -> np.ndarray:
    out = pts.copy()
    periods = 3.0 * m
    for a in range(3):
        la = extents[a]
        if la < 1e-9:
            continue
        amp = (m / 50.0) * la if paper_literal else m / 50.0
        out[:, a] = pts[:, a] * (1.0 + amp * np.sin(2.0 * np.pi * periods * pts[:, a] / la))
    return out


def sinusoidal_distortion(plan: ActionPlan, m: float,
                          paper_literal: bool = False) -> ActionPlan:
    """Per-axis sinusoidal warp of targets and midpoints, refitted arcs.

    The relative modulation is bounded by m/50 per coordinate; m = 0 is an
    exact identity.
    """
    if m == 0.0:
        return plan
    extents = np.ptp(plan.targets, axis=0)
    targets = _warp_points(plan.targets, extents, m, paper_literal)
    midpoints = _warp_points(plan.midpoints, extents, m, paper_literal)
    links = tuple(fit_planar_arc(targets[j], targets[j + 1], midpoints[j])
                  for j in range(len(targets) - 1))
    return replace(plan, targets=targets, midpoints=midpoints, links=links)


def _affine(plan: ActionPlan, cfg: DuplicationConfig, rng) -> ActionPlan:
    if not cfg.affine_enabled:
        return plan
    ax, ay, az = cfg.rotation_scale * rng.standard_normal(3)
    r = float(rng.uniform(0.0, cfg.displacement_max))
    rot = _rotation_xyz(ax, ay, az)
    centroid = plan.targets.mean(axis=0)
    shift = centroid + r * centroid
    targets = (plan.targets - centroid) @ rot + shift
    midpoints = (plan.midpoints - centroid) @ rot + shift
    links = tuple(fit_planar_arc(targets[j], targets[j + 1], midpoints[j])
                  for j in range(len(targets) - 1))
    return replace(plan, targets=targets, midpoints=midpoints, links=links)


def _rotation_xyz(ax: float, ay: float, az: float) -> np.ndarray:
    cx, sx = np.cos(ax), np.sin(ax)
    cy, sy = np.cos(ay), np.sin(ay)
    cz, sz = np.cos(az), np.sin(az)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rx @ ry @ rz


def affine_transform(plan: ActionPlan, cfg: DuplicationConfig) -> ActionPlan:
    """Small random rotation about the target centroid plus a displacement."""
    return _affine(plan, cfg, np.random.default_rng(cfg.seed))


def duplicate_signature(sig: SigmaLogSignature, cfg: DuplicationConfig,
                        fm: float = 100.0):
    """Full duplication pipeline; returns (duplicate signature, trajectory).

    Stroke amplitudes are re-solved from the refitted arcs; strokes of
    merged or inserted links are re-solved entirely from the edited
    timestamps.
    """
    rng = np.random.default_rng(cfg.seed)
    m = cfg.effective_m
    perturbed = _perturb(sig, m, rng)
    if perturbed.plan.n_targets >= 3:
        plan, prov = _edit(perturbed.plan, cfg, rng)
    else:
        plan, prov = perturbed.plan, list(range(len(perturbed.plan.links)))
    plan = sinusoidal_distortion(plan, m, cfg.paper_literal_distortion)
    plan = _affine(plan, cfg, rng)

    ts = plan.timestamps
    strokes = []
    for k, arc in enumerate(plan.links):
        src = prov[k]
        if src is not None:
            s = perturbed.strokes[src]
            strokes.append(replace(s, D=arc.length))
        else:
            if ts is None:
                raise ValueError("editing untimed plans requires timestamps")
            t0 = float(ts[k]) - 0.5
            sigma = solve_sigma(float(ts[k]), float(ts[k + 1]), t0)
            mu = solve_mu(float(ts[k + 1]), t0, sigma)
            theta_s, theta_e, phi_s, phi_e = _arc_angles(arc)
            strokes.append(LognormalStroke(D=arc.length, t0=t0, mu=mu,
                                           sigma2=sigma * sigma,
                                           theta_s=theta_s, theta_e=theta_e,
                                           phi_s=phi_s, phi_e=phi_e))
    onsets = np.array([s.t0 for s in strokes])
    if np.any(np.diff(onsets) < 0.0):
        fixed = np.sort(onsets)
        strokes = [replace(s, t0=float(fixed[j])) for j, s in enumerate(strokes)]
    dup = SigmaLogSignature(plan=plan, strokes=tuple(strokes))
    traj, _ = render_full_signature(dup, fm)
    return dup, traj
