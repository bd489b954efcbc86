"""Action plans: virtual target points, planar circular-arc links and timing.

An action plan is the cognitive layout of a movement: an ordered list of 3D
virtual target points, one midpoint per link, and a planar circular arc
fitted through (target_j, target_{j+1}, midpoint_j).  Plans are generated
from a morphology model (signatures), from letter sequences (air writing)
or from random points in a cube (gestures), and are timed with a rhythmic
gap model before synthesis.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .letters import ALPHABET, LETTER_TEMPLATES

# triangles flatter than this (area relative to chord^2) become segments
COLLINEARITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PlanarArc:
    """Circular arc through three 3D points, or a straight segment.

    The arc lives in the plane spanned by `u_axis` and `w_axis` around
    `center`; angle 0 is the arc start and `end_angle` is the signed sweep.
    Degenerate (collinear) links are stored as segments between the saved
    endpoints and evaluated by linear interpolation.
    """

    center: np.ndarray
    radius: float
    plane_normal: np.ndarray
    start_angle: float
    end_angle: float
    u_axis: np.ndarray
    w_axis: np.ndarray
    p_start: np.ndarray
    p_end: np.ndarray
    is_degenerate_segment: bool = False

    @property
    def length(self) -> float:
        if self.is_degenerate_segment:
            return float(np.linalg.norm(self.p_end - self.p_start))
        return self.radius * abs(self.end_angle - self.start_angle)

    def point_at_fraction(self, f):
        """Point(s) at arc-length fraction f in [0, 1] from the start."""
        f = np.asarray(f, dtype=float)
        if self.is_degenerate_segment:
            return self.p_start + np.multiply.outer(f, self.p_end - self.p_start)
        ang = self.start_angle + f * (self.end_angle - self.start_angle)
        return (self.center
                + self.radius * np.multiply.outer(np.cos(ang), self.u_axis)
                + self.radius * np.multiply.outer(np.sin(ang), self.w_axis))

    def tangent_at_fraction(self, f):
        """Unit tangent(s) in the direction of travel at fraction f."""
        f = np.asarray(f, dtype=float)
        if self.is_degenerate_segment:
            d = self.p_end - self.p_start
            d = d / np.linalg.norm(d)
            return np.broadcast_to(d, f.shape + (3,)).copy()
        ang = self.start_angle + f * (self.end_angle - self.start_angle)
        sgn = 1.0 if self.end_angle >= self.start_angle else -1.0
        return sgn * (np.multiply.outer(-np.sin(ang), self.u_axis)
                      + np.multiply.outer(np.cos(ang), self.w_axis))

    @property
    def sagitta(self) -> float:
        """Perpendicular distance from the arc midpoint to its chord."""
        if self.is_degenerate_segment:
            return 0.0
        mid = self.point_at_fraction(0.5)
        chord_mid = 0.5 * (self.p_start + self.p_end)
        return float(np.linalg.norm(mid - chord_mid))


def fit_planar_arc(p1, p2, pm) -> PlanarArc:
    """Fit the planar circle through p1, p2, pm and keep the arc p1 -> p2
    that passes through pm.  Collinear triples yield a straight segment."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    pm = np.asarray(pm, dtype=float)
    v1 = p2 - p1
    v2 = pm - p1
    chord2 = float(v1 @ v1)
    if chord2 == 0.0:
        raise ValueError("arc endpoints coincide")
    n = np.cross(v1, v2)
    area2 = float(np.linalg.norm(n))  # twice the triangle area
    if area2 < COLLINEARITY_TOL * chord2:
        return PlanarArc(center=0.5 * (p1 + p2), radius=0.0,
                         plane_normal=np.zeros(3), start_angle=0.0,
                         end_angle=0.0, u_axis=np.zeros(3), w_axis=np.zeros(3),
                         p_start=p1, p_end=p2, is_degenerate_segment=True)

    # circumcenter of the 3D triangle (p1, p2, pm)
    l1 = float(v1 @ v1)
    l2 = float(v2 @ v2)
    center = p1 + (l2 * np.cross(np.cross(v1, v2), v1)
                   + l1 * np.cross(v2, np.cross(v1, v2))) / (2.0 * area2 ** 2)
    radius = float(np.linalg.norm(p1 - center))

    normal = n / area2
    u = (p1 - center) / radius
    w = np.cross(normal, u)
    ang2 = float(np.arctan2((p2 - center) @ w, (p2 - center) @ u))
    angm = float(np.arctan2((pm - center) @ w, (pm - center) @ u))
    ccw_end = ang2 % (2.0 * np.pi)
    ccw_mid = angm % (2.0 * np.pi)
    end_angle = ccw_end if ccw_mid < ccw_end else ccw_end - 2.0 * np.pi
    return PlanarArc(center=center, radius=radius, plane_normal=normal,
                     start_angle=0.0, end_angle=end_angle, u_axis=u, w_axis=w,
                     p_start=p1, p_end=p2)


@dataclass(frozen=True, eq=False)
class ActionPlan:
    """Ordered virtual target points with arc links and optional timing."""

    targets: np.ndarray        # (K, 3)
    midpoints: np.ndarray      # (K-1, 3)
    links: tuple               # K-1 PlanarArc
    timestamps: np.ndarray | None = None   # (K,) seconds

    def __post_init__(self):
        k = len(self.targets)
        if k < 2:
            raise ValueError("a plan needs at least 2 target points")
        if len(self.midpoints) != k - 1 or len(self.links) != k - 1:
            raise ValueError("links/midpoints must number targets - 1")
        if self.timestamps is not None and len(self.timestamps) != k:
            raise ValueError("one timestamp per target required")

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    @property
    def link_lengths(self) -> np.ndarray:
        return np.array([a.length for a in self.links])

    @property
    def is_timed(self) -> bool:
        return self.timestamps is not None


def make_action_plan(targets, midpoints, timestamps=None) -> ActionPlan:
    """Fit all arc links for a target/midpoint sequence.

    Consecutive coincident targets are dropped (with a warning) so every
    link has positive length.
    """
    targets = np.asarray(targets, dtype=float)
    midpoints = np.asarray(midpoints, dtype=float)
    ts = None if timestamps is None else np.asarray(timestamps, dtype=float)

    scale = float(np.max(np.ptp(targets, axis=0))) or 1.0
    keep = [0]
    for i in range(1, len(targets)):
        if np.linalg.norm(targets[i] - targets[keep[-1]]) > 1e-12 * scale:
            keep.append(i)
    if len(keep) < len(targets):
        warnings.warn("dropping %d zero-length link(s)" % (len(targets) - len(keep)))
        midx = [i for i in keep[:-1]]
        midpoints = midpoints[midx]
        targets = targets[keep]
        if ts is not None:
            ts = ts[keep]

    links = tuple(fit_planar_arc(targets[j], targets[j + 1], midpoints[j])
                  for j in range(len(targets) - 1))
    return ActionPlan(targets=targets, midpoints=midpoints, links=links,
                      timestamps=ts)


@dataclass(frozen=True)
class SurfaceConfig:
    """Sinusoidal depth surface z = ax sin(wx x + phx) + ay sin(wy y + phy)."""

    ax: float = 0.0
    ay: float = 0.0
    wx: float = 0.0
    wy: float = 0.0
    phx: float = 0.0
    phy: float = 0.0

    @classmethod
    def for_canvas(cls, canvas_size: float) -> "SurfaceConfig":
        # peak-to-peak depth ~15% of the canvas, one period across it
        return cls(ax=0.075 * canvas_size, ay=0.075 * canvas_size,
                   wx=2.0 * np.pi / canvas_size, wy=2.0 * np.pi / canvas_size,
                   phx=0.0, phy=0.0)

    def to_dict(self) -> dict:
        return {"ax": self.ax, "ay": self.ay, "wx": self.wx, "wy": self.wy,
                "phx": self.phx, "phy": self.phy}

    @classmethod
    def from_dict(cls, d: dict) -> "SurfaceConfig":
        return cls(**{k: float(d[k]) for k in ("ax", "ay", "wx", "wy", "phx", "phy")})


def project_to_surface(points2d, cfg: SurfaceConfig) -> np.ndarray:
    """Lift 2D plan points onto the sinusoidal surface (x, y preserved)."""
    pts = np.atleast_2d(np.asarray(points2d, dtype=float))
    z = (cfg.ax * np.sin(cfg.wx * pts[:, 0] + cfg.phx)
         + cfg.ay * np.sin(cfg.wy * pts[:, 1] + cfg.phy))
    return np.column_stack([pts[:, 0], pts[:, 1], z])


def _uniform_dist(lo: int, hi: int) -> dict:
    p = 1.0 / (hi - lo + 1)
    return {k: p for k in range(lo, hi + 1)}


@dataclass(frozen=True)
class MorphologyConfig:
    """Lexical/morphological model for signature and gesture plans.

    Distributions are {value: probability} maps.  `text` pins an exact
    letter sequence (words separated by spaces) instead of sampling one.
    """

    word_counts: dict = field(default_factory=lambda: {1: 0.5, 2: 0.4, 3: 0.1})
    letters_per_word: dict = field(default_factory=lambda: _uniform_dist(3, 7))
    flourish_probability: float = 0.6
    points_per_letter: dict = field(default_factory=lambda: _uniform_dist(3, 6))
    canvas_size: float = 300.0
    text: str | None = None
    cube_size: float = 100.0
    gesture_points_min: int = 5
    gesture_points_max: int = 10
    sagitta_min_fraction: float = 1.0 / 20.0
    sagitta_max_fraction: float = 1.0 / 5.0

    def __post_init__(self):
        for name in ("word_counts", "letters_per_word", "points_per_letter"):
            dist = getattr(self, name)
            if not dist:
                raise ValueError("%s must not be empty" % name)
            total = sum(dist.values())
            if not np.isclose(total, 1.0, atol=1e-9):
                raise ValueError("%s probabilities must sum to 1" % name)
        if self.gesture_points_max < self.gesture_points_min:
            raise ValueError("empty gesture point-count range")

    def to_dict(self) -> dict:
        d = {
            "word_counts": _dist_to_str(self.word_counts),
            "letters_per_word": _dist_to_str(self.letters_per_word),
            "flourish_probability": self.flourish_probability,
            "points_per_letter": _dist_to_str(self.points_per_letter),
            "canvas_size": self.canvas_size,
            "cube_size": self.cube_size,
            "gesture_points_min": self.gesture_points_min,
            "gesture_points_max": self.gesture_points_max,
            "sagitta_min_fraction": self.sagitta_min_fraction,
            "sagitta_max_fraction": self.sagitta_max_fraction,
        }
        if self.text is not None:
            d["text"] = self.text
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MorphologyConfig":
        kw = {}
        for name in ("word_counts", "letters_per_word", "points_per_letter"):
            if name in d:
                v = d[name]
                kw[name] = _dist_from_str(v) if isinstance(v, str) else v
        for name in ("flourish_probability", "canvas_size", "cube_size",
                     "sagitta_min_fraction", "sagitta_max_fraction"):
            if name in d:
                kw[name] = float(d[name])
        for name in ("gesture_points_min", "gesture_points_max"):
            if name in d:
                kw[name] = int(d[name])
        if "text" in d:
            kw["text"] = str(d["text"])
        return cls(**kw)


def _dist_to_str(dist: dict) -> str:
    return " ".join("%d:%s" % (k, repr(float(v))) for k, v in sorted(dist.items()))


def _dist_from_str(s: str) -> dict:
    out = {}
    for item in s.split():
        k, v = item.split(":")
        out[int(k)] = float(v)
    return out


def airwriting_config(canvas_size: float = 100.0) -> MorphologyConfig:
    """Morphology preset for air writing: 2-4 uppercase letters, no flourish."""
    return MorphologyConfig(word_counts={1: 1.0},
                            letters_per_word=_uniform_dist(2, 4),
                            flourish_probability=0.0,
                            canvas_size=canvas_size)


def _draw_from_dist(rng, dist: dict):
    keys = sorted(dist)
    probs = np.array([dist[k] for k in keys], dtype=float)
    probs = probs / probs.sum()
    return keys[int(rng.choice(len(keys), p=probs))]


def _midpoint_2d(a, b, sagitta_fraction: float) -> np.ndarray:
    d = b - a
    left = np.array([-d[1], d[0]])
    nrm = np.linalg.norm(left)
    if nrm == 0.0:
        return 0.5 * (a + b)
    return 0.5 * (a + b) + sagitta_fraction * np.linalg.norm(d) * left / nrm


def generate_morphology_2d(cfg: MorphologyConfig, seed):
    """Generate the 2D target/midpoint layout of a signature.

    Returns (targets (K, 2), midpoints (K-1, 2)).  Deterministic in seed.
    Letters come from the built-in template table; the points-per-letter
    distribution sets the complexity of flourish loops (letter templates
    keep their natural target counts).
    """
    rng = np.random.default_rng(seed)

    if cfg.text is not None:
        words = [[c for c in w.upper() if c in LETTER_TEMPLATES]
                 for w in cfg.text.split()]
        words = [w for w in words if w]
        draw_flourish = rng.random() < cfg.flourish_probability
    else:
        n_words = _draw_from_dist(rng, cfg.word_counts)
        words = []
        for _ in range(n_words):
            n_letters = _draw_from_dist(rng, cfg.letters_per_word)
            idx = rng.integers(0, len(ALPHABET), size=n_letters)
            words.append([ALPHABET[i] for i in idx])
        draw_flourish = rng.random() < cfg.flourish_probability

    targets = []
    sagittas = []   # one per link, signed chord fraction
    x_off = 0.0
    for wi, word in enumerate(words):
        if wi > 0:
            x_off += 0.7   # word gap on top of the letter advance
        for letter in word:
            pts, sags = LETTER_TEMPLATES[letter]
            jitter = rng.normal(0.0, 0.02, size=(len(pts), 2))
            placed = np.asarray(pts, dtype=float) + jitter
            placed[:, 0] += x_off
            if targets:
                sagittas.append(rng.uniform(-0.15, 0.15))  # connector link
            targets.extend(placed)
            sagittas.extend(sags)
            x_off += 1.25

    if draw_flourish or not targets:
        n_loop = _draw_from_dist(rng, cfg.points_per_letter) + 2
        if targets:
            box = np.asarray(targets)
            center = 0.5 * (box.min(axis=0) + box.max(axis=0))
            rx = 0.62 * max(np.ptp(box[:, 0]), 1.0)
            ry = 0.9
        else:
            center = np.array([1.5, 0.5])
            rx, ry = 1.5, 0.9
        angles = -0.5 * np.pi + 2.0 * np.pi * np.arange(n_loop) / n_loop
        angles = angles + rng.normal(0.0, 0.08, size=n_loop)
        loop = np.column_stack([center[0] + rx * np.cos(angles) * (1.0 + rng.normal(0, 0.04, n_loop)),
                                center[1] + ry * np.sin(angles) * (1.0 + rng.normal(0, 0.04, n_loop))])
        # close the loop next to (not exactly on) its first point
        closing = loop[0] + np.array([0.03 * rx, 0.03 * ry])
        loop = np.vstack([loop, closing])
        if targets:
            sagittas.append(rng.uniform(-0.15, 0.15))
        targets.extend(loop)
        sagittas.extend(rng.uniform(0.08, 0.2, size=len(loop) - 1))

    targets = np.asarray(targets, dtype=float)
    span = np.ptp(targets[:, 0])
    if span < 1e-9:
        span = 1.0
    scale = cfg.canvas_size / span
    targets = (targets - targets.min(axis=0)) * scale

    midpoints = np.array([_midpoint_2d(targets[j], targets[j + 1], sagittas[j])
                          for j in range(len(targets) - 1)])
    return targets, midpoints


def generate_signature_plan(cfg: MorphologyConfig, surface: SurfaceConfig | None,
                            seed) -> ActionPlan:
    """Full 2D morphology -> 3D surface projection -> fitted arc links."""
    if surface is None:
        surface = SurfaceConfig.for_canvas(cfg.canvas_size)
    t2, m2 = generate_morphology_2d(cfg, seed)
    return make_action_plan(project_to_surface(t2, surface),
                            project_to_surface(m2, surface))


def _random_unit_perpendicular(rng, d: np.ndarray) -> np.ndarray:
    d = d / np.linalg.norm(d)
    while True:
        v = rng.standard_normal(3)
        v = v - (v @ d) * d
        nrm = np.linalg.norm(v)
        if nrm > 1e-9:
            return v / nrm


def generate_gesture_plan(cfg: MorphologyConfig, seed) -> ActionPlan:
    """Random gesture plan: 5-10 points in a cube, arcs with bounded sagitta.

    Each link's sagitta is uniform in [d/20, d/5] of its chord d, bowed to
    a random side of the chord.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(cfg.gesture_points_min, cfg.gesture_points_max + 1))
    targets = rng.uniform(0.0, cfg.cube_size, size=(n, 3))
    midpoints = np.empty((n - 1, 3))
    for j in range(n - 1):
        chord = targets[j + 1] - targets[j]
        d = np.linalg.norm(chord)
        h = rng.uniform(cfg.sagitta_min_fraction * d, cfg.sagitta_max_fraction * d)
        midpoints[j] = 0.5 * (targets[j] + targets[j + 1]) \
            + h * _random_unit_perpendicular(rng, chord)
    return make_action_plan(targets, midpoints)


def cpg_intervals(n: int, rng, mean_gap: float = 0.1, sd_gap: float = 0.005) -> np.ndarray:
    """n rhythmic inter-target gaps ~ N(mean_gap, sd_gap), redrawn while
    a draw falls at or below mean_gap / 2."""
    gaps = np.empty(n)
    for i in range(n):
        while True:
            r = mean_gap + sd_gap * rng.standard_normal()
            if r > 0.5 * mean_gap:
                gaps[i] = r
                break
    return gaps


def assign_timestamps(plan: ActionPlan, seed, mean_gap: float = 0.1,
                      sd_gap: float = 0.005) -> ActionPlan:
    """Time the targets: ts_0 = 0, then rhythmic near-0.1 s gaps."""
    if plan.n_targets < 2:
        raise ValueError("cannot time a plan with fewer than 2 targets")
    rng = np.random.default_rng(seed)
    gaps = cpg_intervals(plan.n_targets - 1, rng, mean_gap, sd_gap)
    ts = np.concatenate([[0.0], np.cumsum(gaps)])
    return replace(plan, timestamps=ts)
