"""Verification machinery: features, DTW and Manhattan verifiers, EER/DET/CMC.

Probes are scored against per-user references (minimum DTW distance, or
mean Manhattan distance between histogram features); sweeping a global
threshold over genuine and impostor scores yields DET curves, EER and
AUC.  A labeled database variant runs rank-k classification instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .duplication import DuplicationConfig, duplicate_signature
from .kinematics import estimate_parameters
from .model import Trajectory3D

try:
    from numba import njit
    _HAVE_NUMBA = True
except ImportError:   # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


@dataclass(frozen=True, eq=False)
class FeatureSequence:
    """Per-sample (x, y, z) + first/second derivatives, z-scored per dim."""

    values: np.ndarray   # (N, 9)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class HistogramFeature:
    """Concatenated normalized histograms of per-sample quantities."""

    values: np.ndarray
    blocks: int

    def __len__(self) -> int:
        return len(self.values)


def _zscore(columns: np.ndarray) -> np.ndarray:
    mean = columns.mean(axis=0)
    std = columns.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)
    out = (columns - mean) / std
    out[:, columns.std(axis=0) < 1e-12] = 0.0
    return out


def extract_features(traj: Trajectory3D) -> FeatureSequence:
    """Position, velocity and acceleration features, z-scored per dimension."""
    if len(traj) < 5:
        raise ValueError("need at least 5 samples for derivative features")
    t = traj.times
    pos = traj.points
    vel = np.column_stack([np.gradient(pos[:, a], t) for a in range(3)])
    acc = np.column_stack([np.gradient(vel[:, a], t) for a in range(3)])
    return FeatureSequence(values=_zscore(np.hstack([pos, vel, acc])))


def extract_histogram(traj: Trajectory3D, bins: int = 16) -> HistogramFeature:
    """Distribution features: speed, per-axis velocity, turning, direction.

    Velocities are scaled by the mean speed so the histograms compare
    across signatures; every block is normalized to sum 1.
    """
    if len(traj) < 5:
        raise ValueError("need at least 5 samples for histogram features")
    t = traj.times
    vel = np.column_stack([np.gradient(traj.points[:, a], t) for a in range(3)])
    speed = np.linalg.norm(vel, axis=1)
    mean_speed = speed.mean()
    if mean_speed < 1e-12:
        mean_speed = 1.0

    moving = speed > 1e-9 * mean_speed
    vm = vel[moving]
    sm = speed[moving]
    # turning angle between consecutive velocity vectors
    if len(vm) >= 2:
        dots = np.sum(vm[:-1] * vm[1:], axis=1) / (sm[:-1] * sm[1:])
        turning = np.arccos(np.clip(dots, -1.0, 1.0))
    else:
        turning = np.zeros(1)
    azimuth = np.arctan2(vm[:, 1], vm[:, 0]) if len(vm) else np.zeros(1)
    polar = np.arccos(np.clip(vm[:, 2] / sm, -1.0, 1.0)) if len(vm) else np.zeros(1)

    quantities = [
        (speed / mean_speed, (0.0, 4.0)),
        (vel[:, 0] / mean_speed, (-3.0, 3.0)),
        (vel[:, 1] / mean_speed, (-3.0, 3.0)),
        (vel[:, 2] / mean_speed, (-3.0, 3.0)),
        (turning, (0.0, np.pi)),
        (azimuth, (-np.pi, np.pi)),
        (polar, (0.0, np.pi)),
    ]
    parts = []
    for q, rng in quantities:
        h, _ = np.histogram(np.clip(q, rng[0], rng[1]), bins=bins, range=rng)
        total = h.sum()
        parts.append(h / total if total > 0 else np.full(bins, 1.0 / bins))
    return HistogramFeature(values=np.concatenate(parts), blocks=len(quantities))


def _dtw_dp_py(cost: np.ndarray):
    n, m = cost.shape
    dist = np.full((n + 1, m + 1), np.inf)
    steps = np.zeros((n + 1, m + 1), dtype=np.int64)
    dist[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            d0 = dist[i - 1, j - 1]
            d1 = dist[i - 1, j]
            d2 = dist[i, j - 1]
            if d0 <= d1 and d0 <= d2:
                best, pl = d0, steps[i - 1, j - 1]
            elif d1 <= d2:
                best, pl = d1, steps[i - 1, j]
            else:
                best, pl = d2, steps[i, j - 1]
            dist[i, j] = cost[i - 1, j - 1] + best
            steps[i, j] = pl + 1
    return dist[n, m], steps[n, m]


if _HAVE_NUMBA:
    _dtw_dp = njit(cache=False)(_dtw_dp_py)
else:   # pragma: no cover
    _dtw_dp = _dtw_dp_py


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, FeatureSequence):
        return x.values
    return np.atleast_2d(np.asarray(x, dtype=float))


def dtw_distance(a, b) -> float:
    """Path-length-normalized DTW distance with Euclidean local cost."""
    am = _as_matrix(a)
    bm = _as_matrix(b)
    if len(am) == 0 or len(bm) == 0:
        raise ValueError("empty sequence")
    cost = cdist(am, bm)
    total, length = _dtw_dp(cost)
    return float(total) / float(length)


def man_distance(a, b) -> float:
    """Manhattan distance between histogram feature vectors."""
    av = a.values if isinstance(a, HistogramFeature) else np.asarray(a, dtype=float)
    bv = b.values if isinstance(b, HistogramFeature) else np.asarray(b, dtype=float)
    if av.shape != bv.shape:
        raise ValueError("histogram dimensionality mismatch")
    return float(np.abs(av - bv).sum())


def score_probe(references, probe, metric: str = "dtw") -> float:
    """Fuse reference distances: min for DTW, mean for MAN (lower = genuine)."""
    if len(references) == 0:
        raise ValueError("need at least one reference")
    if metric == "dtw":
        return min(dtw_distance(r, probe) for r in references)
    if metric == "man":
        return float(np.mean([man_distance(r, probe) for r in references]))
    raise ValueError("unknown metric %r" % metric)


def det_curve(genuine_scores, impostor_scores):
    """(thresholds, FAR, FRR) over the pooled score range.

    Scores are distances: a probe is accepted when score <= threshold, so
    FAR rises and FRR falls as the threshold loosens.
    """
    gen = np.asarray(genuine_scores, dtype=float)
    imp = np.asarray(impostor_scores, dtype=float)
    if len(gen) == 0 or len(imp) == 0:
        raise ValueError("both score sets must be nonempty")
    thr = np.unique(np.concatenate([gen, imp]))
    thr = np.concatenate([[thr[0] - 1.0], thr, [thr[-1] + 1.0]])
    far = np.array([(imp <= t).mean() for t in thr])
    frr = np.array([(gen > t).mean() for t in thr])
    return thr, far, frr


def compute_eer(genuine_scores, impostor_scores) -> float:
    """Equal error rate (fraction) by linear interpolation at FAR = FRR."""
    _, far, frr = det_curve(genuine_scores, impostor_scores)
    diff = far - frr
    k = int(np.argmax(diff >= 0.0))
    if k == 0:
        return float(0.5 * (far[0] + frr[0]))
    x0, x1 = diff[k - 1], diff[k]
    w = 0.0 if x1 == x0 else -x0 / (x1 - x0)
    return float((1.0 - w) * 0.5 * (far[k - 1] + frr[k - 1])
                 + w * 0.5 * (far[k] + frr[k]))


def compute_auc(genuine_scores, impostor_scores) -> float:
    """Area under the ROC curve (TPR vs FPR along the threshold sweep)."""
    _, far, frr = det_curve(genuine_scores, impostor_scores)
    return float(np.trapezoid(1.0 - frr, far))


@dataclass(frozen=True)
class ExperimentProtocol:
    """Verification/classification protocol parameters."""

    train_genuine_count: int = 5
    repetitions: int = 10
    duplicates_per_training: int = 0
    duplicate_m: float | None = None
    random_probes_per_user: int = 1
    templates_per_class: int = 1
    seed: int = 0


@dataclass(eq=False)
class VerificationReport:
    """Scores and summary metrics of one verification experiment."""

    metric: str
    repetitions: int
    eer_random: list = field(default_factory=list)
    eer_skilled: list = field(default_factory=list)
    auc_random: list = field(default_factory=list)
    auc_skilled: list = field(default_factory=list)
    far_grid: np.ndarray | None = None
    frr_random: np.ndarray | None = None
    frr_skilled: np.ndarray | None = None
    scores: dict = field(default_factory=dict)
    cmc: np.ndarray | None = None

    def mean_eer(self, scenario: str) -> float:
        vals = self.eer_random if scenario == "random" else self.eer_skilled
        return float(np.mean(vals))

    def mean_auc(self, scenario: str) -> float:
        vals = self.auc_random if scenario == "random" else self.auc_skilled
        return float(np.mean(vals))


def _features_for(traj: Trajectory3D, metric: str):
    return extract_features(traj) if metric == "dtw" else extract_histogram(traj)


_FAR_GRID = np.linspace(0.0, 1.0, 201)


def _frr_on_grid(genuine_scores, impostor_scores) -> np.ndarray:
    _, far, frr = det_curve(genuine_scores, impostor_scores)
    order = np.argsort(far, kind="stable")
    return np.interp(_FAR_GRID, far[order], frr[order])


class _DuplicateCache:
    """Renders genuine-kind duplicates of training signatures on demand.

    Duplicates are keyed by (user, genuine index, copy index) so repeated
    repetitions reuse them; the source is re-parametrized once per
    trajectory with the moment-based estimator.
    """

    def __init__(self, protocol: ExperimentProtocol):
        self.protocol = protocol
        self._sigs: dict = {}
        self._dups: dict = {}

    def duplicates(self, user_key: int, gi: int, traj: Trajectory3D):
        out = []
        for ci in range(self.protocol.duplicates_per_training):
            key = (user_key, gi, ci)
            if key not in self._dups:
                if (user_key, gi) not in self._sigs:
                    sig, _ = estimate_parameters(traj)
                    self._sigs[(user_key, gi)] = sig
                seed = np.random.SeedSequence(
                    [self.protocol.seed, user_key, gi, ci]).generate_state(1)[0]
                cfg = DuplicationConfig(m=self.protocol.duplicate_m,
                                        kind="genuine", seed=int(seed))
                fm = traj.fm if traj.fm is not None else 100.0
                _, dup = duplicate_signature(self._sigs[(user_key, gi)], cfg, fm=fm)
                self._dups[key] = dup
            out.append(self._dups[key])
        return out


def evaluate(db, protocol: ExperimentProtocol, metric: str = "dtw") -> VerificationReport:
    """Run the repeated verification benchmark on a database.

    db maps user id -> {"genuine": [Trajectory3D], "forgery": [...]}.
    Per repetition the training genuines are resampled; genuine probes are
    the remaining genuines, skilled probes the user's forgeries, random
    probes genuine samples of the other users.
    """
    users = sorted(db)
    if len(users) < 2:
        raise ValueError("need at least 2 users")
    for u in users:
        if len(db[u]["genuine"]) <= protocol.train_genuine_count:
            raise ValueError("user %r has too few genuine signatures" % u)

    feat_cache: dict = {}

    def feats(traj, key):
        if key not in feat_cache:
            feat_cache[key] = _features_for(traj, metric)
        return feat_cache[key]

    dup_cache = _DuplicateCache(protocol) if protocol.duplicates_per_training else None
    report = VerificationReport(metric=metric, repetitions=protocol.repetitions)
    frr_rand_curves = []
    frr_skill_curves = []
    all_scores = {"genuine": [], "random": [], "skilled": []}

    for rep in range(protocol.repetitions):
        rng = np.random.default_rng([protocol.seed, rep])
        gen_scores = []
        rand_scores = []
        skill_scores = []
        for ui, user in enumerate(users):
            genuines = db[user]["genuine"]
            forgeries = db[user].get("forgery", [])
            train_idx = rng.choice(len(genuines), size=protocol.train_genuine_count,
                                   replace=False)
            train_set = set(int(i) for i in train_idx)
            refs = [feats(genuines[i], (user, "g", i)) for i in sorted(train_set)]
            if dup_cache is not None:
                for gi in sorted(train_set):
                    for ci, dup in enumerate(dup_cache.duplicates(ui, gi, genuines[gi])):
                        refs.append(feats(dup, (user, "dup", gi, ci)))

            for i, probe in enumerate(genuines):
                if i in train_set:
                    continue
                gen_scores.append(score_probe(refs, feats(probe, (user, "g", i)), metric))
            for i, probe in enumerate(forgeries):
                skill_scores.append(score_probe(refs, feats(probe, (user, "f", i)), metric))
            for other in users:
                if other == user:
                    continue
                others = db[other]["genuine"]
                pick = rng.choice(len(others), size=min(protocol.random_probes_per_user,
                                                        len(others)), replace=False)
                for i in pick:
                    rand_scores.append(score_probe(refs, feats(others[int(i)],
                                                               (other, "g", int(i))), metric))

        report.eer_random.append(compute_eer(gen_scores, rand_scores))
        report.auc_random.append(compute_auc(gen_scores, rand_scores))
        frr_rand_curves.append(_frr_on_grid(gen_scores, rand_scores))
        if skill_scores:
            report.eer_skilled.append(compute_eer(gen_scores, skill_scores))
            report.auc_skilled.append(compute_auc(gen_scores, skill_scores))
            frr_skill_curves.append(_frr_on_grid(gen_scores, skill_scores))
        all_scores["genuine"].append(np.array(gen_scores))
        all_scores["random"].append(np.array(rand_scores))
        all_scores["skilled"].append(np.array(skill_scores))

    report.far_grid = _FAR_GRID.copy()
    report.frr_random = np.mean(frr_rand_curves, axis=0)
    if frr_skill_curves:
        report.frr_skilled = np.mean(frr_skill_curves, axis=0)
    report.scores = all_scores
    return report


def classify_cmc(db_labeled, protocol: ExperimentProtocol,
                 metric: str = "dtw") -> VerificationReport:
    """Rank-k nearest-template classification; returns the averaged CMC.

    db_labeled maps class label -> [Trajectory3D].  Per repetition,
    `templates_per_class` samples are templates and the rest are probes;
    a probe's class score is its fused distance to that class's templates.
    """
    labels = sorted(db_labeled)
    if len(labels) < 2:
        raise ValueError("need at least 2 classes")
    for lbl in labels:
        if len(db_labeled[lbl]) < 2:
            raise ValueError("class %r needs at least 2 samples" % lbl)

    feat_cache: dict = {}

    def feats(traj, key):
        if key not in feat_cache:
            feat_cache[key] = _features_for(traj, metric)
        return feat_cache[key]

    n_classes = len(labels)
    cmc_curves = []
    for rep in range(protocol.repetitions):
        rng = np.random.default_rng([protocol.seed, rep])
        templates = {}
        probes = []
        for lbl in labels:
            samples = db_labeled[lbl]
            t_idx = rng.choice(len(samples), size=protocol.templates_per_class,
                               replace=False)
            tset = set(int(i) for i in t_idx)
            templates[lbl] = [feats(samples[i], (lbl, i)) for i in sorted(tset)]
            probes.extend((lbl, i) for i in range(len(samples)) if i not in tset)

        hits = np.zeros(n_classes)
        for true_lbl, i in probes:
            probe = feats(db_labeled[true_lbl][i], (true_lbl, i))
            class_scores = np.array([score_probe(templates[lbl], probe, metric)
                                     for lbl in labels])
            rank = int(np.argsort(class_scores, kind="stable").tolist()
                       .index(labels.index(true_lbl)))
            hits[rank:] += 1.0
        cmc_curves.append(hits / len(probes))

    report = VerificationReport(metric=metric, repetitions=protocol.repetitions)
    report.cmc = np.mean(cmc_curves, axis=0)
    return report
