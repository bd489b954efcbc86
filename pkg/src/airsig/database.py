"""Database generation and loading: FS+DS corpora, gesture/air-writing sets.

A database is a directory tree with a manifest at its root.  Verification
databases hold per-user master parameter files plus rendered genuine and
skilled-forgery specimens; labeled databases hold per-class duplicate
samples.  Every file's content is fixed by hierarchically derived seeds,
so regeneration (at any worker count) is byte identical.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .duplication import DuplicationConfig, duplicate_signature
from .fileio import (read_manifest, read_signature_file, write_manifest,
                     write_parameter_file, write_signature_file)
from .kinematics import synthesize_kinematics
from .model import SigmaLogSignature, Trajectory3D
from .plan import (MorphologyConfig, SurfaceConfig, airwriting_config,
                   assign_timestamps, generate_gesture_plan,
                   generate_signature_plan)
from .synthesis import plan_to_signature


def derive_seed(*key: int) -> int:
    """Deterministic child seed from a tuple of integers."""
    return int(np.random.SeedSequence([int(k) for k in key]).generate_state(1)[0])


@dataclass(frozen=True)
class DatabaseConfig:
    """Shape and variability of a generated verification database."""

    name: str = "synthdb"
    users: int = 10
    genuine_per_user: int = 10
    forgery_per_user: int = 10
    fm: float = 60.0
    m_genuine: float = 0.15
    m_forgery: float = 0.5
    mean_gap: float = 0.1
    sd_gap: float = 0.005
    morphology: MorphologyConfig = field(default_factory=MorphologyConfig)
    surface: SurfaceConfig | None = None

    def resolved_surface(self) -> SurfaceConfig:
        if self.surface is not None:
            return self.surface
        return SurfaceConfig.for_canvas(self.morphology.canvas_size)


@dataclass(frozen=True)
class GestureDbConfig:
    """Shape of a labeled gesture or air-writing database."""

    name: str = "gesturedb"
    mode: str = "gesture"          # gesture | airwriting
    classes: int = 10
    samples_per_class: int = 5
    fm: float = 60.0
    m: float = 0.15
    mean_gap: float = 0.1
    sd_gap: float = 0.005
    morphology: MorphologyConfig = field(default_factory=MorphologyConfig)

    def __post_init__(self):
        if self.mode not in ("gesture", "airwriting"):
            raise ValueError("mode must be 'gesture' or 'airwriting'")


def _user_master(cfg: DatabaseConfig, master_seed: int, u: int) -> SigmaLogSignature:
    plan = generate_signature_plan(cfg.morphology, cfg.resolved_surface(),
                                   derive_seed(master_seed, u, 0))
    plan = assign_timestamps(plan, derive_seed(master_seed, u, 1),
                             cfg.mean_gap, cfg.sd_gap)
    return plan_to_signature(plan)


def _specimen_header(cfg_fm: float, user: str, kind: str, seed: int, m: float) -> dict:
    return {"fm": "%.9g" % cfg_fm, "user": user, "kind": kind,
            "seed": str(seed), "m": repr(float(m))}


def _render_specimen(master: SigmaLogSignature, kind: str, m: float,
                     seed: int, fm: float) -> Trajectory3D:
    cfg = DuplicationConfig(m=m, kind=kind, seed=seed)
    _, traj = duplicate_signature(master, cfg, fm=fm)
    return traj


def _manifest_entries(cfg, master_seed: int, mode: str) -> dict:
    entries = {"name": cfg.name, "mode": mode, "master_seed": master_seed,
               "fm": float(cfg.fm), "mean_gap": float(cfg.mean_gap),
               "sd_gap": float(cfg.sd_gap)}
    for k, v in cfg.morphology.to_dict().items():
        entries["morph.%s" % k] = v
    if mode == "fs+ds":
        entries.update(users=cfg.users, genuine_per_user=cfg.genuine_per_user,
                       forgery_per_user=cfg.forgery_per_user,
                       m_genuine=float(cfg.m_genuine),
                       m_forgery=float(cfg.m_forgery))
        for k, v in cfg.resolved_surface().to_dict().items():
            entries["surface.%s" % k] = float(v)
    else:
        entries.update(classes=cfg.classes,
                       samples_per_class=cfg.samples_per_class,
                       m=float(cfg.m))
    return entries


def generate_full_database(cfg: DatabaseConfig, out_dir, master_seed: int,
                           workers: int = 1) -> Path:
    """FS+DS database: per-user master, genuine and skilled-forgery files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = []
    for u in range(cfg.users):
        user_id = "u%02d" % u
        master = _user_master(cfg, master_seed, u)
        udir = out / user_id
        (udir / "genuine").mkdir(parents=True, exist_ok=True)
        (udir / "forgery").mkdir(parents=True, exist_ok=True)
        write_parameter_file(udir / "master.par", master,
                             {"user": user_id, "seed": str(derive_seed(master_seed, u, 0))})
        for i in range(cfg.genuine_per_user):
            seed = derive_seed(master_seed, u, 2, i)
            tasks.append((master, "genuine", cfg.m_genuine, seed,
                          udir / "genuine" / ("g%02d.sig" % i), user_id))
        for i in range(cfg.forgery_per_user):
            seed = derive_seed(master_seed, u, 3, i)
            tasks.append((master, "forgery", cfg.m_forgery, seed,
                          udir / "forgery" / ("f%02d.sig" % i), user_id))

    def run(task):
        master, kind, m, seed, path, user_id = task
        traj = _render_specimen(master, kind, m, seed, cfg.fm)
        write_signature_file(path, traj,
                             _specimen_header(cfg.fm, user_id, kind, seed, m))

    _run_tasks(tasks, run, workers)
    write_manifest(out / "manifest", _manifest_entries(cfg, master_seed, "fs+ds"))
    return out


def generate_gesture_database(cfg: GestureDbConfig, out_dir, master_seed: int,
                              workers: int = 1) -> Path:
    """Labeled database: one master plan per class, DS duplicates as samples."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = []
    for c in range(cfg.classes):
        class_id = "c%02d" % c
        if cfg.mode == "gesture":
            plan = generate_gesture_plan(cfg.morphology, derive_seed(master_seed, c, 0))
        else:
            morph = airwriting_config(cfg.morphology.canvas_size)
            plan = generate_signature_plan(morph, SurfaceConfig.for_canvas(morph.canvas_size),
                                           derive_seed(master_seed, c, 0))
        plan = assign_timestamps(plan, derive_seed(master_seed, c, 1),
                                 cfg.mean_gap, cfg.sd_gap)
        master = plan_to_signature(plan)
        cdir = out / class_id
        cdir.mkdir(parents=True, exist_ok=True)
        write_parameter_file(cdir / "master.par", master, {"class": class_id})
        for i in range(cfg.samples_per_class):
            seed = derive_seed(master_seed, c, 2, i)
            tasks.append((master, seed, cdir / ("s%02d.sig" % i), class_id))

    def run(task):
        master, seed, path, class_id = task
        traj = _render_specimen(master, "genuine", cfg.m, seed, cfg.fm)
        header = {"fm": "%.9g" % cfg.fm, "class": class_id, "seed": str(seed),
                  "m": repr(float(cfg.m))}
        write_signature_file(path, traj, header)

    _run_tasks(tasks, run, workers)
    write_manifest(out / "manifest", _manifest_entries(cfg, master_seed, cfg.mode))
    return out


def _run_tasks(tasks, run, workers: int) -> None:
    if workers <= 1:
        for task in tasks:
            run(task)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, tasks))


def _morphology_from_entries(entries: dict) -> MorphologyConfig:
    sub = {k[len("morph."):]: v for k, v in entries.items()
           if k.startswith("morph.")}
    return MorphologyConfig.from_dict(sub) if sub else MorphologyConfig()


def _surface_from_entries(entries: dict) -> SurfaceConfig | None:
    sub = {k[len("surface."):]: v for k, v in entries.items()
           if k.startswith("surface.")}
    return SurfaceConfig.from_dict(sub) if sub else None


def database_config_from_entries(entries: dict) -> DatabaseConfig:
    kw = {}
    for name in ("name",):
        if name in entries:
            kw[name] = str(entries[name])
    for name in ("users", "genuine_per_user", "forgery_per_user"):
        if name in entries:
            kw[name] = int(entries[name])
    for name in ("fm", "m_genuine", "m_forgery", "mean_gap", "sd_gap"):
        if name in entries:
            kw[name] = float(entries[name])
    kw["morphology"] = _morphology_from_entries(entries)
    kw["surface"] = _surface_from_entries(entries)
    return DatabaseConfig(**kw)


def gesture_config_from_entries(entries: dict) -> GestureDbConfig:
    kw = {}
    for name in ("name", "mode"):
        if name in entries:
            kw[name] = str(entries[name])
    for name in ("classes", "samples_per_class"):
        if name in entries:
            kw[name] = int(entries[name])
    for name in ("fm", "m", "mean_gap", "sd_gap"):
        if name in entries:
            kw[name] = float(entries[name])
    kw["morphology"] = _morphology_from_entries(entries)
    return GestureDbConfig(**kw)


def regenerate_from_manifest(manifest_path, out_dir, workers: int = 1) -> Path:
    """Rebuild a database from its manifest (mode, config and master seed)."""
    entries = read_manifest(manifest_path)
    master_seed = int(entries["master_seed"])
    if entries["mode"] == "fs+ds":
        return generate_full_database(database_config_from_entries(entries),
                                      out_dir, master_seed, workers)
    return generate_gesture_database(gesture_config_from_entries(entries),
                                     out_dir, master_seed, workers)


def load_database(db_dir):
    """Load a verification database; returns (manifest, users dict)."""
    db_dir = Path(db_dir)
    manifest = read_manifest(db_dir / "manifest")
    if manifest["mode"] != "fs+ds":
        raise ValueError("not a verification database (mode=%s)" % manifest["mode"])
    users = {}
    for u in range(int(manifest["users"])):
        user_id = "u%02d" % u
        entry = {"genuine": [], "forgery": []}
        for kind, count_key in (("genuine", "genuine_per_user"),
                                ("forgery", "forgery_per_user")):
            prefix = kind[0]
            for i in range(int(manifest[count_key])):
                path = db_dir / user_id / kind / ("%s%02d.sig" % (prefix, i))
                if not path.exists():
                    raise FileNotFoundError("missing specimen %s" % path)
                entry[kind].append(read_signature_file(path).trajectory)
        users[user_id] = entry
    return manifest, users


def load_labeled_database(db_dir):
    """Load a gesture/air-writing database; returns (manifest, label dict)."""
    db_dir = Path(db_dir)
    manifest = read_manifest(db_dir / "manifest")
    if manifest["mode"] not in ("gesture", "airwriting"):
        raise ValueError("not a labeled database (mode=%s)" % manifest["mode"])
    classes = {}
    for c in range(int(manifest["classes"])):
        class_id = "c%02d" % c
        samples = []
        for i in range(int(manifest["samples_per_class"])):
            path = db_dir / class_id / ("s%02d.sig" % i)
            if not path.exists():
                raise FileNotFoundError("missing sample %s" % path)
            samples.append(read_signature_file(path).trajectory)
        classes[class_id] = samples
    return manifest, classes


def kinematics_batch(inputs, out_dir, fm: float, seed: int):
    """KS-convert bare trajectory files; returns per-file report dicts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for k, in_path in enumerate(inputs):
        in_path = Path(in_path)
        report = {"input": str(in_path)}
        try:
            rec = read_signature_file(in_path)
            pts = rec.bare_points if rec.is_bare else rec.trajectory.points
            traj, vp, sps = synthesize_kinematics(pts, fm, derive_seed(seed, k))
            out_path = out / (in_path.stem + ".sig")
            write_signature_file(out_path, traj,
                                 {"fm": "%.9g" % fm, "kind": "ks",
                                  "source": in_path.name, "seed": str(derive_seed(seed, k))})
            report.update(output=str(out_path), n_salient=len(sps),
                          omega=vp.omega, path_length=float(vp.D.sum()),
                          duration=vp.duration, n_strokes=vp.n_strokes,
                          ok=True)
        except Exception as exc:
            report.update(ok=False, error=str(exc))
        reports.append(report)
    return reports
