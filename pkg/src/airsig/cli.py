"""Command-line front end: database generation, conversion and evaluation.

Subcommands: synth-full, synth-kinematics, duplicate, evaluate, gesture-db.
All commands are deterministic given --seed and their config.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .database import (DatabaseConfig, GestureDbConfig,
                       database_config_from_entries, gesture_config_from_entries,
                       derive_seed, generate_full_database,
                       generate_gesture_database, kinematics_batch,
                       load_database, load_labeled_database)
from .duplication import DuplicationConfig, duplicate_signature
from .fileio import (atomic_write_text, read_config, read_parameter_file,
                     read_signature_file, write_signature_file)
from .kinematics import estimate_parameters
from .verification import ExperimentProtocol, classify_cmc, evaluate


def _load_entries(config_path) -> dict:
    return read_config(config_path) if config_path else {}


def cmd_synth_full(args) -> int:
    entries = _load_entries(args.config)
    if args.users is not None:
        entries["users"] = args.users
    if args.genuine is not None:
        entries["genuine_per_user"] = args.genuine
    if args.forgery is not None:
        entries["forgery_per_user"] = args.forgery
    if args.fm is not None:
        entries["fm"] = args.fm
    cfg = database_config_from_entries(entries)
    out = generate_full_database(cfg, args.out, args.seed, workers=args.workers)
    total = cfg.users * (cfg.genuine_per_user + cfg.forgery_per_user)
    print("wrote %d signature files for %d users under %s" % (total, cfg.users, out))
    return 0


def cmd_synth_kinematics(args) -> int:
    reports = kinematics_batch(args.inputs, args.out, args.fm, args.seed)
    lines = []
    failed = 0
    for r in reports:
        if r["ok"]:
            lines.append("%s: %d salient points, %d strokes, omega=%.6g, "
                         "Ls=%.6g, duration=%.4g s"
                         % (r["input"], r["n_salient"], r["n_strokes"],
                            r["omega"], r["path_length"], r["duration"]))
        else:
            failed += 1
            lines.append("%s: FAILED (%s)" % (r["input"], r["error"]))
    report_text = "\n".join(lines) + "\n"
    atomic_write_text(Path(args.out) / "ks_report.txt", report_text)
    print(report_text, end="")
    return 1 if failed else 0


def cmd_duplicate(args) -> int:
    in_path = Path(args.input)
    if in_path.suffix == ".par":
        sig, _ = read_parameter_file(in_path)
        fm = args.fm
    else:
        rec = read_signature_file(in_path)
        if rec.is_bare:
            print("error: %s is a bare trajectory; run synth-kinematics first"
                  % in_path, file=sys.stderr)
            return 2
        try:
            sig, _ = estimate_parameters(rec.trajectory)
        except Exception as exc:
            print("error: cannot parametrize %s: %s" % (in_path, exc),
                  file=sys.stderr)
            return 2
        fm = args.fm if args.fm is not None else rec.trajectory.fm
    fm = fm if fm is not None else 100.0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        seed = args.seed + i
        cfg = DuplicationConfig(m=args.m, kind=args.kind, seed=seed,
                                affine_enabled=not args.no_affine)
        _, traj = duplicate_signature(sig, cfg, fm=fm)
        header = {"fm": "%.9g" % fm, "kind": "duplicate-%s" % args.kind,
                  "source": in_path.name, "m": repr(cfg.effective_m),
                  "seed": str(seed)}
        write_signature_file(out / ("dup%03d.sig" % i), traj, header)
    print("wrote %d %s duplicates of %s under %s"
          % (args.count, args.kind, in_path.name, out))
    return 0


def _report_table(tag: str, report) -> str:
    lines = ["[%s]" % tag]
    lines.append("scenario  EER%%      AUC")
    for scen in ("random", "skilled"):
        vals = report.eer_random if scen == "random" else report.eer_skilled
        if not vals:
            continue
        lines.append("%-8s  %6.2f    %.4f"
                     % (scen, 100.0 * report.mean_eer(scen), report.mean_auc(scen)))
    return "\n".join(lines)


def _write_det(path, far_grid, frr) -> None:
    rows = ["%.6g %.6g" % (f, r) for f, r in zip(far_grid, frr)]
    atomic_write_text(path, "\n".join(rows) + "\n")


def cmd_evaluate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.classify:
        _, classes = load_labeled_database(args.db)
        protocol = ExperimentProtocol(repetitions=args.reps, seed=args.seed,
                                      templates_per_class=args.templates)
        report = classify_cmc(classes, protocol, metric=args.verifier)
        rows = ["%d %.6g" % (k + 1, acc) for k, acc in enumerate(report.cmc)]
        atomic_write_text(out / "cmc.txt", "\n".join(rows) + "\n")
        text = "rank-1 accuracy: %.2f%% (%s)" % (100.0 * report.cmc[0], args.verifier)
        atomic_write_text(out / "report.txt", text + "\n")
        print(text)
        return 0

    _, users = load_database(args.db)
    protocol = ExperimentProtocol(train_genuine_count=args.train,
                                  repetitions=args.reps, seed=args.seed)
    report = evaluate(users, protocol, metric=args.verifier)
    sections = [_report_table("baseline", report)]
    _write_det(out / "det_random.txt", report.far_grid, report.frr_random)
    if report.frr_skilled is not None:
        _write_det(out / "det_skilled.txt", report.far_grid, report.frr_skilled)

    if args.duplicates:
        aug_protocol = ExperimentProtocol(train_genuine_count=args.train,
                                          repetitions=args.reps, seed=args.seed,
                                          duplicates_per_training=args.duplicates)
        aug = evaluate(users, aug_protocol, metric=args.verifier)
        sections.append(_report_table("augmented x%d" % args.duplicates, aug))
        _write_det(out / "det_random_aug.txt", aug.far_grid, aug.frr_random)
        if aug.frr_skilled is not None:
            _write_det(out / "det_skilled_aug.txt", aug.far_grid, aug.frr_skilled)

    text = "\n\n".join(sections)
    atomic_write_text(out / "report.txt", text + "\n")
    print(text)
    return 0


def cmd_gesture_db(args) -> int:
    entries = _load_entries(args.config)
    if args.mode is not None:
        entries["mode"] = args.mode
    if args.classes is not None:
        entries["classes"] = args.classes
    if args.samples is not None:
        entries["samples_per_class"] = args.samples
    if args.fm is not None:
        entries["fm"] = args.fm
    cfg = gesture_config_from_entries(entries)
    out = generate_gesture_database(cfg, args.out, args.seed, workers=args.workers)
    print("wrote %d classes x %d samples (%s mode) under %s"
          % (cfg.classes, cfg.samples_per_class, cfg.mode, out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="airsig",
                                     description="3D on-air signature synthesis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-full", help="generate an FS+DS signature database")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--users", type=int, default=None)
    p.add_argument("--genuine", type=int, default=None)
    p.add_argument("--forgery", type=int, default=None)
    p.add_argument("--fm", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_synth_full)

    p = sub.add_parser("synth-kinematics",
                       help="synthesize velocity for bare trajectories (KS)")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--fm", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth_kinematics)

    p = sub.add_parser("duplicate", help="generate DS duplicates of a specimen")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--kind", choices=("genuine", "forgery"), default="genuine")
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fm", type=float, default=None)
    p.add_argument("--no-affine", action="store_true")
    p.set_defaults(func=cmd_duplicate)

    p = sub.add_parser("evaluate", help="run verification or classification")
    p.add_argument("--db", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--verifier", choices=("dtw", "man"), default="dtw")
    p.add_argument("--train", type=int, default=5)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--duplicates", type=int, default=0)
    p.add_argument("--templates", type=int, default=1)
    p.add_argument("--classify", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gesture-db", help="generate a gesture/air-writing database")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--mode", choices=("gesture", "airwriting"), default=None)
    p.add_argument("--classes", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--fm", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_gesture_db)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
