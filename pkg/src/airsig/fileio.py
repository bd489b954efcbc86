"""Text file formats: signatures, parameter files, manifests and configs.

All formats are line oriented.  Signature files store `t x y z` rows (or
`x y z` for bare trajectories) at 9 significant digits after `#key value`
header lines; parameter files store a plan and its strokes at 12
significant digits; manifests and configs are `key = value` lines.
Writes are whole-file atomic (write then rename).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import LognormalStroke, SigmaLogSignature, Trajectory3D
from .plan import ActionPlan, fit_planar_arc

SIG_MAGIC = "#airsig v1"
PAR_MAGIC = "#airsig-params v1"
MANIFEST_MAGIC = "#airsig-manifest v1"

_SIG_FMT = "%.9g"
_PAR_FMT = "%.12g"


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


@dataclass(frozen=True, eq=False)
class SignatureRecord:
    """Parsed signature file: header plus a timed or bare trajectory."""

    header: dict
    trajectory: Trajectory3D | None
    bare_points: np.ndarray | None

    @property
    def is_bare(self) -> bool:
        return self.trajectory is None


def _format_row(values, fmt: str) -> str:
    return " ".join(fmt % v for v in values)


def write_signature_file(path, data, header: dict | None = None) -> None:
    """Write a Trajectory3D (t x y z rows) or bare (N, 3) points (x y z)."""
    lines = [SIG_MAGIC]
    header = dict(header or {})
    if isinstance(data, Trajectory3D):
        if data.fm is not None and "fm" not in header:
            header["fm"] = _SIG_FMT % data.fm
        for k, v in header.items():
            lines.append("#%s %s" % (k, v))
        for t, p in zip(data.times, data.points):
            lines.append(_format_row([t, p[0], p[1], p[2]], _SIG_FMT))
    else:
        pts = np.asarray(data, dtype=float)
        for k, v in header.items():
            lines.append("#%s %s" % (k, v))
        for p in pts:
            lines.append(_format_row(p, _SIG_FMT))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_signature_file(path) -> SignatureRecord:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != SIG_MAGIC:
        raise ValueError("%s: not a signature file" % path)
    header: dict = {}
    rows = []
    for line in lines[1:]:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(" ")
            header[key] = value
            continue
        rows.append([float(x) for x in line.split()])
    if not rows:
        raise ValueError("%s: no data rows" % path)
    data = np.asarray(rows, dtype=float)
    if data.shape[1] == 4:
        fm = float(header["fm"]) if "fm" in header else None
        traj = Trajectory3D(times=data[:, 0], points=data[:, 1:4], fm=fm)
        return SignatureRecord(header=header, trajectory=traj, bare_points=None)
    if data.shape[1] == 3:
        return SignatureRecord(header=header, trajectory=None, bare_points=data)
    raise ValueError("%s: rows must have 3 or 4 columns" % path)


def write_parameter_file(path, sig: SigmaLogSignature,
                         header: dict | None = None) -> None:
    """Persist a signature's plan (targets/midpoints/timestamps) and strokes."""
    plan = sig.plan
    lines = [PAR_MAGIC]
    for k, v in (header or {}).items():
        lines.append("#%s %s" % (k, v))
    lines.append("targets %d" % plan.n_targets)
    for p in plan.targets:
        lines.append(_format_row(p, _PAR_FMT))
    lines.append("midpoints %d" % len(plan.midpoints))
    for p in plan.midpoints:
        lines.append(_format_row(p, _PAR_FMT))
    if plan.is_timed:
        lines.append("timestamps %d" % plan.n_targets)
        for t in plan.timestamps:
            lines.append(_PAR_FMT % t)
    lines.append("strokes %d" % sig.n_strokes)
    for s in sig.strokes:
        lines.append(_format_row([s.D, s.t0, s.mu, s.sigma2,
                                  s.theta_s, s.theta_e, s.phi_s, s.phi_e], _PAR_FMT))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_parameter_file(path):
    """Load a parameter file; returns (SigmaLogSignature, header dict)."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != PAR_MAGIC:
        raise ValueError("%s: not a parameter file" % path)
    header: dict = {}
    sections: dict = {}
    i = 1
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(" ")
            header[key] = value
            continue
        name, count = line.split()
        count = int(count)
        block = []
        for _ in range(count):
            block.append([float(x) for x in lines[i].split()])
            i += 1
        sections[name] = np.asarray(block, dtype=float)
    targets = sections["targets"]
    midpoints = sections["midpoints"]
    ts = sections.get("timestamps")
    if ts is not None:
        ts = ts.ravel()
    links = tuple(fit_planar_arc(targets[j], targets[j + 1], midpoints[j])
                  for j in range(len(targets) - 1))
    plan = ActionPlan(targets=targets, midpoints=midpoints, links=links,
                      timestamps=ts)
    strokes = tuple(LognormalStroke(*row) for row in sections["strokes"])
    return SigmaLogSignature(plan=plan, strokes=strokes), header


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_value(s: str):
    s = s.strip()
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    return s


def write_config(path, entries: dict, magic: str | None = None) -> None:
    lines = [] if magic is None else [magic]
    for k in sorted(entries):
        lines.append("%s = %s" % (k, format_value(entries[k])))
    atomic_write_text(path, "\n".join(lines) + "\n")


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines; '#' lines and blanks are ignored."""
    out: dict = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError("line %d: expected 'key = value'" % ln)
        key, _, value = line.partition("=")
        out[key.strip()] = parse_value(value)
    return out


def read_config(path) -> dict:
    return parse_config_text(Path(path).read_text())


def write_manifest(path, entries: dict) -> None:
    write_config(path, entries, magic=MANIFEST_MAGIC)


def read_manifest(path) -> dict:
    text = Path(path).read_text()
    first = text.splitlines()[0].strip() if text else ""
    if first != MANIFEST_MAGIC:
        raise ValueError("%s: not a database manifest" % path)
    return parse_config_text(text)
