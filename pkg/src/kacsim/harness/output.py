"""Serialization of experiment results.

``table.csv`` starts with a version line, then a header row, then one row
per record; floats use 17 significant digits. Everything is rendered to
strings before the output directory is touched, so a failure never leaves
partial files behind.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Dict

import numpy as np

TABLE_VERSION = "kacsim-table/1"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def render_rows(columns, rows, sep=",") -> str:
    buf = io.StringIO()
    buf.write(sep.join(columns) + "\n")
    for row in sorted(rows, key=lambda r: tuple(float(v) for v in r)):
        buf.write(sep.join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def render_table(kind: str, columns, rows) -> str:
    return f"# {TABLE_VERSION} kind={kind}\n" + render_rows(columns, rows)


def build_id() -> str:
    """Git-style content hash of the package sources."""
    root = Path(__file__).resolve().parent.parent
    h = hashlib.sha1()
    for p in sorted(root.rglob("*.py")):
        data = p.read_bytes()
        h.update(p.relative_to(root).as_posix().encode())
        h.update(b"blob %d\0" % len(data))
        h.update(data)
    return h.hexdigest()[:12]


def config_hash(cfg_dict: dict) -> str:
    canon = json.dumps(cfg_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def render_meta(cfg, result=None, extra=None) -> str:
    d = cfg.to_dict()
    meta = {
        "table_version": TABLE_VERSION,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "config": d,
        "config_hash": config_hash(d),
        "build_id": build_id(),
    }
    if result is not None:
        meta["fit"] = result.fit.to_dict() if result.fit else None
        meta.update(result.extra)
    if extra:
        meta.update(extra)
    return json.dumps(meta, indent=2, sort_keys=True, default=float) + "\n"


def render_result(cfg, result) -> Dict[str, str]:
    """All output files of one experiment as ``{relative path: text}``."""
    files = {"table.csv": render_table(result.kind, result.columns, result.rows),
             "meta.json": render_meta(cfg, result)}
    if result.summary:
        files[f"plotdata/{result.kind}.tsv"] = render_rows(result.summary_columns, result.summary, "\t")
    counts: Dict[int, int] = {}
    for t, r, pts in sorted(result.snapshots, key=lambda s: (s[1], s[0])):
        k = counts[r] = counts.get(r, -1) + 1
        buf = io.StringIO()
        np.savetxt(buf, pts, fmt="%.17g", delimiter="\t", header=f"time={fmt(t)} replica={r}")
        files[f"plotdata/snapshot_r{r:03d}_{k:04d}.tsv"] = buf.getvalue()
    return files


def write_files(out_dir, files: Dict[str, str]) -> None:
    """Write every file via a temporary name and rename into place."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for rel, text in files.items():
        dest = out / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=dest.parent, prefix=".tmp-")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, dest)
