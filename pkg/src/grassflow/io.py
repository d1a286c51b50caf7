"""Plain-text artifacts: polyline snapshots, diagnostics CSV, JSON reports."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ambient import AmbientSpace
from .loops import DiscreteLoop


def write_polylines(path, loops: Iterable[DiscreteLoop]) -> Path:
    """One ``i,x,y,z`` line per vertex; consecutive loops separated by a blank line."""
    path = Path(path)
    blocks = []
    for loop in loops:
        blocks.append("\n".join(f"{i},{x!r},{y!r},{z!r}" for i, (x, y, z) in enumerate(loop.vertices.tolist())))
    path.write_text("\n\n".join(blocks) + "\n")
    return path


def read_polylines(path, space: AmbientSpace | None = None) -> list[DiscreteLoop]:
    """Inverse of :func:`write_polylines`.

    On the torus the closing lattice shift is recovered as the lattice vector
    nearest to ``v[-1] - v[0]``, which is right whenever edges are short.
    """
    space = space or AmbientSpace.euclidean()
    out = []
    for block in Path(path).read_text().strip().split("\n\n"):
        rows = [line.split(",") for line in block.strip().splitlines() if line.strip()]
        if any(len(r) != 4 for r in rows):
            raise ValueError(f"{path}: expected 'i,x,y,z' lines")
        v = np.array([[float(c) for c in r[1:]] for r in rows])
        shift = np.zeros(3)
        if space.kind == "torus":
            per = np.asarray(space.periods)
            shift = per * np.round((v[-1] - v[0]) / per)
        out.append(DiscreteLoop(v, space, shift))
    return out


def write_csv(path, rows: Sequence[dict], columns: Sequence[str] | None = None) -> Path:
    path = Path(path)
    columns = list(columns or (rows[0].keys() if rows else []))
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return path


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n")
    return path


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
