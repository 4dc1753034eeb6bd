"""CSV/JSON interchange: observation files, paths, segmentations, diagnostics.

Files are UTF-8 with LF line endings; floats use ``repr`` so values round-trip.
"""
from __future__ import annotations

import contextlib
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ternary import Segmentation


class DataFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ObservationData:
    y: np.ndarray
    x_true: np.ndarray | None = None


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_simulation(path, x_true, y) -> None:
    with _open_out(path) as fh:
        w = _writer(fh)
        w.writerow(("k", "x_true", "y"))
        for k, (x, v) in enumerate(zip(x_true.tolist(), y.tolist()), start=1):
            w.writerow((k, x, repr(v)))


def read_observations(path) -> ObservationData:
    """Read a CSV with a ``y`` column and optionally ``k`` and ``x_true``."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        if "y" not in cols:
            raise DataFormatError(f"{path}: no 'y' column (found {cols})")
        ys, xs = [], []
        has_x = "x_true" in cols
        for line, row in enumerate(reader, start=2):
            try:
                if "k" in cols and int(row["k"]) != len(ys) + 1:
                    raise DataFormatError(f"{path}:{line}: expected k={len(ys) + 1}, got {row['k']}")
                ys.append(float(row["y"]))
                if has_x:
                    xs.append(int(row["x_true"]))
            except (TypeError, ValueError) as exc:
                if isinstance(exc, DataFormatError):
                    raise
                raise DataFormatError(f"{path}:{line}: malformed row {row}") from exc
    if not ys:
        raise DataFormatError(f"{path}: no observations")
    return ObservationData(np.asarray(ys), np.asarray(xs, dtype=np.int64) if has_x else None)


def write_path(path, x_hat) -> None:
    with _open_out(path) as fh:
        w = _writer(fh)
        w.writerow(("k", "x_hat"))
        for k, x in enumerate(np.asarray(x_hat).tolist(), start=1):
            w.writerow((k, x))


def read_path(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        return np.asarray([int(row["x_hat"]) for row in csv.DictReader(fh)], dtype=np.int64)


def write_segmentation(path, seg: Segmentation) -> None:
    with _open_out(path) as fh:
        w = _writer(fh)
        w.writerow(("ell", "r", "state"))
        for (l, r), z in zip(seg.segments, seg.states):
            w.writerow((l, r, z))


def read_segmentation(path) -> Segmentation:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return Segmentation(tuple((int(r["ell"]), int(r["r"])) for r in rows),
                        tuple(int(r["state"]) for r in rows))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _open_out(path):
    if str(path) == "-":
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", newline="", encoding="utf-8")
