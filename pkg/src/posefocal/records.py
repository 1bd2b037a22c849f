"""Versioned text files for states and tables.

Two encodings are supported for every file kind:

``csv``
    first line ``# posefocal-<kind> v1``, second line the column header,
    then one record per line.
``jsonl``
    first line ``{"format": "posefocal-<kind>", "version": 1}``, then one
    JSON object per line.

Floats are written with ``repr`` so they round-trip exactly.

State files (kind ``states``) carry one camera/object state per record with
columns ``index, seed, f, R00..R22 (row-major), tx, ty, tz, x1, y1, x2, y2,
image_w, image_h``. In JSON the rotation is a nested ``R`` list, the
translation ``t`` and the box ``box``. ``seed``, the box and the image size
are optional (empty CSV cells or missing JSON keys).
"""

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .geometry import Pose
from .update import Detection2D, ParamState

VERSION = 1
FORMATS = ("csv", "jsonl")

STATE_COLUMNS = (
    ("index", "seed", "f")
    + tuple(f"R{i}{j}" for i in range(3) for j in range(3))
    + ("tx", "ty", "tz", "x1", "y1", "x2", "y2", "image_w", "image_h")
)


class RecordError(ValueError):
    def __init__(self, message, line=None, source=None):
        prefix = f"{source}:" if source else ""
        if line is not None:
            prefix += f"{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)
        self.line = line


@dataclass(frozen=True, eq=False)
class StateRecord:
    state: ParamState
    index: int = 0
    seed: int = None
    box: Detection2D = None
    image_w: int = None
    image_h: int = None


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _cell(v):
    if v is None:
        return ""
    v = _num(v)
    return repr(v) if isinstance(v, float) else str(v)


def write_table(fh, kind, columns, rows, fmt):
    """Write ``rows`` (sequences aligned with ``columns``) to ``fh``."""
    if fmt == "csv":
        fh.write(f"# posefocal-{kind} v{VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    elif fmt == "jsonl":
        fh.write(json.dumps({"format": f"posefocal-{kind}", "version": VERSION}) + "\n")
        for row in rows:
            fh.write(json.dumps({c: _num(v) for c, v in zip(columns, row)}) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def _state_row(rec):
    s = rec.state
    box = rec.box.as_tuple() if rec.box is not None else (None,) * 4
    return (
        [rec.index, rec.seed, s.f]
        + [float(x) for x in s.R.ravel()]
        + [float(x) for x in s.t]
        + list(box)
        + [rec.image_w, rec.image_h]
    )


def write_states(fh, records, fmt):
    if fmt == "csv":
        write_table(fh, "states", STATE_COLUMNS, (_state_row(r) for r in records), fmt)
        return
    if fmt != "jsonl":
        raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")
    fh.write(json.dumps({"format": "posefocal-states", "version": VERSION}) + "\n")
    for r in records:
        obj = {"index": r.index}
        if r.seed is not None:
            obj["seed"] = int(r.seed)
        obj["f"] = float(r.state.f)
        obj["R"] = [[float(x) for x in row] for row in r.state.R]
        obj["t"] = [float(x) for x in r.state.t]
        if r.box is not None:
            obj["box"] = [float(x) for x in r.box.as_tuple()]
        if r.image_w is not None:
            obj["image_w"] = int(r.image_w)
            obj["image_h"] = int(r.image_h)
        fh.write(json.dumps(obj) + "\n")


def _detect(first, kind, source):
    first = first.strip()
    if first == f"# posefocal-{kind} v{VERSION}":
        return "csv"
    if first.startswith("{"):
        try:
            head = json.loads(first)
        except json.JSONDecodeError:
            head = None
        if head == {"format": f"posefocal-{kind}", "version": VERSION}:
            return "jsonl"
    raise RecordError(f"missing or unsupported '{kind}' header", 1, source)


def _build_state(values, lineno, source):
    try:
        f = float(values["f"])
        R = np.asarray(values["R"], dtype=float).reshape(3, 3)
        t = np.asarray(values["t"], dtype=float).reshape(3)
        box = values.get("box")
        box = Detection2D(*(float(x) for x in box)) if box is not None else None
        w, h = values.get("image_w"), values.get("image_h")
        if (w is None) != (h is None):
            raise ValueError("image_w and image_h must be given together")
        seed = values.get("seed")
        return StateRecord(
            state=ParamState(Pose(R, t), f),
            index=int(values.get("index", 0)),
            seed=int(seed) if seed is not None else None,
            box=box,
            image_w=int(w) if w is not None else None,
            image_h=int(h) if h is not None else None,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordError(f"bad state record: {exc}", lineno, source) from None


def read_states(fh, source=None):
    lines = fh.read().splitlines()
    if not lines:
        raise RecordError("empty file", 1, source)
    fmt = _detect(lines[0], "states", source)
    out = []
    if fmt == "jsonl":
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(f"invalid JSON: {exc.msg}", lineno, source) from None
            if not isinstance(obj, dict):
                raise RecordError("record must be a JSON object", lineno, source)
            out.append(_build_state(obj, lineno, source))
        return out
    if len(lines) < 2 or next(csv.reader([lines[1]])) != list(STATE_COLUMNS):
        raise RecordError("unexpected CSV column header", 2, source)
    for lineno, row in enumerate(csv.reader(io.StringIO("\n".join(lines[2:]))), start=3):
        if not row:
            continue
        if len(row) != len(STATE_COLUMNS):
            raise RecordError(
                f"expected {len(STATE_COLUMNS)} fields, got {len(row)}", lineno, source
            )
        cells = dict(zip(STATE_COLUMNS, row))
        try:
            vals = {k: (v if v != "" else None) for k, v in cells.items()}
            obj = {
                "index": vals["index"] or 0,
                "seed": vals["seed"],
                "f": vals["f"],
                "R": [float(vals[f"R{i}{j}"]) for i in range(3) for j in range(3)],
                "t": [float(vals["tx"]), float(vals["ty"]), float(vals["tz"])],
                "image_w": vals["image_w"],
                "image_h": vals["image_h"],
            }
            box = [vals[k] for k in ("x1", "y1", "x2", "y2")]
            if any(b is not None for b in box):
                obj["box"] = box
        except (TypeError, ValueError) as exc:
            raise RecordError(f"bad state record: {exc}", lineno, source) from None
        out.append(_build_state(obj, lineno, source))
    return out


def read_table(fh, kind, source=None):
    """Read a table written by :func:`write_table`; returns ``(columns, rows)``
    with every cell as a string (CSV) or JSON value (jsonl)."""
    lines = fh.read().splitlines()
    if not lines:
        raise RecordError("empty file", 1, source)
    fmt = _detect(lines[0], kind, source)
    if fmt == "csv":
        rows = list(csv.reader(lines[1:]))
        return rows[0], rows[1:]
    objs = [json.loads(line) for line in lines[1:] if line.strip()]
    columns = list(objs[0]) if objs else []
    return columns, [[o[c] for c in columns] for o in objs]
