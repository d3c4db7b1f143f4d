"""File formats: point-cloud CSV/JSON, PPM (P3) images, transform and diagram JSON.

Every float written by this module uses 17 significant digits so that
re-reading a file reproduces the exact doubles.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ValidationError
from .metric import PointCloud, ScalingTransform
from .rips import PersistenceDiagram

SCHEMA_VERSION = 1


def fmt_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        raise ValidationError("refusing to serialize NaN")
    return format(x, ".17g")


def _json_float(x: float) -> str:
    if math.isinf(x):
        # infinite distances are reported as the string "inf"
        return '"inf"' if x > 0 else '"-inf"'
    s = fmt_float(x)
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON: keys in insertion order, floats at 17 significant digits."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return _json_float(float(o))
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple, np.ndarray)):
            if len(o) == 0:
                return "[]"
            if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0) + "\n"


def _parse_inf(o):
    if isinstance(o, dict):
        return {k: _parse_inf(v) for k, v in o.items()}
    if isinstance(o, list):
        return [_parse_inf(v) for v in o]
    if o == "inf":
        return math.inf
    return o


def loads(text: str) -> Any:
    return _parse_inf(json.loads(text))


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    return str(v)


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    fields: list[str] = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in fields])
    return buf.getvalue()


# point clouds


def parse_csv_cloud(text: str, source: str = "<csv>") -> PointCloud:
    rows = []
    width = None
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            values = [float(c) for c in row]
        except ValueError:
            raise ValidationError(f"{source}:{lineno}: non-numeric field in {row!r}") from None
        if not all(math.isfinite(v) for v in values):
            raise ValidationError(f"{source}:{lineno}: non-finite coordinate")
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ValidationError(f"{source}:{lineno}: expected {width} coordinates, got {len(values)}")
        rows.append(values)
    if not rows:
        raise ValidationError(f"{source}: no points")
    return PointCloud(np.asarray(rows, dtype=float))


def cloud_to_csv(cloud: PointCloud) -> str:
    return "".join(",".join(fmt_float(v) for v in row) + "\n" for row in cloud.points.tolist())


def cloud_to_dict(cloud: PointCloud) -> dict:
    return {"schema": SCHEMA_VERSION, "dimension": cloud.dim, "points": cloud.points.tolist()}


def cloud_from_dict(data: dict) -> PointCloud:
    try:
        return PointCloud.from_rows(data["points"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed point cloud JSON: {exc}") from None


def parse_ppm(text: str, source: str = "<ppm>") -> PointCloud:
    """Plain PPM (P3) to a cloud of RGB vectors rescaled to [0, 255]."""
    tokens = []
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P3":
        raise ValidationError(f"{source}: not a plain PPM (P3) file")
    try:
        w, h, maxval = (int(t) for t in tokens[1:4])
        values = [int(t) for t in tokens[4:]]
    except ValueError:
        raise ValidationError(f"{source}: non-integer token in PPM") from None
    if w < 1 or h < 1 or maxval < 1:
        raise ValidationError(f"{source}: invalid PPM header")
    if len(values) != w * h * 3:
        raise ValidationError(f"{source}: expected {w * h * 3} samples, got {len(values)}")
    px = np.asarray(values, dtype=float).reshape(w * h, 3)
    if np.any(px > maxval) or np.any(px < 0):
        raise ValidationError(f"{source}: sample outside [0, {maxval}]")
    if maxval != 255:
        px = px * (255.0 / maxval)
    return PointCloud(px)


def cloud_to_ppm(cloud: PointCloud, width: int, height: int) -> str:
    if cloud.dim != 3 or cloud.n_points != width * height:
        raise ValidationError("PPM output needs width*height RGB points")
    px = np.clip(np.rint(cloud.points), 0, 255).astype(int)
    lines = ["P3", f"{width} {height}", "255"]
    lines += [" ".join(str(v) for v in row) for row in px.tolist()]
    return "\n".join(lines) + "\n"


def read_point_cloud(path: str | Path) -> PointCloud:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    suffix = path.suffix.lower()
    if suffix == ".json":
        try:
            return cloud_from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON: {exc}") from None
    if suffix == ".ppm":
        return parse_ppm(text, str(path))
    return parse_csv_cloud(text, str(path))


# transforms and diagrams


def transform_from_dict(data: dict) -> ScalingTransform:
    try:
        return ScalingTransform(tuple(data["factors"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed transform JSON: {exc}") from None


def read_transform(path: str | Path) -> ScalingTransform:
    try:
        return transform_from_dict(json.loads(Path(path).read_text()))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from None


def parse_factors(text: str) -> ScalingTransform:
    try:
        return ScalingTransform(tuple(float(v) for v in text.split(",")))
    except ValueError:
        raise ValidationError(f"scaling factors must be comma-separated numbers, got {text!r}") from None


def read_diagrams(path: str | Path) -> list[PersistenceDiagram]:
    """A diagram JSON file holds one diagram object, a list of them, or {"diagrams": [...]}."""
    try:
        data = loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from None
    if isinstance(data, dict) and "diagrams" in data:
        data = data["diagrams"]
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise ValidationError(f"{path}: expected diagram object(s)")
    return [PersistenceDiagram.from_dict(d) for d in data]


def distance_result(metric: str, value: float, p: float | None = None) -> dict:
    out: dict[str, Any] = {"metric": metric}
    if p is not None:
        out["p"] = p
    out["value"] = value
    return out


def write_text(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc.strerror}") from None
