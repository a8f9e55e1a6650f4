"""Bit-exact dataset containers and CSV export.

Container layout (little-endian throughout)::

    bytes 0..3    magic "LPDE"
    bytes 4..7    u32 format version (= 1)
    bytes 8..15   u64 header length H
    bytes 16..    H bytes of canonical JSON (sorted keys, no whitespace)
    then          per sample: values, t_coords, x_coords[, y_coords] as
                  contiguous f64 arrays in header order

Headers carry counts, shapes, and per-sample metadata; coordinates travel in
the payload so the roundtrip is bitwise exact.  Writers stage through a
temporary file and atomically rename, so readers never observe a torn file.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    ContainerError,
    CorruptFileError,
    DataFormatError,
    UnsupportedVersionError,
)
from .fields import SolutionField

MAGIC = b"LPDE"
VERSION = 1


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def _sample_nbytes(shape, has_y: bool) -> int:
    values = int(np.prod(shape))
    coords = shape[1] + shape[2] + (shape[3] if has_y else 0)
    return (values + coords) * 8


@dataclass
class DatasetContainer:
    """Decoded container: header dict plus reconstructed fields."""

    header: dict
    fields: list[SolutionField]

    @property
    def equation(self) -> str | None:
        return self.header.get("equation")

    def __len__(self) -> int:
        return len(self.fields)


def write_dataset(samples: list[SolutionField], path) -> None:
    """Serialize fields with their metadata; same inputs give identical bytes."""
    samples = list(samples)
    if samples:
        shape = samples[0].values.shape
        equation = samples[0].equation
        has_y = samples[0].y_coords is not None
        for s in samples:
            if s.values.shape != shape:
                raise ContainerError(
                    f"heterogeneous sample shapes: {s.values.shape} vs {shape}"
                )
            if s.equation != equation:
                raise ContainerError(
                    f"heterogeneous equations: {s.equation!r} vs {equation!r}"
                )
    else:
        shape, equation, has_y = (), None, False
    header = {
        "format_version": VERSION,
        "equation": equation,
        "count": len(samples),
        "shape": list(shape),
        "has_y": has_y,
        "samples": [{"meta": _jsonable(s.meta)} for s in samples],
    }
    blob = _canonical_json(header)
    tmp = str(path) + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", VERSION))
            fh.write(struct.pack("<Q", len(blob)))
            fh.write(blob)
            for s in samples:
                fh.write(np.ascontiguousarray(s.values, dtype="<f8").tobytes())
                fh.write(np.ascontiguousarray(s.t_coords, dtype="<f8").tobytes())
                fh.write(np.ascontiguousarray(s.x_coords, dtype="<f8").tobytes())
                if has_y:
                    fh.write(np.ascontiguousarray(s.y_coords, dtype="<f8").tobytes())
        os.replace(tmp, path)
    except OSError as exc:
        raise DataFormatError(f"writing {path} failed: {exc}") from exc
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def read_dataset(path) -> DatasetContainer:
    """Validate magic, version, and length fields before touching the payload."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataFormatError(f"reading {path} failed: {exc}") from exc
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise DataFormatError(f"{path}: not a dataset container (bad magic)")
    (version,) = struct.unpack("<I", raw[4:8])
    if version != VERSION:
        raise UnsupportedVersionError(
            f"{path}: format version {version} unsupported (reader knows {VERSION})"
        )
    (hlen,) = struct.unpack("<Q", raw[8:16])
    if 16 + hlen > len(raw):
        raise CorruptFileError(f"{path}: header length field exceeds file size")
    try:
        header = json.loads(raw[16 : 16 + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFileError(f"{path}: undecodable header: {exc}") from exc
    count = header.get("count", 0)
    shape = tuple(header.get("shape", ()))
    has_y = header.get("has_y", False)
    payload = raw[16 + hlen :]
    expected = count * _sample_nbytes(shape, has_y) if count else 0
    if len(payload) != expected:
        raise CorruptFileError(
            f"{path}: payload holds {len(payload)} bytes, header implies {expected}"
        )
    fields = []
    offset = 0
    values_n = int(np.prod(shape)) if shape else 0
    for i in range(count):
        meta = header["samples"][i]["meta"]
        vals = np.frombuffer(payload, dtype="<f8", count=values_n, offset=offset)
        offset += values_n * 8
        t = np.frombuffer(payload, dtype="<f8", count=shape[1], offset=offset)
        offset += shape[1] * 8
        x = np.frombuffer(payload, dtype="<f8", count=shape[2], offset=offset)
        offset += shape[2] * 8
        y = None
        if has_y:
            y = np.frombuffer(payload, dtype="<f8", count=shape[3], offset=offset)
            offset += shape[3] * 8
        fields.append(
            SolutionField(
                values=vals.reshape(shape).copy(),
                t_coords=t.copy(),
                x_coords=x.copy(),
                y_coords=None if y is None else y.copy(),
                meta=meta,
            )
        )
    return DatasetContainer(header=header, fields=fields)


def export_csv(data, path) -> None:
    """Write records or a 2D array as CSV with shortest-roundtrip floats."""

    def fmt(v):
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        return str(v)

    rows: list[list]
    if isinstance(data, np.ndarray):
        arr = np.atleast_2d(np.asarray(data))
        if arr.ndim != 2:
            raise DataFormatError("export_csv takes 1D/2D arrays or records")
        header = [f"c{j}" for j in range(arr.shape[1])]
        rows = [list(r) for r in arr]
    elif isinstance(data, dict):
        header = list(data.keys())
        rows = [[data[k] for k in header]]
    else:
        records = list(data)
        if not records:
            raise DataFormatError("export_csv needs at least one record")
        header = list(records[0].keys())
        rows = [[rec[k] for k in header] for rec in records]
    tmp = str(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(",".join(str(h) for h in header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    os.replace(tmp, path)
