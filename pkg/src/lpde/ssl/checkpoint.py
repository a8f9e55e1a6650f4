"""Versioned binary checkpoints for encoder + projector weights.

Layout: magic "LPDEckpt" | u32 version (little-endian) | u64 header length |
JSON header (sorted keys; architecture, normalization, parameter manifest) |
little-endian f64 parameter tensors in declaration order.
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from ..errors import CorruptFileError, DataFormatError, UnsupportedVersionError
from .nets import Encoder, EncoderConfig, Projector, ProjectorConfig
from .train import Normalization, PretrainResult

MAGIC = b"LPDEckpt"
VERSION = 1


def save_checkpoint(path, result: PretrainResult, extra: dict | None = None) -> None:
    named = [("encoder." + n, t) for n, t in result.encoder.parameters()]
    named += [("projector." + n, t) for n, t in result.projector.parameters()]
    header = {
        "architecture": {
            "encoder": result.encoder.config.to_dict(),
            "projector": result.projector.config.to_dict(),
        },
        "normalization": result.normalization.to_dict(),
        "params": [{"name": n, "shape": list(t.value.shape)} for n, t in named],
        "config": result.config,
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for _, t in named:
            fh.write(np.ascontiguousarray(t.value, dtype="<f8").tobytes())
    os.replace(tmp, path)


def load_checkpoint(path) -> PretrainResult:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise DataFormatError(f"{path}: not a checkpoint (magic {magic!r})")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise UnsupportedVersionError(
                f"{path}: checkpoint version {version} unsupported (reader knows {VERSION})"
            )
        (hlen,) = struct.unpack("<Q", fh.read(8))
        blob = fh.read(hlen)
        if len(blob) != hlen:
            raise CorruptFileError(f"{path}: truncated header")
        header = json.loads(blob.decode())
        payload = fh.read()
    enc_cfg = EncoderConfig.from_dict(header["architecture"]["encoder"])
    proj_cfg = ProjectorConfig.from_dict(header["architecture"]["projector"])
    # Parameter construction order must match the manifest; seeds irrelevant
    # because every value is overwritten.
    rng = np.random.default_rng(0)
    encoder = Encoder(enc_cfg, rng)
    projector = Projector(proj_cfg, enc_cfg.repr_dim, rng)
    expected = sum(int(np.prod(p["shape"])) for p in header["params"])
    if len(payload) != expected * 8:
        raise CorruptFileError(
            f"{path}: payload holds {len(payload)} bytes, manifest expects {expected * 8}"
        )
    flat = np.frombuffer(payload, dtype="<f8")
    values: dict[str, np.ndarray] = {}
    offset = 0
    for p in header["params"]:
        size = int(np.prod(p["shape"]))
        values[p["name"]] = flat[offset : offset + size].reshape(p["shape"])
        offset += size
    encoder.load_values({n[len("encoder.") :]: v for n, v in values.items() if n.startswith("encoder.")})
    projector.load_values({n[len("projector.") :]: v for n, v in values.items() if n.startswith("projector.")})
    return PretrainResult(
        encoder=encoder,
        projector=projector,
        normalization=Normalization.from_dict(header["normalization"]),
        loss_trace=[],
        config=header.get("config", {}),
    )
