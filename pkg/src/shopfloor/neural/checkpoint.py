"""Versioned, byte-deterministic checkpoint container.

Layout: magic, header length, JSON header (format version, network config,
training step, extra metadata, array manifest), raw little-endian array bytes,
then a sha256 checksum over everything before it. Writing the same network
state twice produces identical bytes, so run artifacts can be diffed.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from .network import NetworkConfig, QNetwork

MAGIC = b"SFCKPT01"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def dump_checkpoint(net: QNetwork, train_step: int = 0, extra: dict | None = None) -> bytes:
    arrays = net.state_arrays()
    manifest = []
    blobs = []
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        blob = arr.astype(arr.dtype.newbyteorder("<")).tobytes()
        manifest.append({"name": name, "shape": list(arr.shape), "dtype": arr.dtype.str, "nbytes": len(blob)})
        blobs.append(blob)
    header = {
        "format_version": FORMAT_VERSION,
        "config": net.config.to_dict(),
        "train_step": train_step,
        "extra": extra or {},
        "arrays": manifest,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    body = MAGIC + struct.pack("<Q", len(header_bytes)) + header_bytes + b"".join(blobs)
    return body + hashlib.sha256(body).digest()


def load_checkpoint(data: bytes) -> tuple[QNetwork, int, dict]:
    if len(data) < len(MAGIC) + 8 + 32 or not data.startswith(MAGIC):
        raise CheckpointError("not a checkpoint file (bad magic or truncated)")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError("checkpoint checksum mismatch")
    header_len = struct.unpack("<Q", body[len(MAGIC) : len(MAGIC) + 8])[0]
    offset = len(MAGIC) + 8
    header = json.loads(body[offset : offset + header_len].decode())
    if header["format_version"] != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {header['format_version']}")
    offset += header_len
    arrays = {}
    for entry in header["arrays"]:
        n = entry["nbytes"]
        raw = body[offset : offset + n]
        if len(raw) != n:
            raise CheckpointError("checkpoint truncated inside array data")
        arrays[entry["name"]] = np.frombuffer(raw, dtype=np.dtype(entry["dtype"])).reshape(entry["shape"]).copy()
        offset += n
    if offset != len(body):
        raise CheckpointError("trailing bytes after array data")
    net = QNetwork(NetworkConfig.from_dict(header["config"]), np.random.default_rng(0))
    net.load_state_arrays(arrays)
    return net, header["train_step"], header["extra"]


def save_checkpoint(path, net: QNetwork, train_step: int = 0, extra: dict | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(dump_checkpoint(net, train_step, extra))


def read_checkpoint(path) -> tuple[QNetwork, int, dict]:
    with open(path, "rb") as fh:
        return load_checkpoint(fh.read())
