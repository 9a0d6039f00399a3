"""Minimal R3EMB1 store writer.

Layout, little-endian:

    magic "R3EMB1" | u32 count | u32 dim | count * (u16 key_len | utf-8 key | dim * f4)

The writer is deliberately self-contained so this tool has no dependency on
the consumer package; the consumer's `embed-check` subcommand is the
authority on whether a written file is valid.
"""

import os
import struct
import tempfile

import numpy as np

MAGIC = b"R3EMB1"


class StoreError(ValueError):
    """The entries cannot be serialized as an R3EMB1 store."""


def write_store(path, entries: dict) -> int:
    """Write {key: vector} atomically; returns the embedding dim.

    All vectors must share one positive length; values are stored as
    little-endian float32. The file appears under `path` only after a
    complete write (temp file + rename), so a crash never leaves a
    truncated store behind.
    """
    if not entries:
        raise StoreError("refusing to write an empty store")
    dims = {np.asarray(v).shape for v in entries.values()}
    if len(dims) != 1 or len(next(iter(dims))) != 1:
        raise StoreError(f"vectors must share one 1-D shape, got {sorted(dims)}")
    dim = next(iter(dims))[0]
    if dim == 0:
        raise StoreError("embedding dim must be positive")

    blobs = []
    for key, vec in entries.items():
        encoded = key.encode("utf-8")
        if not 0 < len(encoded) <= 0xFFFF:
            raise StoreError(f"key length {len(encoded)} outside (0, 65535]: {key!r}")
        arr = np.ascontiguousarray(vec, dtype="<f4")
        if not np.all(np.isfinite(arr)):
            raise StoreError(f"non-finite embedding for {key!r}")
        blobs.append(struct.pack("<H", len(encoded)) + encoded + arr.tobytes())

    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".r3emb.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", len(entries), dim))
            for blob in blobs:
                fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return int(dim)
