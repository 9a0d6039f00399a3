"""R3EMB1 embedding store: binary I/O and compound joining.

File layout: magic b"R3EMB1", u32 LE entry count, u32 LE dim, then per
entry a u16 LE key byte-length, the UTF-8 key, and dim float32 LE values.
Keys are canonical SMILES; vectors are frozen model outputs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError, FormatError

MAGIC = b"R3EMB1"


@dataclass
class EmbeddingStore:
    dim: int
    entries: dict = field(default_factory=dict)  # canonical SMILES -> float32 vec

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise DataError(f"embedding dim must be positive, got {self.dim}")
        for key, vec in self.entries.items():
            self.entries[key] = self._check_vec(key, vec)

    def _check_vec(self, key: str, vec) -> np.ndarray:
        arr = np.ascontiguousarray(vec, dtype=np.float32)
        if arr.shape != (self.dim,):
            raise DataError(
                f"vector for {key!r} has shape {arr.shape}, expected ({self.dim},)"
            )
        return arr

    def add(self, key: str, vec) -> None:
        if key in self.entries:
            raise DataError(f"duplicate embedding key {key!r}")
        self.entries[key] = self._check_vec(key, vec)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: str) -> bool:
        return key in self.entries


def write_store(store: EmbeddingStore, path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", len(store.entries), store.dim))
        for key, vec in store.entries.items():
            encoded = key.encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise DataError(f"key too long for u16 length: {len(encoded)} bytes")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(vec.astype("<f4").tobytes())


def _read_exact(fh, size: int, what: str) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise FormatError(f"truncated embedding store while reading {what}")
    return data


def read_store(path) -> EmbeddingStore:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        count, dim = struct.unpack("<II", _read_exact(fh, 8, "header"))
        if dim == 0:
            raise FormatError("embedding dim 0 in header")
        store = EmbeddingStore(dim=dim)
        for i in range(count):
            (key_len,) = struct.unpack("<H", _read_exact(fh, 2, f"entry {i} key length"))
            key = _read_exact(fh, key_len, f"entry {i} key").decode("utf-8")
            raw = _read_exact(fh, 4 * dim, f"entry {i} vector")
            vec = np.frombuffer(raw, dtype="<f4").astype(np.float32)
            if key in store.entries:
                raise FormatError(f"duplicate key {key!r} in store")
            store.entries[key] = vec
        trailing = fh.read(1)
        if trailing:
            raise FormatError("trailing bytes after final entry")
    return store


def join(store: EmbeddingStore, keys, missing: str = "error"):
    """Align store vectors to an ordered key sequence.

    Returns (matrix, kept_indices, missing_keys). Under the "error" policy
    any absent key raises; under "drop" absent keys are skipped and
    reported, with kept_indices mapping matrix rows back to input positions.
    """
    if missing not in ("error", "drop"):
        raise DataError(f"unknown missing policy {missing!r}")
    rows = []
    kept = []
    absent = []
    for i, key in enumerate(keys):
        vec = store.entries.get(key)
        if vec is None:
            if missing == "error":
                raise DataError(f"no embedding for compound {key!r}")
            absent.append(key)
            continue
        rows.append(vec)
        kept.append(i)
    matrix = (
        np.stack(rows).astype(np.float32)
        if rows
        else np.zeros((0, store.dim), dtype=np.float32)
    )
    return matrix, kept, absent
