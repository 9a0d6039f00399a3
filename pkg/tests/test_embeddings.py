"""R3EMB1 store format and join tests."""

import struct

import numpy as np
import pytest

from rep3net.embeddings import EmbeddingStore, MAGIC, join, read_store, write_store
from rep3net.exceptions import DataError, FormatError


def random_store(dim=16, n=3, seed=0):
    rng = np.random.default_rng(seed)
    store = EmbeddingStore(dim=dim)
    for i in range(n):
        store.add(f"CCO{'C' * i}", rng.normal(size=dim).astype(np.float32))
    return store


def test_empty_store_round_trip(tmp_path):
    p = tmp_path / "empty.r3emb"
    write_store(EmbeddingStore(dim=768), p)
    back = read_store(p)
    assert back.dim == 768
    assert len(back) == 0


def test_round_trip_bit_exact(tmp_path):
    store = random_store()
    p1, p2 = tmp_path / "a.r3emb", tmp_path / "b.r3emb"
    write_store(store, p1)
    back = read_store(p1)
    assert back.dim == store.dim
    assert list(back.entries) == list(store.entries)
    for key in store.entries:
        assert np.array_equal(back.entries[key], store.entries[key])
    write_store(back, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_header_layout(tmp_path):
    p = tmp_path / "s.r3emb"
    write_store(random_store(dim=4, n=2), p)
    raw = p.read_bytes()
    assert raw[:6] == b"R3EMB1"
    count, dim = struct.unpack("<II", raw[6:14])
    assert (count, dim) == (2, 4)
    (key_len,) = struct.unpack("<H", raw[14:16])
    assert raw[16 : 16 + key_len].decode() == "CCO"


def test_bad_magic(tmp_path):
    p = tmp_path / "bad.r3emb"
    p.write_bytes(b"NOPE01" + struct.pack("<II", 0, 8))
    with pytest.raises(FormatError, match="magic"):
        read_store(p)


def test_truncations(tmp_path):
    good = tmp_path / "good.r3emb"
    write_store(random_store(dim=8, n=2), good)
    raw = good.read_bytes()
    for cut in (3, 10, 20, len(raw) - 5):
        p = tmp_path / f"cut{cut}.r3emb"
        p.write_bytes(raw[:cut])
        with pytest.raises(FormatError):
            read_store(p)


def test_trailing_bytes(tmp_path):
    p = tmp_path / "trail.r3emb"
    write_store(random_store(dim=8, n=1), p)
    p.write_bytes(p.read_bytes() + b"\x00")
    with pytest.raises(FormatError, match="trailing"):
        read_store(p)


def test_duplicate_key_in_file(tmp_path):
    vec = np.ones(2, dtype="<f4").tobytes()
    entry = struct.pack("<H", 3) + b"CCO" + vec
    p = tmp_path / "dup.r3emb"
    p.write_bytes(MAGIC + struct.pack("<II", 2, 2) + entry + entry)
    with pytest.raises(FormatError, match="duplicate"):
        read_store(p)


def test_add_validation():
    store = EmbeddingStore(dim=4)
    store.add("CCO", np.zeros(4, dtype=np.float32))
    with pytest.raises(DataError):
        store.add("CCO", np.ones(4, dtype=np.float32))
    with pytest.raises(DataError):
        store.add("CCN", np.zeros(5, dtype=np.float32))
    with pytest.raises(DataError):
        EmbeddingStore(dim=0)


def test_join_all_present():
    store = random_store(dim=8, n=3)
    keys = list(store.entries)
    matrix, kept, absent = join(store, keys)
    assert matrix.shape == (3, 8)
    assert kept == [0, 1, 2]
    assert absent == []
    for i, key in enumerate(keys):
        assert np.array_equal(matrix[i], store.entries[key])


def test_join_preserves_order():
    store = random_store(dim=8, n=3)
    keys = list(store.entries)[::-1]
    matrix, kept, _ = join(store, keys)
    for i, key in enumerate(keys):
        assert np.array_equal(matrix[i], store.entries[key])
    assert kept == [0, 1, 2]


def test_join_missing_error_policy():
    store = random_store(dim=8, n=2)
    with pytest.raises(DataError, match="no embedding"):
        join(store, ["CCO", "missing_key"])


def test_join_missing_drop_policy():
    store = random_store(dim=8, n=2)
    keys = ["CCO", "nope", "CCOC"]
    matrix, kept, absent = join(store, keys, missing="drop")
    assert matrix.shape == (2, 8)
    assert kept == [0, 2]
    assert absent == ["nope"]


def test_join_exact_string_keys():
    # canonicalization happens before the store; the join is exact-string
    store = EmbeddingStore(dim=2)
    store.add("CCO", np.ones(2, dtype=np.float32))
    with pytest.raises(DataError):
        join(store, ["OCC"])


def test_join_bad_policy():
    with pytest.raises(DataError):
        join(EmbeddingStore(dim=2), [], missing="ignore")
