"""EMB1 container format against hand-built byte fixtures."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from replaydet import embedding_store
from replaydet.errors import BadMagic, DimMismatch, DuplicateKey, MissingKey, Truncated


def build_emb1_bytes(kind_byte, dim, records):
    """Independent writer: struct-packed bytes, no shared code with load()."""
    out = b"EMB1" + struct.pack("<BII", kind_byte, dim, len(records))
    for key, floats in records:
        encoded = key.encode("utf-8")
        out += struct.pack("<H", len(encoded)) + encoded
        out += np.asarray(floats, dtype="<f4").tobytes()
    return out


def test_fixture_two_vggish_records(tmp_path):
    rng = np.random.default_rng(3)
    recs = [("clip@0", rng.standard_normal(128).astype(np.float32)),
            ("clip@8000", rng.standard_normal(128).astype(np.float32))]
    path = tmp_path / "v.emb1"
    path.write_bytes(build_emb1_bytes(2, 128, recs))

    store = embedding_store.load(path)
    assert store.kind == "vggish"
    assert store.dim == 128
    assert len(store) == 2
    for key, floats in recs:
        np.testing.assert_array_equal(store.lookup(key).values,
                                      floats.astype(np.float64))


def test_kind_dim_contradiction(tmp_path):
    path = tmp_path / "bad.emb1"
    path.write_bytes(build_emb1_bytes(2, 512, []))
    with pytest.raises(DimMismatch):
        embedding_store.load(path)


def test_empty_store(tmp_path):
    path = tmp_path / "empty.emb1"
    path.write_bytes(build_emb1_bytes(1, 512, []))
    store = embedding_store.load(path)
    assert len(store) == 0
    with pytest.raises(MissingKey):
        store.lookup("nope@0")


def test_bad_magic(tmp_path):
    path = tmp_path / "x.emb1"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(BadMagic):
        embedding_store.load(path)


def test_unknown_kind_byte(tmp_path):
    path = tmp_path / "k.emb1"
    path.write_bytes(build_emb1_bytes(9, 4, []))
    with pytest.raises(BadMagic):
        embedding_store.load(path)


def test_truncated_record(tmp_path):
    full = build_emb1_bytes(2, 128, [("k@0", np.zeros(128, dtype=np.float32))])
    path = tmp_path / "t.emb1"
    path.write_bytes(full[:-10])
    with pytest.raises(Truncated):
        embedding_store.load(path)


def test_duplicate_key(tmp_path):
    recs = [("k@0", np.zeros(128, dtype=np.float32))] * 2
    path = tmp_path / "d.emb1"
    path.write_bytes(build_emb1_bytes(2, 128, recs))
    with pytest.raises(DuplicateKey):
        embedding_store.load(path)


def test_same_key_in_two_kinds(tmp_path):
    key = "shared@0"
    va = tmp_path / "v.emb1"
    sa = tmp_path / "s.emb1"
    va.write_bytes(build_emb1_bytes(2, 128, [(key, np.ones(128, dtype=np.float32))]))
    sa.write_bytes(build_emb1_bytes(1, 512, [(key, np.ones(512, dtype=np.float32))]))
    assert embedding_store.load(va).lookup(key).dim == 128
    assert embedding_store.load(sa).lookup(key).dim == 512


def test_writer_round_trips_fixture_bytes(tmp_path):
    rng = np.random.default_rng(11)
    recs = [(f"c@{i * 8000}", rng.standard_normal(128).astype(np.float32))
            for i in range(5)]
    ref_bytes = build_emb1_bytes(2, 128, recs)

    path = tmp_path / "w.emb1"
    embedding_store.write(path, "vggish", 128, recs)
    assert path.read_bytes() == ref_bytes


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(
    st.text(min_size=1, max_size=20).filter(lambda s: len(s.encode()) < 60),
    st.integers(0, 2 ** 31)),
    min_size=0, max_size=6, unique_by=lambda kv: kv[0]))
def test_roundtrip_random_stores(tmp_path_factory, keyseeds):
    dim = 16
    records = [(key, np.random.default_rng(seed).standard_normal(dim).astype("<f4"))
               for key, seed in keyseeds]
    path = tmp_path_factory.mktemp("emb") / "r.emb1"
    embedding_store.write(path, "fused", dim, records)
    store = embedding_store.load(path)
    assert set(store.keys()) == {k for k, _ in records}
    for key, values in records:
        np.testing.assert_array_equal(store.lookup(key).values,
                                      values.astype(np.float64))


def test_write_rejects_wrong_dim(tmp_path):
    with pytest.raises(DimMismatch):
        embedding_store.write(tmp_path / "x.emb1", "vggish", 128,
                              [("k@0", np.zeros(64))])
    with pytest.raises(DimMismatch):
        embedding_store.write(tmp_path / "y.emb1", "vggish", 64, [])


def test_write_rejects_duplicate_keys(tmp_path):
    with pytest.raises(DuplicateKey):
        embedding_store.write(tmp_path / "x.emb1", "fused", 4,
                              [("k@0", np.zeros(4)), ("k@0", np.ones(4))])
    assert not (tmp_path / "x.emb1").exists()


def test_lookup_vector_carries_key(tmp_path):
    path = tmp_path / "v.emb1"
    embedding_store.write(path, "vggish", 128, [("a@0", np.zeros(128))])
    fv = embedding_store.load(path).lookup("a@0")
    assert fv.key == "a@0"
    assert fv.kind == "vggish"
