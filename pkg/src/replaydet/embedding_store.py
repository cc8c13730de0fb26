"""EMB1 binary feature container and in-memory embedding store.

This format is the bit-exact contract with the external embedding
exporter, and doubles as the dump format for MFCC/CQCC/fused features
(the kind byte distinguishes the extractor):

    magic   4 bytes  "EMB1"
    kind    u8       soundnet=1, vggish=2, mfcc=3, cqcc=4, fused=5
    dim     u32 LE
    count   u32 LE
    records count x (key_len u16 LE, key UTF-8, dim x f32 LE)

Keys are segment keys ("clip_id@start_sample") and must be unique.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import BadMagic, DimMismatch, DuplicateKey, IoFailure, MissingKey, Truncated
from .features import (
    KIND_CQCC,
    KIND_DIMS,
    KIND_FUSED,
    KIND_MFCC,
    KIND_SOUNDNET,
    KIND_VGGISH,
    FeatureVector,
)

MAGIC = b"EMB1"

KIND_BYTES = {
    KIND_SOUNDNET: 1,
    KIND_VGGISH: 2,
    KIND_MFCC: 3,
    KIND_CQCC: 4,
    KIND_FUSED: 5,
}
BYTE_KINDS = {v: k for k, v in KIND_BYTES.items()}


class EmbeddingStore:
    """Immutable key -> vector map of one feature kind; O(1) lookups."""

    def __init__(self, kind: str, dim: int, vectors: dict[str, np.ndarray]):
        self.kind = kind
        self.dim = dim
        self._vectors = vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, key: str) -> bool:
        return key in self._vectors

    def keys(self):
        return self._vectors.keys()

    def lookup(self, key: str) -> FeatureVector:
        try:
            values = self._vectors[key]
        except KeyError:
            raise MissingKey(
                f"key {key!r} not present in {self.kind} store "
                "(the exporter did not cover this segment)"
            ) from None
        return FeatureVector(kind=self.kind, values=values, key=key)


def _check_dim(kind: str, dim: int, where: str) -> None:
    allowed = KIND_DIMS[kind]
    if allowed is not None and dim not in allowed:
        raise DimMismatch(f"{where}: kind={kind} requires dim in {allowed}, got {dim}")
    if dim == 0:
        raise DimMismatch(f"{where}: dim must be positive")


def load(path: str | Path) -> EmbeddingStore:
    """Read an EMB1 file into an EmbeddingStore, validating the container."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise BadMagic(f"cannot read feature file {path}: {exc}") from exc
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagic(f"{path}: not an EMB1 file")
    if len(raw) < 13:
        raise Truncated(f"{path}: header truncated")
    kind_byte, dim, count = struct.unpack_from("<BII", raw, 4)
    if kind_byte not in BYTE_KINDS:
        raise BadMagic(f"{path}: unknown kind byte {kind_byte}")
    kind = BYTE_KINDS[kind_byte]
    _check_dim(kind, dim, str(path))

    vectors: dict[str, np.ndarray] = {}
    pos = 13
    for i in range(count):
        if pos + 2 > len(raw):
            raise Truncated(f"{path}: record {i} key length missing")
        (key_len,) = struct.unpack_from("<H", raw, pos)
        pos += 2
        if pos + key_len + 4 * dim > len(raw):
            raise Truncated(f"{path}: record {i} body missing")
        key = raw[pos:pos + key_len].decode("utf-8")
        pos += key_len
        values = np.frombuffer(raw, dtype="<f4", count=dim, offset=pos).astype(np.float64)
        pos += 4 * dim
        if key in vectors:
            raise DuplicateKey(f"{path}: duplicate key {key!r}")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"{path}: non-finite values for key {key!r}")
        vectors[key] = values
    return EmbeddingStore(kind=kind, dim=dim, vectors=vectors)


def write(path: str | Path, kind: str, dim: int,
          records: list[tuple[str, np.ndarray]]) -> None:
    """Write records as an EMB1 file (atomically: temp file + rename)."""
    _check_dim(kind, dim, str(path))
    seen = set()
    chunks = [MAGIC, struct.pack("<BII", KIND_BYTES[kind], dim, len(records))]
    for key, values in records:
        if key in seen:
            raise DuplicateKey(f"duplicate key {key!r}")
        seen.add(key)
        values = np.asarray(values, dtype="<f4")
        if values.shape != (dim,):
            raise DimMismatch(f"key {key!r}: expected {dim} values, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"key {key!r}: non-finite values")
        encoded = key.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(values.tobytes())

    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_bytes(b"".join(chunks))
        tmp.replace(path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise IoFailure(f"cannot write {path}: {exc}") from exc
