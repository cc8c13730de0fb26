"""EMB1 binary container: the bit-exact contract with the consumer.

    magic   4 bytes  "EMB1"
    kind    u8       soundnet=1, vggish=2
    dim     u32 LE
    count   u32 LE
    records count x (key_len u16 LE, key UTF-8, dim x f32 LE)
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

KIND_BYTES = {"soundnet": 1, "vggish": 2}


def write_emb1(path: str | Path, kind: str, dim: int,
               records: list[tuple[str, np.ndarray]]) -> None:
    """Atomic write (temp file + rename); keys must be unique."""
    seen = set()
    chunks = [b"EMB1", struct.pack("<BII", KIND_BYTES[kind], dim, len(records))]
    for key, values in records:
        if key in seen:
            raise ValueError(f"duplicate key {key!r}")
        seen.add(key)
        values = np.asarray(values, dtype="<f4")
        if values.shape != (dim,):
            raise ValueError(f"key {key!r}: expected {dim} values, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"key {key!r}: non-finite values")
        encoded = key.encode("utf-8")
        chunks += [struct.pack("<H", len(encoded)), encoded, values.tobytes()]

    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_bytes(b"".join(chunks))
        tmp.replace(path)
    except OSError:
        tmp.unlink(missing_ok=True)
        raise


def read_emb1(path: str | Path):
    """Test helper: returns (kind byte, dim, list of (key, float32 array))."""
    raw = Path(path).read_bytes()
    if raw[:4] != b"EMB1":
        raise ValueError("bad magic")
    kind, dim, count = struct.unpack_from("<BII", raw, 4)
    pos = 13
    records = []
    for _ in range(count):
        (key_len,) = struct.unpack_from("<H", raw, pos)
        pos += 2
        key = raw[pos:pos + key_len].decode("utf-8")
        pos += key_len
        values = np.frombuffer(raw, dtype="<f4", count=dim, offset=pos).copy()
        pos += 4 * dim
        records.append((key, values))
    if pos != len(raw):
        raise ValueError("trailing bytes")
    return kind, dim, records
