"""Versioned binary model container.

Layout: magic "RDM1", u16 format version, u8 model kind (1 mlp, 2 gmm,
3 pca), u32 JSON header length, JSON header (sorted keys; lists the
parameter blocks with shapes plus the model config), then the blocks as
raw little-endian float64 in header order. Writes are deterministic:
identical models produce identical bytes.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path

import numpy as np

from ..errors import BadMagic, IoFailure, Truncated
from ..pca import PcaModel
from .gmm import GmmPair, Mixture
from .mlp import MlpConfig, MlpModel

MAGIC = b"RDM1"
VERSION = 1
KIND_MLP, KIND_GMM, KIND_PCA = 1, 2, 3


def _write(path: Path, kind: int, config: dict, blocks: list[tuple[str, np.ndarray]]):
    header = {
        "config": config,
        "blocks": [{"name": n, "shape": list(a.shape)} for n, a in blocks],
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    chunks = [MAGIC, struct.pack("<HB", VERSION, kind),
              struct.pack("<I", len(header_bytes)), header_bytes]
    chunks += [np.ascontiguousarray(a, dtype="<f8").tobytes() for _, a in blocks]
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_bytes(b"".join(chunks))
        tmp.replace(path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _read(path: Path) -> tuple[int, dict, dict[str, np.ndarray]]:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise BadMagic(f"cannot read model file {path}: {exc}") from exc
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagic(f"{path}: not an RDM1 model file")
    if len(raw) < 11:
        raise Truncated(f"{path}: header truncated")
    version, kind = struct.unpack_from("<HB", raw, 4)
    if version != VERSION:
        raise BadMagic(f"{path}: unsupported version {version}")
    (hlen,) = struct.unpack_from("<I", raw, 7)
    if 11 + hlen > len(raw):
        raise Truncated(f"{path}: header truncated")
    header = json.loads(raw[11:11 + hlen].decode())
    pos = 11 + hlen
    blocks = {}
    for spec in header["blocks"]:
        size = int(np.prod(spec["shape"], dtype=np.int64)) if spec["shape"] else 1
        nbytes = 8 * size
        if pos + nbytes > len(raw):
            raise Truncated(f"{path}: block {spec['name']!r} truncated")
        arr = np.frombuffer(raw, dtype="<f8", count=size, offset=pos)
        blocks[spec["name"]] = arr.reshape(spec["shape"]).astype(np.float64)
        pos += nbytes
    return kind, header["config"], blocks


def save_mlp(model: MlpModel, path: str | Path) -> None:
    cfg = dataclasses.asdict(model.config)
    cfg["hidden_sizes"] = list(model.config.hidden_sizes)
    config = {"input_dim": model.input_dim, "train_config": cfg}
    blocks = []
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        blocks.append((f"w{i}", w))
        blocks.append((f"b{i}", b))
    _write(Path(path), KIND_MLP, config, blocks)


def save_gmm(pair: GmmPair, path: str | Path) -> None:
    config = {"dim": pair.dim, "n_components": pair.natural.n_components}
    blocks = []
    for name, mix in (("natural", pair.natural), ("emitted", pair.emitted)):
        blocks += [(f"{name}_weights", mix.weights),
                   (f"{name}_means", mix.means),
                   (f"{name}_variances", mix.variances)]
    _write(Path(path), KIND_GMM, config, blocks)


def save_pca(model: PcaModel, path: str | Path) -> None:
    config = {"input_dim": model.input_dim, "output_dim": model.output_dim}
    _write(Path(path), KIND_PCA, config, [
        ("mean", model.mean),
        ("components", model.components),
        ("explained_variance", model.explained_variance),
    ])


def load_model(path: str | Path):
    """Load any RDM1 file; returns an MlpModel, GmmPair or PcaModel."""
    kind, config, blocks = _read(Path(path))
    if kind == KIND_MLP:
        tc = dict(config["train_config"])
        tc["hidden_sizes"] = tuple(tc["hidden_sizes"])
        n_layers = len(tc["hidden_sizes"]) + 1
        return MlpModel(
            input_dim=config["input_dim"],
            weights=[blocks[f"w{i}"] for i in range(n_layers)],
            biases=[blocks[f"b{i}"] for i in range(n_layers)],
            config=MlpConfig(**tc),
        )
    if kind == KIND_GMM:
        def mix(name):
            return Mixture(
                weights=blocks[f"{name}_weights"],
                means=blocks[f"{name}_means"],
                variances=blocks[f"{name}_variances"],
            )
        return GmmPair(natural=mix("natural"), emitted=mix("emitted"))
    if kind == KIND_PCA:
        return PcaModel(
            mean=blocks["mean"],
            components=blocks["components"],
            explained_variance=blocks["explained_variance"],
        )
    raise BadMagic(f"{path}: unknown model kind {kind}")
