"""Typed flat feature vectors and concatenation fusion.

Every extractor (MFCC, CQCC, imported SoundNet/VGGish embeddings) produces a
FeatureVector; fusion concatenates vectors for one segment. The canonical
fusion order is vggish, soundnet, cqcc, mfcc so trained models are
reproducible regardless of how feature files are listed on the command line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, KeyMismatch

KIND_SOUNDNET = "soundnet"
KIND_VGGISH = "vggish"
KIND_MFCC = "mfcc"
KIND_CQCC = "cqcc"
KIND_FUSED = "fused"

# raw dim / allowed dims per kind; None means unconstrained
KIND_DIMS = {
    KIND_SOUNDNET: (512,),
    KIND_VGGISH: (128,),
    KIND_MFCC: (1212, 128),
    KIND_CQCC: (1404, 128),
    KIND_FUSED: None,
}

_FUSION_RANK = {KIND_VGGISH: 0, KIND_SOUNDNET: 1, KIND_CQCC: 2, KIND_MFCC: 3}


@dataclass
class FeatureVector:
    kind: str
    values: np.ndarray
    key: str | None = None

    def __post_init__(self):
        if self.kind not in KIND_DIMS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        self.values = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"non-finite values in {self.kind} vector")
        allowed = KIND_DIMS[self.kind]
        if allowed is not None and self.dim not in allowed:
            raise DimensionMismatch(
                f"kind={self.kind} requires dim in {allowed}, got {self.dim}"
            )

    @property
    def dim(self) -> int:
        return len(self.values)


def fuse(parts: list[FeatureVector]) -> FeatureVector:
    """Concatenate parts (in the given order) into one fused vector.

    All parts must carry the same segment key (or no key at all).
    """
    if not parts:
        raise ValueError("fuse() needs at least one part")
    keys = {p.key for p in parts if p.key is not None}
    if len(keys) > 1:
        raise KeyMismatch(f"parts belong to different segments: {sorted(keys)}")
    key = keys.pop() if keys else None
    return FeatureVector(
        kind=KIND_FUSED,
        values=np.concatenate([p.values for p in parts]),
        key=key,
    )


def canonical_fusion_order(kinds: list[str]) -> list[str]:
    """Order feature kinds by the fixed fusion convention."""
    unknown = [k for k in kinds if k not in _FUSION_RANK]
    if unknown:
        raise ValueError(f"kinds not fusable: {unknown}")
    return sorted(kinds, key=_FUSION_RANK.__getitem__)
