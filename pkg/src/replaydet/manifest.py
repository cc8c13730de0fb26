"""Dataset manifest: one CSV row per segment.

Columns: key,path,label,split,speaker_id,device_id,source. Labels and
splits are normalized to lowercase; speaker disjointness across splits is
enforced for inhouse/synthetic sources (the repartitioned ASVspoof subset
is split per sample upstream, so it is exempt).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import DuplicateKey, ParseError, SpeakerLeakage

HEADER = ["key", "path", "label", "split", "speaker_id", "device_id", "source"]
LABELS = {"natural", "emitted"}
SPLITS = {"train", "val", "test"}
SOURCES = {"asvspoof", "inhouse", "synthetic"}
_DISJOINT_SOURCES = {"inhouse", "synthetic"}


@dataclass
class ManifestRecord:
    key: str
    path: str
    label: str
    split: str
    speaker_id: str
    device_id: str
    source: str


def load_manifest(path: str | Path) -> list[ManifestRecord]:
    """Parse and validate a manifest CSV.

    Raises ParseError (citing row and column), DuplicateKey, or
    SpeakerLeakage when a speaker spans several splits.
    """
    path = Path(path)
    records: list[ManifestRecord] = []
    seen_keys: set[str] = set()
    speaker_splits: dict[str, str] = {}

    try:
        fh_ctx = path.open(newline="")
    except OSError as exc:
        raise ParseError(f"cannot read manifest {path}: {exc}") from exc
    with fh_ctx as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if header != HEADER:
            raise ParseError(
                f"{path}: row 1: header must be {','.join(HEADER)}, "
                f"got {','.join(header)}"
            )
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(HEADER):
                raise ParseError(
                    f"{path}: row {row_no}: expected {len(HEADER)} columns, got {len(row)}"
                )
            rec = ManifestRecord(*[c.strip() for c in row])
            rec.label = rec.label.lower()
            rec.split = rec.split.lower()
            rec.source = rec.source.lower()
            for col, value, allowed in (
                ("label", rec.label, LABELS),
                ("split", rec.split, SPLITS),
                ("source", rec.source, SOURCES),
            ):
                if value not in allowed:
                    raise ParseError(
                        f"{path}: row {row_no}, column {col!r}: "
                        f"{value!r} not in {sorted(allowed)}"
                    )
            if not rec.key:
                raise ParseError(f"{path}: row {row_no}, column 'key': empty")
            if rec.key in seen_keys:
                raise DuplicateKey(f"{path}: row {row_no}: duplicate key {rec.key!r}")
            seen_keys.add(rec.key)

            if rec.source in _DISJOINT_SOURCES and rec.speaker_id:
                prev = speaker_splits.get(rec.speaker_id)
                if prev is None:
                    speaker_splits[rec.speaker_id] = rec.split
                elif prev != rec.split:
                    raise SpeakerLeakage(
                        f"{path}: speaker {rec.speaker_id!r} appears in "
                        f"splits {prev!r} and {rec.split!r}"
                    )
            records.append(rec)
    return records


def write_manifest(path: str | Path, records: list[ManifestRecord]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        for r in records:
            writer.writerow([r.key, r.path, r.label, r.split,
                             r.speaker_id, r.device_id, r.source])


def by_split(records: list[ManifestRecord], split: str) -> list[ManifestRecord]:
    return [r for r in records if r.split == split]
