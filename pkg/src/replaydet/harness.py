"""Speaker-disjoint cross-validation, grid search and accuracy reporting.

Folds partition the training records by speaker (balanced by speaker
count within one), so no fold's validation speakers leak into its
training half. Grid search scores each config by mean CV accuracy; ties
break toward fewer parameters, then lexicographic config order. Failed
cells are recorded and skipped instead of aborting the sweep.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySplit, TooFewSpeakers
from .manifest import ManifestRecord
from .preprocess import EMITTED, NATURAL

CLASS_NAMES = (NATURAL, EMITTED)


@dataclass
class EvalReport:
    accuracy: float
    confusion: np.ndarray       # rows true class, cols predicted (natural, emitted)
    per_class_recall: tuple[float, float]
    n: int


def report_from_predictions(y_true, y_pred) -> EvalReport:
    """Accuracy, 2x2 confusion and per-class recall from class indices."""
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    n = len(y_true)
    if n == 0:
        raise EmptySplit("no records to evaluate")
    if len(y_pred) != n:
        raise ValueError(f"{len(y_pred)} predictions for {n} records")
    confusion = np.zeros((2, 2), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)
    recalls = []
    for c in (0, 1):
        total = confusion[c].sum()
        recalls.append(float(confusion[c, c] / total) if total else float("nan"))
    return EvalReport(
        accuracy=float(np.trace(confusion) / n),
        confusion=confusion,
        per_class_recall=(recalls[0], recalls[1]),
        n=n,
    )


def evaluate(predict_fn, records: list[ManifestRecord], feature_fn) -> EvalReport:
    """Score a split: feature_fn(key) -> vector, predict_fn(X) -> indices.

    feature_fn should raise MissingFeature for uncovered keys; an empty
    record list raises EmptySplit.
    """
    if not records:
        raise EmptySplit("no records to evaluate")
    X = np.stack([np.asarray(feature_fn(r.key), dtype=np.float64) for r in records])
    y_true = np.array([CLASS_NAMES.index(r.label) for r in records], dtype=int)
    return report_from_predictions(y_true, predict_fn(X))


def format_report(report: EvalReport, title: str = "evaluation") -> str:
    """Human-readable table followed by machine-readable key=value lines."""
    c = report.confusion
    lines = [
        f"== {title} ==",
        f"samples   {report.n}",
        f"accuracy  {report.accuracy:.4f}",
        "confusion (rows true, cols predicted)",
        f"              natural  emitted",
        f"    natural  {c[0, 0]:8d} {c[0, 1]:8d}",
        f"    emitted  {c[1, 0]:8d} {c[1, 1]:8d}",
        f"recall_natural  {report.per_class_recall[0]:.4f}",
        f"recall_emitted  {report.per_class_recall[1]:.4f}",
        "",
        f"n={report.n}",
        f"accuracy={report.accuracy:.6f}",
        f"confusion_nn={c[0, 0]} confusion_ne={c[0, 1]} "
        f"confusion_en={c[1, 0]} confusion_ee={c[1, 1]}",
        f"recall_natural={report.per_class_recall[0]:.6f}",
        f"recall_emitted={report.per_class_recall[1]:.6f}",
    ]
    return "\n".join(lines)


def kfold_split(records: list[ManifestRecord], k: int = 5, seed: int = 0):
    """Speaker-disjoint folds; returns k (train_fold, val_fold) record lists.

    Speakers are shuffled deterministically and dealt round-robin, so fold
    sizes are balanced by speaker count within one.
    """
    if k < 2:
        raise TooFewSpeakers(f"cross-validation needs k >= 2, got k={k}")
    speakers = sorted({r.speaker_id for r in records})
    if len(speakers) < k:
        raise TooFewSpeakers(f"{len(speakers)} speakers cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    order = [speakers[i] for i in rng.permutation(len(speakers))]
    fold_of = {spk: i % k for i, spk in enumerate(order)}

    folds = []
    for i in range(k):
        val = [r for r in records if fold_of[r.speaker_id] == i]
        train = [r for r in records if fold_of[r.speaker_id] != i]
        folds.append((train, val))
    return folds


@dataclass
class GridCell:
    config: dict
    mean: float = math.nan
    std: float = math.nan
    fold_accuracies: list[float] = field(default_factory=list)
    error: str | None = None


@dataclass
class GridResult:
    best: dict
    best_mean: float
    table: list[GridCell]


def config_key(config: dict) -> str:
    return json.dumps(config, sort_keys=True)


def grid_search(configs: list[dict], folds, train_eval_fn,
                param_count_fn=None) -> GridResult:
    """Evaluate each config over the CV folds and pick the best.

    train_eval_fn(config, train_records, val_records) -> accuracy. Any
    exception marks the whole cell failed; the search continues. Selection:
    max mean accuracy, ties to fewer parameters (param_count_fn), then
    lexicographic config order.
    """
    if not configs:
        raise ValueError("empty grid")
    table = []
    for config in configs:
        cell = GridCell(config=config)
        try:
            for train_recs, val_recs in folds:
                cell.fold_accuracies.append(
                    float(train_eval_fn(config, train_recs, val_recs))
                )
            cell.mean = float(np.mean(cell.fold_accuracies))
            cell.std = float(np.std(cell.fold_accuracies))
        except Exception as exc:  # noqa: BLE001 - cell isolation is the point
            cell.error = f"{type(exc).__name__}: {exc}"
            cell.fold_accuracies = []
            cell.mean = math.nan
            cell.std = math.nan
        table.append(cell)

    ok = [c for c in table if c.error is None]
    if not ok:
        raise RuntimeError("every grid cell failed")

    def rank(cell: GridCell):
        params = param_count_fn(cell.config) if param_count_fn else 0
        return (-cell.mean, params, config_key(cell.config))

    best_cell = min(ok, key=rank)
    return GridResult(best=best_cell.config, best_mean=best_cell.mean, table=table)


def format_grid_table(result: GridResult) -> str:
    lines = ["config | mean_acc | std | status"]
    for cell in result.table:
        status = cell.error if cell.error else "ok"
        mean = "nan" if math.isnan(cell.mean) else f"{cell.mean:.4f}"
        std = "nan" if math.isnan(cell.std) else f"{cell.std:.4f}"
        lines.append(f"{config_key(cell.config)} | {mean} | {std} | {status}")
    lines.append(f"best={config_key(result.best)}")
    return "\n".join(lines)
