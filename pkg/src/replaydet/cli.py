"""Command-line pipeline: synth -> extract -> train -> eval.

Feature files (EMB1 containers) are the interchange between stages so the
expensive extraction runs once. Every command logs its fully resolved
configuration to stderr and is byte-deterministic given identical inputs
and seeds. Exit codes: 0 success, 1 internal error, 2 usage/precondition
error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import cqt as cqt_mod
from . import dsp_features, embedding_store, pca
from .audio_io import read_wav
from .classifiers import gmm as gmm_mod
from .classifiers import mlp as mlp_mod
from .classifiers.model_io import load_model, save_gmm, save_mlp, save_pca
from .classifiers.mlp import MlpConfig, MlpModel
from .classifiers.gmm import GmmPair
from .errors import InputError, MissingFeature, MissingKey, ReplayDetError
from .features import KIND_CQCC, KIND_MFCC, canonical_fusion_order, fuse
from .harness import (
    evaluate,
    format_grid_table,
    format_report,
    grid_search,
    kfold_split,
    report_from_predictions,
)
from .manifest import by_split, load_manifest
from .preprocess import TARGET_RMS, normalize_energy, segment
from .replay_sim import (
    DEFAULT_CHANNELS,
    BandpassSpec,
    ChannelConfig,
    ReverbSpec,
    build_synthetic_dataset,
)

log = logging.getLogger("replaydet")


# -- channel config files -----------------------------------------------------

def load_channels(path: str | Path) -> tuple[ChannelConfig, ...]:
    """Parse a JSON list of channel dicts into ChannelConfig objects."""
    try:
        entries = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read channels file {path}: {exc}") from exc
    if not isinstance(entries, list) or not entries:
        raise InputError(f"{path}: expected a non-empty JSON list of channels")
    channels = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise InputError(f"{path}: channel {i}: expected a JSON object")
        try:
            bandpass = entry.get("bandpass")
            reverb = entry.get("reverb")
            channels.append(ChannelConfig(
                bandpass=BandpassSpec(**bandpass) if bandpass else None,
                nonlinearity_drive=entry.get("nonlinearity_drive", 0.0),
                reverb=ReverbSpec(**reverb) if reverb else None,
                noise_snr_db=entry.get("noise_snr_db"),
                seed=entry.get("seed", 100 + i),
                name=entry.get("name", f"ch{i}"),
            ))
        except (TypeError, ValueError) as exc:
            raise InputError(f"{path}: channel {i}: {exc}") from exc
    return tuple(channels)


# -- feature assembly ---------------------------------------------------------

def open_stores(paths: list[str]) -> list[embedding_store.EmbeddingStore]:
    stores = [embedding_store.load(p) for p in paths]
    kinds = [s.kind for s in stores]
    if len(set(kinds)) != len(kinds):
        raise InputError(f"duplicate feature kinds in {kinds}")
    if len(stores) > 1:
        order = canonical_fusion_order(kinds)
        stores.sort(key=lambda s: order.index(s.kind))
    return stores


def feature_fn_for(stores, fusion_pca=None):
    def feature_fn(key: str) -> np.ndarray:
        try:
            parts = [s.lookup(key) for s in stores]
        except MissingKey as exc:
            raise MissingFeature(str(exc)) from exc
        vec = fuse(parts) if len(parts) > 1 else parts[0]
        if fusion_pca is not None:
            return pca.transform(fusion_pca, vec.values)
        return vec.values
    return feature_fn


def matrix_for(records, feature_fn):
    if not records:
        return np.zeros((0, 0)), np.zeros(0, dtype=int)
    X = np.stack([feature_fn(r.key) for r in records])
    y = mlp_mod.encode_labels([r.label for r in records])
    return X, y


# -- subcommands --------------------------------------------------------------

def cmd_synth(args) -> int:
    channels = load_channels(args.channels) if args.channels else DEFAULT_CHANNELS
    records = build_synthetic_dataset(
        out_dir=args.out,
        n_speakers=args.speakers,
        clips_per_speaker=args.clips,
        channels=channels,
        seed=args.seed,
    )
    log.info("wrote %d segment records under %s", len(records), args.out)
    print(f"manifest={Path(args.out) / 'manifest.csv'}")
    print(f"segments={len(records)}")
    return 0


def _extract_clip(job):
    """Worker: decode one clip, segment, normalize, extract features."""
    wav_path, clip_id, feature_kind, target_rms = job
    clip = read_wav(wav_path, clip_id=clip_id)
    extractor = dsp_features.mfcc if feature_kind == KIND_MFCC else cqt_mod.cqcc
    out = []
    for seg in segment(clip):
        normalized, _silent = normalize_energy(seg, target_rms)
        out.append((normalized.key, extractor(normalized).values))
    return out


def cmd_extract(args) -> int:
    records = load_manifest(args.manifest)
    manifest_dir = Path(args.manifest).parent
    wanted = {r.key for r in records}

    clips: dict[str, str] = {}
    for r in records:
        clip_id = r.key.rsplit("@", 1)[0]
        clips.setdefault(clip_id, str(manifest_dir / r.path))

    jobs = [(path, clip_id, args.feature, args.target_rms)
            for clip_id, path in sorted(clips.items())]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_extract_clip, jobs))
    else:
        results = [_extract_clip(job) for job in jobs]

    by_key = {key: values for result in results for key, values in result}
    missing = wanted - set(by_key)
    if missing:
        raise MissingFeature(
            f"{len(missing)} manifest keys not produced by segmentation, "
            f"e.g. {sorted(missing)[:3]}"
        )

    if args.pca:
        train_keys = [r.key for r in records if r.split == "train"]
        if not train_keys:
            raise InputError("--pca requires train-split records in the manifest")
        X_train = np.stack([by_key[k] for k in train_keys])
        model = pca.fit(X_train, k=args.pca)
        by_key = {k: pca.transform(model, v) for k, v in by_key.items()}
        if args.pca_model_out:
            save_pca(model, args.pca_model_out)
            log.info("saved PCA model to %s", args.pca_model_out)

    dim = len(next(iter(by_key.values())))
    rows = [(r.key, by_key[r.key]) for r in records]
    embedding_store.write(args.out, args.feature, dim, rows)
    log.info("wrote %d %s vectors (dim %d) to %s", len(rows), args.feature, dim, args.out)
    print(f"features={args.out}")
    print(f"count={len(rows)} dim={dim}")
    return 0


def _grid_configs(path: str) -> list[dict]:
    """Expand a JSON axes file {param: [values...]} into the full grid."""
    try:
        axes = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read grid file {path}: {exc}") from exc
    names = sorted(axes)
    configs = [{}]
    for name in names:
        values = axes[name]
        if not isinstance(values, list) or not values:
            raise InputError(f"grid axis {name!r} must be a non-empty list")
        configs = [{**c, name: v} for c in configs for v in values]
    return configs


def _mlp_config(args, overrides=None) -> MlpConfig:
    cfg = dict(
        hidden_sizes=tuple(int(h) for h in str(args.hidden).split(",")),
        lr=args.lr,
        batch=args.batch,
        max_epochs=args.max_epochs,
        patience=args.patience,
        seed=args.seed,
        optimizer=args.optimizer,
        class_weighted=args.class_weighted,
    )
    for key, value in (overrides or {}).items():
        if key == "hidden_sizes":
            value = tuple(int(v) for v in value)
        cfg[key] = value
    return MlpConfig(**cfg)


def cmd_train(args) -> int:
    records = load_manifest(args.manifest)
    stores = open_stores(args.features.split(","))
    feature_fn = feature_fn_for(stores)

    train_recs = by_split(records, "train")
    val_recs = by_split(records, "val")
    if not train_recs or not val_recs:
        raise InputError("manifest must contain both train and val records")
    X_train, y_train = matrix_for(train_recs, feature_fn)
    X_val, y_val = matrix_for(val_recs, feature_fn)

    fusion_pca = None
    if args.fusion_pca:
        if len(stores) < 2:
            raise InputError("--fusion-pca requires multiple feature files")
        fusion_pca = pca.fit(X_train, k=args.fusion_pca)
        X_train = pca.transform(fusion_pca, X_train)
        X_val = pca.transform(fusion_pca, X_val)
        pca_path = args.out + ".pca"
        save_pca(fusion_pca, pca_path)
        log.info("saved fusion PCA (%d -> %d) to %s",
                 fusion_pca.input_dim, fusion_pca.output_dim, pca_path)

    if args.model == "mlp":
        cfg = _mlp_config(args)
        if args.grid:
            configs = _grid_configs(args.grid)
            folds = kfold_split(train_recs, k=args.folds, seed=args.seed)

            def cell(config, fold_train, fold_val):
                fx, fy = matrix_for(fold_train, feature_fn)
                vx, vy = matrix_for(fold_val, feature_fn)
                if fusion_pca is not None:
                    fx = pca.transform(fusion_pca, fx)
                    vx = pca.transform(fusion_pca, vx)
                model, _ = mlp_mod.train_mlp(fx, fy, vx, vy, _mlp_config(args, config))
                return float(np.mean(mlp_mod.predict_labels(model, vx) == vy))

            def n_params(config):
                merged = _mlp_config(args, config)
                return mlp_mod.param_count(X_train.shape[1], merged.hidden_sizes)

            result = grid_search(configs, folds, cell, n_params)
            print(format_grid_table(result))
            cfg = _mlp_config(args, result.best)

        model, history = mlp_mod.train_mlp(X_train, y_train, X_val, y_val, cfg)
        save_mlp(model, args.out)
        train_acc = float(np.mean(mlp_mod.predict_labels(model, X_train) == y_train))
        val_acc = float(np.mean(mlp_mod.predict_labels(model, X_val) == y_val))
        log.info("best epoch %d of %d", history["best_epoch"], len(history["val_acc"]))
        print(f"model={args.out}")
        print(f"train_accuracy={train_acc:.6f}")
        print(f"val_accuracy={val_acc:.6f}")
        return 0

    # gmm baseline: one mixture per class
    natural, _ = gmm_mod.train_gmm(
        X_train[y_train == 0], m=args.gmm_components, seed=args.seed)
    emitted, _ = gmm_mod.train_gmm(
        X_train[y_train == 1], m=args.gmm_components, seed=args.seed + 1)
    pair = GmmPair(natural=natural, emitted=emitted)
    save_gmm(pair, args.out)
    train_acc = float(np.mean(gmm_mod.predict_gmm(pair, X_train) == y_train))
    val_acc = float(np.mean(gmm_mod.predict_gmm(pair, X_val) == y_val))
    print(f"model={args.out}")
    print(f"train_accuracy={train_acc:.6f}")
    print(f"val_accuracy={val_acc:.6f}")
    return 0


def cmd_eval(args) -> int:
    records = load_manifest(args.manifest)
    split_recs = by_split(records, args.split)
    stores = open_stores(args.features.split(","))

    fusion_pca = None
    pca_sidecar = Path(args.model + ".pca")
    if pca_sidecar.exists():
        fusion_pca = load_model(pca_sidecar)
        log.info("applying fusion PCA from %s", pca_sidecar)

    model = load_model(args.model)
    if isinstance(model, MlpModel):
        predict = lambda X: mlp_mod.predict_labels(model, X)  # noqa: E731
    elif isinstance(model, GmmPair):
        predict = lambda X: gmm_mod.predict_gmm(model, X)  # noqa: E731
    else:
        raise InputError(f"{args.model}: not a classifier model")

    report = evaluate(predict, split_recs, feature_fn_for(stores, fusion_pca))
    print(format_report(report, title=f"split={args.split}"))
    return 0


# -- argument plumbing --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="replaydet",
        description="natural vs loudspeaker-emitted speech pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="build a synthetic replay dataset")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--speakers", type=int, default=10)
    p.add_argument("--clips", type=int, default=6, help="clips per speaker")
    p.add_argument("--channels", help="JSON file of replay channel configs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="key=value defaults file")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="extract features for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--feature", required=True, choices=[KIND_MFCC, KIND_CQCC])
    p.add_argument("--pca", type=int, default=0,
                   help="project to this many dims (PCA fit on train split)")
    p.add_argument("--pca-model-out", help="also save the fitted PCA model")
    p.add_argument("--out", required=True, help="output EMB1 feature file")
    p.add_argument("--target-rms", type=float, default=TARGET_RMS)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", help="key=value defaults file")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train an MLP or the GMM baseline")
    p.add_argument("--features", required=True,
                   help="comma-separated EMB1 feature files (fused in canonical order)")
    p.add_argument("--model", required=True, choices=["mlp", "gmm"])
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--grid", help="JSON grid axes file for 5-fold CV search")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--hidden", default="100",
                   help="comma-separated hidden layer sizes")
    p.add_argument("--lr", type=float, default=0.00005)
    p.add_argument("--batch", type=int, default=5000)
    p.add_argument("--max-epochs", type=int, default=500)
    p.add_argument("--patience", type=int, default=20)
    p.add_argument("--optimizer", default="adam", choices=["adam", "sgd"])
    p.add_argument("--class-weighted", action="store_true")
    p.add_argument("--gmm-components", type=int, default=512,
                   help="mixture size per class (512 mirrors the ASVspoof "
                        "baseline; desk-scale datasets need far fewer)")
    p.add_argument("--fusion-pca", type=int, default=0,
                   help="PCA the fused vector to this many dims before training")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="key=value defaults file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on one split")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="test", choices=["train", "val", "test"])
    p.add_argument("--config", help="key=value defaults file")
    p.set_defaults(func=cmd_eval)
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Load key=value defaults from --config FILE before parsing."""
    path = None
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif arg.startswith("--config="):
            path = arg.split("=", 1)[1]
    if path is None:
        return
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        parser.error(f"cannot read config file {path}: {exc}")

    # find the subparser in use so types and axes match
    command = next((a for a in argv if not a.startswith("-")), None)
    sub_actions = [a for a in parser._actions
                   if isinstance(a, argparse._SubParsersAction)]
    if command is None or not sub_actions or command not in sub_actions[0].choices:
        return
    sub = sub_actions[0].choices[command]
    by_dest = {a.dest: a for a in sub._actions}

    defaults = {}
    for no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            parser.error(f"{path}: line {no}: expected key=value")
        key, value = line.split("=", 1)
        dest = key.strip().replace("-", "_")
        if dest not in by_dest:
            parser.error(f"{path}: line {no}: unknown option {key.strip()!r}")
        action = by_dest[dest]
        if action.type is not None:
            try:
                value = action.type(value.strip())
            except ValueError:
                parser.error(f"{path}: line {no}: bad value for {key.strip()!r}")
        elif isinstance(action, argparse._StoreTrueAction):
            value = value.strip().lower() in ("1", "true", "yes")
        else:
            value = value.strip()
        defaults[dest] = value
    sub.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    _apply_config_file(parser, argv)
    args = parser.parse_args(argv)

    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    log.info("resolved config: %s", resolved)
    try:
        return args.func(args)
    except InputError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 2
    except ReplayDetError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
