"""Command-line entry point: pathbt {synth, tile, augment-preview, pretrain,
probe, mil, supervised, matrix, ablate, transfer, report}."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import torch

from .. import __version__
from ..augment import kernels
from ..augment.policy import apply_policy, builtin_policies, derive_rng, get_policy
from ..core.encoders import EncoderSpec
from ..core.pretrain import BTConfig, load_encoder_checkpoint, pretrain
from ..ingest import (
    TileDataset,
    export_dataset,
    filter_tiles,
    grid_tiles,
    label_roi_membership,
    load_slide_manifests,
    open_slide,
    tissue_mask,
    train_artifact_filter,
)
from ..mil.bags import bag_assemble
from ..mil.heatmap import heatmap_export
from ..mil.train import MILConfig, predict_slide, train_mil
from ..probe.embeddings import encoder_checksum, extract_embeddings
from ..probe.linear import ProbeConfig, train_probe
from ..probe.metrics import confusion_matrix, roc_curve_points
from ..probe.mix import eval_phase_mix
from ..probe.projection import project_2d
from .ablation import ablation
from .matrix import default_matrix_cells, experiment_matrix, transfer_matrix
from .report import report as build_report
from .runs import RunRegistry, run_at_dir
from .supervised import SupervisedConfig, supervised_train
from .synthetic import SyntheticSpec, frequency_textures, palette_textures, synth_slides, synth_tiles

logger = logging.getLogger("pathbt")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=str, default=None, help="output directory")
    parser.add_argument("--config", type=str, default=None, help="JSON file with argument defaults")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--runs-dir", type=str, default=None, help="run registry root (or $PATHBT_RUNS_DIR)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathbt", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pathbt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic tiles and slides")
    _add_common(p)
    p.add_argument("--what", choices=("tiles", "slides", "both"), default="both")
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--per-class", type=int, default=200)
    p.add_argument("--tile-size", type=int, default=64)
    p.add_argument("--texture", choices=("palette", "frequency"), default="palette")
    p.add_argument("--artifact-fraction", type=float, default=0.0)
    p.add_argument("--slides-per-class", type=int, default=4)
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--fov", type=float, default=410.0)

    p = sub.add_parser("tile", help="extract filtered tiles from slides")
    _add_common(p)
    p.add_argument("--manifest", type=str, required=True, help="slides.json path")
    p.add_argument("--fov", type=float, default=410.0)
    p.add_argument("--min-tissue", type=float, default=0.5)
    p.add_argument("--overwrite", action="store_true")
    p.add_argument("--thumb-downsample", type=float, default=4.0)
    p.add_argument(
        "--artifact-filter",
        choices=("none", "train"),
        default="none",
        help="train a synthetic-artifact CNN filter and apply it",
    )

    p = sub.add_parser("augment-preview", help="write both augmented views of an image")
    _add_common(p)
    p.add_argument("--policy", type=str, default="pathbt")
    p.add_argument("--image", type=str, required=True)
    p.add_argument("--out-size", type=int, default=None)

    p = sub.add_parser("pretrain", help="two-view self-supervised pretraining")
    _add_common(p)
    p.add_argument("--data", type=str, required=True, help="tile dataset directory")
    p.add_argument("--policy", type=str, default="pathbt")
    p.add_argument("--encoder", type=str, default="small_conv")
    p.add_argument("--init", type=str, default="random", help="random or pretrained:PATH")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch", type=int, default=512)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0051)
    p.add_argument("--proj", type=str, default="8192,8192,8192")
    p.add_argument("--lr-weights", type=float, default=0.2)
    p.add_argument("--lr-biases", type=float, default=0.0048)
    p.add_argument("--warmup-epochs", type=int, default=10)
    p.add_argument("--out-size", type=int, default=None, help="view size (default: tile size)")
    p.add_argument("--eval-at-epochs", type=str, default="", help="comma list of checkpoint epochs")

    p = sub.add_parser("probe", help="linear evaluation of a frozen encoder")
    _add_common(p)
    p.add_argument("--run", type=str, required=True, help="pretrain run directory")
    p.add_argument("--data", type=str, required=True)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.3)
    p.add_argument("--repeats", type=int, default=2)
    p.add_argument("--train-per-class", type=int, default=3500)
    p.add_argument("--test-per-class", type=int, default=300)
    p.add_argument("--mix", choices=("none", "mixup", "cutmix"), default="none")
    p.add_argument("--alpha", type=float, default=1.0)

    p = sub.add_parser("mil", help="attention-based slide classification")
    _add_common(p)
    p.add_argument("--run", type=str, required=True, help="pretrain run directory")
    p.add_argument("--slides", type=str, required=True, help="tile dataset directory (slide-tagged)")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--instance-loss-weight", type=float, default=0.0)
    p.add_argument("--heatmap-downsample", type=float, default=32.0)
    p.add_argument("--top-k", type=int, default=6)

    p = sub.add_parser("supervised", help="supervised baseline on labeled tiles")
    _add_common(p)
    p.add_argument("--data", type=str, required=True)
    p.add_argument("--encoder", type=str, default="small_conv")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch", type=int, default=64)

    p = sub.add_parser("matrix", help="run the training-strategy matrix")
    _add_common(p)
    p.add_argument("--data", type=str, required=True, help="NAME=DIR[,NAME=DIR...] or DIR")
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--small-encoders", action="store_true", help="use the desk-scale encoder everywhere")
    p.add_argument("--train-per-class", type=int, default=100)
    p.add_argument("--test-per-class", type=int, default=50)

    p = sub.add_parser("ablate", help="sweep one pretraining axis")
    _add_common(p)
    p.add_argument("--data", type=str, required=True)
    p.add_argument("--axis", type=str, required=True)
    p.add_argument("--values", type=str, required=True, help="comma-separated values")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--seeds", type=str, default="0,1")
    p.add_argument("--subset-per-class", type=int, default=500)

    p = sub.add_parser("transfer", help="cross-FoV probe matrix")
    _add_common(p)
    p.add_argument("--runs", type=str, required=True, help="FOV=RUNDIR[,FOV=RUNDIR...]")
    p.add_argument("--data", type=str, required=True, help="FOV=DIR[,FOV=DIR...]")
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--train-per-class", type=int, default=100)
    p.add_argument("--test-per-class", type=int, default=50)

    p = sub.add_parser("report", help="consolidate run records into markdown + CSV")
    _add_common(p)
    p.add_argument("--runs", type=str, required=True, help="comma-separated run ids or run directories")

    return parser


def _load_config_defaults(argv: list[str], parser: argparse.ArgumentParser) -> list[str]:
    """Pre-scan for --config and fold the JSON values in as CLI defaults."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = Path(argv[idx + 1])
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    for sub_action in parser._subparsers._group_actions:  # noqa: SLF001 - argparse has no public hook
        for name, sub in sub_action.choices.items():
            sub.set_defaults(**{k.replace("-", "_"): v for k, v in payload.get(name, {}).items()})
    return argv


def _registry(args) -> RunRegistry:
    return RunRegistry(args.runs_dir)


def _parse_values(text: str):
    values = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            values.append(int(token))
        except ValueError:
            try:
                values.append(float(token))
            except ValueError:
                values.append(token)
    return values


def _parse_named_dirs(text: str) -> dict[str, str]:
    out = {}
    for i, token in enumerate(text.split(",")):
        token = token.strip()
        if not token:
            continue
        if "=" in token:
            name, path = token.split("=", 1)
        else:
            name, path = f"ds{i}" if i else "default", token
        out[name] = path
    return out


def _load_dataset(path: str) -> tuple[TileDataset, list[np.ndarray], list[str]]:
    ds = TileDataset(path)
    return ds, ds.images(), ds.labels()


def _textures(kind: str, n: int):
    return palette_textures(n) if kind == "palette" else frequency_textures(n)


# ---------------------------------------------------------------- commands


def cmd_synth(args) -> int:
    out = Path(args.out or "synth-data")
    spec = SyntheticSpec(
        n_classes=args.classes,
        tiles_per_class=args.per_class,
        tile_size=args.tile_size,
        textures=_textures(args.texture, args.classes),
        artifact_fraction=args.artifact_fraction,
        slide_grid=args.grid,
        fov_microns=args.fov,
        seed=args.seed,
    )
    run = _registry(args).new_run("synth", vars(args))
    artifacts = []
    if args.what in ("tiles", "both"):
        tiles_dir = out / "tiles"
        synth_tiles(spec, out_dir=tiles_dir, overwrite=True)
        artifacts.append(run.add_artifact(tiles_dir / "tiles.jsonl"))
    if args.what in ("slides", "both"):
        slides_dir = out / "slides"
        synth_slides(spec, slides_dir, slides_per_class=args.slides_per_class)
        artifacts.append(run.add_artifact(slides_dir / "slides.json"))
    run.finish({"artifacts_written": len(artifacts)})
    for a in artifacts:
        print(a)
    return 0


def cmd_tile(args) -> int:
    out = Path(args.out or "tiles-out")
    manifest_path = Path(args.manifest)
    manifests = load_slide_manifests(manifest_path)
    run = _registry(args).new_run("tile", vars(args))

    all_tiles, all_images = [], []
    for manifest in manifests:
        reader = open_slide(manifest, root=manifest_path.parent)
        thumb = reader.thumbnail(args.thumb_downsample)
        mask = tissue_mask(thumb, args.thumb_downsample)
        tiles = grid_tiles(
            manifest, args.fov, mask, min_tissue_frac=args.min_tissue, slide_dims=reader.dimensions
        )
        label_roi_membership(tiles, manifest)
        for tile in tiles:
            all_tiles.append(tile)
            all_images.append(reader.read_region(tile.x, tile.y, tile.side_px, tile.side_px))

    if args.artifact_filter == "train" and all_tiles:
        side = all_tiles[0].side_px
        spec = SyntheticSpec(
            n_classes=1, tiles_per_class=200, tile_size=side, artifact_fraction=1.0, seed=args.seed
        )
        synth = synth_tiles(spec)
        labels = [1 if lbl != "artifact" else 0 for lbl in synth.labels]
        model = train_artifact_filter(synth.images, labels)
        kept = filter_tiles(model, all_tiles, all_images)
        kept_ids = {id(t) for t in kept}
        all_images = [img for t, img in zip(all_tiles, all_images) if id(t) in kept_ids]
        all_tiles = kept

    manifest_out = export_dataset(
        all_tiles,
        all_images,
        out,
        overwrite=args.overwrite,
        jobs=args.jobs,
        extra_meta={"slides_manifest": str(manifest_path.resolve()), "fov_microns": args.fov},
    )
    run.add_artifact(manifest_out)
    run.finish({"n_tiles": len(all_tiles), "n_slides": len(manifests)})
    print(f"wrote {len(all_tiles)} tiles to {out}")
    return 0


def cmd_augment_preview(args) -> int:
    from PIL import Image

    out = Path(args.out or "augment-preview")
    out.mkdir(parents=True, exist_ok=True)
    image = np.asarray(Image.open(args.image).convert("RGB"))
    out_size = args.out_size or min(image.shape[0], image.shape[1], 224)
    policy = get_policy(args.policy, out_size)
    run = _registry(args).new_run("augment-preview", vars(args))

    for name, branch in (("branch_a", policy.branch_a), ("branch_b", policy.branch_b)):
        view = apply_policy(image, branch, derive_rng(args.seed, 0, 0, 0 if name == "branch_a" else 1))
        norm = branch[-1].params
        mean = np.asarray(norm.get("mean", kernels.IMAGENET_MEAN), dtype=np.float32)
        std = np.asarray(norm.get("std", kernels.IMAGENET_STD), dtype=np.float32)
        restored = np.clip((view * std + mean) * 255.0, 0, 255).astype(np.uint8)
        path = out / f"{name}.png"
        Image.fromarray(restored).save(path)
        run.add_artifact(path)
    (out / "policy.json").write_text(policy.to_json(), encoding="utf-8")
    run.add_artifact(out / "policy.json")
    run.finish()
    print(f"previews written to {out}")
    return 0


def _encoder_spec_from_args(encoder: str, init: str) -> EncoderSpec:
    if init.startswith("pretrained:"):
        return EncoderSpec(family=encoder, init="pretrained", weights_path=init.split(":", 1)[1])
    if init != "random":
        raise ValueError(f"--init must be random or pretrained:PATH, got {init!r}")
    return EncoderSpec(family=encoder, init="random")


def cmd_pretrain(args) -> int:
    ds, images, _ = _load_dataset(args.data)
    out_size = args.out_size or ds.records[0].side_px
    policy = get_policy(args.policy, out_size)
    spec = _encoder_spec_from_args(args.encoder, args.init)
    config = BTConfig(
        batch_size=args.batch,
        lam=args.lam,
        projector_dims=tuple(int(d) for d in args.proj.split(",")),
        epochs=args.epochs,
        lr_weights=args.lr_weights,
        lr_biases=args.lr_biases,
        warmup_epochs=args.warmup_epochs,
        seed=args.seed,
        workers=args.jobs,
    )
    if args.out:
        run = run_at_dir("pretrain", vars(args), args.out)
    else:
        run = _registry(args).new_run("pretrain", vars(args))
    eval_epochs = tuple(int(e) for e in args.eval_at_epochs.split(",") if e.strip())
    result = pretrain(
        images, policy, spec, config, out_dir=run.dir, eval_at_epochs=eval_epochs
    )
    for name in ("config.json", "losses.csv", "checkpoint.pt"):
        run.add_artifact(run.dir / name)
    last = result.history[-1]
    run.finish({"final_train_loss": last.train_loss, "final_val_loss": last.val_loss})
    print(f"pretrained {args.epochs} epochs; run dir {run.dir}")
    return 0


def _policy_out_size_of_run(run_dir: Path) -> int | None:
    config_path = run_dir / "config.json"
    if not config_path.exists():
        return None
    payload = json.loads(config_path.read_text(encoding="utf-8"))
    try:
        branch = payload["policy"]["branch_a"]
        return int(branch[-2]["params"]["out_size"])
    except (KeyError, IndexError, TypeError):
        return None


def cmd_probe(args) -> int:
    run_dir = Path(args.run)
    encoder, _ = load_encoder_checkpoint(run_dir / "checkpoint.pt")
    ds, images, labels = _load_dataset(args.data)
    input_size = _policy_out_size_of_run(run_dir)
    out = Path(args.out or (run_dir / "probe"))
    out.mkdir(parents=True, exist_ok=True)
    run = run_at_dir("probe", vars(args), out)

    checksum_before = encoder_checksum(encoder)
    feats = extract_embeddings(encoder, images, input_size=input_size)
    mix_fn = None if args.mix == "none" else eval_phase_mix(args.mix, args.alpha)

    results = []
    for r in range(args.repeats):
        cfg = ProbeConfig(
            epochs=args.epochs,
            lr=args.lr,
            train_per_class=args.train_per_class,
            test_per_class=args.test_per_class,
            seed=args.seed + r,
        )
        results.append(train_probe(feats, labels, cfg, mix_fn=mix_fn))
    if encoder_checksum(encoder) != checksum_before:
        raise RuntimeError("encoder weights changed during probing")

    top1s = [r.metrics.top1_acc for r in results]
    best = results[0]
    metrics = {
        "top1_mean": float(np.mean(top1s)),
        "top1_std": float(np.std(top1s)),
        "auc": float(np.mean([r.metrics.auc for r in results])),
        "f1": float(np.mean([r.metrics.f1_macro for r in results])),
        "per_class": best.metrics.to_dict()["per_class"],
        "repeats": args.repeats,
    }
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2), encoding="utf-8")

    classes = sorted(set(labels))
    cm = confusion_matrix(best.test_scores, best.test_labels, k=len(classes))
    with open(out / "confusion.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["true\\pred"] + classes)
        for i, row in enumerate(cm):
            writer.writerow([classes[i]] + list(row))
    for ci, cname in enumerate(classes):
        points = roc_curve_points(best.test_scores[:, ci], best.test_labels == ci)
        with open(out / f"roc_{cname}.csv", "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["fpr", "tpr", "threshold"])
            writer.writerows(points)
    project_2d(feats, labels, out_prefix=out / "projection")

    for name in ("metrics.json", "confusion.csv", "projection.csv", "projection.png"):
        run.add_artifact(out / name)
    run.finish(metrics={k: v for k, v in metrics.items() if isinstance(v, (int, float))})
    print(json.dumps(metrics, indent=2))
    return 0


def cmd_mil(args) -> int:
    run_dir = Path(args.run)
    encoder, _ = load_encoder_checkpoint(run_dir / "checkpoint.pt")
    ds, images, _ = _load_dataset(args.slides)
    input_size = _policy_out_size_of_run(run_dir)
    out = Path(args.out or (run_dir / "mil"))
    out.mkdir(parents=True, exist_ok=True)
    run = run_at_dir("mil", vars(args), out)

    slide_labels = None
    slides_manifest = ds.meta.get("slides_manifest")
    manifests = {}
    if slides_manifest and Path(slides_manifest).exists():
        loaded = load_slide_manifests(slides_manifest)
        manifests = {m.slide_id: m for m in loaded}
        slide_labels = {m.slide_id: m.class_label for m in loaded}

    assembly = bag_assemble(ds.records, images, encoder, slide_labels=slide_labels, input_size=input_size)
    config = MILConfig(epochs=args.epochs, lr=args.lr, instance_loss_weight=args.instance_loss_weight, seed=args.seed)
    result = train_mil(assembly.bags, config)

    metrics = {
        "acc": result.metrics.top1_acc,
        "auc": result.metrics.auc,
        "f1": result.metrics.f1_macro,
        "n_train_slides": len(result.train_slides),
        "n_test_slides": len(result.test_slides),
        "n_skipped_slides": len(assembly.skipped),
        "skipped": assembly.skipped,
    }
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2), encoding="utf-8")

    bag_by_id = {b.slide_id: b for b in assembly.bags}
    with open(out / "predictions.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["slide_id", "label", "predicted", "split"] + [f"score_{c}" for c in result.classes])
        for sid in sorted(bag_by_id):
            bag = bag_by_id[sid]
            scores, _ = predict_slide(result.model, bag)
            split = "test" if sid in result.test_slides else "train"
            writer.writerow(
                [sid, bag.label, result.classes[int(scores.argmax())], split] + [float(s) for s in scores]
            )

    tiles_by_slide: dict[str, list[int]] = {}
    for i, rec in enumerate(ds.records):
        tiles_by_slide.setdefault(rec.slide_id, []).append(i)
    for sid in result.test_slides:
        bag = bag_by_id[sid]
        manifest = manifests.get(sid)
        if manifest is None:
            logger.warning("no slide manifest for %s; skipping heatmap", sid)
            continue
        reader = open_slide(manifest, root=Path(slides_manifest).parent)
        thumb = reader.thumbnail(args.heatmap_downsample)
        tile_imgs = [images[i] for i in tiles_by_slide[sid]]
        heatmap_export(
            bag,
            thumb,
            out / "heatmaps",
            downsample=args.heatmap_downsample,
            top_k=args.top_k,
            tile_images=tile_imgs,
        )

    with open(out / "mil_history.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "train_loss", "val_loss", "val_auc"])
        for rec in result.history:
            writer.writerow([rec.epoch, rec.train_loss, rec.val_loss, rec.val_auc])

    run.add_artifact(out / "metrics.json")
    run.add_artifact(out / "predictions.csv")
    run.finish({k: v for k, v in metrics.items() if isinstance(v, (int, float))})
    print(json.dumps({k: metrics[k] for k in ("acc", "auc", "f1")}, indent=2))
    return 0


def cmd_supervised(args) -> int:
    ds, images, labels = _load_dataset(args.data)
    keep = [
        i
        for i, rec in enumerate(ds.records)
        if rec.roi_membership in ("in_roi", "normal_slide")
    ]
    if not keep:
        raise ValueError("no ROI or normal-slide tiles in dataset; supervised training needs them")
    images = [images[i] for i in keep]
    labels = [labels[i] for i in keep]

    out = Path(args.out) if args.out else None
    run = run_at_dir("supervised", vars(args), out) if out else _registry(args).new_run("supervised", vars(args))
    config = SupervisedConfig(epochs=args.epochs, lr=args.lr, batch_size=args.batch, seed=args.seed)
    result = supervised_train(images, labels, EncoderSpec(family=args.encoder), config)

    torch.save(
        {"encoder": result.encoder.state_dict(), "head": result.head.state_dict(), "classes": result.classes},
        run.dir / "supervised.pt",
    )
    with open(run.dir / "history.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "train_loss", "val_acc"])
        for rec in result.history:
            writer.writerow([rec.epoch, rec.train_loss, rec.val_acc])
    run.add_artifact(run.dir / "supervised.pt")
    run.finish(
        {
            "val_top1": result.metrics.top1_acc,
            "val_auc": result.metrics.auc,
            "best_epoch": result.best_epoch,
        }
    )
    print(f"best epoch {result.best_epoch}: val top1 {result.metrics.top1_acc:.2f}")
    return 0


def cmd_matrix(args) -> int:
    named = _parse_named_dirs(args.data)
    datasets = {}
    out_size = None
    for name, path in named.items():
        ds, images, labels = _load_dataset(path)
        datasets[name] = (images, labels)
        out_size = out_size or ds.records[0].side_px
    cells = default_matrix_cells(
        transformer_family="small_conv" if args.small_encoders else "hier_window_transformer_tiny_class"
    )
    out = Path(args.out or "matrix-out")
    out.mkdir(parents=True, exist_ok=True)
    run = run_at_dir("matrix", vars(args), out)

    result = experiment_matrix(
        datasets,
        cells=cells,
        bt_config=BTConfig(batch_size=args.batch, projector_dims=(256, 256), epochs=args.epochs, seed=args.seed),
        probe_config=ProbeConfig(
            epochs=40,
            train_per_class=args.train_per_class,
            test_per_class=args.test_per_class,
            seed=args.seed,
        ),
        supervised_config=SupervisedConfig(epochs=max(1, args.epochs // 2), seed=args.seed),
        out_size=out_size or 64,
        dry_run=args.dry_run,
        out_csv=None if args.dry_run else out / "matrix.csv",
    )
    if args.dry_run:
        for model, dataset in result.planned:
            print(f"planned: {model} on {dataset}")
        run.finish({"planned_cells": len(result.planned)})
        return 0
    run.add_artifact(out / "matrix.csv")
    failed = [c for c in result.cells if c.status == "failed"]
    run.finish({"cells_ok": sum(c.status == "ok" for c in result.cells), "cells_failed": len(failed)})
    for c in result.cells:
        print(f"{c.model} on {c.dataset}: {c.status} top1={c.top1} auc={c.auc} {c.note}")
    return 1 if failed else 0


def cmd_ablate(args) -> int:
    ds, images, labels = _load_dataset(args.data)
    out = Path(args.out or "ablation-out")
    run = run_at_dir("ablate", vars(args), out)
    out_size = ds.records[0].side_px
    report = ablation(
        args.axis,
        _parse_values(args.values),
        images,
        labels,
        policy=get_policy("pathbt", out_size),
        bt_config=BTConfig(batch_size=args.batch, projector_dims=(256, 256), epochs=args.epochs, seed=args.seed),
        seeds=tuple(int(s) for s in args.seeds.split(",")),
        subset_per_class=args.subset_per_class,
        out_dir=out,
        input_size=out_size,
    )
    run.add_artifact(out / f"ablation_{args.axis}.csv")
    run.finish({"n_values": len(report.rows)})
    for row in report.rows:
        print(f"{args.axis}={row.value}: top1 {row.top1_mean:.2f}+/-{row.top1_std:.2f} loss_var {row.loss_variance_mean:.4g}")
    return 0


def cmd_transfer(args) -> int:
    run_dirs = _parse_named_dirs(args.runs)
    data_dirs = _parse_named_dirs(args.data)
    datasets = {}
    input_size = None
    for fov, path in data_dirs.items():
        ds, images, labels = _load_dataset(path)
        datasets[fov] = (images, labels)
        input_size = input_size or ds.records[0].side_px
    encoders = {}
    for fov in datasets:
        run_dir = run_dirs.get(fov)
        if run_dir and (Path(run_dir) / "checkpoint.pt").exists():
            encoders[fov], _ = load_encoder_checkpoint(Path(run_dir) / "checkpoint.pt")
        else:
            encoders[fov] = None
    out = Path(args.out or "transfer-out")
    out.mkdir(parents=True, exist_ok=True)
    run = run_at_dir("transfer", vars(args), out)
    result = transfer_matrix(
        encoders,
        datasets,
        ProbeConfig(
            epochs=args.epochs,
            train_per_class=args.train_per_class,
            test_per_class=args.test_per_class,
            seed=args.seed,
        ),
        input_size=input_size,
        out_csv=out / "transfer.csv",
    )
    run.add_artifact(out / "transfer.csv")
    failed = [c for c in result.cells if c.status == "failed"]
    run.finish(
        {
            "diag_mean_acc": result.mean_accuracy(diagonal=True),
            "offdiag_mean_acc": result.mean_accuracy(diagonal=False),
            "cells_failed": len(failed),
        }
    )
    for c in result.cells:
        print(f"{c.train_fov} -> {c.eval_fov}: {c.status} top1={c.top1} auc={c.auc} {c.note}")
    return 1 if failed else 0


def cmd_report(args) -> int:
    out = Path(args.out or "report-out")
    registry = _registry(args)
    run_ids = []
    for token in args.runs.split(","):
        token = token.strip()
        if not token:
            continue
        path = Path(token)
        if path.is_dir() and (path / "run.json").exists():
            registry_local = RunRegistry(path.parent)
            run_ids.append((registry_local, path.name))
        else:
            run_ids.append((registry, token))
    md = None
    handles = []
    for reg, rid in run_ids:
        handles.append(reg.load(rid))
    # report() wants ids under one registry; pass handles directly via a shim
    from .report import report as _report

    class _MultiRegistry:
        def __init__(self, mapping):
            self.mapping = mapping

        def load(self, rid):
            return self.mapping[rid]

    mapping = {h.record.run_id: h for h in handles}
    md = _report(list(mapping), _MultiRegistry(mapping), out)
    print(md)
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "tile": cmd_tile,
    "augment-preview": cmd_augment_preview,
    "pretrain": cmd_pretrain,
    "probe": cmd_probe,
    "mil": cmd_mil,
    "supervised": cmd_supervised,
    "matrix": cmd_matrix,
    "ablate": cmd_ablate,
    "transfer": cmd_transfer,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    argv = _load_config_defaults(argv, parser)
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
