"""Consolidated markdown + CSV bundle over finished runs."""

from __future__ import annotations

import csv
import json
import shutil
from pathlib import Path

from .runs import RunRegistry


def _plot_losses(loss_csv: Path, out_png: Path) -> bool:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(loss_csv, "r", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        return False
    epochs = [int(r["epoch"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    for key in ("train_loss", "val_loss"):
        vals = [float(r[key]) for r in rows if r.get(key) not in (None, "", "nan")]
        if vals:
            ax.plot(epochs[: len(vals)], vals, label=key)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return True


def report(run_ids: list[str], registry: RunRegistry, out_dir: str | Path) -> Path:
    """Merge run metrics and training-curve plots into one bundle.

    Errors on unknown run ids; notes missing optional artifacts instead of
    failing. Returns the path of the generated markdown file.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    handles = [registry.load(rid) for rid in run_ids]

    lines = ["# run report", ""]
    metric_rows = []
    for handle in handles:
        rec = handle.record
        lines.append(f"## {rec.run_id}")
        lines.append("")
        lines.append(f"- command: `{rec.command}`")
        lines.append(f"- status: {rec.status} (started {rec.started}, finished {rec.finished})")
        lines.append(f"- config: `{json.dumps(rec.config, sort_keys=True)}`")
        if rec.metrics:
            for key, value in sorted(rec.metrics.items()):
                if isinstance(value, (int, float, str)):
                    lines.append(f"- {key}: {value}")
                    metric_rows.append((rec.run_id, key, value))
        else:
            lines.append("- metrics: none recorded")

        loss_csv = handle.dir / "losses.csv"
        if loss_csv.exists():
            png = out_dir / f"{rec.run_id}_losses.png"
            if _plot_losses(loss_csv, png):
                lines.append(f"- loss curves: ![losses]({png.name})")
        else:
            lines.append("- loss curves: not available")

        for name in ("confusion.csv", "metrics.json", "transfer.csv", "matrix.csv"):
            src = handle.dir / name
            if src.exists():
                dst = out_dir / f"{rec.run_id}_{name}"
                shutil.copyfile(src, dst)
                lines.append(f"- {name}: `{dst.name}`")
        roc_files = sorted(handle.dir.glob("roc_*.csv"))
        for src in roc_files:
            dst = out_dir / f"{rec.run_id}_{src.name}"
            shutil.copyfile(src, dst)
            lines.append(f"- {src.name}: `{dst.name}`")
        lines.append("")

    with open(out_dir / "metrics.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["run_id", "metric", "value"])
        writer.writerows(metric_rows)

    md_path = out_dir / "report.md"
    md_path.write_text("\n".join(lines), encoding="utf-8")
    return md_path
