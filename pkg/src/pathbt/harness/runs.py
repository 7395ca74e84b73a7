"""Run registry: every command writes a re-executable record before acting."""

from __future__ import annotations

import datetime as _dt
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .. import __version__

RUNS_ENV_VAR = "PATHBT_RUNS_DIR"
RECORD_NAME = "run.json"


@dataclass
class RunRecord:
    run_id: str
    command: str
    config: dict
    version: str = __version__
    metrics: dict = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    started: str = ""
    finished: str = ""
    status: str = "running"


def _now() -> str:
    return _dt.datetime.now().isoformat(timespec="seconds")


class RunHandle:
    def __init__(self, record: RunRecord, run_dir: Path):
        self.record = record
        self.dir = run_dir

    def save(self) -> None:
        with open(self.dir / RECORD_NAME, "w", encoding="utf-8") as f:
            json.dump(asdict(self.record), f, indent=2, sort_keys=True)

    def add_artifact(self, path: str | Path) -> Path:
        path = Path(path)
        self.record.artifacts.append(str(path))
        return path

    def finish(self, metrics: dict | None = None) -> None:
        if metrics:
            self.record.metrics.update(metrics)
        self.record.finished = _now()
        self.record.status = "finished"
        self.save()

    def fail(self, error: str) -> None:
        self.record.finished = _now()
        self.record.status = "failed"
        self.record.metrics["error"] = error
        self.save()


class RunRegistry:
    """Filesystem-backed registry rooted at --out, $PATHBT_RUNS_DIR, or ./runs."""

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root or os.environ.get(RUNS_ENV_VAR, "runs"))

    def new_run(self, command: str, config: dict, run_id: str | None = None) -> RunHandle:
        self.root.mkdir(parents=True, exist_ok=True)
        if run_id is None:
            stamp = _dt.datetime.now().strftime("%Y%m%d-%H%M%S")
            run_id = f"{command}-{stamp}"
        base, n = run_id, 1
        while (self.root / run_id).exists():
            n += 1
            run_id = f"{base}-{n}"
        run_dir = self.root / run_id
        run_dir.mkdir(parents=True)
        record = RunRecord(run_id=run_id, command=command, config=config, started=_now())
        handle = RunHandle(record, run_dir)
        handle.save()  # persisted before any side effects
        return handle

    def load(self, run_id: str) -> RunHandle:
        run_dir = self.root / run_id
        record_path = run_dir / RECORD_NAME
        if not record_path.exists():
            raise FileNotFoundError(f"unknown run_id {run_id!r} under {self.root}")
        with open(record_path, "r", encoding="utf-8") as f:
            payload = json.load(f)
        return RunHandle(RunRecord(**payload), run_dir)

    def list_runs(self) -> list[str]:
        if not self.root.exists():
            return []
        return sorted(p.name for p in self.root.iterdir() if (p / RECORD_NAME).exists())


def run_at_dir(command: str, config: dict, run_dir: str | Path) -> RunHandle:
    """Record a run in an explicitly chosen directory (e.g. --out RUNDIR)."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    record = RunRecord(run_id=run_dir.name, command=command, config=config, started=_now())
    handle = RunHandle(record, run_dir)
    handle.save()
    return handle
