"""Append-only JSONL experiment records and the CSV report built from them."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import threading
import time
from pathlib import Path

import numpy as np


class UnknownRun(KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


def _clean(value):
    """JSON-safe copy of a metrics value (numpy scalars become Python numbers)."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, bool, int)) and not isinstance(value, bool):
        return int(value)
    return value


def encode_event(run_id: str, step: int, episode: int, reward: float, losses: dict, extras: dict,
                 t_ms: int) -> str:
    event = {
        "run_id": run_id,
        "step": int(step),
        "episode": int(episode),
        "reward": float(reward),
        "losses": _clean(dict(sorted(losses.items()))),
        "extras": _clean(dict(sorted(extras.items()))),
        "t_ms": int(t_ms),
    }
    return json.dumps(event, separators=(", ", ": ")) + "\n"


class ExperimentRecord:
    """One run: an immutable config snapshot plus the per-episode metric events."""

    def __init__(self, run_id: str, config: dict, path: Path | None = None, mode: str = "train"):
        self.run_id = run_id
        self._config = json.dumps(config, sort_keys=True)
        self.path = path
        self.mode = mode
        self.events: list[dict] = []

    @property
    def config(self) -> dict:
        return json.loads(self._config)

    @property
    def rewards(self) -> list[float]:
        return [e["reward"] for e in self.events]

    def trailing_mean(self, window: int = 100) -> float:
        r = self.rewards[-window:]
        return float(np.mean(r)) if r else float("nan")

    def __len__(self) -> int:
        return len(self.events)

    def __repr__(self):
        return f"<ExperimentRecord {self.run_id} episodes={len(self.events)}>"


class Tracker:
    """Single-writer JSONL sink for one run.

    ``metrics_dir=None`` keeps events in memory only.  ``clock`` returns
    seconds and is injectable so golden files can be reproduced byte for byte.
    """

    def __init__(self, alg: str, env: str, config: dict, metrics_dir=None, mode: str = "train",
                 clock=time.time, run_id: str | None = None):
        self.clock = clock
        self.start = clock()
        if run_id is None:
            stamp = time.strftime("%Y%m%d-%H%M%S", time.localtime(self.start))
            run_id = f"{stamp}-{alg}-{env}"
        self._lock = threading.Lock()
        self._fh = None
        path = None
        if metrics_dir is not None:
            root = Path(metrics_dir)
            root.mkdir(parents=True, exist_ok=True)
            base, n = run_id, 1
            while (root / f"{run_id}.jsonl").exists():
                n += 1
                run_id = f"{base}-{n}"
            path = root / f"{run_id}.jsonl"
            with open(root / f"{run_id}.config.json", "w") as fh:
                json.dump(config, fh, indent=2, sort_keys=True)
                fh.write("\n")
            self._fh = open(path, "w")
        self.record = ExperimentRecord(run_id, config, path, mode)

    def log(self, step: int, episode: int, reward: float, losses=None, extras=None) -> dict:
        if self.record.events and step < self.record.events[-1]["step"]:
            raise ValueError(f"metric steps must be monotone: {step} after {self.record.events[-1]['step']}")
        t_ms = int(round((self.clock() - self.start) * 1000.0))
        line = encode_event(self.record.run_id, step, episode, reward, losses or {}, extras or {}, t_ms)
        event = json.loads(line)
        with self._lock:
            self.record.events.append(event)
            if self._fh is not None:
                self._fh.write(line)
                self._fh.flush()
        return event

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None


def track_metrics(tracker: Tracker, event: dict) -> dict:
    return tracker.log(event.get("step", 0), event.get("episode", 0), event["reward"],
                       event.get("losses"), event.get("extras"))


def read_run(path) -> list[dict]:
    """Events of a JSONL run file; a torn final line is ignored."""
    p = Path(path)
    if not p.is_file():
        raise UnknownRun(f"no run file at {p}")
    events = []
    lines = p.read_text().splitlines()
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            events.append(json.loads(line))
        except json.JSONDecodeError:
            if i == len(lines) - 1:
                break
            raise
    return events


def resolve_run(ref, runs_dir="runs") -> Path:
    """A run file path from either a path or a run id under ``runs_dir``."""
    p = Path(ref)
    if p.is_file():
        return p
    candidate = Path(runs_dir) / f"{ref}.jsonl"
    if candidate.is_file():
        return candidate
    raise UnknownRun(f"unknown run {str(ref)!r} (looked for {p} and {candidate})")


def trailing_means(rewards, window: int = 100) -> list[float]:
    out, total = [], 0.0
    for i, r in enumerate(rewards):
        total += r
        if i >= window:
            total -= rewards[i - window]
        out.append(total / min(i + 1, window))
    return out


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def report_rows(runs: dict) -> tuple[list[str], list[list[str]]]:
    """Header and rows for ``{run_id: events}``; rows are aligned by episode."""
    loss_keys = sorted({k for events in runs.values() for e in events for k in e.get("losses", {})})
    header = ["run_id", "episode", "reward", "reward_trailing100_mean"] + [f"loss_{k}" for k in loss_keys]
    trailing = {rid: trailing_means([e["reward"] for e in ev]) for rid, ev in runs.items()}
    rows = []
    n = max((len(ev) for ev in runs.values()), default=0)
    for i in range(n):
        for rid, ev in runs.items():
            if i >= len(ev):
                continue
            e = ev[i]
            row = [rid, str(e["episode"]), _fmt(e["reward"]), _fmt(trailing[rid][i])]
            row += [_fmt(e.get("losses", {}).get(k)) for k in loss_keys]
            rows.append(row)
    return header, rows


def report_csv(paths, runs_dir="runs") -> str:
    runs = {}
    for ref in paths:
        p = resolve_run(ref, runs_dir)
        events = read_run(p)
        rid = events[0]["run_id"] if events else p.stem
        if rid in runs:
            # same id from two directories: keep both, told apart by path
            rid = str(p)
        runs[rid] = events
    header, rows = report_rows(runs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def compare_runs(refs, runs_dir="runs", window: int = 100) -> list[dict]:
    """Per-run mean and std of the trailing-``window`` episode rewards.

    ``refs`` may mix run ids, file paths and in-memory ExperimentRecords.
    Runs are aligned by episode: only the episodes every run reached are compared.
    """
    runs = {}
    for ref in refs:
        if isinstance(ref, ExperimentRecord):
            rid, rewards = ref.run_id, ref.rewards
        else:
            events = read_run(resolve_run(ref, runs_dir))
            rid, rewards = events[0]["run_id"] if events else str(ref), [e["reward"] for e in events]
        base, n = rid, 1
        while rid in runs:
            n += 1
            rid = f"{base}#{n}"
        runs[rid] = rewards
    n = min((len(r) for r in runs.values()), default=0)
    table = []
    for rid, rewards in runs.items():
        tail = np.asarray(rewards[:n][-window:], dtype=np.float64)
        table.append({
            "run_id": rid,
            "episodes": n,
            "trailing_mean": float(tail.mean()) if len(tail) else float("nan"),
            "trailing_std": float(tail.std()) if len(tail) else float("nan"),
        })
    if table:
        ref_mean = table[0]["trailing_mean"]
        for row in table:
            row["diff_vs_first"] = row["trailing_mean"] - ref_mean
    return table


def default_runs_dir() -> str:
    return os.environ.get("RLZOO_RUNS", "runs")
