"""JSON Lines trace format: one event per line, monotone event indices.

Event kinds: ``header`` (schema version and the effective run configuration),
``evaluation`` (one evaluation record), ``round`` (one scheduler round
report), and ``final`` (exactly one per successful run). The writer is the
single serialization point for a run, so traces are append-ordered even when
arms evaluate concurrently.
"""

from __future__ import annotations

import json
from pathlib import Path

__all__ = ["SCHEMA_VERSION", "TraceError", "TraceWriter", "read_trace", "best_so_far_curve"]

SCHEMA_VERSION = 1

_KINDS = ("header", "evaluation", "round", "final")


class TraceError(ValueError):
    """Malformed or inconsistent trace content."""


class TraceWriter:
    def __init__(self, path, run_id: str):
        self.path = Path(path)
        self.run_id = run_id
        self._index = 0
        self._fh = self.path.open("w", encoding="utf-8", newline="\n")

    def write(self, kind: str, payload: dict) -> None:
        if kind not in _KINDS:
            raise TraceError(f"unknown event kind {kind!r}")
        event = {"event": kind, "index": self._index, "run_id": self.run_id}
        event.update(payload)
        self._fh.write(json.dumps(event, separators=(",", ":")) + "\n")
        self._index += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_trace(path) -> list[dict]:
    """Parse a trace file, checking indices are strictly increasing."""
    path = Path(path)
    events = []
    last_index = -1
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if event.get("event") not in _KINDS:
                raise TraceError(f"{path}:{lineno}: unknown event kind {event.get('event')!r}")
            index = event.get("index")
            if not isinstance(index, int) or index <= last_index:
                raise TraceError(f"{path}:{lineno}: event indices must increase strictly")
            last_index = index
            events.append(event)
    return events


def best_so_far_curve(events: list[dict]) -> list[tuple[float, float]]:
    """(cumulative cost, best reward so far) after each evaluation.

    Failure costs accrue; rows begin with the first successful evaluation,
    so the reward column is non-decreasing by construction.
    """
    curve = []
    cost = 0.0
    best = None
    for event in events:
        if event.get("event") != "evaluation":
            continue
        cost += float(event["cost"])
        if event["status"] == "success":
            reward = float(event["reward"])
            best = reward if best is None else max(best, reward)
        if best is not None:
            curve.append((cost, best))
    return curve
