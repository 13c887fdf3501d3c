"""Serialization: trajectories as JSONL, one sample per line.

Floats are written with ``repr`` (shortest round-trip form), so reading a file
back reproduces every double bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .flow_core import FlowError, FlowSample, FrameMetric, Gauge, SecondForm, Trajectory


def sample_to_dict(s: FlowSample) -> dict:
    d = {
        "gauge": s.gauge.value,
        "t": s.t,
        "L": s.L,
        "h": list(s.metric.diag),
        "K": list(s.second_form.diag),
        "structure": None if s.metric.structure is None else list(s.metric.structure),
    }
    if s.metric.sectional is not None:
        d["sectional"] = [list(row) for row in s.metric.sectional]
    return d


def sample_from_dict(d: dict) -> FlowSample:
    try:
        structure = d["structure"]
        sectional = d.get("sectional")
        metric = FrameMetric(tuple(d["h"]),
                             structure=None if structure is None else tuple(structure),
                             sectional=None if sectional is None else tuple(tuple(r) for r in sectional))
        return FlowSample(L=float(d["L"]), metric=metric, second_form=SecondForm(tuple(d["K"])),
                          t=float(d["t"]), gauge=Gauge(d["gauge"]))
    except KeyError as exc:
        raise FlowError(f"trajectory line is missing field {exc.args[0]!r}") from None


def dumps_trajectory(traj: Trajectory) -> str:
    lines = [json.dumps(sample_to_dict(s), allow_nan=False, separators=(",", ":")) for s in traj]
    return "\n".join(lines) + "\n"


def write_trajectory(traj: Trajectory, path) -> None:
    Path(path).write_text(dumps_trajectory(traj))


def loads_trajectory(text: str, t0: float | None = None) -> Trajectory:
    samples = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            samples.append(sample_from_dict(json.loads(line)))
        except (json.JSONDecodeError, FlowError, TypeError, ValueError) as exc:
            raise FlowError(f"line {lineno}: {exc}") from None
    return Trajectory(tuple(samples), t0=t0)


def read_trajectory(path, t0: float | None = None) -> Trajectory:
    return loads_trajectory(Path(path).read_text(), t0=t0)


def write_csv_rows(path, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
