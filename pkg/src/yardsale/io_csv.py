"""Plain-text CSV serialization for distributions, traces, and samples.

All floats are written with repr(float), the shortest decimal that parses
back to the identical binary value, so a rerun with the same inputs
produces byte-identical files.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .grid import WealthGrid
from .distribution import WealthDistribution
from .inequality import LorenzCurve
from .traces import GiniTrace

DISTRIBUTION_HEADER = "w,P"
LORENZ_HEADER = "F,L"
TRACE_HEADER = "t,G,N,W,dGdt"
AGGREGATE_HEADER = "t,G_mean,G_stderr"
SNAPSHOT_HEADER = "agent_id,w"


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_columns(path: str | Path, header: str, columns: list[np.ndarray]) -> None:
    lines = [header]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _read_columns(path: str | Path, header: str) -> list[np.ndarray]:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    if lines[0].strip() != header:
        raise ValueError(f"{path}: expected header {header!r}, got {lines[0].strip()!r}")
    n_cols = header.count(",") + 1
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != n_cols:
            raise ValueError(f"{path}: row {lineno}: expected {n_cols} fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ValueError(f"{path}: row {lineno}: non-numeric entry") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    return [data[:, k] for k in range(n_cols)]


def write_distribution(path: str | Path, dist: WealthDistribution) -> None:
    _write_columns(path, DISTRIBUTION_HEADER, [dist.grid.nodes, dist.density])


def read_distribution(path: str | Path) -> WealthDistribution:
    w, p = _read_columns(path, DISTRIBUTION_HEADER)
    return WealthDistribution(WealthGrid.from_nodes(w), p)


def write_lorenz(path: str | Path, curve: LorenzCurve) -> None:
    _write_columns(path, LORENZ_HEADER, [curve.f, curve.l])


def write_trace(path: str | Path, trace: GiniTrace) -> None:
    _write_columns(
        path, TRACE_HEADER,
        [trace.t, trace.gini, trace.n_agents, trace.total_wealth, trace.rate],
    )


def read_trace(path: str | Path) -> GiniTrace:
    t, g, n, w, r = _read_columns(path, TRACE_HEADER)
    return GiniTrace(t=t, gini=g, n_agents=n, total_wealth=w, rate=r)


def write_aggregate_trace(
    path: str | Path, t: np.ndarray, g_mean: np.ndarray, g_stderr: np.ndarray
) -> None:
    _write_columns(path, AGGREGATE_HEADER, [np.asarray(t), np.asarray(g_mean), np.asarray(g_stderr)])


def read_aggregate_trace(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t, m, s = _read_columns(path, AGGREGATE_HEADER)
    return t, m, s


def write_snapshot(path: str | Path, wealths: np.ndarray) -> None:
    ids = np.arange(np.asarray(wealths).size)
    lines = [SNAPSHOT_HEADER]
    for i, w in zip(ids, np.asarray(wealths, dtype=float)):
        lines.append(f"{i},{_fmt(w)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_wealth_samples(path: str | Path) -> np.ndarray:
    """Read one wealth per row (a header row and an agent_id column are
    tolerated so snapshot files round-trip). Rejects negative or
    non-numeric entries, reporting 1-based row numbers."""
    lines = Path(path).read_text().splitlines()
    values: list[float] = []
    bad: list[str] = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        field = stripped.split(",")[-1].strip()
        try:
            v = float(field)
        except ValueError:
            if lineno == 1:
                continue  # header row
            bad.append(f"row {lineno}: non-numeric {field!r}")
            continue
        if not np.isfinite(v):
            bad.append(f"row {lineno}: non-finite value {field}")
        elif v < 0.0:
            bad.append(f"row {lineno}: negative wealth {field}")
        else:
            values.append(v)
    if bad:
        shown = "; ".join(bad[:5])
        more = f" (+{len(bad) - 5} more)" if len(bad) > 5 else ""
        raise ValueError(f"{path}: {shown}{more}")
    if not values:
        raise ValueError(f"{path}: no wealth samples found")
    return np.array(values, dtype=float)
