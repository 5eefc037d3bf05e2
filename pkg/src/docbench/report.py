"""Aggregate persisted benchmark results into comparison tables.

Markdown mirrors the backend x (consumers x regime) grid presentation:
cells show the median over repetitions plus the percent difference against
the in_memory backend in the same column, best-in-column values are bold,
best for a consumer count is bold italic, and failed cells render as OOM.
CSV is the flat form with one row per cell; both renderings carry
identical numeric strings.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

from .harness import GLOBAL_LOCK_THREADS, PROCESSES, THREADS
from .metrics import format_percent, percent_diff
from .store import COMPRESSED, IN_MEMORY, INDEXED

BACKEND_ORDER = {IN_MEMORY: 0, INDEXED: 1, COMPRESSED: 2}
REGIME_ORDER = {GLOBAL_LOCK_THREADS: 0, THREADS: 1, PROCESSES: 2}

CSV_COLUMNS = [
    "backend",
    "regime",
    "consumers",
    "workers",
    "pinned",
    "staged",
    "samples_per_s",
    "pct_vs_inmemory",
    "peak_rss_sum_gb",
    "peak_rss_paper_gb",
    "repetitions",
]

_GB = float(1 << 30)


@dataclass(frozen=True)
class CellKey:
    backend: str
    regime: str
    consumers: int
    workers: int
    pinned: bool
    staged: bool

    @property
    def knobs(self):
        return (self.workers, self.pinned, self.staged)

    @property
    def column(self):
        return (self.consumers, self.regime)

    def sort_key(self):
        return (
            BACKEND_ORDER.get(self.backend, 99),
            REGIME_ORDER.get(self.regime, 99),
            self.consumers,
            self.workers,
            self.pinned,
            self.staged,
        )


@dataclass
class CellStats:
    repetitions: int = 0
    ok_runs: int = 0
    samples_per_s: float | None = None
    sum_gb: float | None = None
    paper_gb: float | None = None

    @property
    def failed(self) -> bool:
        return self.ok_runs == 0


def _doc_key(doc: dict) -> CellKey:
    cfg = doc["config"]
    return CellKey(
        backend=cfg["backend"],
        regime=cfg["regime"],
        consumers=int(cfg["consumers"]),
        workers=int(cfg.get("workers", 0)),
        pinned=bool(cfg.get("pinned", False)),
        staged=bool(cfg.get("stage_dir")),
    )


def aggregate(docs) -> dict[CellKey, CellStats]:
    """Median over repetitions per cell; a cell with no successful run failed."""
    grouped: dict[CellKey, list[dict]] = {}
    for doc in docs:
        grouped.setdefault(_doc_key(doc), []).append(doc)
    cells: dict[CellKey, CellStats] = {}
    for key, runs in grouped.items():
        ok = [d for d in runs if not d.get("failed")]
        stats = CellStats(repetitions=len(runs), ok_runs=len(ok))
        if ok:
            stats.samples_per_s = statistics.median(d["samples_per_s"] for d in ok)
            stats.sum_gb = statistics.median(
                d["peak_rss_sum_bytes"] for d in ok
            ) / _GB
            stats.paper_gb = statistics.median(
                d["peak_rss_paper_bytes"] for d in ok
            ) / _GB
        cells[key] = stats
    return cells


def _baseline(cells, key: CellKey) -> CellStats | None:
    if key.backend == IN_MEMORY:
        return None
    base_key = CellKey(IN_MEMORY, key.regime, key.consumers, *key.knobs)
    return cells.get(base_key)


def _pct_str(value: float | None, base: CellStats | None, attr: str) -> str:
    """Percent-vs-in_memory string, or '' for baseline/missing cells."""
    if value is None or base is None or base.failed:
        return ""
    base_value = getattr(base, attr)
    if not base_value:
        return ""
    return format_percent(percent_diff(value, base_value))


def render_csv(docs) -> str:
    cells = aggregate(docs)
    lines = [",".join(CSV_COLUMNS)]
    for key in sorted(cells, key=CellKey.sort_key):
        stats = cells[key]
        base = _baseline(cells, key)
        if stats.failed:
            samples = "OOM"
            pct = ""
            sum_gb = paper_gb = ""
        else:
            samples = f"{stats.samples_per_s:.2f}"
            pct = _pct_str(stats.samples_per_s, base, "samples_per_s")
            sum_gb = f"{stats.sum_gb:.2f}"
            paper_gb = f"{stats.paper_gb:.2f}"
        lines.append(
            ",".join(
                [
                    key.backend,
                    key.regime,
                    str(key.consumers),
                    str(key.workers),
                    "on" if key.pinned else "off",
                    "on" if key.staged else "off",
                    samples,
                    pct,
                    sum_gb,
                    paper_gb,
                    str(stats.repetitions),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _grid_section(cells, knobs, metric_attr: str, minimize: bool) -> list[str]:
    keys = [k for k in cells if k.knobs == knobs]
    backends = sorted({k.backend for k in keys}, key=lambda b: BACKEND_ORDER.get(b, 99))
    columns = sorted(
        {k.column for k in keys},
        key=lambda c: (c[0], REGIME_ORDER.get(c[1], 99)),
    )
    if not backends or not columns:
        return []

    def cell_for(backend, column):
        return cells.get(
            CellKey(backend, column[1], column[0], *knobs)
        )

    # Best value per column and per consumer-count group (OOM cells excluded).
    pick = min if minimize else max
    best_in_column = {}
    for col in columns:
        values = [
            getattr(cell_for(b, col), metric_attr)
            for b in backends
            if cell_for(b, col) and not cell_for(b, col).failed
        ]
        if values:
            best_in_column[col] = pick(values)
    best_in_group = {}
    for consumers in {c[0] for c in columns}:
        values = [
            v for col, v in best_in_column.items() if col[0] == consumers
        ]
        if values:
            best_in_group[consumers] = pick(values)

    header = ["backend"] + [f"{c}x {r}" for c, r in columns]
    rows = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join(["---"] * len(header)) + "|",
    ]
    for backend in backends:
        row = [backend]
        for col in columns:
            stats = cell_for(backend, col)
            if stats is None:
                row.append("")
                continue
            if stats.failed:
                row.append("OOM")
                continue
            value = getattr(stats, metric_attr)
            text = f"{value:.2f}"
            pct = _pct_str(value, _baseline(cells, CellKey(backend, col[1], col[0], *knobs)), metric_attr)
            if pct:
                text += f" ({pct})"
            elif backend != IN_MEMORY:
                text += " (-)"
            if value == best_in_group.get(col[0]):
                text = f"***{text}***"
            elif value == best_in_column.get(col):
                text = f"**{text}**"
            row.append(text)
        rows.append("| " + " | ".join(row) + " |")
    return rows


def render_markdown(docs) -> str:
    cells = aggregate(docs)
    knob_combos = sorted({k.knobs for k in cells})
    out = []
    sections = [
        ("Samples/s", "samples_per_s", False),
        ("Memory GB (paper-method)", "paper_gb", True),
        ("Memory GB (summed)", "sum_gb", True),
    ]
    for title, attr, minimize in sections:
        out.append(f"## {title}")
        for knobs in knob_combos:
            workers, pinned, staged = knobs
            if len(knob_combos) > 1:
                out.append(
                    f"### workers={workers} pinned="
                    f"{'on' if pinned else 'off'} staged={'on' if staged else 'off'}"
                )
            out.extend(_grid_section(cells, knobs, attr, minimize))
            out.append("")
    return "\n".join(out).rstrip() + "\n"
