"""Throughput and memory accounting plus benchmark result persistence.

Two memory totals are reported side by side: "summed" adds every
participating process's peak RSS (honest, but double-counts shared pages),
while "paper-method" multiplies one representative process's peak by the
consumer count, which is how multi-process runs are usually reported when
only one rank is instrumented. Peaks are whatever the 100 ms sampler (or
the child's own accounting) observed, so short spikes may be missed.

psutil is imported lazily so benchmark child processes, which report their
own peak via getrusage, never pay for it.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import platform
import socket
import sys
import threading
from dataclasses import asdict, dataclass, field

from .errors import ZeroBaselineError, ZeroDurationError

SAMPLE_PERIOD_S = 0.1


def throughput(total_samples: int, wall_s: float) -> float:
    """Samples per second over the parallel section."""
    if wall_s <= 0:
        raise ZeroDurationError(f"wall clock must be positive, got {wall_s}")
    return total_samples / wall_s


def paper_style_memory(main_peak_bytes: int, consumers: int) -> int:
    """Scale one process's peak by the consumer count (multi-GPU convention)."""
    if consumers < 1:
        raise ValueError("consumers must be >= 1")
    return main_peak_bytes * consumers


def percent_diff(value: float, baseline: float) -> float:
    """Signed percent difference of value vs baseline."""
    if baseline == 0:
        raise ZeroBaselineError("baseline must be nonzero")
    return 100.0 * (value - baseline) / baseline


def format_percent(pct: float) -> str:
    return f"{pct:+.2f}%"


class MemorySampler:
    """Polls a process's RSS every 100 ms on a background thread.

    pid=None samples the current process. If the target disappears
    mid-run the peak so far is kept and process_gone is flagged.
    """

    def __init__(self, pid: int | None = None, period_s: float = SAMPLE_PERIOD_S):
        import psutil

        self._psutil = psutil
        self._period = period_s
        self._proc = psutil.Process(pid) if pid is not None else psutil.Process()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self.peak = 0
        self.process_gone = False

    def _sample_once(self) -> None:
        try:
            rss = self._proc.memory_info().rss
        except self._psutil.Error:
            self.process_gone = True
            return
        if rss > self.peak:
            self.peak = rss

    def _run(self) -> None:
        while not self._stop.is_set():
            self._sample_once()
            if self.process_gone:
                return
            self._stop.wait(self._period)

    def start(self) -> "MemorySampler":
        self._sample_once()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> int:
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
        self._sample_once()
        return self.peak


def sample_memory_loop(pid: int | None = None, period_s: float = SAMPLE_PERIOD_S):
    """Convenience: start a sampler; call .stop() for the peak in bytes."""
    return MemorySampler(pid, period_s).start()


def self_peak_rss_bytes() -> int:
    """Kernel-maintained peak RSS of this process.

    Prefers VmHWM from /proc/self/status: unlike ru_maxrss it is reset on
    exec, so a freshly spawned child is not credited with the high-water
    mark its parent had at fork time.
    """
    try:
        with open("/proc/self/status") as fh:
            for line in fh:
                if line.startswith("VmHWM:"):
                    return int(line.split()[1]) * 1024
    except OSError:
        pass
    import resource

    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    if sys.platform == "darwin":
        return peak
    return peak * 1024


@dataclass
class ConsumerResult:
    consumer: int
    samples: int
    elapsed_s: float
    peak_rss_bytes: int = 0
    fetch_s: float | None = None

    def wire_line(self) -> str:
        """The child-process result line: exactly these four fields."""
        return json.dumps(
            {
                "consumer": self.consumer,
                "samples": self.samples,
                "elapsed_s": self.elapsed_s,
                "peak_rss_bytes": self.peak_rss_bytes,
            }
        )

    @classmethod
    def from_wire_line(cls, line: str) -> "ConsumerResult":
        doc = json.loads(line)
        return cls(
            consumer=int(doc["consumer"]),
            samples=int(doc["samples"]),
            elapsed_s=float(doc["elapsed_s"]),
            peak_rss_bytes=int(doc["peak_rss_bytes"]),
        )


@dataclass
class BenchResult:
    samples_per_s: float
    per_consumer: list[ConsumerResult]
    peak_rss_sum_bytes: int
    peak_rss_paper_bytes: int
    config: "object"
    host_info: dict = field(default_factory=dict)
    lock_held_s: float = 0.0
    fetch_fraction: float | None = None
    wall_s: float = 0.0

    def to_doc(self) -> dict:
        return {
            "schema_version": 1,
            "failed": False,
            "error": None,
            "config": self.config.to_dict(),
            "samples_per_s": self.samples_per_s,
            "wall_s": self.wall_s,
            "per_consumer": [asdict(c) for c in self.per_consumer],
            "peak_rss_sum_bytes": self.peak_rss_sum_bytes,
            "peak_rss_paper_bytes": self.peak_rss_paper_bytes,
            "lock_held_s": self.lock_held_s,
            "fetch_fraction": self.fetch_fraction,
            "host_info": self.host_info,
        }


def failed_doc(config, error: str) -> dict:
    """Result document for a run that died (the report renders these as OOM)."""
    return {
        "schema_version": 1,
        "failed": True,
        "error": error,
        "config": config.to_dict(),
        "samples_per_s": None,
        "wall_s": None,
        "per_consumer": [],
        "peak_rss_sum_bytes": None,
        "peak_rss_paper_bytes": None,
        "lock_held_s": None,
        "fetch_fraction": None,
        "host_info": host_info(),
    }


RESULT_SCHEMA = {
    "type": "object",
    "required": [
        "schema_version",
        "failed",
        "error",
        "config",
        "samples_per_s",
        "per_consumer",
        "peak_rss_sum_bytes",
        "peak_rss_paper_bytes",
        "host_info",
    ],
    "properties": {
        "schema_version": {"const": 1},
        "failed": {"type": "boolean"},
        "error": {"type": ["string", "null"]},
        "config": {
            "type": "object",
            "required": ["backend", "regime", "consumers", "batch_size", "steps"],
            "properties": {
                "backend": {"enum": ["in_memory", "indexed", "compressed"]},
                "regime": {
                    "enum": ["global_lock_threads", "threads", "processes"]
                },
                "consumers": {"type": "integer", "minimum": 1, "maximum": 64},
                "batch_size": {"type": "integer", "minimum": 1},
                "steps": {"type": "integer", "minimum": 0},
                "workers": {"type": "integer", "minimum": 0, "maximum": 16},
                "pinned": {"type": "boolean"},
                "seed": {"type": "integer"},
            },
        },
        "samples_per_s": {"type": ["number", "null"]},
        "wall_s": {"type": ["number", "null"]},
        "per_consumer": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["consumer", "samples", "elapsed_s", "peak_rss_bytes"],
                "properties": {
                    "consumer": {"type": "integer"},
                    "samples": {"type": "integer"},
                    "elapsed_s": {"type": "number"},
                    "peak_rss_bytes": {"type": "integer"},
                },
            },
        },
        "peak_rss_sum_bytes": {"type": ["integer", "null"]},
        "peak_rss_paper_bytes": {"type": ["integer", "null"]},
        "lock_held_s": {"type": ["number", "null"]},
        "fetch_fraction": {"type": ["number", "null"]},
        "host_info": {"type": "object"},
    },
}


def host_info() -> dict:
    return {
        "hostname": socket.gethostname(),
        "platform": platform.platform(),
        "python": platform.python_version(),
        "cpus": os.cpu_count(),
    }


def result_filename(backend: str, regime: str, consumers: int, now=None) -> str:
    if now is None:
        now = _dt.datetime.now(_dt.timezone.utc)
    stamp = now.strftime("%Y%m%dT%H%M%S%f")
    return f"{stamp}_{backend}_{regime}_{consumers}.json"


def save_result_doc(results_dir, doc: dict) -> str:
    os.makedirs(results_dir, exist_ok=True)
    cfg = doc["config"]
    name = result_filename(cfg["backend"], cfg["regime"], cfg["consumers"])
    path = os.path.join(results_dir, name)
    # Paranoia against same-microsecond collisions in tight loops.
    n = 0
    while os.path.exists(path):
        n += 1
        path = os.path.join(results_dir, name[:-5] + f"_{n}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return path


def load_result_docs(results_dir) -> list[dict]:
    docs = []
    if not os.path.isdir(results_dir):
        return docs
    for name in sorted(os.listdir(results_dir)):
        if not name.endswith(".json"):
            continue
        with open(os.path.join(results_dir, name), "r", encoding="utf-8") as fh:
            docs.append(json.load(fh))
    return docs
