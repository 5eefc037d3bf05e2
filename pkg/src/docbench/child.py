"""Benchmark child process: one consumer of the processes regime.

Speaks a line protocol on stdio: reads one JSON payload line
({"consumer": int, "config": {...}, "files": {...}}), prints READY, waits
for GO, runs warm-up, prints WARM, waits for RUN, runs the timed steps and
prints exactly one JSON result line:

    {"consumer": int, "samples": int, "elapsed_s": float,
     "peak_rss_bytes": int}

The parent verified the artifacts, so stores open with verify=False; the
import chain here is stdlib + liblz4 only, keeping the per-consumer
footprint small. Peak RSS is the kernel's own lifetime figure
(getrusage), which includes the store-loading phase.
"""

from __future__ import annotations

import json
import os
import sys


def _apply_quota(quota_bytes: int) -> None:
    # RLIMIT_DATA covers brk + private anonymous mappings on modern Linux,
    # so oversized store loads fail as MemoryError inside this process.
    import resource

    try:
        resource.setrlimit(resource.RLIMIT_DATA, (quota_bytes, quota_bytes))
    except (ValueError, OSError):
        pass  # unsupported here; the parent watchdog still enforces the quota


def _run(payload: dict) -> int:
    from .harness import BenchConfig, load_sampler, open_backend, run_consumer
    from .metrics import self_peak_rss_bytes

    config = BenchConfig.from_dict(payload["config"])
    consumer_id = int(payload["consumer"])
    files = payload["files"]
    if config.memory_quota_bytes:
        _apply_quota(config.memory_quota_bytes)

    store = open_backend(config.backend, files, verify=False)
    sampler = load_sampler(config, store)
    sink: list | None = [] if config.stream_dir else None

    def warm_gate():
        print("READY", flush=True)
        if sys.stdin.readline().strip() != "GO":
            raise RuntimeError("protocol error: expected GO")

    def run_gate():
        print("WARM", flush=True)
        if sys.stdin.readline().strip() != "RUN":
            raise RuntimeError("protocol error: expected RUN")

    result = run_consumer(
        consumer_id,
        config,
        store,
        sampler,
        warm_gate=warm_gate,
        run_gate=run_gate,
        stream_sink=sink,
    )
    store.close()

    if sink is not None:
        os.makedirs(config.stream_dir, exist_ok=True)
        path = os.path.join(config.stream_dir, f"consumer_{consumer_id}.pairs")
        with open(path, "wb") as fh:
            for query_id, pos_id in sink:
                fh.write(query_id + b"\t" + pos_id + b"\n")

    result.peak_rss_bytes = self_peak_rss_bytes()
    print(result.wire_line(), flush=True)
    return 0


def main() -> int:
    line = sys.stdin.readline()
    if not line:
        print("no config payload on stdin", file=sys.stderr)
        return 2
    try:
        payload = json.loads(line)
    except ValueError as exc:
        print(f"bad config payload: {exc}", file=sys.stderr)
        return 2
    try:
        return _run(payload)
    except MemoryError:
        print("MemoryError: allocation failed under memory quota", file=sys.stderr)
        return 1
    except BaseException:
        import traceback

        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
