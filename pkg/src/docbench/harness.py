"""Training-loop emulation: parallel consumers sampling triples and
fetching documents under three parallelism regimes.

  global_lock_threads  one thread per consumer, ONE shared store handle,
                       every fetch+tokenize wrapped in one global lock
                       (models thread-parallel training under a runtime
                       global interpreter lock)
  threads              one thread per consumer, cloned handle each, no lock
  processes            one OS process per consumer, each opening its own
                       store; coordination over pipes, results as one JSON
                       line per child

Simulated compute is a sleep: a real accelerator step blocks the host
thread while releasing it for others, and sleeping reproduces that
CPU-availability profile. The lock wraps fetch+tokenize, never the sleep.

Per-consumer sample streams are seeded seed XOR consumer_id, and each
batch's generator is derived from (consumer_seed, batch_index), so the
fetched (query, positive) stream is identical across regimes and worker
counts.
"""

from __future__ import annotations

import json
import os
import shutil
import subprocess
import sys
import threading
import time
from collections import deque
from dataclasses import asdict, dataclass
from queue import Empty, Full, Queue

from .corpus import load_queries, read_triples
from .errors import (
    ChildFailedError,
    CorruptDataError,
    DocNotFoundError,
    SingleDocCorpusError,
    StaleIndexError,
    StagingFailedError,
    UsageError,
)
from .fnv import fnv1a_file
from .metrics import (
    BenchResult,
    ConsumerResult,
    MemorySampler,
    host_info,
    throughput,
)
from .rng import MASK64, Xoshiro256StarStar, derive_seed
from .store import (
    BACKENDS,
    IN_MEMORY,
    INDEXED,
    open_compressed,
    open_in_memory,
    open_indexed,
)

GLOBAL_LOCK_THREADS = "global_lock_threads"
THREADS = "threads"
PROCESSES = "processes"
REGIMES = (GLOBAL_LOCK_THREADS, THREADS, PROCESSES)

MAX_CONSUMERS = 64
MAX_WORKERS = 16

_POLL_S = 0.1


@dataclass
class BenchConfig:
    corpus_path: str
    queries_path: str
    triples_path: str
    backend: str = IN_MEMORY
    regime: str = THREADS
    consumers: int = 1
    batch_size: int = 16
    steps: int = 1000
    compute_ms: float = 0.0
    workers: int = 0
    pinned: bool = False
    stage_dir: str | None = None
    seed: int = 0
    max_text_tokens: int = 256
    memory_quota_bytes: int | None = None
    stream_dir: str | None = None  # debug: dump per-consumer (query, pos) streams

    def validate(self) -> None:
        if self.backend not in BACKENDS:
            raise UsageError(f"unknown backend {self.backend!r}")
        if self.regime not in REGIMES:
            raise UsageError(f"unknown regime {self.regime!r}")
        if not 1 <= self.consumers <= MAX_CONSUMERS:
            raise UsageError(f"consumers must be 1..{MAX_CONSUMERS}")
        if not 0 <= self.workers <= MAX_WORKERS:
            raise UsageError(f"workers must be 0..{MAX_WORKERS}")
        if self.batch_size < 1:
            raise UsageError("batch_size must be >= 1")
        if self.steps < 0:
            raise UsageError("steps must be >= 0")
        if self.compute_ms < 0:
            raise UsageError("compute_ms must be >= 0")
        if self.max_text_tokens < 1:
            raise UsageError("max_text_tokens must be >= 1")
        if self.memory_quota_bytes is not None and self.memory_quota_bytes < 1:
            raise UsageError("memory_quota_bytes must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "BenchConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}
        return cls(**{k: v for k, v in doc.items() if k in known})


def warmup_steps(total_steps: int) -> int:
    """First 5% of steps run untimed to shed cold-cache variance."""
    return total_steps // 20


def queue_capacity(workers: int) -> int:
    return max(2, 2 * workers)


def pool_size(workers: int) -> int:
    """Buffer pool sizing: prefetch pipeline capacity + 1."""
    return (queue_capacity(workers) + 1) if workers else 1


class InstrumentedLock:
    """Mutex that accounts exactly how long it was held."""

    def __init__(self):
        self._lock = threading.Lock()
        self._t0 = 0.0
        self.total_held_s = 0.0
        self.acquisitions = 0

    def acquire(self):
        self._lock.acquire()
        self._t0 = time.perf_counter()
        return True

    def release(self):
        self.total_held_s += time.perf_counter() - self._t0
        self.acquisitions += 1
        self._lock.release()

    __enter__ = acquire

    def __exit__(self, *exc):
        self.release()
        return False


class Batch:
    """One training batch: token triples plus the sampled id pairs."""

    __slots__ = ("rows", "pairs")

    def __init__(self, batch_size: int):
        self.rows: list = [None] * batch_size
        self.pairs: list = [None] * batch_size


class BufferPool:
    """Fixed set of reusable batch buffers (the pinned-memory analog).

    Buffers are created lazily up to `size`; after that get() blocks until
    one is returned. `created` is the instrumented allocation counter.
    """

    def __init__(self, size: int, batch_size: int):
        self.size = size
        self.batch_size = batch_size
        self.created = 0
        self._free: deque = deque()
        self._cv = threading.Condition()

    def get(self, stop: threading.Event | None = None) -> Batch:
        with self._cv:
            while True:
                if self._free:
                    return self._free.popleft()
                if self.created < self.size:
                    self.created += 1
                    return Batch(self.batch_size)
                if stop is not None and stop.is_set():
                    raise RuntimeError("pipeline stopped")
                self._cv.wait(_POLL_S)

    def put(self, batch: Batch) -> None:
        with self._cv:
            self._free.append(batch)
            self._cv.notify()


class PrefetchQueue:
    """Bounded batch queue between prefetch workers and one consumer."""

    def __init__(self, workers: int):
        self.capacity = queue_capacity(workers)
        self._q: Queue = Queue(self.capacity)

    def put(self, item, stop: threading.Event) -> None:
        while True:
            try:
                self._q.put(item, timeout=_POLL_S)
                return
            except Full:
                if stop.is_set():
                    raise RuntimeError("pipeline stopped") from None

    def get(self, stop: threading.Event):
        while True:
            try:
                return self._q.get(timeout=_POLL_S)
            except Empty:
                if stop.is_set():
                    raise RuntimeError("pipeline stopped") from None

    def qsize(self) -> int:
        return self._q.qsize()


def sample_triple(rng: Xoshiro256StarStar, triples, doc_ids):
    """Draw (query_id, pos_id, neg_id): triple uniform over the triples
    list, negative uniform over the corpus, re-drawn while it collides
    with the positive."""
    if not triples:
        raise UsageError("no triples to sample from")
    if not doc_ids:
        raise UsageError("no document ids to sample negatives from")
    triple = triples[rng.below(len(triples))]
    pos = triple.positive_doc_id
    if len(doc_ids) == 1 and doc_ids[0] == pos:
        raise SingleDocCorpusError(
            "cannot sample a negative: corpus has a single document and "
            "it is the positive"
        )
    neg = doc_ids[rng.below(len(doc_ids))]
    while neg == pos:
        neg = doc_ids[rng.below(len(doc_ids))]
    return triple.query_id, pos, neg


class BatchSampler:
    """Immutable per-run sampling context shared by all consumers."""

    def __init__(self, triples, doc_ids, queries):
        self.triples = triples
        self.doc_ids = doc_ids
        self.queries = queries

    def validate(self) -> None:
        doc_set = set(self.doc_ids)
        for t in self.triples:
            if t.query_id not in self.queries:
                raise DocNotFoundError(t.query_id)
            if t.positive_doc_id not in doc_set:
                raise DocNotFoundError(t.positive_doc_id)


def _tokens(text: bytes, max_tokens: int) -> list:
    # maxsplit stops the scan once enough tokens exist.
    return text.split(None, max_tokens)[:max_tokens]


def assemble_batch(store, sampler: BatchSampler, config: BenchConfig,
                   rng: Xoshiro256StarStar, into: Batch | None = None) -> Batch:
    """Fetch and tokenize one batch of (query, positive, negative) triples."""
    batch = into if into is not None else Batch(config.batch_size)
    max_tokens = config.max_text_tokens
    rows = batch.rows
    pairs = batch.pairs
    for i in range(config.batch_size):
        query_id, pos_id, neg_id = sample_triple(rng, sampler.triples, sampler.doc_ids)
        try:
            query_text = sampler.queries[query_id]
        except KeyError:
            raise DocNotFoundError(query_id) from None
        pos_text = store.get(pos_id)
        neg_text = store.get(neg_id)
        rows[i] = (
            _tokens(query_text, max_tokens),
            _tokens(pos_text, max_tokens),
            _tokens(neg_text, max_tokens),
        )
        pairs[i] = (query_id, pos_id)
    return batch


class _Prefetcher:
    """Worker threads filling a bounded queue ahead of the consumer.

    Worker w builds batches w, w+W, 2W, ... so the batch->rng mapping is
    fixed regardless of scheduling; the queue preserves each worker's FIFO
    order.
    """

    def __init__(self, make_batch, total_batches: int, workers: int):
        self.queue = PrefetchQueue(workers)
        self._stop = threading.Event()
        self._threads = [
            threading.Thread(
                target=self._work,
                args=(make_batch, w, total_batches, workers),
                daemon=True,
            )
            for w in range(workers)
        ]

    def start(self):
        for t in self._threads:
            t.start()
        return self

    def _work(self, make_batch, worker_id, total, stride):
        try:
            for idx in range(worker_id, total, stride):
                if self._stop.is_set():
                    return
                batch = make_batch(idx, self._stop)
                self.queue.put(batch, self._stop)
        except RuntimeError:
            pass  # pipeline stopped under us
        except BaseException as exc:  # propagate real failures to the consumer
            try:
                self.queue.put(("__error__", exc), self._stop)
            except RuntimeError:
                pass

    def next_batch(self) -> Batch:
        item = self.queue.get(self._stop)
        if isinstance(item, tuple) and len(item) == 2 and item[0] == "__error__":
            raise item[1]
        return item

    def stop(self):
        self._stop.set()
        for t in self._threads:
            t.join(timeout=5.0)


def run_consumer(
    consumer_id: int,
    config: BenchConfig,
    store,
    sampler: BatchSampler,
    shared_lock: InstrumentedLock | None = None,
    warm_gate=None,
    run_gate=None,
    stream_sink: list | None = None,
) -> ConsumerResult:
    """Execute config.steps batch iterations for one consumer.

    Per step: [lock? -> assemble_batch -> unlock] -> sleep(compute_ms).
    The first 5% of steps are warm-up; samples/elapsed_s cover only the
    timed remainder. warm_gate fires before warm-up and run_gate between
    warm-up and the timed phase so parallel consumers enter each phase
    together.
    """
    total = config.steps
    warm = warmup_steps(total)
    consumer_seed = (config.seed ^ consumer_id) & MASK64
    compute_s = config.compute_ms / 1000.0
    pool = (
        BufferPool(pool_size(config.workers), config.batch_size)
        if config.pinned
        else None
    )

    def make_batch(batch_idx: int, stop: threading.Event | None = None) -> Batch:
        rng = Xoshiro256StarStar(derive_seed(consumer_seed, batch_idx))
        buf = pool.get(stop) if pool is not None else None
        if shared_lock is not None:
            with shared_lock:
                return assemble_batch(store, sampler, config, rng, into=buf)
        return assemble_batch(store, sampler, config, rng, into=buf)

    prefetcher = None
    if config.workers > 0:
        prefetcher = _Prefetcher(make_batch, total, config.workers).start()
        next_batch = prefetcher.next_batch
    else:
        counter = iter(range(total))
        next_batch = lambda: make_batch(next(counter))  # noqa: E731

    fetch_s = 0.0
    try:
        if warm_gate is not None:
            warm_gate()
        for _ in range(warm):
            batch = next_batch()
            if stream_sink is not None:
                stream_sink.extend(batch.pairs)
            if compute_s:
                time.sleep(compute_s)
            if pool is not None:
                pool.put(batch)
        if run_gate is not None:
            run_gate()
        t0 = time.perf_counter()
        for _ in range(warm, total):
            f0 = time.perf_counter()
            batch = next_batch()
            fetch_s += time.perf_counter() - f0
            if stream_sink is not None:
                stream_sink.extend(batch.pairs)
            if compute_s:
                time.sleep(compute_s)
            if pool is not None:
                pool.put(batch)
        elapsed = time.perf_counter() - t0
    finally:
        if prefetcher is not None:
            prefetcher.stop()

    return ConsumerResult(
        consumer=consumer_id,
        samples=(total - warm) * config.batch_size,
        elapsed_s=elapsed,
        fetch_s=fetch_s,
    )


@dataclass
class StageResult:
    paths: list
    copied: int


def stage_files(paths, stage_dir) -> StageResult:
    """Copy files into stage_dir (byte-identical); unchanged files are not
    rewritten (size + mtime precheck, then checksum comparison)."""
    if not os.path.isdir(stage_dir):
        raise StagingFailedError(f"stage dir {stage_dir} does not exist")
    names = [os.path.basename(str(p)) for p in paths]
    if len(set(names)) != len(names):
        raise StagingFailedError("staged files must have unique basenames")
    staged = []
    copied = 0
    for src in map(str, paths):
        dest = os.path.join(str(stage_dir), os.path.basename(src))
        unchanged = (
            os.path.exists(dest)
            and os.path.getsize(dest) == os.path.getsize(src)
            and os.path.getmtime(dest) >= os.path.getmtime(src)
            and fnv1a_file(dest) == fnv1a_file(src)
        )
        if not unchanged:
            shutil.copyfile(src, dest)
            copied += 1
        staged.append(dest)
    return StageResult(paths=staged, copied=copied)


def backend_files(config: BenchConfig) -> dict:
    """The files the chosen backend opens, keyed by role."""
    from .indexer import (
        default_compressed_data_path,
        default_compressed_index_path,
        default_offset_index_path,
    )

    corpus = str(config.corpus_path)
    if config.backend == IN_MEMORY:
        return {"corpus": corpus}
    if config.backend == INDEXED:
        return {"corpus": corpus, "index": default_offset_index_path(corpus)}
    data = default_compressed_data_path(corpus)
    return {"data": data, "index": default_compressed_index_path(data)}


def open_backend(backend: str, files: dict, *, verify: bool):
    if backend == IN_MEMORY:
        return open_in_memory(files["corpus"])
    if backend == INDEXED:
        return open_indexed(files["corpus"], files["index"], verify=verify)
    return open_compressed(files["data"], files["index"], verify=verify)


def _preverify(config: BenchConfig, files: dict) -> None:
    """Verify the index/source pairing once up front; consumers then open
    with verify=False instead of re-hashing the source per handle."""
    from .indexer import verify_index

    if config.backend == IN_MEMORY:
        return
    source = files["corpus"] if config.backend == INDEXED else files["data"]
    result = verify_index(files["index"], source, spot_checks=4)
    if result.status == "stale":
        raise StaleIndexError(result.detail or "stale index")
    if result.status == "corrupt":
        raise CorruptDataError(result.detail or "corrupt index")


def _write_streams(config: BenchConfig, sinks: dict) -> None:
    os.makedirs(config.stream_dir, exist_ok=True)
    for consumer_id, pairs in sinks.items():
        path = os.path.join(config.stream_dir, f"consumer_{consumer_id}.pairs")
        with open(path, "wb") as fh:
            for query_id, pos_id in pairs:
                fh.write(query_id + b"\t" + pos_id + b"\n")


def _samples_per_s(total_samples: int, wall: float) -> float:
    if total_samples == 0:
        return 0.0
    return throughput(total_samples, wall)


def load_sampler(config: BenchConfig, store) -> BatchSampler:
    """Queries, triples and the sorted doc-id list for one run."""
    queries = load_queries(config.queries_path)
    triples = read_triples(config.triples_path)
    doc_ids = sorted(store.ids())
    sampler = BatchSampler(triples, doc_ids, queries)
    sampler.validate()
    return sampler


def _run_threaded(config: BenchConfig, files: dict) -> BenchResult:
    mem = MemorySampler().start()
    store = open_backend(config.backend, files, verify=False)
    handles = [store]
    lock = None
    try:
        sampler = load_sampler(config, store)
        k = config.consumers
        if config.regime == GLOBAL_LOCK_THREADS:
            lock = InstrumentedLock()
            handles = [store] * k
        else:
            handles = [store] + [store.clone() for _ in range(k - 1)]
        warm_barrier = threading.Barrier(k)
        run_barrier = threading.Barrier(k)
        results: list = [None] * k
        failures: list = []
        sinks = {i: [] for i in range(k)} if config.stream_dir else {}

        def target(i: int) -> None:
            try:
                results[i] = run_consumer(
                    i,
                    config,
                    handles[i],
                    sampler,
                    shared_lock=lock,
                    warm_gate=warm_barrier.wait,
                    run_gate=run_barrier.wait,
                    stream_sink=sinks.get(i),
                )
            except threading.BrokenBarrierError:
                pass
            except BaseException as exc:
                failures.append((i, exc))
                warm_barrier.abort()
                run_barrier.abort()

        threads = [
            threading.Thread(target=target, args=(i,), daemon=True)
            for i in range(k)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if failures:
            raise failures[0][1]
        if config.stream_dir:
            _write_streams(config, sinks)
    finally:
        peak = mem.stop()
        for handle in {id(h): h for h in handles}.values():
            try:
                handle.close()
            except Exception:
                pass

    for r in results:
        r.peak_rss_bytes = peak  # consumers share this one process
    total_samples = sum(r.samples for r in results)
    wall = max(r.elapsed_s for r in results)
    fetch_total = sum(r.fetch_s or 0.0 for r in results)
    return BenchResult(
        samples_per_s=_samples_per_s(total_samples, wall),
        per_consumer=results,
        peak_rss_sum_bytes=peak,
        peak_rss_paper_bytes=peak,
        config=config,
        host_info=host_info(),
        lock_held_s=lock.total_held_s if lock else 0.0,
        fetch_fraction=(fetch_total / (config.consumers * wall)) if wall > 0 else None,
        wall_s=wall,
    )


class _Child:
    """Parent-side handle for one benchmark child process."""

    def __init__(self, consumer_id: int, payload: dict):
        self.consumer_id = consumer_id
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "docbench.child"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        self._lines: Queue = Queue()
        self._stderr_chunks: list = []
        self._stdout_thread = threading.Thread(target=self._pump_stdout, daemon=True)
        self._stderr_thread = threading.Thread(target=self._pump_stderr, daemon=True)
        self._stdout_thread.start()
        self._stderr_thread.start()
        self.proc.stdin.write(json.dumps(payload) + "\n")
        self.proc.stdin.flush()
        self.sampler = MemorySampler(self.proc.pid).start()
        self.result_line: str | None = None

    def _pump_stdout(self):
        for line in self.proc.stdout:
            self._lines.put(line.rstrip("\n"))
        self._lines.put(None)

    def _pump_stderr(self):
        for line in self.proc.stderr:
            self._stderr_chunks.append(line)

    def read_line(self, deadline: float) -> str:
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise ChildFailedError(self.consumer_id, "timed out")
            try:
                line = self._lines.get(timeout=min(remaining, 0.5))
            except Empty:
                if self.proc.poll() is not None and self._lines.empty():
                    raise ChildFailedError(
                        self.consumer_id,
                        f"exited with code {self.proc.returncode}: "
                        f"{self.stderr_tail()}",
                    ) from None
                continue
            if line is None:
                raise ChildFailedError(
                    self.consumer_id,
                    f"stdout closed (exit {self.proc.poll()}): {self.stderr_tail()}",
                )
            return line

    def expect(self, token: str, deadline: float) -> None:
        line = self.read_line(deadline)
        if line != token:
            raise ChildFailedError(
                self.consumer_id, f"expected {token!r}, got {line!r}"
            )

    def send(self, token: str) -> None:
        try:
            self.proc.stdin.write(token + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, ValueError):
            raise ChildFailedError(
                self.consumer_id, f"stdin broken: {self.stderr_tail()}"
            ) from None

    def stderr_tail(self, limit: int = 800) -> str:
        return "".join(self._stderr_chunks)[-limit:].strip() or "<no stderr>"

    def kill(self) -> None:
        if self.proc.poll() is None:
            self.proc.kill()

    def finish(self) -> None:
        self.sampler.stop()
        self._stdout_thread.join(timeout=2)
        self._stderr_thread.join(timeout=2)
        for stream in (self.proc.stdin, self.proc.stdout, self.proc.stderr):
            try:
                stream.close()
            except Exception:
                pass


class _QuotaWatchdog:
    """Kills the child group once their summed RSS exceeds the quota.

    Realizes the out-of-memory experiment without exhausting the host: the
    quota stands in for the machine's RAM, shared by all consumers.
    """

    def __init__(self, children, quota_bytes: int):
        import psutil

        self._psutil = psutil
        self._children = children
        self._quota = quota_bytes
        self._stop = threading.Event()
        self.fired = False
        self.observed = 0
        self._thread = threading.Thread(target=self._run, daemon=True)

    def start(self):
        self._thread.start()
        return self

    def _run(self):
        procs = []
        for child in self._children:
            try:
                procs.append(self._psutil.Process(child.proc.pid))
            except self._psutil.Error:
                pass
        while not self._stop.is_set():
            total = 0
            for proc in procs:
                try:
                    total += proc.memory_info().rss
                except self._psutil.Error:
                    pass
            if total > self.observed:
                self.observed = total
            if total > self._quota:
                self.fired = True
                for child in self._children:
                    child.kill()
                return
            self._stop.wait(_POLL_S)

    def stop(self):
        self._stop.set()
        self._thread.join(timeout=2)


def _run_processes(config: BenchConfig, files: dict) -> BenchResult:
    parent_mem = MemorySampler().start()
    child_config = config.to_dict()
    child_config["stage_dir"] = None  # parent already staged; children reuse paths
    deadline = time.monotonic() + max(
        300.0, config.steps * (config.compute_ms / 1000.0) * 4 + 120.0
    )

    children: list = []
    watchdog = None
    failure: ChildFailedError | None = None
    results: list = []
    try:
        for i in range(config.consumers):
            payload = {"consumer": i, "config": child_config, "files": files}
            children.append(_Child(i, payload))
        if config.memory_quota_bytes:
            watchdog = _QuotaWatchdog(children, config.memory_quota_bytes).start()
        for child in children:
            child.expect("READY", deadline)
        for child in children:
            child.send("GO")
        for child in children:
            child.expect("WARM", deadline)
        for child in children:
            child.send("RUN")
        for child in children:
            child.result_line = child.read_line(deadline)
        for child in children:
            try:
                rc = child.proc.wait(timeout=60)
            except subprocess.TimeoutExpired:
                raise ChildFailedError(child.consumer_id, "did not exit") from None
            if rc != 0:
                raise ChildFailedError(
                    child.consumer_id, f"exit code {rc}: {child.stderr_tail()}"
                )
        for child in children:
            try:
                results.append(ConsumerResult.from_wire_line(child.result_line))
            except (ValueError, KeyError) as exc:
                raise ChildFailedError(
                    child.consumer_id, f"bad result line {child.result_line!r}: {exc}"
                ) from None
    except ChildFailedError as exc:
        failure = exc
        for child in children:
            child.kill()
    finally:
        if watchdog is not None:
            watchdog.stop()
        for child in children:
            child.kill()
            try:
                child.proc.wait(timeout=10)
            except Exception:
                pass
            child.finish()
        parent_peak = parent_mem.stop()

    if watchdog is not None and watchdog.fired:
        raise ChildFailedError(
            failure.consumer_id if failure else -1,
            f"memory quota exceeded: observed {watchdog.observed} bytes "
            f"> quota {config.memory_quota_bytes}",
        )
    if failure is not None:
        raise failure

    for child, result in zip(children, results):
        result.peak_rss_bytes = max(result.peak_rss_bytes, child.sampler.peak)
    total_samples = sum(r.samples for r in results)
    wall = max(r.elapsed_s for r in results)
    peak_sum = sum(r.peak_rss_bytes for r in results) + parent_peak
    return BenchResult(
        samples_per_s=_samples_per_s(total_samples, wall),
        per_consumer=results,
        peak_rss_sum_bytes=peak_sum,
        peak_rss_paper_bytes=results[0].peak_rss_bytes * config.consumers,
        config=config,
        host_info=host_info(),
        lock_held_s=0.0,
        fetch_fraction=None,
        wall_s=wall,
    )


def run_bench(config: BenchConfig) -> BenchResult:
    """Stage (optional), verify artifacts, run the configured regime."""
    from .fnv import warm_jit

    config.validate()
    warm_jit()  # uniform parent footprint across backends
    files = backend_files(config)
    for role, path in files.items():
        if not os.path.exists(path):
            raise UsageError(f"{role} file missing: {path} (build artifacts first)")
    if config.stage_dir:
        staged = stage_files(list(files.values()), config.stage_dir)
        files = dict(zip(files.keys(), staged.paths))
    _preverify(config, files)
    if config.regime == PROCESSES:
        return _run_processes(config, files)
    return _run_threaded(config, files)
