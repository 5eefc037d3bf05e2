"""Command-line surface: gen, build, get, bench, sweep, report.

Exit codes are a stable contract: 0 success, 2 document/id not found,
3 stale or corrupt index, 64 usage error, 70 child/internal benchmark
failure, 1 other data errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import indexer, metrics, report
from .corpus import manifest_path, write_manifest
from .errors import (
    BadMagicError,
    ChildFailedError,
    CorruptDataError,
    DocBenchError,
    DocNotFoundError,
    IndexFormatError,
    StaleIndexError,
    UsageError,
)
from .harness import REGIMES, BenchConfig, run_bench
from .store import BACKENDS, open_store

EXIT_OK = 0
EXIT_NOT_FOUND = 2
EXIT_STALE = 3
EXIT_USAGE = 64
EXIT_CHILD = 70


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _aux_paths(corpus_path: str) -> tuple[str, str]:
    base = corpus_path[:-4] if corpus_path.endswith(".tsv") else corpus_path
    return base + ".queries.tsv", base + ".triples.tsv"


def _resolve_results_dir(flag_value: str | None) -> str:
    return os.environ.get("DOCSTORE_RESULTS") or flag_value or "results"


def cmd_gen(args) -> int:
    from . import synth  # numpy-backed; only the gen path pays for it

    spec = synth.SynthSpec(
        n_docs=args.docs,
        mean_len=args.mean_len,
        len_dispersion=args.dispersion,
        vocab_size=args.vocab,
        seed=args.seed,
        zipf_exponent=args.zipf,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    corpus_path = os.path.join(args.out_dir, args.name + ".tsv")
    queries_path, triples_path = _aux_paths(corpus_path)
    n_queries = args.queries
    if n_queries is None:
        n_queries = synth.default_query_count(args.docs)

    manifest = synth.generate_corpus(spec, corpus_path)
    write_manifest(manifest, manifest_path(corpus_path))
    synth.generate_queries(spec, queries_path, n_queries)
    synth.generate_triples(spec, triples_path, n_queries)

    print(f"corpus: {corpus_path}")
    print(f"n_docs={manifest.n_docs}")
    print(f"total_bytes={manifest.total_bytes}")
    print(f"checksum={manifest.checksum}")
    print(f"queries: {queries_path} ({n_queries})")
    print(f"triples: {triples_path} ({n_queries})")
    return EXIT_OK


def cmd_build(args) -> int:
    if args.backend == "indexed":
        stats = indexer.build_offset_index(args.corpus, args.index)
        index_path = args.index or indexer.default_offset_index_path(args.corpus)
        print(f"index: {index_path}")
        print(f"entries={stats.entries} index_bytes={stats.index_bytes}")
    else:
        stats = indexer.build_compressed_store(args.corpus, args.data, args.index)
        data_path = args.data or indexer.default_compressed_data_path(args.corpus)
        print(f"data: {data_path}")
        print(
            f"entries={stats.entries} data_bytes={stats.data_bytes} "
            f"ratio={stats.ratio:.3f}"
        )
    return EXIT_OK


def cmd_get(args) -> int:
    store = open_store(args.backend, args.corpus)
    try:
        text = store.get(args.id.encode("utf-8"))
    finally:
        store.close()
    sys.stdout.write(text.decode("utf-8") + "\n")
    return EXIT_OK


def _bench_config(args) -> BenchConfig:
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    queries_path, triples_path = _aux_paths(args.corpus)
    return BenchConfig(
        corpus_path=args.corpus,
        queries_path=args.queries or queries_path,
        triples_path=args.triples or triples_path,
        backend=args.backend,
        regime=args.regime,
        consumers=args.consumers,
        batch_size=args.batch_size,
        steps=args.steps,
        compute_ms=args.compute_ms,
        workers=args.workers,
        pinned=args.pinned,
        stage_dir=args.stage_dir,
        seed=args.seed,
        max_text_tokens=args.max_text_tokens,
        memory_quota_bytes=(
            args.memory_quota_mb * (1 << 20) if args.memory_quota_mb else None
        ),
        stream_dir=args.stream_dir,
    )


def _summary_line(doc: dict) -> str:
    cfg = doc["config"]
    head = (
        f"{cfg['backend']} {cfg['regime']} consumers={cfg['consumers']} "
        f"workers={cfg['workers']} pinned={'on' if cfg['pinned'] else 'off'}"
    )
    if doc["failed"]:
        return f"{head} -> OOM ({doc['error']})"
    gb = doc["peak_rss_sum_bytes"] / float(1 << 30)
    return f"{head} -> {doc['samples_per_s']:.2f} samples/s, peak_sum={gb:.2f} GB"


def cmd_bench(args) -> int:
    config = _bench_config(args)
    results_dir = _resolve_results_dir(args.results_dir)
    try:
        result = run_bench(config)
    except ChildFailedError as exc:
        doc = metrics.failed_doc(config, str(exc))
        path = metrics.save_result_doc(results_dir, doc)
        print(_summary_line(doc))
        print(f"result: {path}", file=sys.stderr)
        raise
    doc = result.to_doc()
    path = metrics.save_result_doc(results_dir, doc)
    print(_summary_line(doc))
    print(f"result: {path}")
    return EXIT_OK


def _parse_list(text: str, kind, valid=None, flag: str = "") -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        value = kind(part)
        if valid is not None and value not in valid:
            raise UsageError(f"{flag}: invalid value {part!r}")
        out.append(value)
    if not out:
        raise UsageError(f"{flag}: empty list")
    return out


_ONOFF = {"off": [False], "on": [True], "both": [False, True]}


def cmd_sweep(args) -> int:
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    backends = _parse_list(args.backends, str, BACKENDS, "--backends")
    regimes = _parse_list(args.regimes, str, REGIMES, "--regimes")
    consumer_counts = _parse_list(args.consumers, int, flag="--consumers")
    workers_list = _parse_list(args.workers, int, flag="--workers")
    pinned_list = _ONOFF[args.pinned]
    staged_list = _ONOFF[args.staged]
    if True in staged_list and not args.stage_dir:
        raise UsageError("--staged on/both requires --stage-dir")

    results_dir = _resolve_results_dir(args.results_dir)
    existing = metrics.load_result_docs(results_dir)
    done: dict[tuple, int] = {}
    for doc in existing:
        key = report._doc_key(doc)
        done[key] = done.get(key, 0) + 1

    queries_path, triples_path = _aux_paths(args.corpus)
    total = 0
    skipped = 0
    for backend in backends:
        for regime in regimes:
            for consumers in consumer_counts:
                for workers in workers_list:
                    for pinned in pinned_list:
                        for staged in staged_list:
                            total += 1
                            config = BenchConfig(
                                corpus_path=args.corpus,
                                queries_path=args.queries or queries_path,
                                triples_path=args.triples or triples_path,
                                backend=backend,
                                regime=regime,
                                consumers=consumers,
                                batch_size=args.batch_size,
                                steps=args.steps,
                                compute_ms=args.compute_ms,
                                workers=workers,
                                pinned=pinned,
                                stage_dir=args.stage_dir if staged else None,
                                seed=args.seed,
                                max_text_tokens=args.max_text_tokens,
                            )
                            key = report.CellKey(
                                backend, regime, consumers, workers, pinned, staged
                            )
                            if done.get(key, 0) >= args.repetitions:
                                skipped += 1
                                print(f"skip (done): {key}")
                                continue
                            runs = []
                            for _rep in range(args.repetitions - done.get(key, 0)):
                                try:
                                    result = run_bench(config)
                                    doc = result.to_doc()
                                except ChildFailedError as exc:
                                    doc = metrics.failed_doc(config, str(exc))
                                metrics.save_result_doc(results_dir, doc)
                                runs.append(doc)
                            print(_summary_line(runs[-1]))
    print(f"sweep: {total} cells, {skipped} skipped, results in {results_dir}")
    return EXIT_OK


def cmd_report(args) -> int:
    docs = metrics.load_result_docs(args.results_dir)
    if not docs:
        print("no results")
        return EXIT_OK
    if args.format == "csv":
        sys.stdout.write(report.render_csv(docs))
    else:
        sys.stdout.write(report.render_markdown(docs))
    return EXIT_OK


def _add_bench_flags(p) -> None:
    p.add_argument("--corpus", required=True)
    p.add_argument("--queries", default=None)
    p.add_argument("--triples", default=None)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--compute-ms", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-text-tokens", type=int, default=256)
    p.add_argument("--stage-dir", default=None)
    p.add_argument("--results-dir", default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="docbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic corpus + queries + triples")
    p.add_argument("--docs", type=int, required=True)
    p.add_argument("--mean-len", type=int, default=1000)
    p.add_argument("--dispersion", type=float, default=0.6)
    p.add_argument("--vocab", type=int, default=50_000)
    p.add_argument("--zipf", type=float, default=1.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--queries", type=int, default=None)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--name", default="corpus")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build index/compressed artifacts")
    p.add_argument("--backend", choices=["indexed", "compressed"], required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--index", default=None)
    p.add_argument("--data", default=None)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("get", help="fetch one document by id")
    p.add_argument("--backend", choices=list(BACKENDS), required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("id")
    p.set_defaults(func=cmd_get)

    p = sub.add_parser("bench", help="run one benchmark configuration")
    _add_bench_flags(p)
    p.add_argument("--backend", choices=list(BACKENDS), default="in_memory")
    p.add_argument("--regime", choices=list(REGIMES), default="threads")
    p.add_argument("--consumers", type=int, default=1)
    p.add_argument("--workers", type=int, default=0)
    p.add_argument("--pinned", action="store_true")
    p.add_argument("--memory-quota-mb", type=int, default=None)
    p.add_argument("--stream-dir", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="run a grid of benchmark configurations")
    _add_bench_flags(p)
    p.add_argument("--backends", default=",".join(BACKENDS))
    p.add_argument("--regimes", default=",".join(REGIMES))
    p.add_argument("--consumers", default="1,2,4,8")
    p.add_argument("--workers", default="0")
    p.add_argument("--pinned", choices=list(_ONOFF), default="off")
    p.add_argument("--staged", choices=list(_ONOFF), default="off")
    p.add_argument("--repetitions", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="render results as markdown or csv")
    p.add_argument("results_dir")
    p.add_argument("--format", choices=["markdown", "csv"], default="markdown")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DocNotFoundError as exc:
        print(f"not found: {exc.doc_id!r}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except StaleIndexError as exc:
        print(f"stale index: {exc}", file=sys.stderr)
        return EXIT_STALE
    except (BadMagicError, IndexFormatError, CorruptDataError) as exc:
        print(f"corrupt index: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STALE
    except ChildFailedError as exc:
        print(f"child failed: {exc}", file=sys.stderr)
        return EXIT_CHILD
    except DocBenchError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
