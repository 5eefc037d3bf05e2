import os
from dataclasses import dataclass

import pytest

from docbench import indexer, synth
from docbench.corpus import manifest_path, write_manifest

FIXTURE_3LINE = b"d1\thello\nd2\tbig world\nd3\t!\n"


@dataclass(frozen=True)
class CorpusArtifacts:
    corpus: str
    queries: str
    triples: str
    offset_index: str
    data: str
    compressed_index: str


def build_corpus(root, spec: synth.SynthSpec, name: str = "corpus",
                 n_queries: int | None = None) -> CorpusArtifacts:
    os.makedirs(root, exist_ok=True)
    corpus = os.path.join(str(root), name + ".tsv")
    queries = os.path.join(str(root), name + ".queries.tsv")
    triples = os.path.join(str(root), name + ".triples.tsv")
    if n_queries is None:
        n_queries = synth.default_query_count(spec.n_docs)
    manifest = synth.generate_corpus(spec, corpus)
    write_manifest(manifest, manifest_path(corpus))
    synth.generate_queries(spec, queries, n_queries)
    synth.generate_triples(spec, triples, n_queries)
    indexer.build_offset_index(corpus)
    indexer.build_compressed_store(corpus)
    data = indexer.default_compressed_data_path(corpus)
    return CorpusArtifacts(
        corpus=corpus,
        queries=queries,
        triples=triples,
        offset_index=indexer.default_offset_index_path(corpus),
        data=data,
        compressed_index=indexer.default_compressed_index_path(data),
    )


@pytest.fixture
def fixture_corpus(tmp_path):
    path = tmp_path / "fixture.tsv"
    path.write_bytes(FIXTURE_3LINE)
    return str(path)


@pytest.fixture(scope="session")
def corpus_1k(tmp_path_factory):
    """Small corpus for fast functional tests (~0.4 MB)."""
    root = tmp_path_factory.mktemp("corpus_1k")
    return build_corpus(root, synth.SynthSpec(n_docs=1000, mean_len=400, seed=11))


@pytest.fixture(scope="session")
def corpus_10k(tmp_path_factory):
    """The 10,000-doc corpus the spec's equivalence and ratio checks use (~12 MB)."""
    root = tmp_path_factory.mktemp("corpus_10k")
    return build_corpus(root, synth.SynthSpec(n_docs=10_000, mean_len=1000, seed=7))


@pytest.fixture(scope="session")
def corpus_200mb(tmp_path_factory):
    """~200 MB corpus for the memory-replication checks (built on demand)."""
    root = tmp_path_factory.mktemp("corpus_200mb")
    return build_corpus(
        root,
        synth.SynthSpec(n_docs=20_000, mean_len=8_500, seed=17),
        n_queries=1000,
    )


@pytest.fixture(scope="session")
def corpus_bigdoc(tmp_path_factory):
    """Large-document corpus (~60 MB, ~40 KB docs) where fetch time is
    syscall-dominated; used by the multi-core contention check."""
    root = tmp_path_factory.mktemp("corpus_bigdoc")
    return build_corpus(
        root,
        synth.SynthSpec(n_docs=1_500, mean_len=40_000, len_dispersion=0.3, seed=23),
        n_queries=300,
    )


def require_cores(n: int):
    try:
        cores = len(os.sched_getaffinity(0))
    except AttributeError:
        cores = os.cpu_count() or 1
    return pytest.mark.skipif(
        cores < n, reason=f"needs a machine with >= {n} cores (have {cores})"
    )
