"""Backend contract: fixture lookups, cross-backend equivalence,
binary-search instrumentation, clone semantics, staleness."""

import math
import os
import threading
import tracemalloc

import pytest
from hypothesis import given, settings, strategies as st

from docbench import dsix, indexer
from docbench.errors import (
    DocNotFoundError,
    DuplicateIdError,
    StaleIndexError,
    StoreClosedError,
)
from docbench.rng import Xoshiro256StarStar
from docbench.store import (
    SortedKeyIndex,
    lookup_key,
    open_compressed,
    open_in_memory,
    open_indexed,
    open_store,
)


def _open_all(art):
    return (
        open_in_memory(art.corpus),
        open_indexed(art.corpus, art.offset_index),
        open_compressed(art.data, art.compressed_index),
    )


def test_in_memory_fixture(fixture_corpus):
    store = open_in_memory(fixture_corpus)
    assert store.doc_count == 3
    assert store.get(b"d2") == b"big world"
    assert store.get(b"d2") == b"big world"  # idempotent
    with pytest.raises(DocNotFoundError):
        store.get(b"absent")


def test_in_memory_empty_corpus(tmp_path):
    path = tmp_path / "e.tsv"
    path.write_bytes(b"")
    store = open_in_memory(path)
    assert store.doc_count == 0
    with pytest.raises(DocNotFoundError):
        store.get(b"anything")


def test_in_memory_duplicate_id(tmp_path):
    path = tmp_path / "dup.tsv"
    path.write_bytes(b"d1\ta\nd1\tb\n")
    with pytest.raises(DuplicateIdError) as exc:
        open_in_memory(path)
    assert exc.value.doc_id == b"d1"


def test_indexed_fixture(fixture_corpus):
    indexer.build_offset_index(fixture_corpus)
    store = open_indexed(fixture_corpus)
    try:
        assert store.get(b"d3") == b"!"
        assert store.get(b"d1") == b"hello"
        with pytest.raises(DocNotFoundError):
            store.get(b"d4")
    finally:
        store.close()


def test_indexed_stale_index(tmp_path, fixture_corpus):
    indexer.build_offset_index(fixture_corpus)
    other = tmp_path / "other.tsv"
    other.write_bytes(b"d1\tcompletely different\n")
    with pytest.raises(StaleIndexError):
        open_indexed(other, fixture_corpus + ".dsix")


def test_compressed_fixture_matches_in_memory(fixture_corpus):
    indexer.build_compressed_store(fixture_corpus)
    mem = open_in_memory(fixture_corpus)
    comp = open_compressed(fixture_corpus + ".lz4")
    try:
        for doc_id in mem.ids():
            assert comp.get(doc_id) == mem.get(doc_id)
    finally:
        mem.close()
        comp.close()


def test_compressed_zero_documents(tmp_path):
    corpus = tmp_path / "e.tsv"
    corpus.write_bytes(b"")
    indexer.build_compressed_store(corpus)
    store = open_compressed(str(corpus) + ".lz4")
    try:
        assert store.doc_count == 0
        with pytest.raises(DocNotFoundError):
            store.get(b"d1")
    finally:
        store.close()


def test_compressed_truncated_data_names_id_and_offset(fixture_corpus):
    from docbench.errors import CorruptDataError

    indexer.build_compressed_store(fixture_corpus)
    data_path = fixture_corpus + ".lz4"
    blob = open(data_path, "rb").read()
    open(data_path, "wb").write(blob[: len(blob) - 4])
    store = open_compressed(data_path, verify=False)
    try:
        last = store.index.entry_at(store.doc_count - 1)
        with pytest.raises(CorruptDataError) as exc:
            store.get(last.key)
        message = str(exc.value)
        assert repr(last.key) in message
        assert str(last.offset) in message
    finally:
        store.close()


def test_compressed_stale_detection(fixture_corpus):
    indexer.build_compressed_store(fixture_corpus)
    with open(fixture_corpus + ".lz4", "ab") as fh:
        fh.write(b"junk")
    with pytest.raises(StaleIndexError):
        open_compressed(fixture_corpus + ".lz4")


def test_open_store_front_door(fixture_corpus):
    indexer.build_offset_index(fixture_corpus)
    indexer.build_compressed_store(fixture_corpus)
    for backend in ("in_memory", "indexed", "compressed"):
        store = open_store(backend, fixture_corpus)
        try:
            assert store.get(b"d2") == b"big world"
            assert store.backend_kind == backend
        finally:
            store.close()


# --- lookup_key / SortedKeyIndex ---------------------------------------


def _make_index(keys):
    key_width = max((len(k) for k in keys), default=0)
    entries = [
        dsix.IndexEntry(k, i * 10, 10, 5)
        for i, k in enumerate(sorted(keys, key=lambda k: dsix.pad_key(k, key_width)))
    ]
    header = dsix.IndexHeader(
        kind=0, key_width=key_width, entry_count=len(entries),
        source_len=0, source_checksum=0,
    )
    packer = dsix.entry_struct(key_width)
    blob = b"".join(
        packer.pack(dsix.pad_key(e.key, key_width), e.offset, e.stored_len, e.raw_len)
        for e in entries
    )
    return SortedKeyIndex(blob, header, base=0), entries


def test_lookup_key_fixture():
    index, entries = _make_index([b"a1", b"b2", b"c3"])
    hit = lookup_key(index, b"b2")
    assert hit == entries[1]
    assert lookup_key(index, b"zz") is None


def test_lookup_key_probe_shorter_than_width():
    # padding rule: a short probe zero-padded must match its padded key
    index, entries = _make_index([b"a", b"bbbb", b"cc"])
    assert lookup_key(index, b"a") == next(e for e in entries if e.key == b"a")
    assert lookup_key(index, b"cc").key == b"cc"
    assert lookup_key(index, b"bbbbb") is None  # longer than key_width


def test_lookup_key_empty_index():
    index, _ = _make_index([])
    assert lookup_key(index, b"x") is None


@settings(max_examples=60, deadline=None)
@given(
    st.sets(
        st.binary(min_size=1, max_size=8).filter(lambda b: 0 not in b),
        min_size=1,
        max_size=64,
    ),
    st.binary(min_size=1, max_size=9).filter(lambda b: 0 not in b),
)
def test_lookup_key_matches_linear_scan(keys, probe):
    index, entries = _make_index(list(keys))
    expected = next((e for e in entries if e.key == probe), None)
    assert lookup_key(index, probe) == expected


def test_lookup_comparison_bound(corpus_1k):
    store = open_compressed(corpus_1k.data, corpus_1k.compressed_index)
    try:
        index = store.index
        n = index.entry_count
        bound = math.ceil(math.log2(n)) + 1
        rng = Xoshiro256StarStar(4)
        worst = 0
        for _ in range(300):
            probe = index.entry_at(rng.below(n)).key
            index.comparisons = 0
            assert index.lookup(probe) is not None
            worst = max(worst, index.comparisons)
        # misses obey the same bound
        index.comparisons = 0
        assert index.lookup(b"zzzzzzzzzz") is None
        worst = max(worst, index.comparisons)
        assert worst <= bound
    finally:
        store.close()


# --- cross-backend equivalence ------------------------------------------


def test_cross_backend_equivalence_small(corpus_1k):
    mem, idx, comp = _open_all(corpus_1k)
    rng = Xoshiro256StarStar(21)
    try:
        ids = sorted(mem.ids())
        for doc_id in ids:
            expected = mem.get(doc_id)
            assert idx.get(doc_id) == expected
            assert comp.get(doc_id) == expected
        # NotFound-completeness over mutated ids
        for _ in range(300):
            victim = ids[rng.below(len(ids))]
            mutated = victim + b"x"
            for store in (mem, idx, comp):
                with pytest.raises(DocNotFoundError):
                    store.get(mutated)
        # binary-search boundary: id differing by one trailing byte
        trimmed = ids[0][:-1]
        if trimmed and trimmed not in set(ids):
            for store in (mem, idx, comp):
                with pytest.raises(DocNotFoundError):
                    store.get(trimmed)
    finally:
        mem.close()
        idx.close()
        comp.close()


# --- clone semantics ------------------------------------------------------


def test_clone_concurrent_indexed_reads(corpus_1k):
    base = open_indexed(corpus_1k.corpus, corpus_1k.offset_index)
    mem = open_in_memory(corpus_1k.corpus)
    clone = base.clone()
    ids = sorted(mem.ids())
    errors = []

    def reader(store, offset):
        try:
            rng = Xoshiro256StarStar(offset)
            for _ in range(400):
                doc_id = ids[rng.below(len(ids))]
                if store.get(doc_id) != mem.get(doc_id):
                    errors.append(doc_id)
        except Exception as exc:  # pragma: no cover - failure reporting
            errors.append(exc)

    threads = [
        threading.Thread(target=reader, args=(base, 0)),
        threading.Thread(target=reader, args=(clone, 1)),
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    base.close()
    clone.close()
    mem.close()
    assert errors == []


def test_clone_does_not_copy_payloads(corpus_1k):
    mem = open_in_memory(corpus_1k.corpus)
    tracemalloc.start()
    before, _ = tracemalloc.get_traced_memory()
    clones = [mem.clone() for _ in range(8)]
    after, _ = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    assert after - before < 1 << 20  # no data copy: << 1 MB for 8 clones
    for c in clones:
        c.close()
    mem.close()


def test_clone_rss_delta_small(corpus_10k):
    """RSS-sampled variant: cloning a loaded 12 MB store moves resident
    memory by far less than one corpus."""
    from docbench.metrics import MemorySampler

    mem = open_in_memory(corpus_10k.corpus)
    sampler = MemorySampler()
    sampler._sample_once()
    before = sampler.peak
    clones = [mem.clone() for _ in range(4)]
    sampler._sample_once()
    delta = sampler.peak - before
    assert delta < 5 * (1 << 20), f"cloning cost {delta} bytes of RSS"
    for c in clones:
        c.close()
    mem.close()


def test_clone_of_closed_store_fails(corpus_1k):
    mem, idx, comp = _open_all(corpus_1k)
    for store in (mem, idx, comp):
        store.close()
        with pytest.raises(StoreClosedError):
            store.clone()
        with pytest.raises(StoreClosedError):
            store.get(b"d0000000")


def test_clone_shares_documents(corpus_1k):
    mem, idx, comp = _open_all(corpus_1k)
    try:
        some_id = next(iter(mem.ids()))
        for store in (mem, idx, comp):
            clone = store.clone()
            assert clone.get(some_id) == store.get(some_id)
            assert clone.doc_count == store.doc_count
            clone.close()
            # closing the clone must not break the original
            assert store.get(some_id)
    finally:
        mem.close()
        idx.close()
        comp.close()


# --- resident footprint ----------------------------------------------------


def test_index_backends_open_small(corpus_10k):
    """Offset table / mmap index stay under 15% of corpus size (heap-wise)."""
    corpus_bytes = os.path.getsize(corpus_10k.corpus)
    assert corpus_bytes >= 10 * 2**20

    tracemalloc.start()
    before, _ = tracemalloc.get_traced_memory()
    idx = open_indexed(corpus_10k.corpus, corpus_10k.offset_index, verify=False)
    after_open, _ = tracemalloc.get_traced_memory()
    idx_heap = after_open - before
    idx.close()

    before, _ = tracemalloc.get_traced_memory()
    comp = open_compressed(corpus_10k.data, corpus_10k.compressed_index, verify=False)
    after_open, _ = tracemalloc.get_traced_memory()
    comp_heap = after_open - before
    comp.close()
    tracemalloc.stop()

    assert idx_heap < 0.15 * corpus_bytes
    assert comp_heap < 0.15 * corpus_bytes


def test_in_memory_resident_accounting(corpus_1k):
    mem = open_in_memory(corpus_1k.corpus)
    corpus_bytes = os.path.getsize(corpus_1k.corpus)
    # approximate accounting: at least the payload, bounded by payload + overhead
    assert mem.resident_bytes >= corpus_bytes * 0.8
    assert mem.resident_bytes <= corpus_bytes * 2 + 1000 * 200
    mem.close()
