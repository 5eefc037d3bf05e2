"""Builders for the on-disk artifacts: offset index and compressed store.

Standard artifact layout next to a corpus file:

    corpus.tsv           raw corpus
    corpus.tsv.dsix      offset index (DSIX kind 0, references the corpus)
    corpus.tsv.lz4       concatenated per-document LZ4 frames
    corpus.tsv.lz4.dsix  compressed index (DSIX kind 1, references the .lz4)

Builds are single-threaded and deterministic: rebuilding from an unchanged
corpus yields byte-identical files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from . import dsix, lz4frame
from .corpus import iter_raw_lines, split_line
from .errors import (
    DocBenchError,
    DuplicateIdError,
    InvalidUtf8Error,
)
from .fnv import Fnv1a, fnv1a_file
from .rng import Xoshiro256StarStar


def default_offset_index_path(corpus_path) -> str:
    return str(corpus_path) + ".dsix"


def default_compressed_data_path(corpus_path) -> str:
    return str(corpus_path) + ".lz4"


def default_compressed_index_path(data_path) -> str:
    return str(data_path) + ".dsix"


@dataclass(frozen=True)
class IndexStats:
    entries: int
    index_bytes: int


@dataclass(frozen=True)
class BuildStats:
    entries: int
    data_bytes: int
    ratio: float  # data bytes / raw text bytes


@dataclass(frozen=True)
class VerifyResult:
    status: str  # "ok" | "stale" | "corrupt"
    detail: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @classmethod
    def okay(cls) -> "VerifyResult":
        return cls("ok")

    @classmethod
    def stale(cls, detail: str) -> "VerifyResult":
        return cls("stale", detail)

    @classmethod
    def corrupt(cls, detail: str) -> "VerifyResult":
        return cls("corrupt", detail)


def _scan_corpus(corpus_path):
    """Yield (id, offset, stored_len, raw_len, text_bytes) per line, validated."""
    seen = set()
    for line_number, offset, line in iter_raw_lines(corpus_path):
        doc_id, text = split_line(line, line_number)
        try:
            text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidUtf8Error(
                f"text is not valid UTF-8: {exc}", line_number
            ) from None
        if doc_id in seen:
            raise DuplicateIdError(doc_id)
        seen.add(doc_id)
        yield doc_id, offset, len(line), len(text), text


def build_offset_index(corpus_path, out_index_path=None) -> IndexStats:
    """Index every line's start offset: DSIX kind 0 keyed by id."""
    if out_index_path is None:
        out_index_path = default_offset_index_path(corpus_path)
    entries = [
        dsix.IndexEntry(doc_id, offset, stored, raw)
        for doc_id, offset, stored, raw, _text in _scan_corpus(corpus_path)
    ]
    key_width = max((len(e.key) for e in entries), default=0)
    entries.sort(key=lambda e: dsix.pad_key(e.key, key_width))
    header = dsix.IndexHeader(
        kind=dsix.KIND_RAW_OFFSETS,
        key_width=key_width,
        entry_count=len(entries),
        source_len=os.path.getsize(corpus_path),
        source_checksum=fnv1a_file(corpus_path),
    )
    written = dsix.write_index_file(out_index_path, header, entries)
    return IndexStats(entries=len(entries), index_bytes=written)


def build_compressed_store(
    corpus_path, out_data_path=None, out_index_path=None
) -> BuildStats:
    """Re-encode the corpus as per-document LZ4 frames plus a sorted index."""
    if out_data_path is None:
        out_data_path = default_compressed_data_path(corpus_path)
    if out_index_path is None:
        out_index_path = default_compressed_index_path(out_data_path)
    entries = []
    hasher = Fnv1a()
    data_offset = 0
    text_bytes = 0
    with open(out_data_path, "wb") as data:
        pending = []
        pending_bytes = 0
        for doc_id, _offset, _stored, raw, text in _scan_corpus(corpus_path):
            frame = lz4frame.compress_frame(text)
            entries.append(dsix.IndexEntry(doc_id, data_offset, len(frame), raw))
            data_offset += len(frame)
            text_bytes += raw
            pending.append(frame)
            pending_bytes += len(frame)
            if pending_bytes >= 4 << 20:
                blob = b"".join(pending)
                data.write(blob)
                hasher.update(blob)
                pending.clear()
                pending_bytes = 0
        if pending:
            blob = b"".join(pending)
            data.write(blob)
            hasher.update(blob)
    key_width = max((len(e.key) for e in entries), default=0)
    entries.sort(key=lambda e: dsix.pad_key(e.key, key_width))
    header = dsix.IndexHeader(
        kind=dsix.KIND_COMPRESSED,
        key_width=key_width,
        entry_count=len(entries),
        source_len=data_offset,
        source_checksum=hasher.value,
    )
    dsix.write_index_file(out_index_path, header, entries)
    ratio = (data_offset / text_bytes) if text_bytes else 0.0
    return BuildStats(entries=len(entries), data_bytes=data_offset, ratio=ratio)


def _spot_check_raw(entry: dsix.IndexEntry, source, source_len: int) -> str | None:
    if entry.offset + entry.stored_len > source_len:
        return "line extends past end of corpus"
    source.seek(entry.offset)
    line = source.read(entry.stored_len)
    try:
        doc_id, text = split_line(line)
    except DocBenchError as exc:
        return f"stored line does not parse: {exc}"
    if doc_id != entry.key:
        return f"id at offset is {doc_id!r}, index key is {entry.key!r}"
    if len(text) != entry.raw_len:
        return f"text length {len(text)} != raw_len {entry.raw_len}"
    return None


def _spot_check_compressed(
    entry: dsix.IndexEntry, source, source_len: int
) -> str | None:
    if entry.offset + entry.stored_len > source_len:
        return "frame extends past end of data file"
    source.seek(entry.offset)
    frame = source.read(entry.stored_len)
    try:
        lz4frame.decompress_frame(frame, entry.raw_len)
    except Exception as exc:
        return f"frame failed to decode: {exc}"
    return None


def verify_index(
    index_path, source_path, *, spot_checks: int = 16, seed: int = 0
) -> VerifyResult:
    """Check an index against its corpus/data file; returns, never raises.

    Checks magic, version, geometry, source length + checksum, key
    sortedness, and decodes spot_checks randomly chosen entries (all
    entries when spot_checks >= entry_count).
    """
    try:
        header = dsix.read_header(index_path)
    except DocBenchError as exc:
        return VerifyResult.corrupt(str(exc))
    expected_size = dsix.index_file_size(header.key_width, header.entry_count)
    actual_size = os.path.getsize(index_path)
    if actual_size != expected_size:
        return VerifyResult.corrupt(
            f"index file is {actual_size} bytes, expected {expected_size}"
        )
    if not os.path.exists(source_path):
        return VerifyResult.stale(f"source file {source_path} missing")
    source_len = os.path.getsize(source_path)
    if source_len != header.source_len:
        return VerifyResult.stale(
            f"source length {source_len} != indexed {header.source_len}"
        )
    if fnv1a_file(source_path) != header.source_checksum:
        return VerifyResult.stale("source checksum mismatch")

    esize = dsix.entry_size(header.key_width)
    packer = dsix.entry_struct(header.key_width)
    with open(index_path, "rb") as fh:
        fh.seek(dsix.HEADER_SIZE)
        blob = fh.read()
    prev_key = None
    for ordinal in range(header.entry_count):
        key = blob[ordinal * esize : ordinal * esize + header.key_width]
        if prev_key is not None and key <= prev_key:
            return VerifyResult.corrupt(
                f"entry {ordinal}: keys not strictly ascending"
            )
        prev_key = key

    if header.entry_count:
        rng = Xoshiro256StarStar(seed)
        if spot_checks >= header.entry_count:
            ordinals = range(header.entry_count)
        else:
            ordinals = sorted(
                {rng.below(header.entry_count) for _ in range(spot_checks)}
            )
        check = (
            _spot_check_raw
            if header.kind == dsix.KIND_RAW_OFFSETS
            else _spot_check_compressed
        )
        with open(source_path, "rb") as source:
            for ordinal in ordinals:
                key, offset, stored, raw = packer.unpack_from(blob, ordinal * esize)
                entry = dsix.IndexEntry(dsix.unpad_key(key), offset, stored, raw)
                problem = check(entry, source, source_len)
                if problem:
                    return VerifyResult.corrupt(f"entry {ordinal}: {problem}")
    return VerifyResult.okay()
