"""Corpus, queries and triples file formats.

All three files are UTF-8, one record per line:

    corpus/queries:  <id> TAB <text> LF
    triples:         <query_id> TAB <positive_doc_id> LF

The id is everything before the first TAB; text may contain further TABs.
The final line may lack its LF. Ids are 1..=1024 bytes and contain no TAB,
LF or NUL (NUL-freedom is what makes zero-padded index keys unambiguous).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator

from .errors import (
    EmptyIdError,
    InvalidIdError,
    InvalidUtf8Error,
    NoTabError,
    ParseError,
)
MAX_ID_LEN = 1024


@dataclass(frozen=True)
class DocRecord:
    id: bytes
    text: str

    def line(self) -> bytes:
        """Serialize back to the corpus line format (LF-terminated)."""
        return self.id + b"\t" + self.text.encode("utf-8") + b"\n"


@dataclass(frozen=True)
class QueryRecord:
    id: bytes
    text: str


@dataclass(frozen=True)
class TripleSpec:
    query_id: bytes
    positive_doc_id: bytes


@dataclass(frozen=True)
class CorpusManifest:
    n_docs: int
    total_bytes: int
    checksum: str  # FNV-1a 64 of the whole file, lower-case hex

    def dump(self) -> str:
        return (
            f"n_docs={self.n_docs}\n"
            f"total_bytes={self.total_bytes}\n"
            f"checksum={self.checksum}\n"
        )

    @classmethod
    def parse(cls, text: str) -> "CorpusManifest":
        fields = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
        return cls(
            n_docs=int(fields["n_docs"]),
            total_bytes=int(fields["total_bytes"]),
            checksum=fields["checksum"],
        )


def validate_id(raw: bytes, line_number: int | None = None) -> bytes:
    if not raw:
        raise EmptyIdError("empty id", line_number)
    if len(raw) > MAX_ID_LEN:
        raise InvalidIdError(f"id longer than {MAX_ID_LEN} bytes", line_number)
    if b"\x00" in raw:
        raise InvalidIdError("id contains NUL byte", line_number)
    return raw


def split_line(line: bytes, line_number: int | None = None) -> tuple[bytes, bytes]:
    """Split a raw line into (id, text bytes) without UTF-8 validation."""
    if line.endswith(b"\n"):
        line = line[:-1]
    tab = line.find(b"\t")
    if tab < 0:
        raise NoTabError("no TAB separator", line_number)
    doc_id = validate_id(line[:tab], line_number)
    return doc_id, line[tab + 1 :]


def parse_corpus_line(line: bytes, line_number: int | None = None) -> DocRecord:
    doc_id, text_bytes = split_line(line, line_number)
    try:
        text = text_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidUtf8Error(f"text is not valid UTF-8: {exc}", line_number) from None
    return DocRecord(doc_id, text)


def iter_raw_lines(path) -> Iterator[tuple[int, int, bytes]]:
    """Yield (line_number, byte_offset, raw_line) for every line of a file.

    Offsets are tracked by accumulation so they stay exact under buffered
    iteration; the final unterminated line is still yielded.
    """
    offset = 0
    with open(path, "rb") as fh:
        for line_number, line in enumerate(fh, start=1):
            yield line_number, offset, line
            offset += len(line)


def iterate_corpus(path) -> Iterator[tuple[DocRecord, int]]:
    """Yield (DocRecord, byte_offset) in file order; offsets strictly increase."""
    for line_number, offset, line in iter_raw_lines(path):
        yield parse_corpus_line(line, line_number), offset


def load_queries(path) -> dict[bytes, bytes]:
    """Load a queries file into an id -> UTF-8 text-bytes map."""
    queries: dict[bytes, bytes] = {}
    for line_number, _offset, line in iter_raw_lines(path):
        record = parse_corpus_line(line, line_number)
        queries[record.id] = record.text.encode("utf-8")
    return queries


def read_triples(path) -> list[TripleSpec]:
    triples = []
    for line_number, _offset, line in iter_raw_lines(path):
        query_id, pos_id = split_line(line, line_number)
        if b"\t" in pos_id:
            raise ParseError("triple line has more than two fields", line_number)
        validate_id(pos_id, line_number)
        triples.append(TripleSpec(query_id, pos_id))
    return triples


def write_manifest(manifest: CorpusManifest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(manifest.dump())


def read_manifest(path) -> CorpusManifest:
    with open(path, "r", encoding="utf-8") as fh:
        return CorpusManifest.parse(fh.read())


def manifest_for_file(path, n_docs: int) -> CorpusManifest:
    """Build a manifest by hashing an existing corpus file."""
    from .fnv import fnv1a_file

    checksum = fnv1a_file(path)
    return CorpusManifest(
        n_docs=n_docs,
        total_bytes=os.path.getsize(path),
        checksum=f"{checksum:016x}",
    )


def manifest_path(corpus_path) -> str:
    return str(corpus_path) + ".manifest"


__all__ = [
    "DocRecord",
    "QueryRecord",
    "TripleSpec",
    "CorpusManifest",
    "MAX_ID_LEN",
    "parse_corpus_line",
    "split_line",
    "validate_id",
    "iterate_corpus",
    "iter_raw_lines",
    "load_queries",
    "read_triples",
    "write_manifest",
    "read_manifest",
    "manifest_for_file",
    "manifest_path",
]
