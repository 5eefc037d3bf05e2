"""DSIX sorted fixed-width-key index file format (bit-exact).

Layout, all integers little-endian:

    header (36 bytes):
        magic     4s   "DSIX"
        version   u16  1
        kind      u8   0 = raw corpus offsets, 1 = compressed data offsets
        pad       u8   0
        key_width u16  max id length over the corpus
        pad       u16  0
        entry_count     u64
        source_len      u64  byte length of the referenced corpus/data file
        source_checksum u64  FNV-1a 64 of that file
    entries (entry_count * (key_width + 16) bytes each):
        key        key_width bytes, id zero-padded with 0x00
        offset     u64
        stored_len u32
        raw_len    u32

Entries are sorted strictly ascending by padded key bytes; ids never
contain 0x00, so padding cannot create ties.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import BadMagicError, IndexFormatError

MAGIC = b"DSIX"
VERSION = 1
KIND_RAW_OFFSETS = 0
KIND_COMPRESSED = 1

_HEADER = struct.Struct("<4sHBBHHQQQ")
HEADER_SIZE = _HEADER.size
assert HEADER_SIZE == 36

ENTRY_FIXED_BYTES = 16  # offset u64 + stored_len u32 + raw_len u32


@dataclass(frozen=True)
class IndexHeader:
    kind: int
    key_width: int
    entry_count: int
    source_len: int
    source_checksum: int

    def pack(self) -> bytes:
        return _HEADER.pack(
            MAGIC,
            VERSION,
            self.kind,
            0,
            self.key_width,
            0,
            self.entry_count,
            self.source_len,
            self.source_checksum,
        )

    @classmethod
    def unpack(cls, buf: bytes) -> "IndexHeader":
        if len(buf) < HEADER_SIZE:
            raise IndexFormatError("index file shorter than header")
        magic, version, kind, _pad1, key_width, _pad2, count, src_len, src_sum = (
            _HEADER.unpack_from(buf)
        )
        if magic != MAGIC:
            raise BadMagicError(f"bad magic {magic!r}")
        if version != VERSION:
            raise IndexFormatError(f"unsupported version {version}")
        if kind not in (KIND_RAW_OFFSETS, KIND_COMPRESSED):
            raise IndexFormatError(f"unknown index kind {kind}")
        return cls(kind, key_width, count, src_len, src_sum)


@dataclass(frozen=True)
class IndexEntry:
    key: bytes  # unpadded id
    offset: int
    stored_len: int
    raw_len: int


def entry_size(key_width: int) -> int:
    return key_width + ENTRY_FIXED_BYTES


def entry_struct(key_width: int) -> struct.Struct:
    return struct.Struct(f"<{key_width}sQII")


def pad_key(doc_id: bytes, key_width: int) -> bytes:
    if len(doc_id) > key_width:
        raise IndexFormatError(
            f"id of {len(doc_id)} bytes exceeds key width {key_width}"
        )
    return doc_id.ljust(key_width, b"\x00")


def unpad_key(key: bytes) -> bytes:
    return key.rstrip(b"\x00")


def index_file_size(key_width: int, entry_count: int) -> int:
    return HEADER_SIZE + entry_count * entry_size(key_width)


def write_index_file(path, header: IndexHeader, entries) -> int:
    """Write header + entries (already sorted by padded key); returns bytes written."""
    packer = entry_struct(header.key_width)
    written = 0
    with open(path, "wb") as fh:
        fh.write(header.pack())
        written += HEADER_SIZE
        buf = []
        buf_bytes = 0
        for entry in entries:
            rec = packer.pack(
                pad_key(entry.key, header.key_width),
                entry.offset,
                entry.stored_len,
                entry.raw_len,
            )
            buf.append(rec)
            buf_bytes += len(rec)
            if buf_bytes >= 4 << 20:
                fh.write(b"".join(buf))
                written += buf_bytes
                buf.clear()
                buf_bytes = 0
        if buf:
            fh.write(b"".join(buf))
            written += buf_bytes
    return written


def read_header(path) -> IndexHeader:
    with open(path, "rb") as fh:
        return IndexHeader.unpack(fh.read(HEADER_SIZE))
