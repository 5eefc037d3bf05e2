"""Frame codec and index-format primitives."""

import pytest

from docbench import dsix, lz4frame
from docbench.errors import BadMagicError, CompressionError, IndexFormatError


def test_frame_roundtrip_and_determinism():
    data = b"repeated words repeated words and more repeated words " * 40
    f1 = lz4frame.compress_frame(data)
    f2 = lz4frame.compress_frame(data)
    assert f1 == f2
    assert len(f1) < len(data)
    assert lz4frame.decompress_frame(f1, len(data)) == data


def test_empty_frame():
    frame = lz4frame.compress_frame(b"")
    assert lz4frame.decompress_frame(frame, 0) == b""


def test_truncated_frame_raises():
    frame = lz4frame.compress_frame(b"hello world " * 100)
    with pytest.raises(CompressionError):
        lz4frame.decompress_frame(frame[:-3], 1200)


def test_wrong_expected_size_raises():
    frame = lz4frame.compress_frame(b"x" * 50)
    with pytest.raises(CompressionError):
        lz4frame.decompress_frame(frame, 49)
    # context must recover for the next well-formed frame
    assert lz4frame.decompress_frame(frame, 50) == b"x" * 50


def test_garbage_frame_raises():
    with pytest.raises(CompressionError):
        lz4frame.decompress_frame(b"\x00" * 32, 10)
    frame = lz4frame.compress_frame(b"recover")
    assert lz4frame.decompress_frame(frame, 7) == b"recover"


def test_header_roundtrip():
    header = dsix.IndexHeader(
        kind=dsix.KIND_COMPRESSED,
        key_width=9,
        entry_count=12345,
        source_len=987654321,
        source_checksum=0xDEADBEEFCAFEF00D,
    )
    packed = header.pack()
    assert len(packed) == dsix.HEADER_SIZE == 36
    assert dsix.IndexHeader.unpack(packed) == header


def test_header_bad_magic_and_version():
    good = dsix.IndexHeader(0, 2, 0, 0, 0).pack()
    with pytest.raises(BadMagicError):
        dsix.IndexHeader.unpack(b"XXXX" + good[4:])
    with pytest.raises(IndexFormatError):
        dsix.IndexHeader.unpack(good[:4] + b"\x63\x00" + good[6:])  # version 99
    with pytest.raises(IndexFormatError):
        dsix.IndexHeader.unpack(good[:6])  # shorter than the header


def test_key_padding_rules():
    assert dsix.pad_key(b"ab", 4) == b"ab\x00\x00"
    assert dsix.unpad_key(b"ab\x00\x00") == b"ab"
    with pytest.raises(IndexFormatError):
        dsix.pad_key(b"abcde", 4)


def test_entry_size_formula():
    assert dsix.entry_size(8) == 24
    assert dsix.index_file_size(8, 10_000) == 36 + 10_000 * 24
