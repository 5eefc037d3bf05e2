"""FNV-1a 64 checks: published vectors, jit/reference agreement,
incremental folding."""

import os

from docbench.fnv import Fnv1a, fnv1a_64, fnv1a_file, fnv1a_update, OFFSET_BASIS

# From the FNV reference test suite.
KNOWN = [
    (b"", 0xCBF29CE484222325),
    (b"a", 0xAF63DC4C8601EC8C),
    (b"foobar", 0x85944171F73967E8),
]


def test_known_vectors():
    for data, expected in KNOWN:
        assert fnv1a_64(data) == expected


def test_incremental_equals_oneshot():
    data = bytes(range(256)) * 7
    f = Fnv1a()
    for i in range(0, len(data), 13):
        f.update(data[i : i + 13])
    assert f.value == fnv1a_64(data)


def test_jit_path_matches_reference(tmp_path):
    # Large enough to cross the jit threshold.
    blob = os.urandom(3 << 20)
    expected = fnv1a_update(OFFSET_BASIS, blob)
    assert fnv1a_64(blob) == expected


def test_file_hash_matches_bytes(tmp_path):
    data = b"some corpus bytes\n" * 1000
    path = tmp_path / "blob.bin"
    path.write_bytes(data)
    assert fnv1a_file(path) == fnv1a_64(data)


def test_hexdigest_lowercase_padded():
    f = Fnv1a()
    assert f.hexdigest() == "cbf29ce484222325"
    f.update(b"a")
    assert f.hexdigest() == f"{fnv1a_64(b'a'):016x}"
