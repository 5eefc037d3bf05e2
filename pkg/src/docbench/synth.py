"""Reproducible synthetic corpora.

Documents are slices of one continuous token tape: token ranks are drawn
Zipf(zipf_exponent) over a synthetic vocabulary (short words for frequent
ranks, so text compresses like real prose), and per-document character
lengths are log-normal around mean_len, clamped to [1, 64 * mean_len].
Everything is driven by the pinned xoshiro256** lanes, so a SynthSpec maps
to byte-identical files on every run. Sub-streams use fixed labels:

    0 doc lengths   1 doc tokens   2 query lengths   3 query tokens
    4 triple positives

This module is the only corpus-side consumer of numpy; benchmark child
processes never import it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .corpus import CorpusManifest
from .errors import UsageError
from .fnv import Fnv1a
from .rng import Xoshiro256StarStar, Xoshiro256Vector, derive_seed

_LANES = 4096
_BLOCKS_PER_REFILL = 16
_WRITE_FLUSH = 4 << 20

QUERY_MEAN_LEN = 48
QUERY_LEN_DISPERSION = 0.4


@dataclass(frozen=True)
class SynthSpec:
    n_docs: int
    mean_len: int = 1000
    len_dispersion: float = 0.6
    vocab_size: int = 50_000
    seed: int = 0
    zipf_exponent: float = 1.1

    def __post_init__(self):
        if self.n_docs < 0:
            raise UsageError("n_docs must be >= 0")
        if self.mean_len < 1:
            raise UsageError("mean_len must be >= 1")
        if self.len_dispersion < 0:
            raise UsageError("len_dispersion must be >= 0")
        if self.vocab_size < 1:
            raise UsageError("vocab_size must be >= 1")
        if self.zipf_exponent <= 0:
            raise UsageError("zipf_exponent must be > 0")


def default_query_count(n_docs: int) -> int:
    return max(1, n_docs // 10) if n_docs else 0


def _id_width(count: int) -> int:
    return max(7, len(str(count - 1))) if count else 7


def doc_id(ordinal: int, n_docs: int) -> bytes:
    return f"d{ordinal:0{_id_width(n_docs)}d}".encode("ascii")


def query_id(ordinal: int, n_queries: int) -> bytes:
    return f"q{ordinal:0{_id_width(n_queries)}d}".encode("ascii")


_CONSONANTS = b"bcdfghjklmnpqrstvwz"
_VOWELS = b"aeiou"
_SYLLABLES = [bytes([c, v]) for c in _CONSONANTS for v in _VOWELS]


def _word(rank: int) -> bytes:
    """Synthetic word for a frequency rank: bijective base-95 syllables,
    padded to >= 3 syllables so frequent words still form LZ4-matchable
    spans (word lengths land in the 6-8 char range of real prose)."""
    n = rank + 1
    syllables = []
    while n:
        n, r = divmod(n - 1, len(_SYLLABLES))
        syllables.append(_SYLLABLES[r])
    pad = 0
    while len(syllables) < 3:
        syllables.append(_SYLLABLES[(rank * 31 + 7 * pad + 3) % len(_SYLLABLES)])
        pad += 1
    return b"".join(reversed(syllables))


def _vocabulary(vocab_size: int) -> np.ndarray:
    return np.array([_word(i) for i in range(vocab_size)], dtype=object)


def _zipf_cdf(vocab_size: int, exponent: float) -> np.ndarray:
    weights = np.arange(1, vocab_size + 1, dtype=np.float64) ** -exponent
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    return cdf


class _TokenTape:
    """Endless stream of space-joined Zipf tokens; take(n) cuts exact slices."""

    def __init__(self, seed: int, vocab_size: int, exponent: float):
        self._rng = Xoshiro256Vector(seed, _LANES)
        self._cdf = _zipf_cdf(vocab_size, exponent)
        self._words = _vocabulary(vocab_size)
        self._chunks: deque[bytes] = deque()
        self._avail = 0

    def _refill(self) -> None:
        draws = np.concatenate(
            [self._rng.next_doubles() for _ in range(_BLOCKS_PER_REFILL)]
        )
        ranks = np.searchsorted(self._cdf, draws, side="right")
        chunk = b" ".join(self._words[ranks].tolist()) + b" "
        self._chunks.append(chunk)
        self._avail += len(chunk)

    def take(self, n: int) -> bytes:
        while self._avail < n:
            self._refill()
        parts = []
        need = n
        while need:
            head = self._chunks[0]
            if len(head) <= need:
                parts.append(head)
                self._chunks.popleft()
                need -= len(head)
            else:
                parts.append(head[:need])
                self._chunks[0] = head[need:]
                need = 0
        self._avail -= n
        return b"".join(parts)


def _draw_lengths(count: int, mean_len: int, sigma: float, seed: int) -> np.ndarray:
    """Log-normal character lengths via Box-Muller on pinned uniform lanes."""
    if count == 0:
        return np.empty(0, dtype=np.int64)
    rng = Xoshiro256Vector(seed, _LANES)
    blocks = []
    have = 0
    while have < count:
        u1 = rng.next_doubles()
        u2 = rng.next_doubles()
        z = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
        lens = np.clip(
            np.rint(mean_len * np.exp(sigma * z)), 1, 64 * mean_len
        ).astype(np.int64)
        blocks.append(lens)
        have += lens.size
    return np.concatenate(blocks)[:count]


def _write_records(
    out_path,
    ids,
    lengths: np.ndarray,
    tape: _TokenTape,
) -> CorpusManifest:
    hasher = Fnv1a()
    total = 0
    count = 0
    pending: list[bytes] = []
    pending_bytes = 0
    with open(out_path, "wb") as fh:
        for rec_id, length in zip(ids, lengths):
            line = rec_id + b"\t" + tape.take(int(length)) + b"\n"
            pending.append(line)
            pending_bytes += len(line)
            count += 1
            if pending_bytes >= _WRITE_FLUSH:
                blob = b"".join(pending)
                fh.write(blob)
                hasher.update(blob)
                total += len(blob)
                pending.clear()
                pending_bytes = 0
        if pending:
            blob = b"".join(pending)
            fh.write(blob)
            hasher.update(blob)
            total += len(blob)
    return CorpusManifest(n_docs=count, total_bytes=total, checksum=hasher.hexdigest())


def generate_corpus(spec: SynthSpec, out_path) -> CorpusManifest:
    """Write the corpus file and return its manifest (n_docs/bytes/checksum)."""
    lengths = _draw_lengths(
        spec.n_docs, spec.mean_len, spec.len_dispersion, derive_seed(spec.seed, 0)
    )
    tape = _TokenTape(derive_seed(spec.seed, 1), spec.vocab_size, spec.zipf_exponent)
    ids = (doc_id(i, spec.n_docs) for i in range(spec.n_docs))
    return _write_records(out_path, ids, lengths, tape)


def generate_queries(spec: SynthSpec, out_path, n_queries: int) -> CorpusManifest:
    """Write a queries file (same line format, 'q'-prefixed ids)."""
    lengths = _draw_lengths(
        n_queries, QUERY_MEAN_LEN, QUERY_LEN_DISPERSION, derive_seed(spec.seed, 2)
    )
    tape = _TokenTape(derive_seed(spec.seed, 3), spec.vocab_size, spec.zipf_exponent)
    ids = (query_id(i, n_queries) for i in range(n_queries))
    return _write_records(out_path, ids, lengths, tape)


def generate_triples(spec: SynthSpec, out_path, n_queries: int) -> int:
    """Write one (query_id, positive doc_id) line per query ordinal.

    Query ids match the file produced by generate_queries for the same
    n_queries; positives are drawn uniformly over the corpus ids.
    """
    if n_queries and not spec.n_docs:
        raise UsageError("cannot generate triples for an empty corpus")
    rng = Xoshiro256StarStar(derive_seed(spec.seed, 4))
    with open(out_path, "wb") as fh:
        for i in range(n_queries):
            pos = doc_id(rng.below(spec.n_docs), spec.n_docs)
            fh.write(query_id(i, n_queries) + b"\t" + pos + b"\n")
    return n_queries
