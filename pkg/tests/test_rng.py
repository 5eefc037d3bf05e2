"""Pinned-PRNG checks: published splitmix64 vectors, frozen xoshiro
outputs, scalar/vector agreement."""

import pytest

from docbench.rng import (
    SplitMix64,
    Xoshiro256StarStar,
    Xoshiro256Vector,
    derive_seed,
)

# First outputs of splitmix64 seeded with 0, from the reference implementation.
SPLITMIX64_SEED0 = [
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
    0xF88BB8A8724C81EC,
]

# Frozen first outputs of our xoshiro256** chain for two seeds (regression).
XOSHIRO_SEED0 = [
    0x99EC5F36CB75F2B4,
    0xBF6E1F784956452A,
    0x1A5F849D4933E6E0,
    0x6AA594F1262D2D2C,
]


def test_splitmix64_reference_vectors():
    sm = SplitMix64(0)
    assert [sm.next_u64() for _ in range(4)] == SPLITMIX64_SEED0


def test_xoshiro_frozen_stream():
    rng = Xoshiro256StarStar(0)
    assert [rng.next_u64() for _ in range(4)] == XOSHIRO_SEED0


def test_xoshiro_deterministic_across_instances():
    a = Xoshiro256StarStar(1234567)
    b = Xoshiro256StarStar(1234567)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]


def test_vector_lane0_equals_scalar():
    scalar = Xoshiro256StarStar(99)
    vec = Xoshiro256Vector(99, lanes=8)
    scalar_stream = [scalar.next_u64() for _ in range(16)]
    vec_lane0 = [int(vec.next_block()[0]) for _ in range(16)]
    assert vec_lane0 == scalar_stream


def test_vector_lanes_are_independent_streams():
    vec = Xoshiro256Vector(7, lanes=4)
    block = vec.next_block()
    assert len(set(int(v) for v in block)) == 4


def test_below_range_and_determinism():
    rng = Xoshiro256StarStar(5)
    draws = [rng.below(10) for _ in range(1000)]
    assert all(0 <= d < 10 for d in draws)
    assert len(set(draws)) == 10  # all residues hit over 1000 draws
    with pytest.raises(ValueError):
        rng.below(0)


def test_next_doubles_in_unit_interval():
    vec = Xoshiro256Vector(3, lanes=64)
    u = vec.next_doubles()
    assert (u >= 0.0).all() and (u < 1.0).all()


def test_derive_seed_distinct_labels():
    base = 42
    seeds = {derive_seed(base, i) for i in range(100)}
    assert len(seeds) == 100
    assert derive_seed(base, 3) == derive_seed(base, 3)
    assert derive_seed(base, 3) != derive_seed(base + 1, 3)
    assert derive_seed(base, 1, 2) != derive_seed(base, 2, 1)
