"""Generator stream tests.

The raw stream is checked against an independent reimplementation of
xoshiro256** written with numpy's wrapping uint64 arithmetic (the
package uses Python big-int arithmetic with explicit masking, so the two
share no code path).
"""

import numpy as np
import pytest

from dbnkit.errors import NegativeStddev
from dbnkit.rng import Rng, derive_seed, splitmix64_stream


def _reference_stream(seed, n):
    """xoshiro256** via numpy uint64 wraparound arithmetic."""
    with np.errstate(over="ignore"):
        # splitmix64 seeding
        state = np.uint64(seed)
        golden = np.uint64(0x9E3779B97F4A7C15)
        s = []
        for _ in range(4):
            state = state + golden
            z = state
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            s.append(z ^ (z >> np.uint64(31)))
        s0, s1, s2, s3 = s

        def rotl(x, k):
            return (x << np.uint64(k)) | (x >> np.uint64(64 - k))

        out = []
        for _ in range(n):
            out.append(int(rotl(s1 * np.uint64(5), 7) * np.uint64(9)))
            t = s1 << np.uint64(17)
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = rotl(s3, 45)
        return out


def test_splitmix64_published_vectors():
    # first three outputs for seed 0, from the reference C implementation
    assert splitmix64_stream(0, 3) == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


@pytest.mark.parametrize("seed", [0, 1, 42, 2**63, 0xFFFFFFFFFFFFFFFF])
def test_raw_stream_matches_reference(seed):
    rng = Rng(seed)
    got = [rng.next_u64() for _ in range(200)]
    assert got == _reference_stream(seed, 200)


def test_same_seed_same_stream():
    a, b = Rng(123), Rng(123)
    assert [a.next_u64() for _ in range(50)] == [b.next_u64() for _ in range(50)]


def test_bulk_matches_scalar():
    a, b = Rng(7), Rng(7)
    bulk = a._raw_block(64)
    assert [int(x) for x in bulk] == [b.next_u64() for _ in range(64)]


def test_uniforms_bulk_matches_scalar():
    a, b = Rng(11), Rng(11)
    bulk = a.uniforms(32, -2.0, 3.0)
    scalars = [b.uniform(-2.0, 3.0) for _ in range(32)]
    assert bulk.tolist() == scalars


def test_gaussians_bulk_matches_scalar():
    a, b = Rng(13), Rng(13)
    bulk = a.gaussians(16)
    scalars = [b.gaussian() for _ in range(16)]
    assert bulk.tolist() == scalars


def test_uniform_bounds_and_ks():
    # empirical CDF within 0.005 of uniform over 1e6 draws
    u = Rng(2024).uniforms(1_000_000)
    assert np.all(u >= 0.0) and np.all(u < 1.0)
    u.sort()
    grid = np.arange(1, u.size + 1) / u.size
    ks = np.max(np.abs(u - grid))
    assert ks < 0.005, ks


def test_gaussian_degenerate_and_moments():
    assert Rng(1).gaussian(mean=3.25, stddev=0.0) == 3.25
    z = Rng(99).gaussians(1_000_000)
    assert abs(z.mean()) < 0.01
    assert abs(z.var() - 1.0) < 0.02
    assert np.all(np.isfinite(z))


def test_gaussian_negative_stddev():
    with pytest.raises(NegativeStddev):
        Rng(1).gaussian(0.0, -1.0)


def test_permutation_is_permutation():
    p = Rng(5).permutation(1000)
    assert sorted(p.tolist()) == list(range(1000))
    assert np.array_equal(Rng(5).permutation(1000), p)
    assert Rng(5).permutation(1).tolist() == [0]


def test_randbelow_bounds_and_coverage():
    rng = Rng(17)
    draws = [rng.randbelow(6) for _ in range(6000)]
    assert set(draws) == set(range(6))
    counts = np.bincount(draws)
    assert np.all(counts > 800)  # ~1000 each


def test_derive_seed_decouples_streams():
    seeds = {derive_seed(42, i) for i in range(100)}
    assert len(seeds) == 100
    child = Rng(42).child(0)
    assert child.seed == derive_seed(42, 0)
    parent_draws = [Rng(42).next_u64() for _ in range(8)]
    child_draws = [child.next_u64() for _ in range(8)]
    assert parent_draws != child_draws
