import math

import numpy as np
import pytest

from pseudopowers.sampler import (PseudoSequence, count_variance, expected_count,
                                  sample_sequence, uniform_stream)


def test_reproducible():
    a = sample_sequence(2, 50_000, seed=7, trial_index=3)
    b = sample_sequence(2, 50_000, seed=7, trial_index=3)
    assert a == b
    assert a.elements.tobytes() == b.elements.tobytes()


def test_trial_index_changes_stream():
    a = sample_sequence(2, 50_000, seed=7, trial_index=0)
    b = sample_sequence(2, 50_000, seed=7, trial_index=1)
    assert not np.array_equal(a.elements, b.elements)


def test_stream_frozen_values():
    # pins the generator: Philox4x64-10 keyed by (seed, trial), 53-bit mantissa mapping
    u = uniform_stream(7, 3, 3)
    raw = np.array([8893702929424106994, 13357943582879616415, 927023405073346982], dtype=np.uint64)
    assert np.array_equal(u, (raw >> np.uint64(11)).astype(float) * 2.0**-53)


def test_one_draw_per_integer_in_order():
    N = 1000
    u = uniform_stream(11, 2, N)
    p = 0.5 * np.arange(1, N + 1) ** -0.5
    expected = np.flatnonzero(u < p) + 1
    got = sample_sequence(2, N, 11, 2)
    assert np.array_equal(got.elements, expected)


def test_prefix_consistency():
    # the draw for n does not depend on limit_n
    short = sample_sequence(3, 2_000, 5, 0)
    long = sample_sequence(3, 20_000, 5, 0)
    assert np.array_equal(long.elements[long.elements <= 2_000], short.elements)


def test_limit_one_is_a_single_coin():
    hits = sum(len(sample_sequence(2, 1, seed=k)) for k in range(2000))
    assert set(sample_sequence(2, 1, seed=0).elements.tolist()) <= {1}
    # Binomial(2000, 1/2): 4 sigma is ~ 89
    assert abs(hits - 1000) < 90


def test_override_hook():
    seq = sample_sequence(2, 25, seed=1, prob=lambda n: np.ones(n.shape))
    assert seq.elements.tolist() == list(range(1, 26))
    seq = sample_sequence(2, 25, seed=1, prob=lambda n: np.zeros(n.shape))
    assert len(seq) == 0


def test_invariants_and_immutability():
    seq = sample_sequence(2, 10_000, seed=3)
    assert np.all(np.diff(seq.elements) > 0)
    assert seq.elements[0] >= 1 and seq.elements[-1] <= 10_000
    with pytest.raises(ValueError):
        seq.elements[0] = 5


def test_domain_errors():
    with pytest.raises(ValueError):
        sample_sequence(1, 10, seed=0)
    with pytest.raises(ValueError):
        sample_sequence(2, 0, seed=0)
    with pytest.raises(ValueError):
        sample_sequence(2, 10, seed=-1)
    with pytest.raises(ValueError):
        sample_sequence(2, 10, seed=2**64)


def test_text_round_trip(tmp_path):
    seq = sample_sequence(3, 5_000, seed=2**64 - 1, trial_index=9)
    text = seq.to_text()
    assert text.splitlines()[0] == f"# s=3 N=5000 seed={2**64 - 1} trial=9"
    assert text.splitlines()[1:] == [str(x) for x in seq.elements]
    path = tmp_path / "seq.txt"
    seq.write(path)
    assert PseudoSequence.read(path) == seq


def test_from_text_rejects_missing_header():
    with pytest.raises(ValueError):
        PseudoSequence.from_text("1\n2\n")


def test_expected_count_small():
    assert expected_count(2, 1) == 0.5
    assert expected_count(3, 1) == pytest.approx(1 / 3)
    hand = 0.5 * (1 + 2**-0.5 + 3**-0.5 + 4**-0.5)
    assert expected_count(2, 4) == pytest.approx(hand, rel=1e-15)
    assert expected_count(2, 4) == pytest.approx(1.3922285, abs=1e-7)


def test_expected_count_direct_sum():
    n = np.arange(1, 10**6 + 1, dtype=float)
    direct = math.fsum(0.5 / np.sqrt(n))
    assert expected_count(2, 10**6) == pytest.approx(direct, rel=1e-12)
    # Euler-Maclaurin: sum n^(-1/2) = 2 sqrt(N) + zeta(1/2) + N^(-1/2)/2 + ...
    zeta_half = -1.4603545088095868
    assert expected_count(2, 10**6) == pytest.approx(0.5 * (2000 + zeta_half + 0.0005), abs=1e-6)
    assert math.sqrt(count_variance(2, 10**6)) == pytest.approx(31.5, abs=0.1)


def test_expected_count_asymptotic():
    assert abs(expected_count(2, 10**8) / 10**4 - 1) < 0.01


def test_counting_function_normality():
    trials, N = 100, 10**6
    sizes = [len(sample_sequence(2, N, seed=2024, trial_index=k)) for k in range(trials)]
    sigma = math.sqrt(count_variance(2, N))
    assert abs(np.mean(sizes) - expected_count(2, N)) < 4 * sigma / math.sqrt(trials)
