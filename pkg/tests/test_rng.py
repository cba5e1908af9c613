import numpy as np
import pytest

from netcontagion import rng
from netcontagion.errors import ConfigurationError


def test_streams_are_reproducible_and_distinct():
    a = rng.stream(7, rng.PERMUTATION, 3).random(5)
    assert np.array_equal(a, rng.stream(7, rng.PERMUTATION, 3).random(5))
    assert not np.array_equal(a, rng.stream(7, rng.PERMUTATION, 4).random(5))
    assert not np.array_equal(a, rng.stream(7, rng.COHORT, 3).random(5))
    assert not np.array_equal(a, rng.stream(8, rng.PERMUTATION, 3).random(5))


@pytest.mark.parametrize("bad", [-1, 2**64, 1.5, "3", True])
def test_bad_seeds(bad):
    with pytest.raises(ConfigurationError):
        rng.check_seed(bad)


def test_max_seed_ok():
    rng.stream(rng.MAX_SEED, rng.PERMUTATION).random()


def test_thread_env(monkeypatch):
    monkeypatch.setenv(rng.THREADS_ENV, "4")
    assert rng.default_threads() == 4
    monkeypatch.setenv(rng.THREADS_ENV, "zero")
    with pytest.raises(ConfigurationError):
        rng.default_threads()
    monkeypatch.setenv(rng.THREADS_ENV, "0")
    with pytest.raises(ConfigurationError):
        rng.default_threads()
    monkeypatch.delenv(rng.THREADS_ENV)
    assert rng.default_threads() == 1


def test_fresh_seed_in_range():
    assert 0 <= rng.fresh_seed() <= rng.MAX_SEED
