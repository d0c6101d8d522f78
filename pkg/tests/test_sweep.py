import logging
import math

import numpy as np
import pytest

from shared.sweep import THREADS_ENV, chunk_sum, sweep_sum, weighted_sum, worker_count


class TestWorkerCount:
    def test_env_cap(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "3")
        assert worker_count() == 3

    @pytest.mark.parametrize("raw", ["zero", "0", "-2"])
    def test_invalid_falls_back(self, monkeypatch, caplog, raw):
        monkeypatch.setenv(THREADS_ENV, raw)
        with caplog.at_level(logging.WARNING, logger="shared.sweep"):
            assert worker_count() >= 1
        assert THREADS_ENV in caplog.text


class TestSums:
    def test_independent_of_thread_count(self, monkeypatch, rng):
        values = rng.normal(size=10_000) * np.exp(rng.uniform(-30, 30, 10_000))
        monkeypatch.setenv(THREADS_ENV, "1")
        single = sweep_sum(lambda v: v, [values], chunk_size=97)
        monkeypatch.setenv(THREADS_ENV, "8")
        many = sweep_sum(lambda v: v, [values], chunk_size=97)
        assert single == many

    def test_close_to_exact_sum(self, rng):
        values = rng.uniform(0, 1, 5000)
        assert sweep_sum(lambda v: v, [values], chunk_size=64) == pytest.approx(math.fsum(values), rel=1e-15)

    def test_tuple_output(self):
        a = np.arange(10.0)
        total, squares = sweep_sum(lambda x: (x, x * x), [a], chunk_size=3)
        assert (total, squares) == (45.0, 285.0)

    def test_weighted(self):
        assert weighted_sum(np.full(4, 0.5), np.array([1.0, 2.0, 3.0, 4.0])) == 5.0

    def test_empty(self):
        assert sweep_sum(lambda v: v, [np.array([])]) == 0.0

    def test_chunks_see_fixed_bounds(self, monkeypatch):
        seen = []

        def record(lo, hi):
            seen.append((lo, hi))
            return np.arange(lo, hi, dtype=float)

        monkeypatch.setenv(THREADS_ENV, "1")
        assert chunk_sum(record, 10, chunk_size=4) == 45.0
        assert seen == [(0, 4), (4, 8), (8, 10)]

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            sweep_sum(lambda x, y: x * y, [np.ones(3), np.ones(4)])
