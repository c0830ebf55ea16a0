"""Throughput benchmark: naive vs vectorized likelihood, plus training epochs.

Timings use a warmup run followed by the median of three measured runs. The
naive reference is capped (default 20k examples) because it is deliberately a
Python triple loop; when the requested size exceeds the cap the reported
ratio is measured at the cap and flagged as extrapolated.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .labels import LabelSpace, PlfSpec, VoteMatrix
from .model import ModelParams, naive_marginal_loglik, precompute_batch, vectorized_marginal_loglik
from .synthetic import random_params, random_plf_specs, sample
from .training import TrainConfig, fit

DEFAULT_NAIVE_CAP = 20_000
TIMING_REPEATS = 3


@dataclass(frozen=True)
class BenchResult:
    """Timing summary.

    ``vectorized_seconds`` times the likelihood evaluation on precomputed
    indicator tensors (the steady-state cost paid on every training step);
    ``vectorized_cold_seconds`` additionally rebuilds the tensors from the
    raw votes. ``speedup`` compares the naive triple loop against the former,
    ``speedup_cold`` against the latter.
    """

    m: int
    n: int
    k: int
    likelihood_m: int
    naive_seconds: float
    vectorized_seconds: float
    vectorized_cold_seconds: float
    speedup: float
    speedup_cold: float
    extrapolated: bool
    epochs: int
    train_seconds: float
    seconds_per_epoch: float
    examples_per_second: float

    def summary_lines(self) -> list[str]:
        note = " (naive capped; ratio measured at the cap)" if self.extrapolated else ""
        return [
            f"problem: m={self.m} n={self.n} k={self.k}",
            f"likelihood at m={self.likelihood_m}: naive {self.naive_seconds:.3f}s, "
            f"vectorized {self.vectorized_seconds * 1e3:.2f}ms "
            f"(+{self.vectorized_cold_seconds * 1e3:.2f}ms rebuilding indicator tensors)",
            f"speedup: {self.speedup:.0f}x on precomputed tensors, "
            f"{self.speedup_cold:.0f}x including precompute{note}",
            f"training: {self.epochs} epoch(s) in {self.train_seconds:.2f}s "
            f"({self.seconds_per_epoch:.2f}s/epoch, "
            f"{self.examples_per_second:,.0f} examples/s)",
        ]


def _time_median(fn: Callable[[], object], repeats: int = TIMING_REPEATS) -> float:
    fn()  # warmup
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def time_likelihood_paths(
    specs: Sequence[PlfSpec],
    params: ModelParams,
    votes: VoteMatrix,
    repeats: int = TIMING_REPEATS,
) -> tuple[float, float, float]:
    """Median wall times on the same votes.

    Returns ``(naive, vectorized, vectorized_cold)``: the naive triple loop,
    the vectorized evaluation on already precomputed tensors, and the
    vectorized evaluation rebuilding the tensors from the votes each run.
    """
    naive = _time_median(lambda: naive_marginal_loglik(specs, params, votes), repeats)

    batch = precompute_batch(specs, votes)
    warm = _time_median(lambda: vectorized_marginal_loglik(batch, params), repeats)

    def cold() -> float:
        return vectorized_marginal_loglik(precompute_batch(specs, votes), params)

    return naive, warm, _time_median(cold, repeats)


def run_bench(
    m: int = 100_000,
    n: int = 10,
    k: int = 4,
    seed: int = 0,
    epochs: int = 1,
    batch_size: int = 256,
    naive_cap: int = DEFAULT_NAIVE_CAP,
) -> BenchResult:
    """Generate a synthetic problem and time both likelihood paths plus training."""
    rng = np.random.Generator(np.random.Philox(seed))
    space = LabelSpace(k)
    specs = random_plf_specs(space, n, rng)
    params = random_params(n, k, rng, alpha_range=(0.65, 0.95), beta_range=(0.5, 0.9))
    data = sample(specs, params, m, seed)

    like_m = min(m, naive_cap)
    like_votes = data.votes.select_rows(np.arange(like_m))
    naive_s, vec_s, cold_s = time_likelihood_paths(specs, params, like_votes)

    config = TrainConfig(batch_size=batch_size, epochs=epochs, seed=seed)
    report = fit(specs, data.votes, config)

    per_epoch = report.seconds / epochs
    return BenchResult(
        m=m,
        n=n,
        k=k,
        likelihood_m=like_m,
        naive_seconds=naive_s,
        vectorized_seconds=vec_s,
        vectorized_cold_seconds=cold_s,
        speedup=naive_s / vec_s if vec_s > 0 else float("inf"),
        speedup_cold=naive_s / cold_s if cold_s > 0 else float("inf"),
        extrapolated=like_m < m,
        epochs=epochs,
        train_seconds=report.seconds,
        seconds_per_epoch=per_epoch,
        examples_per_second=m * epochs / report.seconds if report.seconds > 0 else float("inf"),
    )
