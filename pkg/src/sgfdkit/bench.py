"""Balanced vs non-balanced timing comparison on identical inputs.

Both schemes run with the same coefficient set, model, geometry and
traversal order, so the measured ratio isolates operator length. The
operator-term counters are exact and hardware independent; wall-clock
medians carry the per-repetition spread. For half-length M the counter
ratio is (M+1)/(2M).
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, replace

from .errors import ConfigError
from .kernel import run_simulation, term_count_per_cell
from .model import ElasticModel, SimulationConfig


@dataclass(frozen=True)
class BenchReport:
    m: int
    steps: int
    grid: tuple[int, int]
    repetitions: int
    seconds_per_step_balanced: float
    seconds_per_step_nonbalanced: float
    times_balanced: tuple[float, ...]
    times_nonbalanced: tuple[float, ...]
    counter_ratio: float
    wall_ratio: float

    @property
    def model_ratio(self) -> float:
        """(M+1)/(2M), the operator-count prediction."""
        return (self.m + 1) / (2 * self.m)

    def format(self) -> str:
        lines = [
            f"m={self.m}",
            f"grid={self.grid[0]}x{self.grid[1]}",
            f"steps={self.steps}",
            f"repetitions={self.repetitions}",
            f"median_s_per_step_balanced={self.seconds_per_step_balanced:.9g}",
            f"median_s_per_step_non_balanced={self.seconds_per_step_nonbalanced:.9g}",
            f"counter_ratio={self.counter_ratio:.9g}",
            f"wall_ratio={self.wall_ratio:.9g}",
            f"model_ratio={self.model_ratio:.9g}",
            "times_balanced=" + ",".join(f"{t:.9g}" for t in self.times_balanced),
            "times_non_balanced=" + ",".join(f"{t:.9g}" for t in self.times_nonbalanced),
        ]
        return "\n".join(lines) + "\n"


def run_benchmark(
    config: SimulationConfig,
    model: ElasticModel,
    repetitions: int = 5,
    threads: int = 1,
) -> BenchReport:
    """Median per-step wall clock for both schemes plus the exact counter ratio.

    The configuration must be stable under both schemes (the balanced
    bound is the stricter one for the same weights). Scheme order
    alternates across repetitions to decorrelate slow drift.
    """
    if repetitions < 3:
        raise ConfigError(f"need at least 3 repetitions for a median, got {repetitions}")
    if config.nt < 10:
        raise ConfigError("benchmark runs need nt >= 10 steps")
    configs = {
        "balanced": replace(config, scheme="balanced"),
        "non_balanced": replace(config, scheme="non_balanced"),
    }
    times = {"balanced": [], "non_balanced": []}
    terms = {}
    for rep in range(repetitions):
        order = ("balanced", "non_balanced") if rep % 2 == 0 else ("non_balanced", "balanced")
        for scheme in order:
            res = run_simulation(configs[scheme], model, threads=threads)
            times[scheme].append(res.stats.wall_seconds / res.stats.steps)
            terms[scheme] = res.stats.term_evals
    med_b = statistics.median(times["balanced"])
    med_n = statistics.median(times["non_balanced"])
    counter_ratio = terms["non_balanced"] / terms["balanced"]
    expected = term_count_per_cell("non_balanced", config.coeffs.m) / term_count_per_cell(
        "balanced", config.coeffs.m
    )
    assert abs(counter_ratio - expected) < 1e-12, "term counters drifted from the cost model"
    return BenchReport(
        m=config.coeffs.m,
        steps=config.nt,
        grid=config.geometry.shape,
        repetitions=repetitions,
        seconds_per_step_balanced=med_b,
        seconds_per_step_nonbalanced=med_n,
        times_balanced=tuple(times["balanced"]),
        times_nonbalanced=tuple(times["non_balanced"]),
        counter_ratio=counter_ratio,
        wall_ratio=med_n / med_b,
    )
