"""Paired bootstrap significance test over per-note scores.

The sample unit is a note. Each iteration resamples notes with replacement
and recomputes the mean score difference (system A minus system B); the
one-sided p-value is the fraction of resampled differences at or below zero,
testing whether A beats B. Iteration k draws from an independent substream
derived from (seed, k), so results are byte-identical regardless of worker
count or execution order. When the full resample space n**n is no larger
than the requested iteration count, it is enumerated exactly instead of
sampled.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

DEFAULT_ITERATIONS = 10_000
SIGNIFICANCE_LEVEL = 0.05


class MisalignedSamplesError(ValueError):
    """Per-note score lists do not pair up (MISALIGNED_SAMPLES)."""


@dataclass(frozen=True)
class SigTestResult:
    doc_ids: tuple[str, ...]
    diffs: tuple[float, ...]
    observed_diff: float
    p_value: float
    iterations: int
    evaluated: int
    seed: int
    method: str  # "exhaustive" | "sampled"

    @property
    def significant(self) -> bool:
        return self.p_value < SIGNIFICANCE_LEVEL

    def to_record(self) -> dict:
        return {
            "n_notes": len(self.doc_ids),
            "observed_diff": self.observed_diff,
            "p_value": self.p_value,
            "significant": self.significant,
            "iterations": self.iterations,
            "evaluated": self.evaluated,
            "seed": self.seed,
            "method": self.method,
        }


def bootstrap_test(
    per_note_a: list[tuple[str, float]],
    per_note_b: list[tuple[str, float]],
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    workers: int = 1,
) -> SigTestResult:
    """One-sided paired bootstrap of the mean per-note difference A - B."""
    if len(per_note_a) != len(per_note_b) or len(per_note_a) < 2:
        raise MisalignedSamplesError(
            f"MISALIGNED_SAMPLES: got {len(per_note_a)} vs {len(per_note_b)} notes "
            "(need equal lists with n >= 2)"
        )
    ids_a = tuple(doc_id for doc_id, _ in per_note_a)
    ids_b = tuple(doc_id for doc_id, _ in per_note_b)
    if ids_a != ids_b:
        raise MisalignedSamplesError(
            "MISALIGNED_SAMPLES: note ids differ or are ordered differently"
        )

    diffs = np.array(
        [a - b for (_, a), (_, b) in zip(per_note_a, per_note_b)], dtype=float
    )
    n = len(diffs)

    if n**n <= iterations:
        evaluated = n**n
        at_or_below = sum(
            1 for idx in product(range(n), repeat=n) if diffs[list(idx)].mean() <= 0.0
        )
        method = "exhaustive"
    else:
        evaluated = iterations

        def count_chunk(bounds: tuple[int, int]) -> int:
            lo, hi = bounds
            hits = 0
            for k in range(lo, hi):
                rng = np.random.default_rng([seed, k])
                sample = diffs[rng.integers(0, n, size=n)]
                if sample.mean() <= 0.0:
                    hits += 1
            return hits

        if workers <= 1:
            at_or_below = count_chunk((0, iterations))
        else:
            step = -(-iterations // workers)
            chunks = [
                (lo, min(lo + step, iterations))
                for lo in range(0, iterations, step)
            ]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                at_or_below = sum(pool.map(count_chunk, chunks))
        method = "sampled"

    return SigTestResult(
        doc_ids=ids_a,
        diffs=tuple(float(d) for d in diffs),
        observed_diff=float(diffs.mean()),
        p_value=at_or_below / evaluated,
        iterations=iterations,
        evaluated=evaluated,
        seed=seed,
        method=method,
    )
