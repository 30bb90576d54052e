"""Deterministic low-discrepancy sampling over chart parameter boxes."""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc

DEFAULT_SEED = 0x5EED
DEFAULT_SAMPLES = 512


def sample_box(chart, count: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Halton points mapped into the chart's parameter box.

    The sequence is scrambled with a fixed seed, so identical configuration
    yields bit-identical samples.
    """
    lo, hi = chart.box
    lo, hi = np.asarray(lo), np.asarray(hi)
    engine = qmc.Halton(d=chart.dim, scramble=True, seed=seed)
    unit = engine.random(count)
    return lo + unit * (hi - lo)


def resolve_samples(imm, samples, count=DEFAULT_SAMPLES, seed=DEFAULT_SEED) -> np.ndarray:
    """Accept explicit sample arrays or draw the default deterministic set."""
    if samples is None:
        return sample_box(imm.chart, count, seed)
    return np.atleast_2d(np.asarray(samples, dtype=float))
