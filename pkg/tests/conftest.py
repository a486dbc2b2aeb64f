"""Shared helpers for the test suite."""

import numpy as np
from scipy import stats


def corner_entry_cdf(n: int):
    """CDF of the top-left entry of a Haar SO(n) matrix.

    The entry is distributed like 2 B - 1 with B ~ Beta((n-1)/2, (n-1)/2),
    i.e. with density proportional to (1 - x^2)^((n-3)/2) on [-1, 1].
    """
    return stats.beta((n - 1) / 2.0, (n - 1) / 2.0, loc=-1.0, scale=2.0).cdf


def ks_pvalue(samples: np.ndarray, cdf) -> float:
    return float(stats.kstest(samples, cdf).pvalue)
