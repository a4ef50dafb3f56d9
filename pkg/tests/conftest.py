import itertools

import numpy as np
import pytest

from cantorgauge.core import GapTable


def random_table(rng, depth, decreasing=False, spread=3.0):
    """Binary gap table with log-uniform gaps and leaves.

    ``decreasing`` sorts gaps in global order and leaves left to right, so
    the result satisfies the decreasing-gap hypothesis.
    """
    n_gaps = 2 ** depth - 1
    gaps = 10.0 ** rng.uniform(-spread, 0.0, n_gaps)
    leaves = 10.0 ** rng.uniform(-spread, 0.0, 2 ** depth)
    if decreasing:
        gaps = np.sort(gaps)[::-1]
        leaves = np.sort(leaves)[::-1]
    levels = [gaps[2 ** k - 1: 2 ** (k + 1) - 1].reshape(-1, 1) for k in range(depth)]
    return GapTable(levels, leaves)


def failing_table():
    """Root gap 0.1 with |I_1| = 0.8 and |I_10| = 0.1: the left-proportion ratio is 2/9."""
    return GapTable([[[0.1]], [[0.1], [0.1]]], [0.6, 0.1, 0.1, 0.6])


def brute_force_cover(lengths, between, lefts, h):
    """Minimum over all 2^(N-1) contiguous partitions, evaluated pointwise."""
    N = len(lengths)
    cost = np.full((N, N), np.inf)
    for a in range(N):
        for b in range(a, N):
            d = sum(lengths[a:b + 1]) + sum(between[a:b])
            cost[a, b] = float(h(lefts[a] + 0.5 * d, d))
    cost = cost.tolist()
    best = np.inf
    best_spans = None
    for cuts in itertools.product((0, 1), repeat=N - 1):
        spans, start = [], 0
        for i, c in enumerate(cuts):
            if c:
                spans.append((start, i))
                start = i + 1
        spans.append((start, N - 1))
        total = sum(cost[a][b] for a, b in spans)
        if total < best:
            best, best_spans = total, spans
    return best, best_spans


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def bad_table():
    return failing_table()
