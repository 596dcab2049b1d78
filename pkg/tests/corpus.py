"""Seeded differential-testing corpus shared by the test modules."""

from functools import lru_cache

from katomic.generators import gen_random_small
from katomic.history import normalize

CORPUS_SIZE = 10_000


def corpus_history(seed: int):
    return gen_random_small(seed, 1 + seed % 10)


@lru_cache(maxsize=1)
def corpus():
    """(seed, normalized history) pairs, n <= 10."""
    return [(s, normalize(corpus_history(s))) for s in range(CORPUS_SIZE)]
