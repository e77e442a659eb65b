"""Tests for the expansion LRU cache."""

from haupt.services.expansion_cache import ExpansionCache
from haupt.services.qseries import LaurentSeries


def series(high: int) -> LaurentSeries:
    return LaurentSeries(-1, list(range(high + 1)))


def test_miss_then_hit():
    cache = ExpansionCache(max_size=4)
    assert cache.get("2+", 10) is None
    cache.set("2+", series(10))
    hit = cache.get("2+", 10)
    assert hit is not None
    assert hit.high == 10


def test_shorter_request_is_truncated():
    cache = ExpansionCache()
    cache.set("5", series(20))
    hit = cache.get("5", 8)
    assert hit is not None
    assert (hit.low, hit.high) == (-1, 8)
    assert hit.coefficient(7) == 8


def test_longer_request_misses():
    cache = ExpansionCache()
    cache.set("5", series(10))
    assert cache.get("5", 11) is None


def test_keeps_longest_expansion():
    cache = ExpansionCache()
    cache.set("7", series(30))
    cache.set("7", series(5))
    assert cache.get("7", 30) is not None


def test_lru_eviction():
    cache = ExpansionCache(max_size=2)
    cache.set("2", series(5))
    cache.set("3", series(5))
    cache.get("2", 5)
    cache.set("4", series(5))

    assert cache.get("3", 5) is None
    assert cache.get("2", 5) is not None
    assert cache.get_stats()["evictions"] == 1


def test_invalidate():
    cache = ExpansionCache()
    cache.set("2", series(5))
    cache.set("3", series(5))
    assert cache.invalidate("2") == 1
    assert cache.invalidate("2") == 0
    assert cache.invalidate() == 1
    assert cache.get_stats()["size"] == 0


def test_stats():
    cache = ExpansionCache(max_size=8)
    cache.get("2", 5)
    cache.set("2", series(5))
    cache.get("2", 5)
    stats = cache.get_stats()
    assert stats["hits"] == 1
    assert stats["misses"] == 1
    assert stats["hit_rate_percent"] == 50.0
    assert stats["max_size"] == 8
