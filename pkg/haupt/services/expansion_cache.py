"""
Expansion Cache Service

Keeps normalized Hauptmodul expansions in memory so repeated checks on the same
symbol do not re-expand. One entry per symbol holds the longest expansion seen;
requests for a shorter window are served by truncation. LRU eviction.
"""

import threading
from collections import OrderedDict
from typing import Any

from haupt.services.qseries import LaurentSeries
from haupt.utils.logger import get_logger


# Service-tagged logger for this module
logger = get_logger("Cache")


class ExpansionCache:
    """In-memory LRU cache of q-expansions keyed by symbol."""

    def __init__(self, max_size: int = 64):
        """
        Initialize expansion cache.

        Args:
            max_size: Maximum number of cached symbols
        """
        self.max_size = max_size
        self.cache: OrderedDict[str, LaurentSeries] = OrderedDict()
        self.stats = {
            "hits": 0,
            "misses": 0,
            "evictions": 0,
            "invalidations": 0,
        }
        self._lock = threading.Lock()

    def get(self, symbol: str, high: int) -> LaurentSeries | None:
        """
        Get a cached expansion known through ``high - 1``.

        Returns:
            The expansion truncated to ``high``, or None if nothing long enough is cached
        """
        with self._lock:
            entry = self.cache.get(symbol)
            if entry is None or entry.high < high:
                self.stats["misses"] += 1
                return None
            self.cache.move_to_end(symbol)
            self.stats["hits"] += 1

        logger.debug("✅ Cache hit", symbol=symbol, high=high)
        return entry.truncate(high)

    def set(self, symbol: str, series: LaurentSeries) -> None:
        """Cache an expansion unless a longer one is already stored."""
        with self._lock:
            current = self.cache.get(symbol)
            if current is not None and current.high >= series.high:
                return

            # Evict oldest entry if cache is full
            if current is None and len(self.cache) >= self.max_size:
                self.cache.popitem(last=False)
                self.stats["evictions"] += 1

            self.cache[symbol] = series
            self.cache.move_to_end(symbol)

        logger.debug("💾 Cached expansion", symbol=symbol, high=series.high)

    def invalidate(self, symbol: str | None = None) -> int:
        """
        Drop one symbol, or everything when ``symbol`` is None.

        Returns:
            Number of entries removed
        """
        with self._lock:
            if symbol is None:
                count = len(self.cache)
                self.cache.clear()
            else:
                count = 1 if self.cache.pop(symbol, None) is not None else 0
            self.stats["invalidations"] += count
        return count

    def get_stats(self) -> dict[str, Any]:
        """Get cache statistics."""
        with self._lock:
            total_requests = self.stats["hits"] + self.stats["misses"]
            hit_rate = (self.stats["hits"] / total_requests * 100) if total_requests > 0 else 0
            return {
                "size": len(self.cache),
                "max_size": self.max_size,
                "hits": self.stats["hits"],
                "misses": self.stats["misses"],
                "evictions": self.stats["evictions"],
                "invalidations": self.stats["invalidations"],
                "hit_rate_percent": round(hit_rate, 2),
            }
