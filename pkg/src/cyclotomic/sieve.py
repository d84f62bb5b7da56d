import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..config.settings import settings
from ..errors import InputError

logger = logging.getLogger(__name__)


def simple_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p:limit + 1:p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def sieve_segment(low: int, high: int, base: np.ndarray) -> np.ndarray:
    """Odd primes in [low, high); low must be odd and base must reach sqrt(high)."""
    odd_count = (high - low + 1) // 2
    if odd_count <= 0:
        return np.array([], dtype=np.int64)
    mask = np.ones(odd_count, dtype=bool)
    for p in base:
        p = int(p)
        if p == 2:
            continue
        p2 = p * p
        if p2 >= high:
            break
        start = max(p2, ((low + p - 1) // p) * p)
        if (start & 1) == 0:
            start += p
        if start >= high:
            continue
        mask[(start - low) // 2::p] = False
    return low + 2 * np.flatnonzero(mask).astype(np.int64)


class PrimeSieve:
    """
    Odd-only segmented sieve. Segments run on a thread pool; per-segment
    results are merged in segment order, so output never depends on timing.
    """

    def __init__(self, segment_size: Optional[int] = None, workers: Optional[int] = None):
        self.segment_size = segment_size or settings.SIEVE_SEGMENT
        self.workers = workers or max(1, settings.JOBS)
        self._residues: Dict[Tuple[int, int], np.ndarray] = {}

    def segments(self, limit: int) -> List[Tuple[int, int]]:
        span = 2 * self.segment_size
        bounds = []
        low = 3
        while low <= limit:
            high = min(low + span, limit + 1)
            bounds.append((low, high))
            low += span
        return bounds

    def _map_segments(self, limit: int, job):
        base = simple_sieve(math.isqrt(limit) + 1)
        bounds = self.segments(limit)
        logger.info("sieving %d segment(s) up to %d", len(bounds), limit)
        if self.workers > 1 and len(bounds) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                return list(executor.map(lambda b: job(sieve_segment(b[0], b[1], base)), bounds))
        return [job(sieve_segment(low, high, base)) for low, high in bounds]

    def primes(self, limit: int) -> np.ndarray:
        if limit < 2:
            return np.array([], dtype=np.int64)
        parts = [np.array([2], dtype=np.int64)] + self._map_segments(limit, lambda seg: seg)
        return np.concatenate(parts)

    def count(self, limit: int) -> int:
        if limit < 2:
            return 0
        return 1 + sum(self._map_segments(limit, lambda seg: int(seg.size)))

    def residue_counts(self, n: int, limit: int) -> np.ndarray:
        """counts[r] = #{p <= limit prime : p = r mod n}, including primes dividing n."""
        if n < 1:
            raise InputError(f"modulus must be positive, got {n}")
        key = (n, limit)
        if key in self._residues:
            return self._residues[key].copy()

        counts = np.zeros(n, dtype=np.int64)
        if limit >= 2:
            counts[2 % n] += 1
            for part in self._map_segments(limit, lambda seg: np.bincount(seg % n, minlength=n)):
                counts += part
        self._residues[key] = counts
        return counts.copy()


# Global instances
prime_sieve = PrimeSieve()


# Convenience functions
def prime_counts(limit: int) -> int:
    return prime_sieve.count(limit)


def primes_upto(limit: int) -> np.ndarray:
    return prime_sieve.primes(limit)


def residue_counts(n: int, limit: int) -> np.ndarray:
    return prime_sieve.residue_counts(n, limit)
