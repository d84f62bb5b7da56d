import json
import logging
import os
import threading
from typing import Any, Dict, Optional

from ..config.settings import settings
from .io import DataIO

logger = logging.getLogger(__name__)


class CohomologyCache:
    """
    Smith-normal-form results keyed by instance hash.

    Always kept in memory; also mirrored to JSON files when a cache directory
    is configured. Inserts are idempotent, so concurrent writers are harmless.
    """

    def __init__(self, directory: Optional[str] = None):
        self.directory = directory
        self._memory: Dict[str, Dict[str, Any]] = {}
        self._lock = threading.Lock()

    def _path(self, key: str) -> str:
        return os.path.join(self.directory, f"{key}.json")

    def get(self, key: str) -> Optional[Dict[str, Any]]:
        with self._lock:
            if key in self._memory:
                return self._memory[key]
        if not self.directory:
            return None
        path = self._path(key)
        if not os.path.exists(path):
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning("ignoring unreadable cache entry %s: %s", path, e)
            return None
        logger.debug("cache hit on disk: %s", key)
        with self._lock:
            self._memory[key] = data
        return data

    def put(self, key: str, data: Dict[str, Any]) -> None:
        with self._lock:
            if key in self._memory:
                return
            self._memory[key] = data
        if not self.directory:
            return
        path = self._path(key)
        if os.path.exists(path):
            return
        try:
            DataIO.ensure_dir(self.directory)
            tmp = f"{path}.{os.getpid()}.tmp"
            with open(tmp, "w", encoding="utf-8") as f:
                json.dump(data, f, sort_keys=True)
            os.replace(tmp, path)
        except OSError as e:
            logger.warning("could not write cache entry %s: %s", path, e)

    def clear(self) -> None:
        with self._lock:
            self._memory.clear()


# Global instances
cohomology_cache = CohomologyCache(settings.CACHE_DIR)
