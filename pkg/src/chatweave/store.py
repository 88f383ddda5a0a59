"""Append-only line-delimited record log.

Appends are serialized behind a lock (single-writer discipline); reads see
a consistent in-memory snapshot no older than the last completed append.
Replaying the file reproduces the store state exactly, and ``compact``
rewrites the log keeping only the last record per key.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Any, Callable, Iterable


class RecordLog:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: list[dict[str, Any]] = []
        if self.path.exists():
            self._records = list(self._read_file())

    def _read_file(self) -> Iterable[dict[str, Any]]:
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)

    def append(self, record: dict[str, Any]) -> None:
        line = json.dumps(record, sort_keys=True, ensure_ascii=False)
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._records.append(json.loads(line))

    def records(self) -> list[dict[str, Any]]:
        with self._lock:
            return list(self._records)

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def compact(self, key: Callable[[dict[str, Any]], Any]) -> int:
        """Atomically rewrite the log keeping the last record per key.

        Returns the number of records dropped.
        """
        with self._lock:
            latest: dict[Any, dict[str, Any]] = {}
            for record in self._records:
                latest[key(record)] = record
            kept = [record for record in self._records if latest[key(record)] is record]
            tmp = self.path.with_suffix(self.path.suffix + ".tmp")
            with tmp.open("w", encoding="utf-8") as fh:
                for record in kept:
                    fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            tmp.replace(self.path)
            dropped = len(self._records) - len(kept)
            self._records = kept
            return dropped
