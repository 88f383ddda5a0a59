"""Pipeline artifact I/O.

Every artifact is line-delimited JSON whose first line is a header record
carrying the tool version, the RNG seed, and SHA-256 digests of the inputs
it was derived from, so any output can be traced back to exact inputs.
Writers sort keys and avoid timestamps, which makes reruns byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping

from . import __version__


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def make_header(seed: int, inputs: Mapping[str, str | Path] | None = None) -> dict[str, Any]:
    return {
        "kind": "header",
        "tool": "chatweave",
        "version": __version__,
        "seed": seed,
        "inputs": {
            name: sha256_file(path) for name, path in sorted((inputs or {}).items())
        },
    }


def dumps(record: Mapping[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def write_artifact(
    path: str | Path,
    records: Iterable[Mapping[str, Any]],
    seed: int,
    inputs: Mapping[str, str | Path] | None = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(dumps(make_header(seed, inputs)) + "\n")
        for record in records:
            fh.write(dumps(record) + "\n")
    return path


def read_artifact(path: str | Path) -> Iterator[dict[str, Any]]:
    """Records of an artifact file, header line skipped."""
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if isinstance(record, dict) and record.get("kind") == "header":
                continue
            yield record


def read_header(path: str | Path) -> dict[str, Any] | None:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                record = json.loads(line)
                if isinstance(record, dict) and record.get("kind") == "header":
                    return record
                return None
    return None


class DirectoryLock:
    """Single-instance guard per artifact directory.

    Creation is O_EXCL-atomic; a lock whose owning pid is gone is treated
    as stale and replaced.
    """

    def __init__(self, directory: str | Path, name: str = ".chatweave.lock"):
        self.path = Path(directory) / name

    def __enter__(self) -> "DirectoryLock":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            if self._stale():
                self.path.unlink(missing_ok=True)
                fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            else:
                raise RuntimeError(
                    f"artifact directory is locked by another process: {self.path}"
                ) from None
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        return self

    def _stale(self) -> bool:
        try:
            pid = int(self.path.read_text().strip() or "0")
        except (OSError, ValueError):
            return True
        if pid <= 0:
            return True
        try:
            os.kill(pid, 0)
        except ProcessLookupError:
            return True
        except PermissionError:
            return False
        return pid == os.getpid()

    def __exit__(self, *exc_info: object) -> None:
        self.path.unlink(missing_ok=True)
