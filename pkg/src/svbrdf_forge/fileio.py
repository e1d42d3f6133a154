"""Atomic file writing shared by the binary and JSON serializers."""

from __future__ import annotations

import os
import tempfile


def atomic_write_bytes(path, payload: bytes) -> None:
    """Write via a temp file in the target directory plus os.replace, so a
    crash never leaves a half-written artifact under the final name."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp.",
                               suffix="." + os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))
