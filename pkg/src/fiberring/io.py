"""CSV/JSON file helpers: '#'-prefixed key=value metadata, atomic writes, exact float round-trip."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np


def format_float(x: float) -> str:
    # repr() is the shortest string that parses back to the identical double
    return repr(float(x))


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(
    header: Sequence[str],
    columns: Sequence[Sequence[float]],
    metadata: Mapping[str, object] | None = None,
) -> str:
    lines = []
    for key, value in (metadata or {}).items():
        lines.append(f"# {key}={value}")
    lines.append(",".join(header))
    n = len(columns[0]) if columns else 0
    if any(len(c) != n for c in columns):
        raise ValueError("all CSV columns must have equal length")
    cols = [[format_float(v) for v in c] for c in columns]
    lines.extend(",".join(row) for row in zip(*cols))
    return "\n".join(lines) + "\n"


def write_csv(
    path: str | os.PathLike,
    header: Sequence[str],
    columns: Sequence[Sequence[float]],
    metadata: Mapping[str, object] | None = None,
) -> Path:
    return atomic_write_text(path, csv_text(header, columns, metadata))


def read_csv(
    path: str | os.PathLike, expected_header: Sequence[str] | None = None
) -> tuple[dict[str, np.ndarray], dict[str, str]]:
    """
    Read a numeric CSV written by :func:`write_csv`.

    Returns ``(columns, metadata)``; metadata values are left as strings.
    """
    metadata: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    metadata[key.strip()] = value.strip()
                continue
            if header is None:
                header = [h.strip() for h in line.split(",")]
                if expected_header is not None and header != list(expected_header):
                    raise ValueError(
                        f"{path}: expected header {','.join(expected_header)!r}, "
                        f"got {line!r}"
                    )
                continue
            fields = line.split(",")
            if len(fields) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields")
            rows.append([float(f) for f in fields])
    if header is None:
        raise ValueError(f"{path}: no header line")
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, i].copy() for i, name in enumerate(header)}, metadata


def write_json(path: str | os.PathLike, obj: object) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def array_digest(*arrays: np.ndarray) -> str:
    """SHA-256 over the little-endian float64 bytes of the given arrays."""
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype="<f8").tobytes())
    return h.hexdigest()
