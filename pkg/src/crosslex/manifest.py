"""Run manifests: line-oriented "key<TAB>value" records.

A manifest accompanies every output artifact and pins the subcommand,
resolved parameters, input digests, seed and tool version, so that an
identical manifest reproduces single-threaded outputs bit-exactly.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path


def file_digest(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(
    path: str | os.PathLike,
    subcommand: str,
    params: dict,
    inputs: dict[str, str | os.PathLike],
    seed: int | None,
    version: str,
) -> None:
    lines = [
        ("subcommand", subcommand),
        ("version", version),
        ("seed", "" if seed is None else str(seed)),
    ]
    for name in sorted(params):
        lines.append((f"param.{name}", str(params[name])))
    for name in sorted(inputs):
        p = Path(inputs[name])
        lines.append((f"input.{name}.path", str(p)))
        lines.append((f"input.{name}.sha256", file_digest(p)))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key, value in lines:
            f.write(f"{key}\t{value}\n")


def read_manifest(path: str | os.PathLike) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            key, _, value = line.partition("\t")
            out[key] = value
    return out
