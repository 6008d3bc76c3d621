"""Deterministic text serialization shared by exporters and the CLI.

Floats are written with 17 significant digits so every value round-trips
losslessly and files compare byte-for-byte across runs.
"""

from __future__ import annotations

import json
import os


def fmt(value) -> str:
    """Format one CSV cell deterministically."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path, header, rows) -> None:
    """Write rows of plain values as CSV with a one-line header."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_json(path, obj) -> None:
    """Write a JSON document with stable key order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sidecar_path(csv_path, suffix=".meta.json") -> str:
    base, _ = os.path.splitext(str(csv_path))
    return base + suffix
