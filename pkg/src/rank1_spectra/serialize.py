"""Deterministic serialization: JSON with 17-significant-digit floats, CSV, manifests.

Every output file embeds a run manifest (command, argument vector, sigma
text, seed, library version, timestamp).  The numeric payload serializes
identically across reruns of the same configuration; only the manifest
timestamp varies.
"""

from __future__ import annotations

import math
from datetime import datetime, timezone
from typing import Any, Optional

import numpy as np

__all__ = ["fmt17", "dumps_json", "run_manifest", "histogram_csv"]

LIBRARY_VERSION = "0.1.0"


def fmt17(x: float) -> str:
    """A float rendered with 17 significant digits (exact round-trip)."""
    return format(float(x), ".17g")


def _encode(obj: Any, out: list, indent: int, level: int) -> None:
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(_quote(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            # JSON has no inf/nan; callers carry explicit flags instead
            out.append("null")
        else:
            out.append(fmt17(x))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for idx, (key, value) in enumerate(obj.items()):
            out.append(pad_in)
            out.append(_quote(str(key)))
            out.append(": ")
            _encode(value, out, indent, level + 1)
            out.append(",\n" if idx + 1 < len(obj) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for idx, value in enumerate(seq):
            out.append(pad_in)
            _encode(value, out, indent, level + 1)
            out.append(",\n" if idx + 1 < len(seq) else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _quote(s: str) -> str:
    escaped = (
        s.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )
    return f'"{escaped}"'


def dumps_json(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text: insertion-ordered keys, 17-digit floats."""
    out: list = []
    _encode(obj, out, indent, 0)
    out.append("\n")
    return "".join(out)


def run_manifest(
    command: str,
    argv: list,
    sigma_text: str,
    seed: Optional[int],
) -> dict:
    return {
        "command": command,
        "argv": list(argv),
        "sigma": sigma_text,
        "seed": seed,
        "version": LIBRARY_VERSION,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def histogram_csv(bin_edges: np.ndarray, counts: np.ndarray) -> str:
    """CSV text ``bin_lo,bin_hi,count`` with 17-significant-digit edges."""
    lines = ["bin_lo,bin_hi,count"]
    for k in range(len(counts)):
        lines.append(f"{fmt17(bin_edges[k])},{fmt17(bin_edges[k + 1])},{int(counts[k])}")
    return "\n".join(lines) + "\n"
