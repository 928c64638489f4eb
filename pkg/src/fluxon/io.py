"""Deterministic CSV/JSON output helpers."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from typing import Iterable, Optional, Sequence


def format_float(x: Optional[float]) -> str:
    """Shortest round-trip decimal form (at most 17 significant digits)."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def render_csv(header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    """CSV text with ``# ``-prefixed comment lines and fixed float formatting."""
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([
            format_float(v) if isinstance(v, float) or v is None else v for v in row
        ])
    return buf.getvalue()
