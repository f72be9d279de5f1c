"""Shared CSV formatting: 17 significant digits, '#'-prefixed header blocks."""
from __future__ import annotations

import json


def fmt(x):
    return format(float(x), ".17g")


def comment_block(obj):
    """JSON-dump ``obj`` and prefix every line with '# '."""
    text = json.dumps(obj, indent=2, sort_keys=True, default=_jsonable)
    return "".join(f"# {line}\n" for line in text.splitlines())


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if hasattr(x, "tolist"):
        return x.tolist()
    if hasattr(x, "value"):
        return x.value
    raise TypeError(f"cannot serialize {type(x).__name__}")


def write_rows(fh, header, rows):
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(fmt(v) for v in row) + "\n")
