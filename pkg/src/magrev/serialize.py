"""Deterministic CSV/JSON writers shared by the library and the CLI.

Floats are rendered with 17 significant digits so every written value
round-trips to the exact double; output uses LF line endings and carries
no timestamps unless explicitly requested, making reruns byte-identical.
"""

from __future__ import annotations

import io
import numbers
from typing import Iterable, Sequence

import numpy as np


def fmt_float(x) -> str:
    return format(float(x), ".17g")


def write_csv(target, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Comma-separated values, header row, LF endings, '.' decimal separator."""

    def _dump(fh):
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt_float(v) for v in row) + "\n")

    if isinstance(target, (str, bytes)):
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            _dump(fh)
    else:
        _dump(target)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def json_text(obj, indent: int = 2) -> str:
    """JSON with floats in 17-significant-digit form (trailing newline)."""
    pieces: list[str] = []
    _encode(obj, pieces, indent, 0)
    return "".join(pieces) + "\n"


def _encode(obj, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (key, value) in enumerate(items):
            out.append(f'{pad_in}"{key}": ')
            _encode(value, out, indent, level + 1)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(np.asarray(obj).tolist()) if isinstance(obj, np.ndarray) else list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, value in enumerate(seq):
            out.append(pad_in)
            _encode(value, out, indent, level + 1)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(pad + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append("true" if obj is True else "false" if obj is False else "null")
    elif isinstance(obj, numbers.Integral):
        out.append(str(int(obj)))
    elif isinstance(obj, numbers.Real):
        out.append(fmt_float(obj))
    elif isinstance(obj, str):
        escaped = obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        out.append(f'"{escaped}"')
    else:
        raise TypeError(f"cannot serialise {type(obj)!r}")
