"""Byte-stable CSV/JSON emission.

Floats are always printed with 17 significant digits (``%.17g``), JSON keys
are sorted, output is UTF-8 with LF line endings. Identical inputs give
identical bytes regardless of locale.
"""

from __future__ import annotations

import enum
import json
import math
from pathlib import Path
from typing import IO, Any, Iterable, Sequence

import numpy as np


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, enum.Enum):
        return _encode(obj.value, indent, level)
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted((str(k), v) for k, v in obj.items())
        body = ("," + pad).join(f"{json.dumps(k, ensure_ascii=False)}: {_encode(v, indent, level + 1)}" for k, v in items)
        return "{" + pad + body + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        body = ("," + pad).join(_encode(v, indent, level + 1) for v in obj)
        return "[" + pad + body + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 1) -> str:
    return _encode(obj, indent, 0) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def write_csv(fh: IO[str], header: Sequence[str], columns: Iterable[Sequence[float]]) -> None:
    fh.write(",".join(header) + "\n")
    for row in zip(*columns):
        fh.write(",".join(fmt_float(v) for v in row) + "\n")


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data
