"""
Series and JSON input/output shared by the command handlers.
"""

import json
import math
import sys
from pathlib import Path
from typing import Any, Iterable, List, TextIO

import numpy as np

from errors import InvalidInputError


def _parse_lines(lines: Iterable[str], source: str) -> np.ndarray:
    values: List[float] = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        try:
            value = float(line)
        except ValueError:
            # A non-numeric first line is a header
            if lineno == 1:
                continue
            raise InvalidInputError(f"{source}:{lineno}: not a number: {line!r}")
        if not math.isfinite(value):
            raise InvalidInputError(f"{source}:{lineno}: non-finite value {line!r}")
        values.append(value)
    return np.asarray(values, dtype=float)


def read_series(path: str, stdin: TextIO = sys.stdin) -> np.ndarray:
    """Read one float per line from a file, or from standard input for '-'."""
    if path == "-":
        return _parse_lines(stdin, "<stdin>")
    try:
        with open(Path(path), encoding="utf-8") as f:
            return _parse_lines(f, path)
    except OSError as e:
        raise InvalidInputError(f"cannot read {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise InvalidInputError(f"{path} is not UTF-8 text: {e}") from e


def write_series(values: Iterable[float], out: TextIO) -> None:
    """One float per line, with enough digits to round-trip exactly."""
    for value in values:
        out.write(f"{float(value)!r}\n")


def dump_json(data: Any, out: TextIO) -> None:
    out.write(json.dumps(data, indent=2, default=_json_default))
    out.write("\n")


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")
