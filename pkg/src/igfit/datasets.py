"""Reading plain-text data files and the two bundled example datasets."""
from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

import numpy as np

from igfit.errors import IGFitError

__all__ = ["DataFileError", "parse_data", "read_data_file", "bundled_path", "load_dataset", "DATASETS"]

DATASETS = {
    "repair_times": "repair_times.txt",
    "jug_bridge": "jug_bridge.txt",
}


class DataFileError(IGFitError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


def parse_data(text: str) -> np.ndarray:
    """One positive number per line; blank lines and ``#`` comments are skipped."""
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            v = float(line)
        except ValueError:
            raise DataFileError(f"cannot parse {line!r} as a number", lineno) from None
        if not (math.isfinite(v) and v > 0):
            raise DataFileError(f"value {line!r} is not positive and finite", lineno)
        values.append(v)
    if not values:
        raise DataFileError("no observations found")
    return np.array(values)


def bundled_path(name: str) -> Path:
    stem = name.removesuffix(".txt")
    if stem not in DATASETS:
        raise KeyError(name)
    return Path(str(resources.files("igfit") / "data" / DATASETS[stem]))


def read_data_file(path) -> np.ndarray:
    """Parse ``path``; a bare bundled name such as ``repair_times.txt`` also resolves."""
    p = Path(path)
    if not p.exists():
        try:
            p = bundled_path(p.name)
        except KeyError:
            raise DataFileError(f"no such file: {path}") from None
    return parse_data(p.read_text())


def load_dataset(name: str) -> np.ndarray:
    return parse_data(bundled_path(name).read_text())
