"""Strict parser for the bench CSV trace format.

A trace file is:

* ``# key=value`` manifest lines,
* the exact column header
  ``iter,residual,lambda,tau,ls_inner,n_F,n_f,n_prox,n_mult,elapsed_s``,
* one row per iteration with integer counters and float metrics.

Anything else (missing column, malformed number, manifest after data) is
rejected with an error naming the offending file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

CSV_HEADER = "iter,residual,lambda,tau,ls_inner,n_F,n_f,n_prox,n_mult,elapsed_s"
COLUMNS = CSV_HEADER.split(",")
_INT_COLS = {"iter", "ls_inner", "n_F", "n_f", "n_prox", "n_mult"}


class TraceFormatError(ValueError):
    """The file does not conform to the bench CSV grammar."""


@dataclass
class TraceData:
    path: Path
    manifest: dict
    columns: dict  # column name -> numpy array

    @property
    def algorithm(self) -> str:
        return self.manifest["algorithm"]

    @property
    def problem(self) -> str:
        return self.manifest["problem"]

    @property
    def metric(self) -> str:
        return self.manifest.get("metric", "residual")

    def __len__(self) -> int:
        return len(self.columns["iter"])


def _parse_cell(name: str, cell: str, path: Path, lineno: int):
    try:
        return int(cell) if name in _INT_COLS else float(cell)
    except ValueError:
        raise TraceFormatError(
            f"{path}: line {lineno}: bad {name} value {cell!r}") from None


def read_trace(path) -> TraceData:
    path = Path(path)
    if not path.exists():
        raise TraceFormatError(f"{path}: no such file")
    manifest: dict = {}
    rows: list[list] = []
    header_seen = False
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if line.startswith("#"):
            if header_seen:
                raise TraceFormatError(
                    f"{path}: line {lineno}: manifest line after data")
            key, sep, value = line[1:].strip().partition("=")
            if not sep or not key:
                raise TraceFormatError(
                    f"{path}: line {lineno}: malformed manifest line")
            manifest[key] = value
            continue
        if not header_seen:
            if line != CSV_HEADER:
                raise TraceFormatError(f"{path}: line {lineno}: expected the "
                                       f"column header, got {line!r}")
            header_seen = True
            continue
        cells = line.split(",")
        if len(cells) != len(COLUMNS):
            raise TraceFormatError(
                f"{path}: line {lineno}: expected {len(COLUMNS)} fields, "
                f"got {len(cells)}")
        rows.append([_parse_cell(n, c, path, lineno)
                     for n, c in zip(COLUMNS, cells)])
    if not header_seen:
        raise TraceFormatError(f"{path}: missing column header")
    for key in ("problem", "algorithm"):
        if key not in manifest:
            raise TraceFormatError(f"{path}: manifest lacks {key!r}")
    columns = {}
    for j, name in enumerate(COLUMNS):
        dtype = int if name in _INT_COLS else float
        columns[name] = np.array([r[j] for r in rows], dtype=dtype)
    return TraceData(path=path, manifest=manifest, columns=columns)
