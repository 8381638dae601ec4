"""Reference datasets and plain-text/CSV ingestion."""

from __future__ import annotations

import csv
import hashlib
import io
import os
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .frequentist import ObservedSample

# Values kept as printed, in their listed order.
_FLOOD = (
    "1460 4050 3570 2060 1300 1390 1720 6280 1360 7440 5320 1400 3240 2710 4520 4840 8320 "
    "13900 71500 6250 2260 318 1330 970 1920 15100 2870 20600 3810 726 7500 7170 2000 829 "
    "17300 4740 13400 1940 5660"
)
# The listing has a repeated 3.1091 and 3.1444 ahead of 3.1348; both are kept.
_COVID = (
    "1.5157 1.5806 1.9048 2.1901 2.4141 2.4946 2.5261 2.6029 2.7704 2.7957 2.8349 2.8636 "
    "2.9078 3.0914 3.1091 3.1091 3.1444 3.1348 3.2110 3.2135 3.2218 3.2823 3.3592 3.3769 "
    "3.3825 3.5146 3.6346 3.6426 3.8594 4.0480 4.1685 4.2202 4.2781 4.9274 4.9378 6.8686"
)

_BUILTIN = {
    "flood": (_FLOOD, "Annual flood discharge rates (ft^3/s) of the Floyd river, 39 years; "
                      "U.S. Water Resources Council (1977)."),
    "covid": (_COVID, "Covid-19 mortality rates of patients in Canada, 36 observations; "
                      "Liu et al. (2021)."),
}


@dataclass(frozen=True)
class Dataset:
    name: str
    values: ObservedSample
    source: str = ""
    text: tuple = ()          # decimal strings as stored, when known

    def __len__(self):
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return self.values.values


def builtin_names() -> tuple:
    return tuple(_BUILTIN)


def builtin_checksum(name: str) -> str:
    """SHA-256 of the stored decimal strings joined by single spaces."""
    text, _ = _lookup(name)
    return hashlib.sha256(" ".join(text.split()).encode("ascii")).hexdigest()


def _lookup(name):
    try:
        return _BUILTIN[name.lower()]
    except KeyError:
        raise DataError(f"unknown builtin dataset {name!r}; available: {', '.join(_BUILTIN)}") from None


def builtin(name: str) -> Dataset:
    text, source = _lookup(name)
    tokens = tuple(text.split())
    return Dataset(name=name.lower(), values=ObservedSample([float(t) for t in tokens]), source=source, text=tokens)


def _parse(tokens_with_pos, origin):
    vals, bad = [], []
    for tok, line, col in tokens_with_pos:
        try:
            v = float(tok)
        except ValueError:
            raise DataError(f"{origin}: line {line}, column {col}: not a number: {tok!r}") from None
        if not np.isfinite(v) or v <= 0:
            bad.append(f"line {line}: {tok}")
        vals.append(v)
    if bad:
        raise DataError(f"{origin}: observations must be positive and finite; offending rows: " + "; ".join(bad[:20]))
    if not vals:
        raise DataError(f"{origin}: no observations found")
    return vals


def _is_numeric(cell) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _is_header(row, column) -> bool:
    if isinstance(column, str):
        return any(c.strip() and not _is_numeric(c) for c in row)
    cell = row[column].strip() if column < len(row) else ""
    return bool(cell) and not _is_numeric(cell)


def parse_text(text: str, fmt: str = "whitespace", column=0, origin: str = "<input>") -> list:
    """Parse observations from text.

    ``fmt="whitespace"`` reads every whitespace- or comma-separated token
    (``#`` starts a comment).  ``fmt="csv"`` reads one column, chosen by
    index or by header name; a non-numeric first row is taken as a header.
    """
    toks = []
    if fmt == "whitespace":
        for ln, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].replace(",", " ")
            for col, tok in enumerate(line.split(), start=1):
                toks.append((tok, ln, col))
    elif fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        idx, start = column, 0
        if rows and _is_header(rows[0], column):
            start = 1
            head = [h.strip() for h in rows[0]]
            if isinstance(idx, str):
                if idx not in head:
                    raise DataError(f"{origin}: column {idx!r} not in header {head}")
                idx = head.index(idx)
        if isinstance(idx, str):
            raise DataError(f"{origin}: column {idx!r} requested but the file has no header")
        for ln, row in enumerate(rows[start:], start=start + 1):
            if not row or all(not c.strip() for c in row):
                continue
            if idx >= len(row):
                raise DataError(f"{origin}: line {ln}: missing column {idx + 1}")
            toks.append((row[idx].strip(), ln, idx + 1))
    else:
        raise DataError(f"unknown format {fmt!r}; use 'whitespace' or 'csv'")
    return _parse(toks, origin)


def load(path, fmt: str | None = None, column=0) -> Dataset:
    """Read a dataset from a file; ``fmt`` defaults to csv for ``.csv`` files."""
    path = os.fspath(path)
    if fmt is None:
        fmt = "csv" if path.lower().endswith(".csv") else "whitespace"
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror}") from None
    vals = parse_text(text, fmt, column, origin=path)
    name = os.path.splitext(os.path.basename(path))[0]
    return Dataset(name=name, values=ObservedSample(vals), source=path)


def resolve(spec: str, fmt: str | None = None, column=0) -> Dataset:
    """``builtin:NAME`` or a file path."""
    if spec.startswith("builtin:"):
        return builtin(spec.split(":", 1)[1])
    return load(spec, fmt, column)


def export_csv(d: Dataset, fh) -> None:
    """Single ``value`` column; stored decimal strings are written verbatim."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["value"])
    if d.text:
        for t in d.text:
            w.writerow([t])
    else:
        for v in d.array:
            w.writerow([repr(float(v))])
