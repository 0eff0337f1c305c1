"""CSV ingestion, model files, and atomic output writes."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .core import Dataset, SvddModel, validate_dataset
from .errors import ConfigError, DataError, ModelFileError, RaggedRows

FORMAT_VERSION = 1
MAGIC = "# svddbw model"

ColumnRef = Union[int, str, None]


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _column_index(ref: ColumnRef, header: Optional[list], width: int, what: str) -> Optional[int]:
    if ref is None:
        return None
    if isinstance(ref, str) and not ref.lstrip("-").isdigit():
        if header is None or ref not in header:
            raise ConfigError(f"{what} column {ref!r} not found in header")
        return header.index(ref)
    idx = int(ref)
    if idx < 0:
        idx += width
    if not (0 <= idx < width):
        raise ConfigError(f"{what} column index {ref} out of range for {width} columns")
    return idx


_LABEL_WORDS = {"1": 1, "0": 0, "inlier": 1, "outlier": 0, "true": 1, "false": 0}


def _parse_label(cell: str, row: int) -> int:
    key = cell.strip().lower()
    if key in _LABEL_WORDS:
        return _LABEL_WORDS[key]
    try:
        v = float(key)
    except ValueError:
        v = None
    if v in (0.0, 1.0):
        return int(v)
    raise DataError(f"row {row}: label {cell!r} is not 0/1 or inlier/outlier")


def read_csv(
    source,
    header: str = "auto",
    weights_col: ColumnRef = None,
    label_col: ColumnRef = None,
    validate: bool = True,
) -> Dataset:
    """Read numeric rows from a comma-separated file.

    ``header`` is "auto" (first row is a header when any cell is
    non-numeric), "yes" or "no". Weight and label columns may be named or
    indexed and are removed from the feature matrix. Row numbers in error
    messages count data rows from 0.
    """
    if header not in ("auto", "yes", "no"):
        raise ConfigError("header must be auto, yes or no")
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            lines = list(csv.reader(fh))
    else:
        lines = list(csv.reader(source))
    lines = [r for r in lines if r and any(c.strip() for c in r)]

    names = None
    if lines and (header == "yes" or (header == "auto" and not all(_is_number(c) for c in lines[0]))):
        names = [c.strip() for c in lines[0]]
        lines = lines[1:]
    width = len(names) if names is not None else (len(lines[0]) if lines else 0)
    for i, r in enumerate(lines):
        if len(r) != width:
            raise RaggedRows(f"row {i} has {len(r)} fields, expected {width}")

    wi = _column_index(weights_col, names, width, "weights")
    li = _column_index(label_col, names, width, "label")
    feat = [j for j in range(width) if j not in (wi, li)]

    rows = np.empty((len(lines), len(feat)))
    for i, r in enumerate(lines):
        for k, j in enumerate(feat):
            try:
                rows[i, k] = float(r[j])
            except ValueError:
                raise DataError(f"row {i}: column {j} value {r[j]!r} is not numeric") from None
    weights = None
    if wi is not None:
        try:
            weights = np.array([float(r[wi]) for r in lines])
        except ValueError as exc:
            raise DataError(f"non-numeric weight: {exc}") from None
    labels = None
    if li is not None:
        labels = np.array([_parse_label(r[li], i) for i, r in enumerate(lines)], dtype=np.int8)

    data = Dataset(rows.reshape(len(lines), len(feat)), weights=weights, labels=labels)
    return validate_dataset(data) if validate else data


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def fmt(x: float) -> str:
    """Shortest decimal that round-trips to the same double (at most 17 digits)."""
    return repr(float(x))


def format_model(model: SvddModel, rng: str = "numpy.PCG64") -> str:
    lines = [
        MAGIC,
        f"format_version {FORMAT_VERSION}",
        f"bandwidth {fmt(model.bandwidth)}",
        f"penalty {fmt(model.penalty)}",
        f"threshold {fmt(model.threshold)}",
        f"sv_self_term {fmt(model.sv_self_term)}",
        f"dimension {model.p}",
        f"n_support {model.n_support}",
        f"criterion {model.criterion}",
        f"delta {fmt(model.delta)}",
        f"outlier_fraction {fmt(model.outlier_fraction)}",
        f"n_train {model.n_train}",
        f"converged {int(bool(model.converged))}",
        f"kkt_violation {fmt(model.kkt_violation)}",
        f"iterations {model.iterations}",
        f"rng {rng}",
    ]
    if model.data_lower is not None:
        lines.append("data_lower " + " ".join(fmt(v) for v in model.data_lower))
        lines.append("data_upper " + " ".join(fmt(v) for v in model.data_upper))
    lines.append("support_vectors alpha," + ",".join(f"x{j}" for j in range(model.p)))
    for a, row in zip(model.alphas, model.support_vectors):
        lines.append(",".join([fmt(a)] + [fmt(v) for v in row]))
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_model(model: SvddModel, path) -> None:
    atomic_write_text(path, format_model(model))


def parse_model(text: str) -> SvddModel:
    lines = text.splitlines()
    if not lines or lines[0] != MAGIC:
        raise ModelFileError("not a model file (missing header line)")
    meta = {}
    i = 1
    while i < len(lines) and not lines[i].startswith("support_vectors"):
        key, _, value = lines[i].partition(" ")
        meta[key] = value
        i += 1
    try:
        version = int(meta["format_version"])
    except (KeyError, ValueError):
        raise ModelFileError("model file has no readable format_version") from None
    if version != FORMAT_VERSION:
        raise ModelFileError(f"unsupported model format_version {version}")
    if i >= len(lines) or lines[-1] != "end":
        raise ModelFileError("model file is truncated")
    try:
        p = int(meta["dimension"])
        n_sv = int(meta["n_support"])
        table = lines[i + 1 : -1]
        if len(table) != n_sv:
            raise ModelFileError(f"expected {n_sv} support vectors, found {len(table)}")
        arr = np.array([[float(c) for c in r.split(",")] for r in table]).reshape(n_sv, p + 1)
        lower = upper = None
        if "data_lower" in meta:
            lower = np.array([float(v) for v in meta["data_lower"].split()])
            upper = np.array([float(v) for v in meta["data_upper"].split()])
        model = SvddModel(
            support_vectors=arr[:, 1:],
            alphas=arr[:, 0],
            bandwidth=float(meta["bandwidth"]),
            penalty=float(meta["penalty"]),
            threshold=float(meta["threshold"]),
            sv_self_term=float(meta["sv_self_term"]),
            criterion=meta.get("criterion", "fixed"),
            delta=float(meta["delta"]),
            outlier_fraction=float(meta["outlier_fraction"]),
            n_train=int(meta["n_train"]),
            converged=bool(int(meta["converged"])),
            kkt_violation=float(meta["kkt_violation"]),
            iterations=int(meta["iterations"]),
            data_lower=lower,
            data_upper=upper,
        )
    except ModelFileError:
        raise
    except (KeyError, ValueError) as exc:
        raise ModelFileError(f"corrupt model file: {exc}") from None
    if not (math.isfinite(model.bandwidth) and model.bandwidth > 0):
        raise ModelFileError("model bandwidth must be positive")
    return model


def load_model(path) -> SvddModel:
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise ModelFileError(f"cannot read model file: {exc}") from None
    return parse_model(text)
