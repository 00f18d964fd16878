import logging
import math
import os

import pandas as pd

from data_sources.dataset import Dataset
from utils.errors import DataError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _parse_cell(text, column, row):
    try:
        value = float(str(text).strip())
    except ValueError:
        raise DataError(f"row {row}: column {column!r} value {text!r} is not numeric") from None
    if not math.isfinite(value):
        raise DataError(f"row {row}: column {column!r} value {text!r} is not a finite number")
    return value


def load_csv(path, x_column, y_column):
    """Load an (x, y) dataset from a header-row, comma-separated UTF-8 file.

    Row numbers in error messages count data rows from 1 (the header is row 0).
    """
    if not os.path.exists(path):
        raise DataError(f"CSV file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"cannot parse CSV file {path}: {e}") from None

    for column in (x_column, y_column):
        if column not in frame.columns:
            raise DataError(f"column {column!r} not found in {path}; available: {list(frame.columns)}")
    if frame.empty:
        raise DataError(f"CSV file {path} has no data rows")

    xs, ys = [], []
    for row, (x_text, y_text) in enumerate(zip(frame[x_column], frame[y_column]), start=1):
        xs.append(_parse_cell(x_text, x_column, row))
        ys.append(_parse_cell(y_text, y_column, row))

    logger.debug("loaded %d rows from %s", len(xs), path)
    name = os.path.splitext(os.path.basename(path))[0]
    return Dataset(xs, ys, label="original", name=name)


def export_csv(data, path, x_column="T", y_column=None):
    """Write a dataset as CSV in full double precision; load_csv reads it back bit-for-bit."""
    y_column = y_column or (data.name or "y")
    frame = pd.DataFrame({x_column: data.x, y_column: data.y})
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path
