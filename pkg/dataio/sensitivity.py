"""
Sensitivity File
CSV reader/writer for gridded base concentrations and sensitivity coefficients

One row per (day, cell). Columns: day, cell_id, x_km, y_km, c0, then
s1_<j> for every input, s2_<j><j> for the diagonal second-order terms and
s2_<l><j> (l < j) for the cross terms, inputs numbered from 1. With more
than nine inputs the second-order indices are separated: s2_<l>_<j>.
"""

import numpy as np
import pandas as pd

from rfm import SensitivityField
from src.errors import DataError, DuplicateKeyError, ParseError

from .atomic import write_csv
from .monitors import numeric_column, read_table, text_column

LEADING_COLUMNS = ['day', 'cell_id', 'x_km', 'y_km', 'c0']


def _pair_name(l, j, d):
    sep = '_' if d > 9 else ''
    return f"s2_{l + 1}{sep}{j + 1}"


def sensitivity_columns(d):
    """Full header for d inputs"""
    first = [f"s1_{j + 1}" for j in range(d)]
    diag = [_pair_name(j, j, d) for j in range(d)]
    cross = [_pair_name(l, j, d) for l in range(d) for j in range(l + 1, d)]
    return LEADING_COLUMNS + first + diag + cross


def load_sensitivity(path, verbose=False):
    """
    Load a sensitivity field

    Args:
        path: CSV path
        verbose: Print a summary line

    Returns:
        SensitivityField with days 0..n_T-1 and cells in first-appearance order
    """
    frame = read_table(path)
    columns = list(frame.columns)
    if columns[:len(LEADING_COLUMNS)] != LEADING_COLUMNS:
        raise ParseError(f"header must start with {','.join(LEADING_COLUMNS)}", 1, path)
    d = sum(1 for c in columns if c.startswith('s1_'))
    if d < 1 or columns != sensitivity_columns(d):
        raise ParseError(f"header does not match the layout for {d} input(s)", 1, path)

    day = numeric_column(frame, 'day', path, integer=True, minimum=0)
    cell_id = text_column(frame, 'cell_id', path)
    x = numeric_column(frame, 'x_km', path)
    y = numeric_column(frame, 'y_km', path)
    values = np.column_stack([numeric_column(frame, c, path) for c in columns[4:]])

    cell_index, cell_ids = pd.factorize(pd.Series(cell_id), sort=False)
    n_days = int(day.max()) + 1 if len(day) else 0
    n_cells = len(cell_ids)
    if len(frame) != n_days * n_cells:
        raise DataError(
            f"{path}: expected {n_days} days x {n_cells} cells = {n_days * n_cells} rows, "
            f"got {len(frame)}")
    flat = day * n_cells + cell_index
    dup = pd.Series(flat).duplicated().to_numpy()
    if np.any(dup):
        row = int(np.argmax(dup))
        raise DuplicateKeyError(
            f"{path}:{row + 2}: duplicate row for day {day[row]}, cell {cell_id[row]}")

    first = pd.Series(np.arange(len(frame))).groupby(cell_index).first().to_numpy()
    xy = np.column_stack([x[first], y[first]])
    moved = (x != xy[cell_index, 0]) | (y != xy[cell_index, 1])
    if np.any(moved):
        row = int(np.argmax(moved))
        raise ParseError(f"cell {cell_id[row]} changes coordinates between rows", row + 2, path)

    grid = np.empty((values.shape[1], n_days, n_cells))
    grid[:, day, cell_index] = values.T
    base = grid[0]
    first_order = grid[1:1 + d]
    diag = grid[1 + d:1 + 2 * d]
    cross = grid[1 + 2 * d:]

    field = SensitivityField(
        cell_ids=np.asarray(cell_ids, dtype=object), xy=xy, base=base,
        first_order=first_order, second_order_diag=diag, second_order_cross=cross)
    if verbose:
        print(f"📁 Loaded sensitivity field: {n_days} days x {n_cells} cells, {d} inputs")
    return field


def sensitivity_frame(field):
    d, n_days, n_cells = field.n_inputs, field.n_days, field.n_cells
    day = np.repeat(np.arange(n_days), n_cells)
    cell = np.tile(np.arange(n_cells), n_days)
    data = {
        'day': day,
        'cell_id': field.cell_ids[cell],
        'x_km': field.xy[cell, 0],
        'y_km': field.xy[cell, 1],
        'c0': field.base.ravel(),
    }
    names = sensitivity_columns(d)[len(LEADING_COLUMNS):]
    stacked = np.concatenate([field.first_order, field.second_order_diag,
                              field.second_order_cross], axis=0)
    for name, values in zip(names, stacked):
        data[name] = values.ravel()
    return pd.DataFrame(data, columns=sensitivity_columns(d))


def write_sensitivity(field, path):
    return write_csv(sensitivity_frame(field), path)
