"""
Monitor File
CSV reader/writer for daily monitor observations

Columns (header mandatory, in this order):
    day, site_id, x_km, y_km, cell_id, o3_ppb
"""

import re
from pathlib import Path

import numpy as np
import pandas as pd

from inference import MonitorDataset
from src.errors import DuplicateKeyError, ParseError

from .atomic import write_csv

MONITOR_COLUMNS = ['day', 'site_id', 'x_km', 'y_km', 'cell_id', 'o3_ppb']


def read_table(path, expected=None):
    """
    Read a CSV as strings, turning tokenizer failures into ParseError

    Args:
        path: CSV path
        expected: Optional exact header

    Returns:
        pandas DataFrame of str (NaN for missing fields)
    """
    csv_file = Path(path)
    if not csv_file.exists():
        raise FileNotFoundError(f"File not found: {path}")
    try:
        frame = pd.read_csv(csv_file, dtype=str, keep_default_na=False,
                            na_values=[''], skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise ParseError("file is empty (header row is mandatory)", 1, path)
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        raise ParseError(f"malformed row: {e}", int(match.group(1)) if match else None, path)
    if expected is not None and list(frame.columns) != list(expected):
        raise ParseError(
            f"header must be {','.join(expected)}, got {','.join(frame.columns)}", 1, path)
    return frame


def numeric_column(frame, column, path, integer=False, minimum=None):
    """
    Convert one string column, reporting the first bad row by file line

    Returns:
        numpy array
    """
    values = pd.to_numeric(frame[column], errors='coerce').to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if integer:
        bad |= np.isfinite(values) & (values != np.round(values))
    if minimum is not None:
        bad |= values < minimum
    if np.any(bad):
        row = int(np.argmax(bad))
        raise ParseError(f"bad {column} value '{frame[column].iloc[row]}'", row + 2, path)
    return values.astype(int) if integer else values


def text_column(frame, column, path):
    values = frame[column]
    bad = values.isna().to_numpy() | (values.fillna('').str.strip() == '').to_numpy()
    if np.any(bad):
        raise ParseError(f"missing {column}", int(np.argmax(bad)) + 2, path)
    return values.str.strip().to_numpy(dtype=object)


def load_monitors(path, verbose=False):
    """
    Load monitor observations

    Args:
        path: CSV with the MONITOR_COLUMNS header
        verbose: Print a summary line

    Returns:
        MonitorDataset (sites sorted by id); cells are linked to a
        sensitivity field later, at fit time
    """
    frame = read_table(path, MONITOR_COLUMNS)
    day = numeric_column(frame, 'day', path, integer=True, minimum=0)
    site_id = text_column(frame, 'site_id', path)
    x = numeric_column(frame, 'x_km', path)
    y = numeric_column(frame, 'y_km', path)
    cell_id = text_column(frame, 'cell_id', path)
    o3 = numeric_column(frame, 'o3_ppb', path, minimum=0.0)

    keys = pd.DataFrame({'day': day, 'site_id': site_id})
    dup = keys.duplicated(keep='first').to_numpy()
    if np.any(dup):
        row = int(np.argmax(dup))
        raise DuplicateKeyError(
            f"{path}:{row + 2}: duplicate record for day {day[row]}, site {site_id[row]}")

    site_ids = np.array(sorted(set(site_id.tolist())), dtype=object)
    site = np.searchsorted(site_ids, site_id) if len(site_id) else np.zeros(0, dtype=int)
    first = np.zeros(len(site_ids), dtype=int)
    if len(site_id):
        first = pd.Series(np.arange(len(site_id))).groupby(site).first().to_numpy()
    site_xy = np.column_stack([x[first], y[first]]) if len(site_ids) else np.zeros((0, 2))
    site_cell = cell_id[first] if len(site_ids) else np.array([], dtype=object)

    mismatch = ((x != site_xy[site, 0]) | (y != site_xy[site, 1])
                | (cell_id != site_cell[site])) if len(site_id) else np.zeros(0, dtype=bool)
    if np.any(mismatch):
        row = int(np.argmax(mismatch))
        raise ParseError(f"site {site_id[row]} changes location or cell between rows",
                         row + 2, path)

    data = MonitorDataset(day, site, o3, site_ids, site_xy, site_cell)
    if verbose:
        print(f"📁 Loaded {len(data)} records at {data.n_sites} sites from {path}")
    return data


def monitors_frame(data):
    return pd.DataFrame({
        'day': data.day,
        'site_id': data.site_ids[data.site],
        'x_km': data.site_xy[data.site, 0],
        'y_km': data.site_xy[data.site, 1],
        'cell_id': data.site_cell[data.site],
        'o3_ppb': data.y,
    }, columns=MONITOR_COLUMNS)


def write_monitors(data, path):
    return write_csv(monitors_frame(data), path)
