"""Photon-count tables: one count per (x, projector) and their CSV forms."""
import csv
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .exceptions import DomainError, TableParseError, UndefinedPointError
from .qubit import PROJECTOR_ORDER, parse_projector
from .utils import format_float

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('x', 'projector', 'count')
ROW_COLUMN = '_row'


@dataclass(frozen=True, eq=False)
class CountTable:
    """Counts n_p(x) for sorted, distinct x values; columns follow PROJECTOR_ORDER."""

    xs: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float).ravel()
        counts = np.array(self.counts, dtype=np.int64).reshape(-1, len(PROJECTOR_ORDER))
        if xs.size != counts.shape[0]:
            raise DomainError(f'{xs.size} x values but {counts.shape[0]} count rows')
        if not np.all(np.isfinite(xs)):
            raise DomainError('x values must be finite')
        if np.any(counts < 0):
            raise DomainError('counts must be nonnegative')
        order = np.argsort(xs, kind='stable')
        xs, counts = xs[order], counts[order]
        if xs.size > 1 and np.any(np.diff(xs) == 0):
            raise DomainError('duplicate x values; build the table with from_records')
        xs.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, 'xs', xs)
        object.__setattr__(self, 'counts', counts)

    @classmethod
    def from_records(cls, records):
        """Table from (x, projector, count) triples; repeated (x, p) pairs are summed."""
        totals = {}
        for x, projector, count in records:
            count = int(count)
            if count < 0:
                raise DomainError(f'negative count {count} at x={x!r}')
            row = totals.setdefault(float(x), [0] * len(PROJECTOR_ORDER))
            row[parse_projector(projector).position] += count
        xs = sorted(totals)
        return cls(np.array(xs, dtype=float), np.array([totals[x] for x in xs], dtype=np.int64))

    @classmethod
    def from_counts(cls, xs, counts):
        """Table from parallel arrays; rows sharing an x are summed."""
        xs = np.asarray(xs, dtype=float).ravel()
        counts = np.asarray(counts, dtype=np.int64).reshape(-1, len(PROJECTOR_ORDER))
        unique, inverse = np.unique(xs, return_inverse=True)
        merged = np.zeros((unique.size, len(PROJECTOR_ORDER)), dtype=np.int64)
        np.add.at(merged, inverse, counts)
        return cls(unique, merged)

    def __len__(self):
        return int(self.xs.size)

    @property
    def records(self):
        return [
            (float(x), projector, int(row[projector.position]))
            for x, row in zip(self.xs, self.counts)
            for projector in PROJECTOR_ORDER
        ]

    @property
    def totals(self):
        """N(x) for every x in the table."""
        return self.counts.sum(axis=1)

    @property
    def occupied(self):
        return self.totals > 0

    @property
    def occupied_xs(self):
        return self.xs[self.occupied]

    @property
    def empty_xs(self):
        return self.xs[~self.occupied]

    @property
    def total_events(self):
        return int(self.counts.sum())

    def fractions(self):
        """Count fractions n_p(x)/N(x) at every occupied x, shape (K, 6)."""
        occupied = self.occupied
        counts = self.counts[occupied].astype(float)
        return counts / counts.sum(axis=1, keepdims=True)

    def _row_of(self, x):
        x = float(x)
        position = int(np.searchsorted(self.xs, x))
        if position < self.xs.size and self.xs[position] == x:
            return position
        return None

    def fractions_at(self, x):
        position = self._row_of(x)
        if position is None or self.totals[position] == 0:
            raise UndefinedPointError(x)
        return self.counts[position] / float(self.totals[position])

    def restrict(self, x):
        """Single-x table holding only the counts at x."""
        position = self._row_of(x)
        if position is None:
            raise UndefinedPointError(x)
        return CountTable(self.xs[position:position + 1], self.counts[position:position + 1])


def write_count_csv(table, path):
    """Long-form CSV with a row for every projector at every x."""
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for x, projector, count in table.records:
            writer.writerow((format_float(x), projector.value, count))


def _find_column(columns, name):
    lowered = {column.lower(): column for column in columns}
    return lowered.get(str(name).strip().lower())


def _long_columns(frame, column_map):
    found = {}
    for role in CSV_COLUMNS:
        column = _find_column(frame.columns, column_map.get(role, role))
        if column is None:
            return None
        found[role] = column
    return found


def _wide_columns(frame, column_map):
    found = {}
    for projector in PROJECTOR_ORDER:
        column = _find_column(frame.columns, column_map.get(projector.value, projector.value))
        if column is None:
            return None
        found[projector.value] = column
    return found


def _to_long_frame(frame, column_map):
    x_column = _find_column(frame.columns, column_map.get('x', 'x'))
    if x_column is None:
        raise TableParseError(f"no column maps to 'x' (columns: {', '.join(frame.columns)})")

    long_columns = _long_columns(frame, column_map)
    if long_columns is not None:
        return pd.DataFrame({
            'x': frame[long_columns['x']],
            'projector': frame[long_columns['projector']],
            'count': frame[long_columns['count']],
            ROW_COLUMN: frame[ROW_COLUMN],
        })

    wide_columns = _wide_columns(frame, column_map)
    if wide_columns is None:
        raise TableParseError(
            'columns map neither to (x, projector, count) nor to one column per projector')
    logger.debug(f'Six-column wide format detected: {wide_columns}')
    renamed = frame[[x_column, ROW_COLUMN, *wide_columns.values()]].rename(
        columns={x_column: 'x', **{column: label for label, column in wide_columns.items()}})
    melted = renamed.melt(
        id_vars=['x', ROW_COLUMN], value_vars=list(wide_columns),
        var_name='projector', value_name='count')
    return melted.sort_values([ROW_COLUMN, 'projector'], kind='stable')


def _first_bad_row(long_frame, mask):
    return int(long_frame.loc[mask, ROW_COLUMN].min())


def ingest_experiment_csv(path, column_map=None):
    """Read an instrument count file into a CountTable.

    Accepts the long form (x, projector, count) or a wide form with one
    count column per projector; column_map renames roles to source columns.
    Row numbers in errors count data rows from 1.
    """
    column_map = {str(key): str(value) for key, value in (column_map or {}).items()}
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError:
        raise TableParseError(f'no such file: {path}') from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise TableParseError(f'cannot read {path}: {exc}') from exc

    frame.columns = [str(column).strip() for column in frame.columns]
    frame[ROW_COLUMN] = np.arange(1, len(frame) + 1)
    long_frame = _to_long_frame(frame, column_map)

    xs = pd.to_numeric(long_frame['x'].str.strip(), errors='coerce')
    bad = xs.isna() | ~np.isfinite(xs.fillna(0.0))
    if bad.any():
        row = _first_bad_row(long_frame, bad)
        value = long_frame.loc[bad, 'x'].iloc[0]
        raise TableParseError(f'x value {value!r} is not numeric', row=row)

    labels = long_frame['projector'].astype(str).str.strip().str.upper()
    bad = ~labels.isin([projector.value for projector in PROJECTOR_ORDER])
    if bad.any():
        row = _first_bad_row(long_frame, bad)
        raise TableParseError(f"unknown projector label {long_frame.loc[bad, 'projector'].iloc[0]!r}", row=row)

    counts = pd.to_numeric(long_frame['count'].str.strip(), errors='coerce')
    bad = counts.isna() | (counts.fillna(0) % 1 != 0)
    if bad.any():
        row = _first_bad_row(long_frame, bad)
        raise TableParseError(f"count {long_frame.loc[bad, 'count'].iloc[0]!r} is not an integer", row=row)
    bad = counts < 0
    if bad.any():
        row = _first_bad_row(long_frame, bad)
        raise TableParseError(f'negative count {int(counts[bad].iloc[0])} rejected', row=row)

    table = CountTable.from_records(zip(xs, labels, counts.astype(np.int64)))
    logger.info(f'Ingested {len(long_frame)} count records from {path} into {len(table)} x values')
    return table


def read_count_csv(path):
    """Read a long-form CSV written by write_count_csv."""
    return ingest_experiment_csv(path)
