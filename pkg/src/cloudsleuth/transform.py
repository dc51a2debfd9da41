"""Turn raw counter samples into the analysis representation.

The chain is: per-minute pivoted feature matrix (one column per
counter|instance pair), per-column mean/std, feature selection by standard
deviation, and discretization of each cell into an ordinal Likert level via
its z-score. Discretization follows the empirical 68/95/99.7 coverage rule:
the band within one standard deviation of the mean is "normal" and each
further standard deviation moves one level outward.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime
from typing import IO, Iterable, Iterator, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from .errors import EmptyColumn, EmptyInput, StatsMismatch, UnknownFeature
from .ingestion import PerfRecord, format_timestamp, parse_timestamp


class LikertScheme:
    """Ordered level vocabulary plus the z-score binning for one scheme.

    Two schemes exist: the five-level scale (very low .. very high) and the
    seven-level scale that adds the extreme bands beyond three standard
    deviations. Boundary ties go to the bin closer to "normal", so
    z = +/-1, +/-2, +/-3 land deterministically.
    """

    _SCHEMES = {
        "five": ("very_low", "low", "normal", "high", "very_high"),
        "seven": ("extremely_low", "very_low", "low", "normal", "high",
                  "very_high", "extremely_high"),
    }

    def __init__(self, name: str):
        if name not in self._SCHEMES:
            raise ValueError(f"unknown scheme {name!r}; expected one of {sorted(self._SCHEMES)}")
        self.name = name
        self.levels: tuple[str, ...] = self._SCHEMES[name]
        self._ranks = {lvl: i for i, lvl in enumerate(self.levels)}

    @classmethod
    def of(cls, scheme: "str | LikertScheme") -> "LikertScheme":
        return scheme if isinstance(scheme, LikertScheme) else cls(scheme)

    @classmethod
    def all_level_names(cls) -> frozenset[str]:
        return frozenset(cls._SCHEMES["seven"])

    def rank(self, level: str) -> int:
        try:
            return self._ranks[level]
        except KeyError:
            raise ValueError(f"level {level!r} not in {self.name}-level scheme") from None

    def display(self, level: str) -> str:
        """Human form with spaces, e.g. "very high"."""
        return level.replace("_", " ")

    def bin_zscores(self, z: np.ndarray) -> np.ndarray:
        """Map finite z-scores to level names (vectorized, total)."""
        z = np.asarray(z, dtype=float)
        if self.name == "seven":
            conditions = [
                z < -3,
                (z >= -3) & (z < -2),
                (z >= -2) & (z < -1),
                (z >= -1) & (z <= 1),
                (z > 1) & (z <= 2),
                (z > 2) & (z <= 3),
                z > 3,
            ]
        else:
            conditions = [
                z < -2,
                (z >= -2) & (z < -1),
                (z >= -1) & (z <= 1),
                (z > 1) & (z <= 2),
                z > 2,
            ]
        return np.select(conditions, self.levels, default="__unbinned__")

    def bin_value(self, x: float, mean: float, std: float) -> str:
        """Single-cell binning; a zero-variance column maps everything to
        "normal"."""
        if std == 0:
            return "normal"
        return str(self.bin_zscores(np.array([(x - mean) / std]))[0])

    def __repr__(self):
        return f"LikertScheme({self.name!r})"

    def __eq__(self, other):
        return isinstance(other, LikertScheme) and other.name == self.name

    def __hash__(self):
        return hash(self.name)


@dataclass(frozen=True)
class FeatureStats:
    """Per-column mean, sample standard deviation (n-1 denominator, 0 when
    n == 1), and observation count."""

    mean: float
    std: float
    count: int


@dataclass
class LikertMatrix:
    """Discretized matrix: same columns as the source, cells are level
    names, rows with any missing source cell are dropped and audited."""

    data: pd.DataFrame
    scheme: LikertScheme
    dropped_rows: list[tuple[datetime, list[str]]] = field(default_factory=list)

    @property
    def columns(self) -> list[str]:
        return list(self.data.columns)

    @property
    def minutes(self) -> list[datetime]:
        return [ts.to_pydatetime() for ts in self.data.index]

    def rows(self) -> Iterator[tuple[datetime, dict[str, str]]]:
        for ts, row in self.data.iterrows():
            yield ts.to_pydatetime(), dict(row)

    def __len__(self) -> int:
        return len(self.data)


def feature_key(counter_name: str, instance_name: str = "") -> str:
    """Pivoted column key; the instance part is omitted when empty."""
    return f"{counter_name}|{instance_name}" if instance_name else counter_name


def resample_minutely(records: Sequence[PerfRecord]) -> pd.DataFrame:
    """Pivot records into a per-minute matrix.

    Cell (minute, key) is the arithmetic mean of all samples for that
    counter|instance whose timestamp floors to the minute. Rows span the
    full [first, last] minute range; minutes a key never saw hold NaN.
    Columns are sorted so the result is independent of input order.
    """
    if not records:
        raise EmptyInput("no perf records to resample")
    frame = pd.DataFrame({
        "minute": [r.timestamp for r in records],
        "key": [feature_key(r.counter_name, r.instance_name) for r in records],
        "value": [r.value for r in records],
    })
    frame["minute"] = pd.to_datetime(frame["minute"], utc=True).dt.floor("min")
    matrix = frame.pivot_table(index="minute", columns="key", values="value",
                               aggfunc="mean")
    full_range = pd.date_range(matrix.index.min(), matrix.index.max(),
                               freq="min", tz="UTC")
    matrix = matrix.reindex(full_range)
    matrix = matrix[sorted(matrix.columns)]
    matrix.index.name = "minute"
    matrix.columns.name = None
    return matrix


def compute_stats(matrix: pd.DataFrame) -> dict[str, FeatureStats]:
    """Mean and sample standard deviation per column over non-missing cells."""
    stats: dict[str, FeatureStats] = {}
    for key in matrix.columns:
        column = matrix[key].dropna()
        n = len(column)
        if n == 0:
            raise EmptyColumn(f"column {key!r} has no observed values")
        mean = float(column.mean())
        std = 0.0 if n == 1 else float(column.std(ddof=1))
        stats[key] = FeatureStats(mean=mean, std=std, count=n)
    return stats


def select_features(stats: Mapping[str, FeatureStats], *,
                    top_k: Optional[int] = None,
                    features: Optional[Sequence[str]] = None) -> list[str]:
    """Pick feature keys either by largest standard deviation (top_k,
    ties broken lexicographically, clamped to what exists) or as an
    explicit list returned verbatim."""
    if (top_k is None) == (features is None):
        raise ValueError("pass exactly one of top_k or features")
    if features is not None:
        missing = [k for k in features if k not in stats]
        if missing:
            raise UnknownFeature(f"feature(s) not present: {', '.join(missing)}")
        return list(features)
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    ordered = sorted(stats, key=lambda k: (-stats[k].std, k))
    return ordered[:top_k]


def to_likert(matrix: pd.DataFrame, stats: Mapping[str, FeatureStats],
              scheme: "str | LikertScheme" = "seven") -> LikertMatrix:
    """Discretize every cell by its z-score against the column stats.

    Zero-variance columns map every cell to "normal". Rows with any missing
    cell are dropped and recorded in the audit list; no value is imputed.
    """
    scheme = LikertScheme.of(scheme)
    missing_stats = [k for k in matrix.columns if k not in stats]
    if missing_stats:
        raise StatsMismatch(f"no stats for column(s): {', '.join(missing_stats)}")

    incomplete = matrix.isna().any(axis=1)
    dropped: list[tuple[datetime, list[str]]] = []
    for ts in matrix.index[incomplete]:
        gaps = list(matrix.columns[matrix.loc[ts].isna()])
        dropped.append((ts.to_pydatetime(), gaps))
    kept = matrix[~incomplete]

    leveled = {}
    for key in kept.columns:
        st = stats[key]
        values = kept[key].to_numpy(dtype=float)
        if st.std == 0:
            leveled[key] = np.full(len(values), "normal", dtype=object)
        else:
            leveled[key] = scheme.bin_zscores((values - st.mean) / st.std)
    data = pd.DataFrame(leveled, index=kept.index, columns=list(kept.columns))
    return LikertMatrix(data=data, scheme=scheme, dropped_rows=dropped)


def row_to_text(row: Mapping[str, str], scheme: "str | LikertScheme" = "seven") -> str:
    """Render one Likert row as "Key=level; Key=level" in column order,
    level names spelled with spaces."""
    scheme = LikertScheme.of(scheme)
    return "; ".join(f"{key}={scheme.display(level)}" for key, level in row.items())


# --- CSV serialization (the timeline artifact) ---

def write_matrix_csv(matrix: pd.DataFrame, stream: IO[str]) -> None:
    """First column ``minute`` in RFC 3339, then feature columns; missing
    cells are empty fields."""
    writer = csv.writer(stream)
    writer.writerow(["minute", *matrix.columns])
    for ts, row in matrix.iterrows():
        cells = ["" if pd.isna(v) else repr(float(v)) for v in row]
        writer.writerow([format_timestamp(ts.to_pydatetime()), *cells])


def write_likert_csv(likert: LikertMatrix, stream: IO[str]) -> None:
    writer = csv.writer(stream)
    writer.writerow(["minute", *likert.columns])
    for ts, row in likert.rows():
        writer.writerow([format_timestamp(ts), *row.values()])


def read_matrix_csv(stream: IO[str]) -> pd.DataFrame:
    """Inverse of write_matrix_csv."""
    reader = csv.reader(stream)
    header = next(reader)
    if not header or header[0] != "minute":
        raise ValueError("matrix CSV must start with a 'minute' column")
    keys = header[1:]
    index, rows = [], []
    for record in reader:
        index.append(parse_timestamp(record[0]))
        rows.append([float(v) if v else np.nan for v in record[1:]])
    matrix = pd.DataFrame(rows, columns=keys,
                          index=pd.DatetimeIndex(index, tz="UTC", name="minute"))
    return matrix
