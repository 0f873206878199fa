"""Price ingestion, percent log-returns and descriptive statistics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from scipy import stats

from errors import DataError
from schemas import DescriptiveStatsPayload, DescriptiveStatsRow

logger = logging.getLogger(__name__)

MIN_DESCRIBE_OBS = 8
# header is line 1, so data row i sits on line i + 2
_FIRST_DATA_LINE = 2


@dataclass(frozen=True)
class PriceTable:
    dates: tuple[str, ...]
    tickers: tuple[str, ...]
    close: NDArray[np.float64] = field(repr=False)
    dropped_rows: int = 0
    resorted: bool = False

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class ReturnTable:
    dates: tuple[str, ...]
    tickers: tuple[str, ...]
    returns: NDArray[np.float64] = field(repr=False)

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def dimension(self) -> int:
        return len(self.tickers)

    def column(self, ticker: str) -> NDArray[np.float64]:
        return self.returns[:, self.tickers.index(ticker)]


def _read_frame(path: Path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except FileNotFoundError as exc:
        raise DataError(f"price file not found: {path}") from exc
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"malformed CSV {path}: {exc}") from exc
    columns = [str(c).strip() for c in frame.columns]
    if len(columns) < 2 or columns[0].lower() != "date":
        raise DataError(f"{path}: header must be 'date,TICKER1,...', got {','.join(columns)}")
    if len(set(columns)) != len(columns):
        raise DataError(f"{path}: duplicate column names in header")
    frame.columns = ["date", *columns[1:]]
    return frame


def _first_bad(mask: pd.Series) -> int:
    return int(mask[mask].index[0]) + _FIRST_DATA_LINE


def ingest_csv(path: str | Path) -> PriceTable:
    """Parse ``date,TICKER1,...`` closing prices into an aligned table.

    Rows with any missing price are dropped and counted; rows out of date
    order are sorted with a warning. Malformed dates, non-numeric and
    non-positive prices raise ``DataError`` naming the CSV line.
    """

    path = Path(path)
    frame = _read_frame(path)
    dates = pd.to_datetime(frame["date"].str.strip(), format="ISO8601", errors="coerce")
    if dates.isna().any():
        raise DataError(f"{path}: line {_first_bad(dates.isna())}: malformed or missing date")

    tickers = list(frame.columns[1:])
    raw = frame[tickers].apply(lambda col: col.str.strip()).replace("", np.nan)
    missing = raw.isna()
    values = raw.apply(pd.to_numeric, errors="coerce")
    unparsable = (values.isna() | np.isinf(values)) & ~missing
    if unparsable.any(axis=None):
        bad_rows = unparsable.any(axis=1)
        raise DataError(f"{path}: line {_first_bad(bad_rows)}: non-numeric price")
    non_positive = values <= 0.0
    if non_positive.any(axis=None):
        bad_rows = non_positive.any(axis=1)
        raise DataError(f"{path}: line {_first_bad(bad_rows)}: prices must be positive")

    incomplete = missing.any(axis=1)
    dropped = int(incomplete.sum())
    if dropped:
        logger.warning("%s: dropped %d row(s) with missing prices", path, dropped)
    values = values.loc[~incomplete]
    dates = dates.loc[~incomplete]
    if dates.duplicated().any():
        raise DataError(f"{path}: line {_first_bad(dates.duplicated())}: duplicate date")

    resorted = not dates.is_monotonic_increasing
    if resorted:
        logger.warning("%s: dates out of order; rows sorted by date", path)
        order = np.argsort(dates.to_numpy(), kind="stable")
        values = values.iloc[order]
        dates = dates.iloc[order]
    if len(dates) == 0:
        raise DataError(f"{path}: no complete price rows")

    return PriceTable(
        dates=tuple(d.date().isoformat() for d in dates),
        tickers=tuple(tickers),
        close=values.to_numpy(dtype=float),
        dropped_rows=dropped,
        resorted=resorted,
    )


def compute_returns(prices: PriceTable) -> ReturnTable:
    """``100 * (ln p[t+1] - ln p[t])`` per column."""

    if len(prices) < 2:
        raise DataError(f"returns need at least 2 price rows, got {len(prices)}")
    returns = 100.0 * np.diff(np.log(prices.close), axis=0)
    return ReturnTable(dates=prices.dates[1:], tickers=prices.tickers, returns=returns)


def load_returns(path: str | Path) -> tuple[PriceTable, ReturnTable]:
    prices = ingest_csv(path)
    return prices, compute_returns(prices)


def _describe_column(ticker: str, x: NDArray[np.float64]) -> DescriptiveStatsRow:
    n = x.size
    std = float(np.std(x, ddof=1))
    common = {
        "ticker": ticker,
        "n": n,
        "maximum": float(x.max()),
        "mean": float(x.mean()),
        "minimum": float(x.min()),
        "std": std,
    }
    if std == 0.0:
        logger.warning("%s: constant series; higher moments undefined", ticker)
        return DescriptiveStatsRow(
            **common, skewness=None, kurtosis=None, jarque_bera=None, jb_pvalue=None, degenerate=True
        )
    skewness = float(stats.skew(x))
    kurtosis = float(stats.kurtosis(x, fisher=False))
    jb = jarque_bera(n, skewness, kurtosis)
    return DescriptiveStatsRow(
        **common,
        skewness=skewness,
        kurtosis=kurtosis,
        jarque_bera=jb,
        jb_pvalue=float(stats.chi2.sf(jb, 2)),
    )


def jarque_bera(n: int, skewness: float, kurtosis: float) -> float:
    """``(n / 6) (S^2 + (K - 3)^2 / 4)`` with raw kurtosis ``K``."""

    return n / 6.0 * (skewness**2 + (kurtosis - 3.0) ** 2 / 4.0)


def describe(returns: ReturnTable, *, dropped_rows: int = 0) -> DescriptiveStatsPayload:
    if len(returns) < MIN_DESCRIBE_OBS:
        raise DataError(f"descriptive statistics need at least {MIN_DESCRIBE_OBS} returns, got {len(returns)}")
    rows = [_describe_column(t, returns.returns[:, j]) for j, t in enumerate(returns.tickers)]
    return DescriptiveStatsPayload(
        start_date=returns.dates[0],
        end_date=returns.dates[-1],
        dropped_rows=dropped_rows,
        rows=rows,
    )


def format_stats_table(payload: DescriptiveStatsPayload) -> str:
    def cell(value: float | None, width: int = 12) -> str:
        if value is None or not math.isfinite(value):
            return f"{'-':>{width}}"
        return f"{value:>{width}.4f}"

    header = f"{'':<12}" + "".join(f"{row.ticker:>12}" for row in payload.rows)
    lines = [header]
    for label, attr in (
        ("Maximum", "maximum"),
        ("Mean", "mean"),
        ("Minimum", "minimum"),
        ("Std. Dev.", "std"),
        ("Skewness", "skewness"),
        ("Kurtosis", "kurtosis"),
        ("Jarque-Bera", "jarque_bera"),
        ("Probability", "jb_pvalue"),
    ):
        lines.append(f"{label:<12}" + "".join(cell(getattr(row, attr)) for row in payload.rows))
    lines.append(f"{'Obs.':<12}" + "".join(f"{row.n:>12d}" for row in payload.rows))
    return "\n".join(lines)
