"""
Data Loader
Handles CSV ingestion, return computation and the log-squared transform.
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd

from network_logarch.core.errors import (
    AllZeroSeries,
    DuplicateKey,
    InvalidParameter,
    ParseError,
)
from network_logarch.core.types import LogVolPanel, ReturnPanel, ZeroPolicy
from network_logarch.core.validation import PanelValidation, validate_panel

logger = logging.getLogger(__name__)

# Constants
LAYOUTS = ('wide', 'long')
LONG_COLUMNS = ('date', 'ticker', 'value')
ZERO_THRESHOLD: float = 1e-300
MISSING_TOKENS = ('', 'NA', 'N/A', 'NaN', 'nan', 'null')


def _read_frame(path: Union[str, Path]) -> pd.DataFrame:
    """Read every cell as text so that bad cells can be located"""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except FileNotFoundError:
        raise ParseError(f"CSV file not found: {path}")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"Cannot parse CSV {path}: {e}")
    header = pd.read_csv(path, header=None, nrows=1, dtype=str, encoding='utf-8').iloc[0].tolist()
    duplicated = sorted({c for c in header if header.count(c) > 1})
    if duplicated:
        raise DuplicateKey(f"Repeated column names in header: {', '.join(map(str, duplicated))}")
    frame.columns = [str(c).strip() for c in header]
    return frame


def _to_numeric(column: pd.Series, name: str) -> pd.Series:
    """Parse a text column; missing markers become NaN, anything else must be a number"""
    text = column.str.strip()
    missing = text.isin(MISSING_TOKENS)
    values = pd.to_numeric(text.where(~missing), errors='coerce')
    bad = values.isna() & ~missing
    if bad.any():
        position = int(np.flatnonzero(bad.to_numpy())[0])
        raise ParseError(
            f"Non-numeric value {text.iloc[position]!r}", row=position + 2, column=name
        )
    return values


def _wide_to_raw(frame: pd.DataFrame) -> Dict[str, Dict[str, float]]:
    if frame.shape[1] < 2:
        raise ParseError("Wide layout needs a date column and at least one ticker column")
    date_column = frame.columns[0]
    dates = frame[date_column].str.strip()
    repeated = dates[dates.duplicated()]
    if not repeated.empty:
        raise DuplicateKey(f"Date {repeated.iloc[0]!r} appears more than once")
    raw = {}
    for ticker in frame.columns[1:]:
        values = _to_numeric(frame[ticker], ticker)
        raw[ticker] = {d: v for d, v in zip(dates, values) if not np.isnan(v)}
    return raw


def _long_to_raw(frame: pd.DataFrame) -> Dict[str, Dict[str, float]]:
    missing = [c for c in LONG_COLUMNS if c not in frame.columns]
    if missing:
        raise ParseError(f"Long layout is missing columns: {', '.join(missing)}")
    frame = frame.assign(
        date=frame['date'].str.strip(),
        ticker=frame['ticker'].str.strip(),
        value=_to_numeric(frame['value'], 'value'),
    )
    repeated = frame[frame.duplicated(['date', 'ticker'])]
    if not repeated.empty:
        first = repeated.iloc[0]
        raise DuplicateKey(f"Repeated (date, ticker) pair ({first['date']}, {first['ticker']})")
    raw: Dict[str, Dict[str, float]] = {}
    for row in frame.dropna(subset=['value']).itertuples(index=False):
        raw.setdefault(row.ticker, {})[row.date] = row.value
    return raw


def read_csv_panel(path: Union[str, Path], layout: str = 'wide', field: str = 'return') -> PanelValidation:
    """
    Read a CSV file into a validated panel, keeping the drop list

    Args:
        path: CSV file (comma separated, header row, UTF-8)
        layout: 'wide' (date + one column per ticker) or 'long' (date, ticker, value)
        field: 'price' or 'return'

    Raises:
        ParseError: If a cell or the file cannot be parsed
        DuplicateKey: If a (date, ticker) pair repeats
    """
    if layout not in LAYOUTS:
        raise InvalidParameter(f"layout must be one of {LAYOUTS}, got {layout!r}")
    frame = _read_frame(path)
    raw = _wide_to_raw(frame) if layout == 'wide' else _long_to_raw(frame)
    result = validate_panel(raw, field=field)
    logger.info(
        "Loaded %s: %d stocks x %d dates (%d dropped)",
        path, result.panel.n, result.panel.T, len(result.dropped),
    )
    return result


def load_csv(path: Union[str, Path], layout: str = 'wide', field: str = 'return') -> ReturnPanel:
    """Read a CSV file into a ReturnPanel on the common calendar"""
    return read_csv_panel(path, layout, field).panel


def squared_returns(returns: np.ndarray) -> np.ndarray:
    """y^2 with magnitudes below the denormal threshold treated as exact zeros"""
    returns = np.asarray(returns, dtype=float)
    return np.where(np.abs(returns) < ZERO_THRESHOLD, 0.0, returns ** 2)


def floor_log_squared(returns: np.ndarray, floors: np.ndarray) -> np.ndarray:
    """ln(max(y^2, floor)) with one floor per row"""
    floors = np.asarray(floors, dtype=float)
    if np.ndim(returns) == 2:
        floors = floors[:, None]
    return np.log(np.maximum(squared_returns(returns), floors))


def log_squared(panel: ReturnPanel, policy: Optional[ZeroPolicy] = None, warn: bool = True) -> LogVolPanel:
    """
    Log-squared transform with zero handling

    Args:
        panel: Valid return panel (the estimation window only, never test data)
        policy: Zero policy; defaults to flooring at the smallest nonzero y^2 per stock
        warn: Report floored entries at WARNING; DEBUG otherwise (rolling windows)

    Returns:
        LogVolPanel whose policy records how many entries were floored per stock

    Raises:
        AllZeroSeries: If a stock has no nonzero return under floor_min_nonzero
    """
    policy = policy or ZeroPolicy()
    y2 = squared_returns(panel.returns)

    if policy.mode == 'floor_constant':
        floors = np.full(panel.n, float(policy.constant))
    else:
        masked = np.where(y2 > 0, y2, np.inf)
        floors = masked.min(axis=1)
        empty = [t for t, f in zip(panel.tickers, floors) if not np.isfinite(f)]
        if empty:
            raise AllZeroSeries(f"No nonzero return to floor with for: {', '.join(empty)}")

    applied = (y2 < floors[:, None]).sum(axis=1)
    counts = {t: int(c) for t, c in zip(panel.tickers, applied) if c}
    if counts:
        logger.log(
            logging.WARNING if warn else logging.DEBUG,
            "Zero policy %s floored %d entries", policy.describe(), int(applied.sum()),
        )

    values = np.log(np.maximum(y2, floors[:, None]))
    recorded = ZeroPolicy(policy.mode, policy.constant, counts)
    return LogVolPanel(panel.tickers, panel.dates, values, floors, recorded)


def summarize_panel(panel: ReturnPanel) -> pd.DataFrame:
    """Mean, standard deviation, minimum and maximum return per stock"""
    frame = panel.to_frame()
    summary = pd.DataFrame({
        'mean': frame.mean(),
        'sd': frame.std(ddof=1),
        'min': frame.min(),
        'max': frame.max(),
    })
    summary.index.name = 'ticker'
    return summary
