"""
Panel validation
Builds a ReturnPanel from a raw ticker -> date -> value map.
"""

import logging
from typing import List, Mapping, NamedTuple, Union

import numpy as np
import pandas as pd

from network_logarch.core.errors import (
    EmptyPanel,
    InsufficientObservations,
    InvalidParameter,
    NonMonotoneDates,
    ParseError,
)
from network_logarch.core.types import ReturnPanel

logger = logging.getLogger(__name__)

MIN_TICKERS: int = 2
MIN_DATES: int = 3
FIELDS = ('price', 'return')

RawPanel = Mapping[str, Mapping[str, float]]


class PanelValidation(NamedTuple):
    panel: ReturnPanel
    dropped: List[str]


def _order_dates(labels) -> List[str]:
    """Sort date labels chronologically; labels stay as given"""
    labels = sorted({str(label) for label in labels})
    try:
        parsed = pd.to_datetime(pd.Series(labels), format='ISO8601')
    except (ValueError, TypeError) as e:
        raise NonMonotoneDates(f"Dates cannot be ordered: {e}")
    if parsed.duplicated().any():
        raise NonMonotoneDates("Distinct date labels map to the same day")
    return [labels[i] for i in np.argsort(parsed.to_numpy(), kind='stable')]


def validate_panel(raw: Union[RawPanel, ReturnPanel], field: str = 'return') -> PanelValidation:
    """
    Validate a raw panel and drop stocks with gaps

    The calendar is the set of dates observed by more than half of the
    tickers. Stocks missing any calendar date (or holding a non-finite value
    on one) are dropped. Prices are turned into log differences.

    Args:
        raw: ticker -> date -> value map, or an existing ReturnPanel
        field: 'price' or 'return'

    Returns:
        PanelValidation with the panel and the sorted list of dropped tickers

    Raises:
        EmptyPanel: If fewer than 2 stocks survive
        NonMonotoneDates: If the dates cannot be ordered
    """
    if isinstance(raw, ReturnPanel):
        return PanelValidation(raw, [])
    if field not in FIELDS:
        raise InvalidParameter(f"field must be one of {FIELDS}, got {field!r}")
    if len(raw) < MIN_TICKERS:
        raise EmptyPanel(f"Need at least {MIN_TICKERS} tickers, got {len(raw)}")

    counts: dict = {}
    for series in raw.values():
        for date in series:
            counts[str(date)] = counts.get(str(date), 0) + 1
    calendar = _order_dates(d for d, c in counts.items() if c * 2 > len(raw))
    if len(calendar) < MIN_DATES:
        raise InsufficientObservations(f"Need at least {MIN_DATES} common dates, got {len(calendar)}")
    outside = len(counts) - len(calendar)
    if outside:
        logger.info("Discarding %d dates observed by a minority of tickers", outside)

    kept, rows, dropped = [], [], []
    for ticker in raw:
        series = {str(d): v for d, v in raw[ticker].items()}
        values = np.array([series.get(d, np.nan) for d in calendar], dtype=float)
        if not np.all(np.isfinite(values)):
            dropped.append(str(ticker))
            continue
        kept.append(str(ticker))
        rows.append(values)

    if dropped:
        logger.info("Dropped %d stocks with missing values: %s", len(dropped), ', '.join(dropped))
    if len(kept) < MIN_TICKERS:
        raise EmptyPanel(f"Only {len(kept)} stocks survive validation")

    matrix = np.vstack(rows)
    dates = calendar
    if field == 'price':
        if np.any(matrix <= 0):
            bad = kept[int(np.argwhere(matrix <= 0)[0][0])]
            raise ParseError("Prices must be strictly positive", column=bad)
        matrix = np.diff(np.log(matrix), axis=1)
        dates = calendar[1:]

    return PanelValidation(ReturnPanel(kept, dates, matrix), sorted(dropped))
