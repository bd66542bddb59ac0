"""Hourly day-ahead price series: CSV ingestion, synthetic generation, stats.

Prices travel in $/MWh (files, ``PriceSeries.prices``) and are converted
once to $/kWh (``PriceSeries.per_kwh``) for everything downstream.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, PriceLoadError

log = logging.getLogger(__name__)

HOURS_PER_DAY = 24
MAX_GAP_HOURS = 3
CSV_HEADER = ("timestamp", "price_usd_per_mwh")


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Gap-free hourly prices in $/MWh covering whole days."""

    start_date: date
    prices: np.ndarray
    filled_hours: tuple[int, ...] = ()
    per_kwh: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        prices = np.asarray(self.prices, dtype=float)
        if prices.ndim != 1 or prices.size < HOURS_PER_DAY or prices.size % HOURS_PER_DAY:
            raise DomainError(
                f"price series must cover whole days (got {prices.size} hours)"
            )
        if not np.all(np.isfinite(prices)):
            raise DomainError("price series contains non-finite values")
        prices.setflags(write=False)
        per_kwh = prices / 1000.0
        per_kwh.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "per_kwh", per_kwh)

    @property
    def n_days(self) -> int:
        return self.prices.size // HOURS_PER_DAY

    def day(self, i: int) -> np.ndarray:
        """Prices of day ``i`` in $/kWh."""
        return self.per_kwh[i * HOURS_PER_DAY : (i + 1) * HOURS_PER_DAY]

    def daily(self) -> np.ndarray:
        """(n_days, 24) view in $/MWh."""
        return self.prices.reshape(self.n_days, HOURS_PER_DAY)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return self.start_date == other.start_date and np.array_equal(self.prices, other.prices)

    def __hash__(self) -> int:
        return hash((self.start_date, self.prices.tobytes()))


@dataclass(frozen=True)
class PriceStats:
    mean_daily_spread: float
    mean_price: float
    n_days: int


@dataclass(frozen=True)
class PriceSchema:
    """Column mapping for raw market exports."""

    timestamp: str = CSV_HEADER[0]
    price: str = CSV_HEADER[1]


def _parse_timestamp(text: str) -> datetime:
    ts = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    if ts.tzinfo is not None:
        ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    return ts


def load_prices(path: str | Path, schema: PriceSchema | None = None) -> PriceSeries:
    """Read an hourly price CSV.

    Gaps of up to three hours are filled by linear interpolation and reported
    through ``warnings`` and ``PriceSeries.filled_hours``; anything longer,
    duplicate timestamps or unparseable rows raise :class:`PriceLoadError`.
    """
    schema = schema or PriceSchema()
    path = Path(path)
    if not path.is_file():
        raise PriceLoadError(f"price file not found: {path}")
    stamps: list[datetime] = []
    values: list[float] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {schema.timestamp, schema.price} - set(reader.fieldnames or ())
        if missing:
            raise PriceLoadError(f"{path}: missing column(s) {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                ts = _parse_timestamp(row[schema.timestamp])
                val = float(row[schema.price])
            except (TypeError, ValueError) as exc:
                raise PriceLoadError(f"{path}:{lineno}: unparseable row {row!r}") from exc
            if not math.isfinite(val):
                raise PriceLoadError(f"{path}:{lineno}: non-finite price {val}")
            if stamps:
                step = ts - stamps[-1]
                if step <= timedelta(0):
                    raise PriceLoadError(
                        f"{path}:{lineno}: duplicate or out-of-order timestamp {ts.isoformat()}"
                    )
                if step % timedelta(hours=1):
                    raise PriceLoadError(f"{path}:{lineno}: timestamp {ts.isoformat()} is not hourly")
                gap = step // timedelta(hours=1) - 1
                if gap > MAX_GAP_HOURS:
                    raise PriceLoadError(
                        f"{path}:{lineno}: gap of {gap} h before {ts.isoformat()} exceeds {MAX_GAP_HOURS} h"
                    )
                for _ in range(gap):
                    stamps.append(stamps[-1] + timedelta(hours=1))
                    values.append(math.nan)
            stamps.append(ts)
            values.append(val)
    if not values:
        raise PriceLoadError(f"{path}: no data rows")
    arr = np.array(values)
    holes = np.flatnonzero(np.isnan(arr))
    if holes.size:
        good = np.flatnonzero(~np.isnan(arr))
        arr[holes] = np.interp(holes, good, arr[good])
        msg = f"{path}: interpolated {holes.size} missing hour(s) at " + ", ".join(
            stamps[i].isoformat() for i in holes
        )
        warnings.warn(msg, stacklevel=2)
        log.warning(msg)
    if stamps[0].hour != 0:
        raise PriceLoadError(f"{path}: series must start at hour 00, got {stamps[0].isoformat()}")
    if arr.size % HOURS_PER_DAY:
        raise PriceLoadError(
            f"{path}: {arr.size} hourly rows is not a whole number of days "
            f"(last row {stamps[-1].isoformat()})"
        )
    return PriceSeries(stamps[0].date(), arr, tuple(int(i) for i in holes))


def write_prices(series: PriceSeries, path: str | Path) -> None:
    """Write the normalized CSV (UTF-8, LF line endings)."""
    start = datetime.combine(series.start_date, datetime.min.time())
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for h, p in enumerate(series.prices):
            w.writerow(((start + timedelta(hours=h)).isoformat(), repr(float(p))))


def _daily_spread(daily: np.ndarray) -> float:
    return float(np.mean(daily.max(axis=1) - daily.min(axis=1)))


def synth_prices(
    seed: int,
    n_days: int,
    spread_mean: float = 32.0,
    base: float = 30.0,
    noise_sd: float = 3.0,
    start_date: date = date(2016, 1, 1),
    day_sd: float = 0.0,
) -> PriceSeries:
    """Sinusoidal day shape (valley 06:00, peak 18:00) plus Gaussian noise.

    The sinusoid amplitude is calibrated against the drawn noise so the
    realized mean daily spread equals ``spread_mean``; with ``noise_sd == 0``
    and ``day_sd == 0`` the amplitude is exactly ``spread_mean / 2``. When the
    noise alone is wider than ``spread_mean`` the amplitude is 0.

    ``day_sd`` > 0 scales each day's sinusoid by a lognormal factor
    (log-sd ``day_sd``, normalized to mean 1) so that some days are worth
    much more than others, as in real markets.
    """
    if n_days < 1:
        raise DomainError(f"n_days must be >= 1, got {n_days}")
    if spread_mean < 0 or noise_sd < 0 or day_sd < 0:
        raise DomainError("spread_mean, noise_sd and day_sd must be >= 0")
    rng = np.random.default_rng(seed)
    hours = np.arange(HOURS_PER_DAY)
    shape = np.sin(2.0 * np.pi * (hours - 12) / HOURS_PER_DAY)
    noise = rng.normal(0.0, noise_sd, size=(n_days, HOURS_PER_DAY)) if noise_sd > 0 else np.zeros(
        (n_days, HOURS_PER_DAY)
    )
    if day_sd > 0:
        scale = rng.lognormal(0.0, day_sd, size=n_days)
        shape = (scale / scale.mean())[:, None] * shape

    def excess(amp: float) -> float:
        return _daily_spread(amp * shape + noise) - spread_mean

    if noise_sd == 0 and day_sd == 0:
        amp = spread_mean / 2.0
    elif excess(0.0) >= 0:
        amp = 0.0
    else:
        hi = spread_mean + 1.0
        while excess(hi) < 0:
            hi *= 2.0
        amp = brentq(excess, 0.0, hi, xtol=1e-12)
    daily = base + amp * shape + noise
    return PriceSeries(start_date, daily.ravel())


def price_stats(series: PriceSeries) -> PriceStats:
    """Mean daily peak-valley spread and mean price, both $/MWh."""
    return PriceStats(
        mean_daily_spread=_daily_spread(series.daily()),
        mean_price=float(series.prices.mean()),
        n_days=series.n_days,
    )


def max_spread_margin(series: PriceSeries, eta: float) -> float:
    """Upper bound on the profit per kWh of throughput any day offers, $/kWh.

    Pairs each day's cheapest and dearest hours. A throughput penalty at or
    above this value keeps an empty battery idle on every day.
    """
    daily = series.per_kwh.reshape(series.n_days, HOURS_PER_DAY)
    margin = (daily.max(axis=1) * eta - daily.min(axis=1) / eta) / 2.0
    return max(0.0, float(margin.max()))
