"""Degradation accounting and the wear -> functionality map.

Wear is tracked on a single axis, ``wear_u`` in [0, 1], the fraction of the
lifetime throughput budget that has been consumed by cycling and calendar
ageing together. Energy capacity, impedance, power capacity and efficiency
are all read off that one number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Protocol

from .errors import DomainError

DAYS_PER_YEAR = 365.0


class WearCurve(Protocol):
    """Maps normalized wear to SOH and impedance ratio."""

    def soh(self, wear_u: float, eol_capacity_fraction: float) -> float: ...

    def z_ratio(self, wear_u: float, eol_impedance_ratio: float) -> float: ...


@dataclass(frozen=True)
class LinearWear:
    """SOH and impedance interpolate linearly between fresh and EOL values."""

    def soh(self, wear_u: float, eol_capacity_fraction: float) -> float:
        return 1.0 - (1.0 - eol_capacity_fraction) * wear_u

    def z_ratio(self, wear_u: float, eol_impedance_ratio: float) -> float:
        return 1.0 + (eol_impedance_ratio - 1.0) * wear_u


@dataclass(frozen=True)
class DegradationParams:
    """Cycle-life law, calendar rate and rated ratings of one storage system.

    Defaults are the lithium-ion baseline: 3000 full cycles to 70 % SOH,
    impedance doubling at EOL, 1 %/yr calendar fade, 90 % one-way
    efficiency and a 4 h energy-to-power ratio.
    """

    n100: float = 3000.0
    dod_exponent: float = -1.0
    calendar_rate: float = 0.01
    eol_capacity_fraction: float = 0.70
    eol_impedance_ratio: float = 2.0
    rated_energy: float = 4.0
    rated_power: float = 1.0
    eta0: float = 0.90
    wear_curve: WearCurve = field(default_factory=LinearWear, compare=False)

    def __post_init__(self) -> None:
        if not (self.n100 > 0 and math.isfinite(self.n100)):
            raise DomainError(f"n100 must be positive and finite, got {self.n100}")
        if not 0.0 < self.eol_capacity_fraction < 1.0:
            raise DomainError(
                f"eol_capacity_fraction must lie in (0, 1), got {self.eol_capacity_fraction}"
            )
        if not self.eol_impedance_ratio > 1.0:
            raise DomainError(
                f"eol_impedance_ratio must exceed 1, got {self.eol_impedance_ratio}"
            )
        if not 0.0 < self.eta0 <= 1.0:
            raise DomainError(f"eta0 must lie in (0, 1], got {self.eta0}")
        if not (self.rated_energy > 0 and self.rated_power > 0):
            raise DomainError("rated_energy and rated_power must be positive")
        if self.calendar_rate < 0:
            raise DomainError(f"calendar_rate must be >= 0, got {self.calendar_rate}")
        if not self.dod_exponent < 0:
            raise DomainError(f"dod_exponent must be negative, got {self.dod_exponent}")

    @property
    def k(self) -> float:
        """Exponent of DOD in the per-cycle degradation law."""
        return -self.dod_exponent

    @property
    def budget(self) -> float:
        return throughput_budget(self)


@dataclass(frozen=True)
class BatteryState:
    """Immutable snapshot of a battery's health."""

    wear_u: float
    soh: float
    z_ratio: float
    e_max: float
    p_max: float
    eta: float
    age_days: int = 0

    @property
    def at_eol(self) -> bool:
        return self.wear_u >= 1.0

    @classmethod
    def at_wear(cls, params: DegradationParams, wear_u: float, age_days: int = 0) -> "BatteryState":
        """Build the state implied by a given normalized wear."""
        if not 0.0 <= wear_u <= 1.0:
            raise DomainError(f"wear_u must lie in [0, 1], got {wear_u}")
        curve = params.wear_curve
        soh = curve.soh(wear_u, params.eol_capacity_fraction)
        z = curve.z_ratio(wear_u, params.eol_impedance_ratio)
        return cls(
            wear_u=wear_u,
            soh=soh,
            z_ratio=z,
            e_max=soh * params.rated_energy,
            p_max=power_capacity(params.rated_power, z),
            eta=efficiency(params.eta0, z),
            age_days=age_days,
        )

    @classmethod
    def fresh(cls, params: DegradationParams) -> "BatteryState":
        return cls.at_wear(params, 0.0)

    @classmethod
    def at_soh(cls, params: DegradationParams, soh: float) -> "BatteryState":
        """State at a target SOH under the linear wear map."""
        wear_u = (1.0 - soh) / (1.0 - params.eol_capacity_fraction)
        return cls.at_wear(params, min(1.0, max(0.0, wear_u)))


def cycle_life(dod: float, params: DegradationParams | None = None) -> float:
    """Number of cycles at depth ``dod`` that exhaust the budget."""
    params = params or DegradationParams()
    if not 0.0 < dod <= 1.0:
        raise DomainError(f"dod must lie in (0, 1], got {dod}")
    return params.n100 * dod**params.dod_exponent


def throughput_budget(params: DegradationParams) -> float:
    """Lifetime charge-plus-discharge energy, kWh, against rated capacity."""
    return 2.0 * params.rated_energy * params.n100


def cycle_degradation(throughput: float, e_max: float, params: DegradationParams) -> float:
    """Budget consumed by one day's throughput treated as a single cycle.

    DOD is measured against the current capacity ``e_max``. With ``k == 1``
    the result equals the throughput itself.
    """
    if throughput < 0:
        raise DomainError(f"throughput must be >= 0, got {throughput}")
    if not e_max > 0:
        raise DomainError(f"e_max must be positive, got {e_max}")
    if throughput == 0.0:
        return 0.0
    k = params.k
    if k == 1.0:
        return float(throughput)
    dod = throughput / (2.0 * e_max)
    return 2.0 * e_max * dod**k


def calendar_per_day(params: DegradationParams) -> float:
    # capacity fraction lost per year, expressed in budget units
    budget_share = params.calendar_rate / (1.0 - params.eol_capacity_fraction)
    return throughput_budget(params) * budget_share / DAYS_PER_YEAR


def calendar_increment(days: float, params: DegradationParams) -> float:
    """Calendar ageing over ``days`` in budget (kWh-equivalent) units."""
    if days < 0:
        raise DomainError(f"days must be >= 0, got {days}")
    return days * calendar_per_day(params)


def efficiency(eta0: float, z_ratio: float) -> float:
    """One-way efficiency after impedance has grown by ``z_ratio``."""
    if not 0.0 < eta0 <= 1.0:
        raise DomainError(f"eta0 must lie in (0, 1], got {eta0}")
    if z_ratio < 1.0:
        raise DomainError(f"z_ratio must be >= 1, got {z_ratio}")
    return 1.0 / (1.0 + z_ratio * (1.0 - eta0) / eta0)


def power_capacity(p0: float, z_ratio: float) -> float:
    if z_ratio < 1.0:
        raise DomainError(f"z_ratio must be >= 1, got {z_ratio}")
    return p0 / z_ratio


def apply_wear(
    state: BatteryState, d: float, params: DegradationParams, days: int = 1
) -> BatteryState:
    """Advance ``state`` by ``d`` kWh-equivalent of degradation and ``days`` of age.

    Wear saturates at 1 (physical EOL); the caller decides what to do then.
    """
    if d < 0:
        raise DomainError(f"degradation must be >= 0, got {d}")
    wear = min(1.0, state.wear_u + d / throughput_budget(params))
    if wear == state.wear_u:
        return replace(state, age_days=state.age_days + days)
    return BatteryState.at_wear(params, wear, state.age_days + days)
