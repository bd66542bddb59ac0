"""Run configuration files.

The format is INI: ``[section]`` headers and ``key = value`` lines, ``#``
comments. Every key is optional and defaults to the lithium-ion baseline;
unknown sections or keys are rejected. Relative paths are resolved against
the directory of the config file.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from .battery import DegradationParams
from .errors import ConfigError
from .lifecycle import LifecycleConfig, MbuGrid
from .market import PriceSchema, PriceSeries, load_prices, synth_prices

OUTPUT_ENV = "EESLIFE_OUTPUT_DIR"


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())


def _opt_float(text: str) -> float | None:
    return None if text.strip().lower() in ("", "auto") else float(text)


# section -> key -> (parser, default, help)
SCHEMA: dict[str, dict[str, tuple[Callable[[str], Any], Any, str]]] = {
    "battery": {
        "n100": (float, 3000.0, "full-depth cycles to physical EOL"),
        "dod_exponent": (float, -1.0, "exponent of the cycle-life power law in DOD"),
        "calendar_rate": (float, 0.01, "capacity fraction lost per year to calendar ageing"),
        "eol_capacity_fraction": (float, 0.70, "SOH at physical EOL"),
        "eol_impedance_ratio": (float, 2.0, "impedance ratio at physical EOL"),
        "rated_energy_kwh": (float, 4.0, "rated energy capacity, kWh"),
        "rated_power_kw": (float, 1.0, "rated power capacity, kW"),
        "eta0": (float, 0.90, "fresh one-way efficiency"),
    },
    "economics": {
        "discount_rate": (float, 0.07, "annual discount rate"),
        "om_fixed_usd_per_kw_yr": (float, 9.0, "fixed O&M, $/kW-yr (9 utility, 16 commercial, 27 residential)"),
        "max_horizon_years": (int, 30, "simulation cap, years"),
        "midterm_update": (str, "month", "discount refresh period: day | month | year"),
        "discounting": (str, "step", "step (whole elapsed years) | continuous"),
        "self_discharge_per_hour": (float, 0.0, "self-discharge fraction per hour"),
        "e_end_min_kwh": (float, 0.0, "minimum end-of-day SOC, kWh"),
    },
    "prices": {
        "file": (str, "", "hourly price CSV; empty means synthetic prices"),
        "timestamp_column": (str, "timestamp", "timestamp column name in the CSV"),
        "price_column": (str, "price_usd_per_mwh", "price column name ($/MWh) in the CSV"),
        "synth_seed": (int, 1, "synthetic prices: RNG seed"),
        "synth_days": (int, 365, "synthetic prices: days in the replayed year"),
        "synth_spread": (float, 32.0, "synthetic prices: mean daily spread, $/MWh"),
        "synth_base": (float, 30.0, "synthetic prices: mean level, $/MWh"),
        "synth_noise_sd": (float, 3.0, "synthetic prices: hourly noise sd, $/MWh"),
        "synth_day_sd": (float, 0.5, "synthetic prices: log-sd of day-to-day amplitude"),
    },
    "search": {
        "mu_lo": (float, 0.0, "lower MBU bound, $/kWh"),
        "mu_hi": (_opt_float, None, "upper MBU bound, $/kWh; auto = 2x max daily spread margin"),
        "grid_points": (int, 32, "coarse MBU grid size"),
        "refine": (_bool, True, "golden-section refinement around the best grid point"),
        "rel_tol": (float, 1e-3, "refinement tolerance relative to the bracket top"),
    },
    "sweep": {
        "om_values": (_floats, tuple(float(v) for v in range(0, 31, 3)), "O&M grid, $/kW-yr"),
        "cycle_caps": (_floats, (1000.0, 2000.0, 3000.0, 5000.0, 7500.0, 10000.0), "n100 grid"),
        "cal_rates": (_floats, (0.0, 0.005, 0.01, 0.02, 0.03, 0.04), "calendar-rate grid, 1/yr"),
    },
    "output": {
        "dir": (str, "out", f"output directory (overridden by ${OUTPUT_ENV})"),
    },
}


def describe_keys() -> str:
    """Human-readable key reference for ``--help``."""
    lines = ["config keys (INI sections, baseline defaults):"]
    for section, keys in SCHEMA.items():
        lines.append(f"  [{section}]")
        for key, (_, default, doc) in keys.items():
            if isinstance(default, tuple):
                default = ",".join(f"{v:g}" for v in default)
            elif default is None:
                default = "auto"
            lines.append(f"    {key} = {default}    # {doc}")
    return "\n".join(lines)


@dataclass(frozen=True)
class RunConfig:
    values: dict[str, dict[str, Any]]
    base_dir: Path

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    @property
    def output_dir(self) -> Path:
        env = os.environ.get(OUTPUT_ENV)
        if env:
            return Path(env)
        return self._resolve(self.get("output", "dir"))

    def _resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    def params(self) -> DegradationParams:
        b = self.values["battery"]
        try:
            return DegradationParams(
                n100=b["n100"],
                dod_exponent=b["dod_exponent"],
                calendar_rate=b["calendar_rate"],
                eol_capacity_fraction=b["eol_capacity_fraction"],
                eol_impedance_ratio=b["eol_impedance_ratio"],
                rated_energy=b["rated_energy_kwh"],
                rated_power=b["rated_power_kw"],
                eta0=b["eta0"],
            )
        except ValueError as exc:
            raise ConfigError(f"[battery]: {exc}") from exc

    def prices(self) -> PriceSeries:
        p = self.values["prices"]
        if p["file"]:
            return load_prices(self._resolve(p["file"]), PriceSchema(p["timestamp_column"], p["price_column"]))
        return synth_prices(
            p["synth_seed"], p["synth_days"], p["synth_spread"], p["synth_base"], p["synth_noise_sd"],
            day_sd=p["synth_day_sd"],
        )

    def lifecycle(self, prices: PriceSeries | None = None) -> LifecycleConfig:
        e = self.values["economics"]
        s = self.values["search"]
        params = self.params()
        prices = prices if prices is not None else self.prices()
        return LifecycleConfig(
            params=params,
            prices=prices,
            discount_rate=e["discount_rate"],
            om_fixed=e["om_fixed_usd_per_kw_yr"],
            max_horizon_years=e["max_horizon_years"],
            mbu_grid=MbuGrid(lo=s["mu_lo"], hi=s["mu_hi"], points=s["grid_points"], refine=s["refine"],
                             rel_tol=s["rel_tol"]),
            midterm_update=e["midterm_update"],
            discounting=e["discounting"],
            rho=e["self_discharge_per_hour"],
            e_end_min=e["e_end_min_kwh"],
        )


def defaults() -> dict[str, dict[str, Any]]:
    return {sec: {k: spec[1] for k, spec in keys.items()} for sec, keys in SCHEMA.items()}


def load_config(path: str | Path | None) -> RunConfig:
    """Parse and validate a config file; ``None`` gives all defaults."""
    values = defaults()
    if path is None:
        return RunConfig(values, Path.cwd())
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",), comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key '{key}' in [{section}]")
            conv = SCHEMA[section][key][0]
            try:
                values[section][key] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"{path}: bad value for '{key}' in [{section}]: {raw!r}") from exc
    cfg = RunConfig(values, path.parent)
    cfg.params()
    try:
        cfg.lifecycle(prices=synth_prices(0, 1, 0.0, 0.0, 0.0))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cfg
