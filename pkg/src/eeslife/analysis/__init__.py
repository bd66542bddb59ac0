from .render import contour_segments, render_csv, render_svg
from .studies import (
    DEG_COLUMNS,
    OM_COLUMNS,
    SOH_COLUMNS,
    SOH_PROFILE_NOTE,
    SweepResult,
    economic_life,
    grid_values,
    om_crossover,
    profitability_vs_soh,
    sweep_degradation,
    sweep_om,
)

__all__ = [
    "DEG_COLUMNS",
    "OM_COLUMNS",
    "SOH_COLUMNS",
    "SOH_PROFILE_NOTE",
    "SweepResult",
    "contour_segments",
    "economic_life",
    "grid_values",
    "om_crossover",
    "profitability_vs_soh",
    "render_csv",
    "render_svg",
    "sweep_degradation",
    "sweep_om",
]
