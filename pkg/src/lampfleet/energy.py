"""Fleet energy and tariff cost model for the four city corporations.

All arithmetic is exact decimal; the one deliberate quantization is the
per-lamp daily bill, held at whole paisa (0.01 TK): a 40 W LED over
12 h costs 3.696 TK which bills as 3.70, and scaling that by the CCC
fleet is what yields the published 124,875 TK/day. Display rounding
(half-up to whole TK, or one decimal for MWh) never feeds back into any
computation.

Known source-data quirks, reported but not reproduced:

* the published yearly savings figure 68,246,125 TK is internally
  inconsistent by 250 TK; the self-consistent value is 68,245,875;
* the published 11.15 MWh/day for DNCC dimmed is half of the *rounded*
  22.3; the exact value is 11.1384, which displays as 11.1.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Optional

TARIFF_TK_PER_KWH = Decimal("7.70")
HOURS_PER_DAY = 12
DAYS_PER_MONTH = 30
DAYS_PER_YEAR = 365

PAISA = Decimal("0.01")
_TK = Decimal("1")
_MWH_DISPLAY = Decimal("0.1")

PUBLISHED_YEARLY_SAVE_TK = Decimal("68246125")
PUBLISHED_DNCC_DIM_MWH = Decimal("11.15")


class IncompatibleOption(ValueError):
    """Lamp option not offered by the fleet (sodium exists only in CCC)."""


class MismatchedFleets(ValueError):
    """Savings comparison across different fleets or hour bases."""


@dataclass(frozen=True)
class LampOption:
    label: str
    rated_watts: int
    brightness_pct: int
    requires_sodium: bool = False

    def __post_init__(self):
        if self.rated_watts <= 0:
            raise ValueError("rated_watts must be > 0")
        if not 0 < self.brightness_pct <= 100:
            raise ValueError("brightness_pct must be in 1..100")


@dataclass(frozen=True)
class FleetProfile:
    city: str
    lamp_count: int
    has_sodium: bool = False


SODIUM_100 = LampOption("100W sodium", 100, 100, requires_sodium=True)
LED_FULL = LampOption("40W LED @100%", 40, 100)
LED_DIM = LampOption("40W LED @50%", 40, 50)

FLEETS = {
    "CCC": FleetProfile("CCC", 33_750, has_sodium=True),
    "DNCC": FleetProfile("DNCC", 46_410),
    "DSCC": FleetProfile("DSCC", 54_966),
    "NCC": FleetProfile("NCC", 2_474),
}

CITY_ORDER = ("CCC", "DNCC", "DSCC", "NCC")


def to_paisa(tk: Decimal) -> Decimal:
    """Quantize an amount to whole paisa, half-up."""
    return tk.quantize(PAISA, rounding=ROUND_HALF_UP)


def display_tk(tk: Decimal) -> str:
    """Whole-taka display with thousands separators, half-up."""
    return f"{tk.quantize(_TK, rounding=ROUND_HALF_UP):,}"


def display_mwh(mwh: Decimal) -> str:
    return format(mwh.quantize(_MWH_DISPLAY, rounding=ROUND_HALF_UP).normalize(), "f")


def daily_energy_kwh(rated_watts, brightness_pct, hours=HOURS_PER_DAY) -> Decimal:
    """Energy of one lamp over a day: watts x brightness x hours, exact."""
    if hours < 0:
        raise ValueError("hours must be >= 0")
    return Decimal(rated_watts) * Decimal(brightness_pct) / 100 * Decimal(hours) / 1000


def daily_cost_tk(kwh: Decimal, tariff: Decimal = TARIFF_TK_PER_KWH) -> Decimal:
    """Exact kWh x tariff product; billing quantization is the caller's
    call (see ``to_paisa``), display rounding is separate again."""
    if kwh < 0:
        raise ValueError("kwh must be >= 0")
    return kwh * tariff


def fleet_daily_energy_mwh(lamp_count: int, per_lamp_kwh: Decimal) -> Decimal:
    """Fleet daily energy in MWh/day, exact (the source labels these
    figures MW; dimensionally they are kWh/lamp x lamps / 1000)."""
    if lamp_count <= 0:
        raise ValueError("lamp_count must be > 0")
    return lamp_count * per_lamp_kwh / 1000


def _per_lamp_bill(option: LampOption, tariff: Decimal, hours) -> Decimal:
    return to_paisa(daily_cost_tk(daily_energy_kwh(option.rated_watts, option.brightness_pct, hours), tariff))


def _check_option(fleet: FleetProfile, option: LampOption) -> None:
    if option.requires_sodium and not fleet.has_sodium:
        raise IncompatibleOption(f"{fleet.city} has no sodium lights")


@dataclass(frozen=True)
class CostTable:
    fleet: FleetProfile
    option: LampOption
    tariff: Decimal
    hours: int
    per_day: Decimal  # exact, paisa resolution
    per_month: Decimal
    per_year: Decimal

    @property
    def display(self) -> tuple[str, str, str]:
        return (display_tk(self.per_day), display_tk(self.per_month), display_tk(self.per_year))


def cost_table(
    fleet: FleetProfile,
    option: LampOption,
    tariff: Decimal = TARIFF_TK_PER_KWH,
    hours: int = HOURS_PER_DAY,
    days_per_month: int = DAYS_PER_MONTH,
    days_per_year: int = DAYS_PER_YEAR,
) -> CostTable:
    """Fleet cost per day/month/year; month and year scale the
    unrounded per-day figure."""
    _check_option(fleet, option)
    per_day = fleet.lamp_count * _per_lamp_bill(option, tariff, hours)
    return CostTable(
        fleet=fleet,
        option=option,
        tariff=tariff,
        hours=hours,
        per_day=per_day,
        per_month=per_day * days_per_month,
        per_year=per_day * days_per_year,
    )


@dataclass(frozen=True)
class Savings:
    per_day: Decimal
    per_month: Decimal
    per_year: Decimal
    pct_energy: Decimal


def savings(base: CostTable, alt: CostTable) -> Savings:
    """Element-wise difference on unrounded values; percentage saved is
    computed from per-lamp energy (identical to the fleet MWh ratio)."""
    if base.fleet != alt.fleet or base.hours != alt.hours or base.tariff != alt.tariff:
        raise MismatchedFleets("savings require the same fleet, hours and tariff")
    base_kwh = daily_energy_kwh(base.option.rated_watts, base.option.brightness_pct, base.hours)
    alt_kwh = daily_energy_kwh(alt.option.rated_watts, alt.option.brightness_pct, alt.hours)
    return Savings(
        per_day=base.per_day - alt.per_day,
        per_month=base.per_month - alt.per_month,
        per_year=base.per_year - alt.per_year,
        pct_energy=(base_kwh - alt_kwh) / base_kwh * 100,
    )


@dataclass(frozen=True)
class BlendedDaily:
    fleet: FleetProfile
    kwh_per_lamp: Decimal
    fleet_mwh: Decimal
    cost_tk: Decimal  # fleet cost per day


def blended_daily(
    fleet: FleetProfile,
    rated_watts: int,
    full_hours: int,
    dim_hours: int,
    dim_pct: int = 50,
    tariff: Decimal = TARIFF_TK_PER_KWH,
) -> BlendedDaily:
    """Split the active hours between full and dimmed brightness.

    Energy is the plain watt-hour sum. Cost blends the two whole-day
    billing figures (each held at paisa) weighted by hours, i.e. the
    published day-rate rows prorated, so a 6h/6h split of the 3.70 and
    1.85 TK days bills 2.775 TK per lamp.
    """
    if full_hours < 0 or dim_hours < 0 or full_hours + dim_hours == 0:
        raise ValueError("need non-negative hours with a positive total")
    if not 0 < dim_pct <= 100:
        raise ValueError("dim_pct must be in 1..100")
    hours = full_hours + dim_hours
    kwh = daily_energy_kwh(rated_watts, 100, full_hours) + daily_energy_kwh(
        rated_watts, dim_pct, dim_hours
    )
    full_bill = _per_lamp_bill(LampOption("full", rated_watts, 100), tariff, hours)
    dim_bill = _per_lamp_bill(LampOption("dim", rated_watts, dim_pct), tariff, hours)
    per_lamp_cost = (full_bill * full_hours + dim_bill * dim_hours) / hours
    return BlendedDaily(
        fleet=fleet,
        kwh_per_lamp=kwh,
        fleet_mwh=fleet_daily_energy_mwh(fleet.lamp_count, kwh),
        cost_tk=per_lamp_cost * fleet.lamp_count,
    )


# -- report rendering ---------------------------------------------------------


SCENARIO_OPTIONS = {
    "sodium": SODIUM_100,
    "led_full": LED_FULL,
    "led_dim": LED_DIM,
}


def city_report(
    city: str,
    tariff: Decimal = TARIFF_TK_PER_KWH,
    hours: int = HOURS_PER_DAY,
) -> dict:
    """Structured cost/energy comparison for one city: every applicable
    option, the sodium->LED savings where sodium exists, and source
    discrepancy notes."""
    fleet = FLEETS[city]
    rows = []
    options = (["sodium"] if fleet.has_sodium else []) + ["led_full", "led_dim"]
    tables = {}
    for name in options:
        option = SCENARIO_OPTIONS[name]
        table = cost_table(fleet, option, tariff, hours)
        tables[name] = table
        kwh = daily_energy_kwh(option.rated_watts, option.brightness_pct, hours)
        mwh = fleet_daily_energy_mwh(fleet.lamp_count, kwh)
        rows.append(
            {
                "option": name,
                "label": option.label,
                "kwh_per_lamp": str(kwh),
                "fleet_mwh_per_day": str(mwh),
                "fleet_mwh_display": display_mwh(mwh),
                "per_day": str(table.per_day),
                "per_month": str(table.per_month),
                "per_year": str(table.per_year),
                "per_day_display": display_tk(table.per_day),
                "per_month_display": display_tk(table.per_month),
                "per_year_display": display_tk(table.per_year),
            }
        )
    report = {"city": city, "lamp_count": fleet.lamp_count, "tariff": str(tariff),
              "hours": hours, "rows": rows, "notes": []}
    if fleet.has_sodium:
        save = savings(tables["sodium"], tables["led_full"])
        report["save"] = {
            "per_day": str(save.per_day),
            "per_month": str(save.per_month),
            "per_year": str(save.per_year),
            "pct_energy": format(save.pct_energy.normalize(), "f"),
            "pct_energy_display": str(save.pct_energy.quantize(_MWH_DISPLAY, rounding=ROUND_HALF_UP)),
            "per_day_display": display_tk(save.per_day),
            "per_month_display": display_tk(save.per_month),
            "per_year_display": display_tk(save.per_year),
        }
        report["notes"].append(
            f"source prints the yearly save as {display_tk(PUBLISHED_YEARLY_SAVE_TK)}, "
            f"inconsistent with its own rows by 250; self-consistent value is "
            f"{display_tk(save.per_year)}"
        )
    if city == "DNCC":
        report["notes"].append(
            "source prints 11.15 MWh/day for the dimmed fleet (half of the rounded "
            "22.3); the exact value 11.1384 displays as 11.1"
        )
    report["notes"].append(
        "fleet daily energy is reported in MWh/day; the source labels the same figures MW"
    )
    return report


def blended_report(
    cities: Optional[list[str]] = None,
    rated_watts: int = 40,
    full_hours: int = 6,
    dim_hours: int = 6,
    dim_pct: int = 50,
    tariff: Decimal = TARIFF_TK_PER_KWH,
) -> dict:
    """Four-city comparison of all-full versus blended full/dim days."""
    cities = cities or list(CITY_ORDER)
    rows = []
    hours = full_hours + dim_hours
    for city in cities:
        fleet = FLEETS[city]
        blend = blended_daily(fleet, rated_watts, full_hours, dim_hours, dim_pct, tariff)
        full = cost_table(fleet, LampOption("full", rated_watts, 100), tariff, hours)
        rows.append(
            {
                "city": city,
                "lamp_count": fleet.lamp_count,
                "kwh_per_lamp": str(blend.kwh_per_lamp),
                "fleet_mwh_per_day": str(blend.fleet_mwh),
                "fleet_mwh_display": display_mwh(blend.fleet_mwh),
                "full_day_cost": str(full.per_day),
                "full_day_cost_display": display_tk(full.per_day),
                "blended_day_cost": str(blend.cost_tk),
                "blended_day_cost_display": display_tk(blend.cost_tk),
            }
        )
    return {
        "rated_watts": rated_watts,
        "full_hours": full_hours,
        "dim_hours": dim_hours,
        "dim_pct": dim_pct,
        "tariff": str(tariff),
        "rows": rows,
    }
