"""Cost model against the published city-corporation figures."""

from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lampfleet.energy import (
    FLEETS,
    LED_DIM,
    LED_FULL,
    SODIUM_100,
    IncompatibleOption,
    LampOption,
    MismatchedFleets,
    blended_daily,
    city_report,
    cost_table,
    daily_cost_tk,
    daily_energy_kwh,
    display_mwh,
    display_tk,
    fleet_daily_energy_mwh,
    savings,
    to_paisa,
)

CCC = FLEETS["CCC"]
DNCC = FLEETS["DNCC"]
DSCC = FLEETS["DSCC"]
NCC = FLEETS["NCC"]


def test_per_lamp_daily_energy_scenarios():
    assert daily_energy_kwh(100, 100, 12) == Decimal("1.2")
    assert daily_energy_kwh(40, 100, 12) == Decimal("0.48")
    assert daily_energy_kwh(40, 50, 12) == Decimal("0.24")


def test_per_lamp_daily_costs():
    assert daily_cost_tk(Decimal("1.2")) == Decimal("9.24")
    cost = daily_cost_tk(Decimal("0.48"))
    assert cost == Decimal("3.696")
    assert to_paisa(cost) == Decimal("3.70")
    assert daily_cost_tk(Decimal("0")) == 0


def test_fleet_daily_energy_table():
    assert fleet_daily_energy_mwh(33750, Decimal("1.2")) == Decimal("40.5")
    assert fleet_daily_energy_mwh(33750, Decimal("0.48")) == Decimal("16.2")
    assert fleet_daily_energy_mwh(33750, Decimal("0.24")) == Decimal("8.1")
    dncc = fleet_daily_energy_mwh(46410, Decimal("0.48"))
    assert dncc == Decimal("22.2768")
    assert display_mwh(dncc) == "22.3"
    ncc = fleet_daily_energy_mwh(2474, Decimal("0.24"))
    assert ncc == Decimal("0.59376")
    assert display_mwh(ncc) == "0.6"


def test_ccc_cost_table_rows():
    sodium = cost_table(CCC, SODIUM_100)
    assert (sodium.per_day, sodium.per_month, sodium.per_year) == (
        Decimal("311850.00"), Decimal("9355500.00"), Decimal("113825250.00")
    )
    led = cost_table(CCC, LED_FULL)
    assert (led.per_day, led.per_month, led.per_year) == (
        Decimal("124875.00"), Decimal("3746250.00"), Decimal("45579375.00")
    )
    dim = cost_table(CCC, LED_DIM)
    assert (dim.per_day, dim.per_month, dim.per_year) == (
        Decimal("62437.50"), Decimal("1873125.00"), Decimal("22789687.50")
    )
    assert dim.display == ("62,438", "1,873,125", "22,789,688")


def test_sodium_outside_ccc_rejected():
    for fleet in (DNCC, DSCC, NCC):
        with pytest.raises(IncompatibleOption):
            cost_table(fleet, SODIUM_100)


def test_savings_sodium_to_led():
    save = savings(cost_table(CCC, SODIUM_100), cost_table(CCC, LED_FULL))
    assert save.per_day == Decimal("186975.00")
    assert save.per_month == Decimal("5609250.00")
    assert save.per_year == Decimal("68245875.00")
    assert save.pct_energy == Decimal("60")


def test_savings_of_table_against_itself_is_zero():
    table = cost_table(CCC, LED_FULL)
    save = savings(table, table)
    assert save.per_day == save.per_month == save.per_year == 0
    assert save.pct_energy == 0


def test_mismatched_fleets_rejected():
    with pytest.raises(MismatchedFleets):
        savings(cost_table(CCC, LED_FULL), cost_table(DNCC, LED_FULL))


def test_blended_six_six_split():
    blend = blended_daily(CCC, 40, 6, 6, 50)
    assert blend.kwh_per_lamp == Decimal("0.36")
    assert blend.fleet_mwh == Decimal("12.15")
    assert blend.cost_tk == Decimal("93656.250")
    assert display_tk(blend.cost_tk) == "93,656"


def test_blend_degenerates_to_pure_scenarios():
    full = blended_daily(CCC, 40, 12, 0, 50)
    assert full.kwh_per_lamp == Decimal("0.48")
    assert full.cost_tk == cost_table(CCC, LED_FULL).per_day
    dim = blended_daily(CCC, 40, 0, 12, 50)
    assert dim.kwh_per_lamp == Decimal("0.24")
    assert dim.cost_tk == cost_table(CCC, LED_DIM).per_day


@given(st.integers(0, 12))
def test_blend_convexity(full_hours):
    dim_hours = 12 - full_hours
    if full_hours + dim_hours == 0:
        return
    blend = blended_daily(CCC, 40, full_hours, dim_hours, 50)
    assert Decimal("0.24") <= blend.kwh_per_lamp <= Decimal("0.48")


@given(st.integers(50, 100))
def test_blend_between_dim_and_full_for_any_dim_level(dim_pct):
    blend = blended_daily(CCC, 40, 6, 6, dim_pct)
    assert Decimal("0.24") <= blend.kwh_per_lamp <= Decimal("0.48")


def test_dim_is_exactly_half_of_full_prerounding():
    for fleet in FLEETS.values():
        full = cost_table(fleet, LED_FULL)
        dim = cost_table(fleet, LED_DIM)
        assert dim.per_day * 2 == full.per_day
        assert dim.per_year * 2 == full.per_year
        full_mwh = fleet_daily_energy_mwh(fleet.lamp_count, Decimal("0.48"))
        dim_mwh = fleet_daily_energy_mwh(fleet.lamp_count, Decimal("0.24"))
        assert dim_mwh * 2 == full_mwh


@given(st.integers(1, 200_000), st.integers(1, 2000))
def test_cost_scales_linearly_in_lamp_count_and_tariff(count, tariff_paisa):
    from lampfleet.energy import FleetProfile

    tariff = Decimal(tariff_paisa) / 100
    fleet1 = FleetProfile("CCC", count, has_sodium=True)
    fleet2 = FleetProfile("CCC", count * 3, has_sodium=True)
    t1 = cost_table(fleet1, LED_FULL, tariff)
    t2 = cost_table(fleet2, LED_FULL, tariff)
    assert t2.per_day == 3 * t1.per_day
    doubled = cost_table(fleet1, LED_FULL, tariff * 2)
    # linear in tariff exactly, pre the paisa quantization boundary
    base_bill = to_paisa(daily_cost_tk(Decimal("0.48"), tariff))
    assert t1.per_day == count * base_bill
    assert doubled.per_day == count * to_paisa(daily_cost_tk(Decimal("0.48"), tariff * 2))


def test_energy_cost_cross_check_within_billing_quantization():
    # fleet MWh x tariff x 1000 equals the per-day cost up to the
    # per-lamp paisa quantization (exact where no rounding occurred)
    for fleet in FLEETS.values():
        options = ([SODIUM_100] if fleet.has_sodium else []) + [LED_FULL, LED_DIM]
        for option in options:
            kwh = daily_energy_kwh(option.rated_watts, option.brightness_pct)
            mwh = fleet_daily_energy_mwh(fleet.lamp_count, kwh)
            exact = mwh * 1000 * Decimal("7.70")
            billed = cost_table(fleet, option).per_day
            assert abs(billed - exact) <= fleet.lamp_count * Decimal("0.005")
    sodium_exact = Decimal("40.5") * 1000 * Decimal("7.70")
    assert cost_table(CCC, SODIUM_100).per_day == sodium_exact


def test_display_rounding_never_feeds_back():
    # recomputing from the displayed DNCC figure is the only way to get
    # the published 11.15; the model never does that internally
    dncc_full = fleet_daily_energy_mwh(DNCC.lamp_count, Decimal("0.48"))
    dncc_dim = fleet_daily_energy_mwh(DNCC.lamp_count, Decimal("0.24"))
    assert display_mwh(dncc_full) == "22.3"
    assert dncc_dim == Decimal("11.1384")
    assert display_mwh(dncc_dim) == "11.1"
    assert Decimal(display_mwh(dncc_full)) / 2 == Decimal("11.15")  # the paper's path


def test_city_report_carries_discrepancy_notes():
    report = city_report("CCC")
    assert any("68,246,125" in note for note in report["notes"])
    report_dncc = city_report("DNCC")
    assert any("11.15" in note for note in report_dncc["notes"])


def test_invalid_options_rejected():
    with pytest.raises(ValueError):
        LampOption("bad", 0, 100)
    with pytest.raises(ValueError):
        LampOption("bad", 40, 0)
    with pytest.raises(ValueError):
        blended_daily(CCC, 40, 0, 0, 50)
    with pytest.raises(ValueError):
        daily_energy_kwh(40, 100, -1)
