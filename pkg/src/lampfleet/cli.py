"""Command-line entry point: simulate, serve, replay, report.

Exit codes: 0 success, 1 runtime failure, 2 usage/config error. Every
subcommand validates its inputs before touching anything.
"""

from __future__ import annotations

import argparse
import logging
import os
import signal
import socket
import sys
import time
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import energy
from .protocol import ProtocolError, Telemetry, decode_message
from .sim import ConfigError, Scenario, load_scenario, run_fleet, simulate

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

ENV_LISTEN = "LAMPFLEET_LISTEN"
ENV_HTTP = "LAMPFLEET_HTTP"
ENV_DATA_DIR = "LAMPFLEET_DATA_DIR"

log = logging.getLogger("lampfleet")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lampfleet",
        description="Streetlight fleet simulator, control room and cost reports.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and dump its wire stream")
    p_sim.add_argument("scenario", help="scenario YAML file, or 'default'")
    p_sim.add_argument("--out", help="output stream file (default: stdout)")
    p_sim.add_argument("--seed", type=int, help="override the scenario seed")
    p_sim.add_argument("--duration", type=int, help="override duration_s")
    p_sim.add_argument("--quiet", action="store_true", help="suppress the summary")
    p_sim.set_defaults(func=cmd_simulate)

    p_serve = sub.add_parser("serve", help="run the control room")
    p_serve.add_argument(
        "--listen",
        default=os.environ.get(ENV_LISTEN, "127.0.0.1:7700"),
        help=f"node socket address host:port (env {ENV_LISTEN})",
    )
    p_serve.add_argument(
        "--http",
        default=os.environ.get(ENV_HTTP, "127.0.0.1:7780"),
        help=f"HTTP API address host:port (env {ENV_HTTP})",
    )
    p_serve.add_argument(
        "--data-dir",
        default=os.environ.get(ENV_DATA_DIR, "./lampfleet-data"),
        help=f"log/persistence directory (env {ENV_DATA_DIR})",
    )
    p_serve.add_argument("--panel-dir", help="static admin panel directory")
    p_serve.add_argument("--sim", help="also run this scenario's nodes live")
    p_serve.add_argument(
        "--sim-speed", type=float, default=60.0,
        help="live node speed, virtual seconds per wall second (0 = free run)",
    )
    p_serve.add_argument("--ack-timeout", type=float, default=5.0)
    p_serve.set_defaults(func=cmd_serve)

    p_replay = sub.add_parser("replay", help="feed a recorded stream into a control room")
    p_replay.add_argument("stream", help="wire stream file from 'simulate --out'")
    p_replay.add_argument(
        "--connect",
        default=os.environ.get(ENV_LISTEN, "127.0.0.1:7700"),
        help=f"control-room node address (env {ENV_LISTEN})",
    )
    p_replay.add_argument(
        "--speed", type=float, default=0.0,
        help="pace frames at virtual/wall ratio (0 = as fast as possible)",
    )
    p_replay.set_defaults(func=cmd_replay)

    p_report = sub.add_parser("report", help="energy and cost tables")
    p_report.add_argument("--city", default="all", help="CCC, DNCC, DSCC, NCC or all")
    p_report.add_argument(
        "--scenario", default="all",
        choices=["sodium", "led_full", "led_dim", "blended", "all"],
    )
    p_report.add_argument("--tariff", default="7.70", help="TK per kWh")
    p_report.add_argument("--hours", type=int, default=12, help="active hours per day")
    p_report.add_argument("--full-hours", type=int, default=6, help="blended: hours at 100%%")
    p_report.add_argument("--dim-hours", type=int, default=6, help="blended: dimmed hours")
    p_report.add_argument("--dim-pct", type=int, default=50, help="blended: dim level")
    p_report.add_argument("--watts", type=int, default=40, help="blended: LED rating")
    p_report.add_argument(
        "--format", default="table", choices=["table", "csv", "chart-data"]
    )
    p_report.set_defaults(func=cmd_report)

    return parser


def _parse_addr(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ConfigError(f"bad address {text!r}, expected host:port")
    return host or "127.0.0.1", int(port)


def _load_scenario(arg: str) -> Scenario:
    if arg == "default":
        sc = Scenario()
        sc.validate()
        return sc
    return load_scenario(arg)


# -- simulate -----------------------------------------------------------------


def cmd_simulate(args) -> int:
    sc = _load_scenario(args.scenario)
    if args.seed is not None:
        sc.seed = args.seed
    if args.duration is not None:
        sc.duration_s = args.duration
    sc.validate()
    result = simulate(sc)
    text = "\n".join(result.lines) + ("\n" if result.lines else "")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if not args.quiet:
        summary = result.summary()
        print(
            "simulated scenario={scenario} nodes={nodes} frames={frames} "
            "faults_opened={faults_opened} faults_cleared={faults_cleared} "
            "kwh={kwh}".format(**summary),
            file=sys.stderr,
        )
    return EXIT_OK


# -- serve --------------------------------------------------------------------


def cmd_serve(args) -> int:
    from .controlroom import ControlRoomServer  # deferred: keeps report/simulate light

    node_addr = _parse_addr(args.listen)
    http_addr = _parse_addr(args.http)
    panel_dir = Path(args.panel_dir) if args.panel_dir else _default_panel_dir()
    sim_scenario = _load_scenario(args.sim) if args.sim else None

    try:
        server = ControlRoomServer(
            data_dir=args.data_dir,
            node_listen=node_addr,
            http_listen=http_addr,
            panel_dir=panel_dir,
            ack_timeout=args.ack_timeout,
        )
    except OSError as exc:
        print(f"error: cannot bind: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    server.start()
    host, port = server.node_address
    print(
        f"control room: nodes on {host}:{port}, "
        f"http on {server.http_address[0]}:{server.http_address[1]}, "
        f"data in {args.data_dir}"
        + (f", panel from {panel_dir}" if panel_dir else ""),
        file=sys.stderr,
    )
    if sim_scenario is not None:
        run_fleet(sim_scenario, host, port, speed=args.sim_speed)
        print(
            f"live simulation: {sim_scenario.node_count} node(s) at speed {args.sim_speed}",
            file=sys.stderr,
        )

    stop = {"flag": False}

    def _stop(signum, frame):
        stop["flag"] = True

    signal.signal(signal.SIGTERM, _stop)
    try:
        while not stop["flag"]:
            time.sleep(0.2)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return EXIT_OK


def _default_panel_dir() -> Path | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


# -- replay ---------------------------------------------------------------------


def cmd_replay(args) -> int:
    host, port = _parse_addr(args.connect)
    try:
        lines = Path(args.stream).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        print(f"error: cannot read stream: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    messages = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            messages.append((line, decode_message(line)))
        except ProtocolError as exc:
            print(f"error: line {number}: {exc}", file=sys.stderr)
            return EXIT_RUNTIME

    try:
        sock = socket.create_connection((host, port))
    except OSError as exc:
        print(f"error: cannot connect to {host}:{port}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    sent = 0
    last_t = None
    try:
        for line, msg in messages:
            if args.speed > 0 and isinstance(msg, Telemetry):
                if last_t is not None and msg.sim_time > last_t:
                    time.sleep((msg.sim_time - last_t) / args.speed)
                last_t = msg.sim_time
            sock.sendall(line.encode("utf-8") + b"\n")
            sent += 1
    finally:
        sock.close()
    print(f"replayed {sent} frames to {host}:{port}", file=sys.stderr)
    return EXIT_OK


# -- report ---------------------------------------------------------------------


def cmd_report(args) -> int:
    try:
        tariff = Decimal(args.tariff)
    except InvalidOperation:
        raise ConfigError(f"bad tariff {args.tariff!r}") from None
    if tariff <= 0:
        raise ConfigError("tariff must be positive")

    cities = list(energy.CITY_ORDER) if args.city == "all" else [args.city.upper()]
    for city in cities:
        if city not in energy.FLEETS:
            raise ConfigError(f"unknown city {city!r}")

    out = sys.stdout
    if args.scenario == "blended":
        report = energy.blended_report(
            cities, args.watts, args.full_hours, args.dim_hours, args.dim_pct, tariff
        )
        _emit_blended(report, args.format, out)
        return EXIT_OK

    wanted = (
        ["sodium", "led_full", "led_dim"] if args.scenario == "all" else [args.scenario]
    )
    for city in cities:
        fleet = energy.FLEETS[city]
        if "sodium" in wanted and not fleet.has_sodium and args.scenario == "sodium":
            raise ConfigError(f"{city} has no sodium lights; sodium scenario not applicable")
        report = energy.city_report(city, tariff, args.hours)
        report["rows"] = [r for r in report["rows"] if r["option"] in wanted]
        _emit_city(report, args.format, out, include_save=args.scenario == "all")
    return EXIT_OK


def _emit_city(report: dict, fmt: str, out, include_save: bool) -> None:
    if fmt == "csv":
        print("city,option,kwh_per_lamp,fleet_mwh_per_day,per_day_tk,per_month_tk,per_year_tk", file=out)
        for row in report["rows"]:
            print(
                f"{report['city']},{row['option']},{row['kwh_per_lamp']},"
                f"{row['fleet_mwh_per_day']},{row['per_day']},{row['per_month']},{row['per_year']}",
                file=out,
            )
        if include_save and "save" in report:
            s = report["save"]
            print(
                f"{report['city']},save_sodium_to_led_full,,,{s['per_day']},{s['per_month']},{s['per_year']}",
                file=out,
            )
        return
    if fmt == "chart-data":
        for row in report["rows"]:
            for period in ("per_day", "per_month", "per_year"):
                print(f"{report['city']} {row['option']} {period},{row[period]}", file=out)
        return

    print(
        f"{report['city']} — {report['lamp_count']:,} lamps, "
        f"tariff {report['tariff']} TK/kWh, {report['hours']} h/day"
    , file=out)
    header = (
        f"  {'option':<16} {'kWh/lamp':>9} {'MWh/day':>8} "
        f"{'per day (TK)':>14} {'per month (TK)':>16} {'per year (TK)':>16}"
    )
    print(header, file=out)
    for row in report["rows"]:
        print(
            f"  {row['option']:<16} {row['kwh_per_lamp']:>9} {row['fleet_mwh_display']:>8} "
            f"{row['per_day_display']:>14} {row['per_month_display']:>16} {row['per_year_display']:>16}",
            file=out,
        )
    if include_save and "save" in report:
        s = report["save"]
        print(
            f"  {'save':<16} {'':>9} {'':>8} "
            f"{s['per_day_display']:>14} {s['per_month_display']:>16} {s['per_year_display']:>16}"
            f"  ({s['pct_energy_display']}% energy)",
            file=out,
        )
    for note in report["notes"]:
        print(f"  note: {note}", file=out)
    print(file=out)


def _emit_blended(report: dict, fmt: str, out) -> None:
    if fmt == "csv":
        print(
            "city,lamp_count,kwh_per_lamp,fleet_mwh_per_day,full_day_cost_tk,blended_day_cost_tk",
            file=out,
        )
        for row in report["rows"]:
            print(
                f"{row['city']},{row['lamp_count']},{row['kwh_per_lamp']},"
                f"{row['fleet_mwh_per_day']},{row['full_day_cost']},{row['blended_day_cost']}",
                file=out,
            )
        return
    if fmt == "chart-data":
        for row in report["rows"]:
            print(f"{row['city']} full,{row['full_day_cost']}", file=out)
            print(f"{row['city']} blended,{row['blended_day_cost']}", file=out)
        return
    print(
        f"blended day: {report['full_hours']} h @100% + {report['dim_hours']} h @{report['dim_pct']}%, "
        f"{report['rated_watts']} W LED, tariff {report['tariff']} TK/kWh",
        file=out,
    )
    print(
        f"  {'city':<6} {'lamps':>7} {'kWh/lamp':>9} {'MWh/day':>8} "
        f"{'full day (TK)':>14} {'blended day (TK)':>17}",
        file=out,
    )
    for row in report["rows"]:
        print(
            f"  {row['city']:<6} {row['lamp_count']:>7,} {row['kwh_per_lamp']:>9} "
            f"{row['fleet_mwh_display']:>8} {row['full_day_cost_display']:>14} "
            f"{row['blended_day_cost_display']:>17}",
            file=out,
        )


if __name__ == "__main__":
    sys.exit(main())
