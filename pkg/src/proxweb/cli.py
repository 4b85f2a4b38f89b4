"""Operator command line.

Subcommands: ``sim`` (run a scenario), ``ingest`` (replay a scan stream
into a local data dir or a running service), ``heatmap`` and ``dwell``
(analytics), ``rules-lint`` (batch-validate a rule file), ``serve``
(run the HTTP service).

Data goes to standard output, diagnostics to standard error. Exit codes:
0 success, 1 domain error, 2 usage error. Timestamps are accepted as
RFC 3339 or seconds since the Unix epoch. Local modes never touch the
network, so simulate/ingest/analyze pipelines run fully offline.
"""

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from .errors import ProxwebError, RuleSyntaxError
from .presence import (
    DEFAULT_BUCKET_S,
    DEFAULT_SESSION_GAP_S,
    PresenceLog,
    heat_map_csv,
    scan_report_from_line,
    scan_report_to_line,
)
from .rule_dsl import iter_rule_lines, parse_rule
from .service.app import SALT_ENV_VAR, ServeConfig, serve
from .service.state import DEFAULT_SALT
from .simulator import load_scenario, run
from .timeutil import format_rfc3339, parse_timestamp

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _fail(message: str, code: int = EXIT_DOMAIN) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _salt() -> str:
    return os.environ.get(SALT_ENV_VAR) or DEFAULT_SALT


def _local_log(data_dir: str) -> PresenceLog:
    path = Path(data_dir) / "presence.log"
    return PresenceLog(_salt(), path=path)


def cmd_sim(args) -> int:
    scenario_path = Path(args.scenario)
    if not scenario_path.exists():
        return _fail(f"scenario file not found: {scenario_path}", EXIT_USAGE)
    scenario = load_scenario(scenario_path)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    reports = run(scenario)
    with open(args.out, "w", encoding="utf-8") as fp:
        for report in reports:
            fp.write(scan_report_to_line(report) + "\n")
    print(len(reports))
    return EXIT_OK


def cmd_ingest(args) -> int:
    log_path = Path(args.log)
    if not log_path.exists():
        return _fail(f"scan log not found: {log_path}", EXIT_USAGE)
    reports = []
    with open(log_path, encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, start=1):
            if not line.strip():
                continue
            try:
                reports.append(scan_report_from_line(line, lineno))
            except (ValueError, ProxwebError) as exc:
                return _fail(str(exc))

    appended = 0
    if args.url:
        import httpx

        with httpx.Client(base_url=args.url, timeout=30.0) as client:
            for report in reports:
                body = {
                    "device_id": report.device_id,
                    "timestamp": format_rfc3339(report.timestamp),
                    "observations": [
                        {"mac": o.mac, "rssi_dbm": o.rssi_dbm} for o in report.observations
                    ],
                }
                response = client.post("/scans", json=body)
                if response.status_code != 200:
                    return _fail(f"service rejected scan: {response.text}")
                appended += response.json()["appended"]
    else:
        log = _local_log(args.data_dir)
        try:
            for report in reports:
                appended += log.ingest_scan(report)
        finally:
            log.close()
    print(appended)
    return EXIT_OK


def _heatmap_table(rows: list[tuple[str, str, str, str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    return "\n".join(
        "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
        for row in rows
    )


def cmd_heatmap(args) -> int:
    from_ts = parse_timestamp(args.from_)
    to_ts = parse_timestamp(args.to)
    if args.url:
        import httpx

        params = {"from": args.from_, "to": args.to, "bucket": args.bucket}
        if args.mac:
            params["mac"] = args.mac
        response = httpx.get(
            f"{args.url}/stats/heatmap", params=params, headers={"accept": "text/csv"}
        )
        if response.status_code != 200:
            return _fail(f"service error: {response.text}")
        csv_text = response.text
    else:
        log = _local_log(args.data_dir)
        try:
            cells = log.heat_map(
                from_ts=from_ts, to_ts=to_ts, bucket_s=args.bucket, mac=args.mac
            )
        finally:
            log.close()
        csv_text = heat_map_csv(cells)

    if args.format == "table":
        rows = [tuple(line.split(",")) for line in csv_text.splitlines()]
        print(_heatmap_table(rows))
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def cmd_dwell(args) -> int:
    if args.url:
        import httpx

        response = httpx.get(
            f"{args.url}/stats/dwell", params={"mac": args.mac, "gap": args.gap}
        )
        if response.status_code != 200:
            return _fail(f"service error: {response.text}")
        sessions = [
            (s["device_hash"], s["mac"], s["start"], s["end"], s["dwell_s"])
            for s in response.json()
        ]
    else:
        log = _local_log(args.data_dir)
        try:
            sessions = [
                (
                    s.device_hash,
                    s.mac,
                    format_rfc3339(s.start),
                    format_rfc3339(s.end),
                    s.dwell_s,
                )
                for s in log.dwell_sessions(args.mac, gap_s=args.gap)
            ]
        finally:
            log.close()
    print("device_hash,mac,start,end,dwell_s")
    for device_hash, mac, start, end, dwell_s in sessions:
        print(f"{device_hash},{mac},{start},{end},{dwell_s:g}")
    return EXIT_OK


def cmd_rules_lint(args) -> int:
    rules_path = Path(args.rules)
    if not rules_path.exists():
        return _fail(f"rules file not found: {rules_path}", EXIT_USAGE)
    text = rules_path.read_text(encoding="utf-8")
    count = 0
    problems = 0
    for lineno, line in iter_rule_lines(text):
        try:
            parse_rule(line, line=lineno)
            count += 1
        except ProxwebError as exc:
            problems += 1
            if isinstance(exc, RuleSyntaxError):
                print(f"{rules_path}:{exc.line}:{exc.column}: {exc}", file=sys.stderr)
            else:
                print(f"{rules_path}:{lineno}: {exc}", file=sys.stderr)
    if problems:
        return EXIT_DOMAIN
    print(f"{count} rules ok")
    return EXIT_OK


def cmd_serve(args) -> int:
    serve(ServeConfig(port=args.port, data_dir=args.data_dir))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proxweb", description="proximity services toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="run a scenario and write its scan stream")
    sim.add_argument("--scenario", required=True, help="scenario JSON file")
    sim.add_argument("--out", required=True, help="output scan stream path")
    sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    sim.set_defaults(func=cmd_sim)

    ingest = sub.add_parser("ingest", help="replay a scan stream into the platform")
    ingest.add_argument("log", help="scan stream file (sim output format)")
    target = ingest.add_mutually_exclusive_group(required=True)
    target.add_argument("--data-dir", help="ingest into a local data directory")
    target.add_argument("--url", help="ingest via a running service")
    ingest.set_defaults(func=cmd_ingest)

    heatmap = sub.add_parser("heatmap", help="visit statistics per node and bucket")
    heatmap.add_argument("--mac", default=None)
    heatmap.add_argument("--from", dest="from_", required=True)
    heatmap.add_argument("--to", required=True)
    heatmap.add_argument("--bucket", type=float, default=DEFAULT_BUCKET_S)
    heatmap.add_argument("--format", choices=["csv", "table"], default="csv")
    heatmap_target = heatmap.add_mutually_exclusive_group(required=True)
    heatmap_target.add_argument("--data-dir")
    heatmap_target.add_argument("--url")
    heatmap.set_defaults(func=cmd_heatmap)

    dwell = sub.add_parser("dwell", help="per-device dwell sessions at a node")
    dwell.add_argument("--mac", required=True)
    dwell.add_argument("--gap", type=float, default=DEFAULT_SESSION_GAP_S)
    dwell_target = dwell.add_mutually_exclusive_group(required=True)
    dwell_target.add_argument("--data-dir")
    dwell_target.add_argument("--url")
    dwell.set_defaults(func=cmd_dwell)

    lint = sub.add_parser("rules-lint", help="validate a rule file")
    lint.add_argument("rules", help="rule DSL file, one rule per line")
    lint.set_defaults(func=cmd_rules_lint)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--data-dir", default="./proxweb-data")
    srv.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except ProxwebError as exc:
        return _fail(str(exc))
    except ValueError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
