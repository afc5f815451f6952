"""cortex command line: serve | simulate | ingest | bench | query.

Service-backed commands take a config file via --config or the CORTEX_CONFIG
environment variable. Report-producing commands (simulate, bench) write
line-delimited JSON and render companion PNG figures next to the output file
unless --no-figures is given. Exit code 0 on success, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bench import bench_recall
from .encoder import ContextEncoder
from .ingest import ingest_file
from .memory import MemoryStore
from .model import RanStateSnapshot
from .recall import RecallEngine, RecallQuery
from .service import CortexClient, CortexServer, ServiceConfig
from .simulator import ScenarioConfig, run_experiment


def _load_config(args) -> ServiceConfig:
    path = getattr(args, "config", None) or os.environ.get("CORTEX_CONFIG")
    if path:
        return ServiceConfig.load(path)
    return ServiceConfig()


def _parse_seeds(spec: str) -> list[int]:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(spec)]


def _parse_endpoint(spec: str) -> tuple[str, int]:
    host, _, port = spec.rpartition(":")
    return host or "127.0.0.1", int(port)


def cmd_serve(args) -> int:
    config = _load_config(args)
    server = CortexServer(config)
    host, port = server.address
    print(f"cortex service listening on {host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return 0


def cmd_simulate(args) -> int:
    scenario_template = ScenarioConfig.load(args.scenario)
    policies = (
        ["stateless", "augmented"] if args.policy == "both" else [args.policy]
    )
    reports = []
    for seed in _parse_seeds(args.seeds):
        scenario = ScenarioConfig.from_dict(
            {**scenario_template.to_dict(), "seed": seed}
        )
        for policy in policies:
            report = run_experiment(
                scenario,
                policy,
                recall_mode=args.mode,
                recall_enabled=not args.no_recall,
            )
            reports.append(report)
            print(
                f"seed={seed} policy={policy} sla_violations={report.sla_violations} "
                f"handover_failures={report.handover_failures} "
                f"denied={report.admissions_denied} trace={report.trace_hash}",
                flush=True,
            )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            for report in reports:
                f.write(json.dumps(report.to_dict(), separators=(",", ":")) + "\n")
        print(f"wrote {len(reports)} report lines to {args.out}")
        if not args.no_figures:
            from .report import render_experiment_figures

            prefix = os.path.splitext(args.out)[0]
            for path in render_experiment_figures(reports, prefix):
                print(f"wrote {path}")
    return 0


def cmd_ingest(args) -> int:
    if args.endpoint:
        host, port = _parse_endpoint(args.endpoint)
        with CortexClient(host, port, token=args.token) as client:
            result = ingest_file(args.file, args.namespace, client=client)
    else:
        config = _load_config(args)
        encoder = ContextEncoder(config.encoder)
        store = MemoryStore(config.memory, encoder_tag=encoder.version_tag)
        result = ingest_file(args.file, args.namespace, store=store, encoder=encoder)
        if args.persist:
            store.persist(args.namespace, args.persist)
            print(f"persisted namespace to {args.persist}")
    for lineno, reason in result.skipped:
        print(f"skipped line {lineno}: {reason}", file=sys.stderr)
    print(f"accepted {result.accepted} records into {args.namespace!r}")
    return 0


def cmd_bench(args) -> int:
    report = bench_recall(
        store_size=args.store_size,
        dim=args.dim,
        k=args.k,
        mode=args.mode,
        queries=args.queries,
        seed=args.seed,
        clients=args.clients,
    )
    summary = report.to_dict()
    print(json.dumps(summary, indent=1))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(json.dumps(summary, separators=(",", ":")) + "\n")
        if not args.no_figures:
            from .report import render_bench_figure

            path = os.path.splitext(args.out)[0] + "_latency.png"
            render_bench_figure(report, path)
            print(f"wrote {path}")
    return 0 if report.p50_us >= 0 else 1


def cmd_query(args) -> int:
    if (args.embedding_json is None) == (args.snapshot_json is None):
        print("provide exactly one of --embedding-json / --snapshot-json",
              file=sys.stderr)
        return 1
    snapshot = None
    embedding = None
    if args.embedding_json:
        embedding = np.asarray(json.loads(args.embedding_json), dtype=np.float64)
    if args.snapshot_json:
        snapshot = RanStateSnapshot.from_dict(json.loads(args.snapshot_json))
    query = RecallQuery(
        namespace=args.namespace,
        snapshot=snapshot,
        embedding=embedding,
        k=args.k,
        deadline_ms=args.deadline_ms,
        mode=args.mode,
    )
    if args.endpoint:
        host, port = _parse_endpoint(args.endpoint)
        with CortexClient(host, port, token=args.token) as client:
            response = client.recall(query)
    else:
        config = _load_config(args)
        encoder = ContextEncoder(config.encoder)
        store = MemoryStore(config.memory, encoder_tag=encoder.version_tag)
        if args.load:
            store.load(args.load, args.namespace)
        response = RecallEngine(store, encoder).recall(query)
    print(json.dumps(response.to_dict(), indent=1))
    return 0 if response.status != "error" else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cortex",
        description="episodic recall service, policy simulator and benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the recall service")
    p.add_argument("--config", help="service config JSON (or CORTEX_CONFIG)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("simulate", help="run scenario experiments")
    p.add_argument("--scenario", required=True, help="scenario config JSON path")
    p.add_argument(
        "--policy",
        choices=["stateless", "augmented", "both"],
        default="both",
    )
    p.add_argument("--seeds", default="1", help="single seed or inclusive range a..b")
    p.add_argument("--mode", choices=["exact", "approximate"], default="exact")
    p.add_argument("--no-recall", action="store_true",
                   help="force the augmented policy onto the fallback path")
    p.add_argument("--out", help="write one report JSON object per line here")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ingest", help="replay a telemetry file into a namespace")
    p.add_argument("--file", required=True)
    p.add_argument("--namespace", required=True)
    p.add_argument("--endpoint", help="host:port of a running service")
    p.add_argument("--token", help="namespace auth token")
    p.add_argument("--config", help="service config JSON (in-process mode)")
    p.add_argument("--persist", help="in-process mode: persist namespace here after ingest")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("bench", help="recall latency benchmark")
    p.add_argument("--store-size", type=int, default=100_000)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--mode", choices=["exact", "approximate"], default="approximate")
    p.add_argument("--queries", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--clients", type=int, default=1,
                   help="N-client mode: split the workload over N threads")
    p.add_argument("--out", help="write the bench report JSON here")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("query", help="ad-hoc single recall, prints JSON")
    p.add_argument("--namespace", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--deadline-ms", type=float, default=5.0)
    p.add_argument("--mode", choices=["exact", "approximate"], default="exact")
    p.add_argument("--embedding-json", help="JSON array of floats")
    p.add_argument("--snapshot-json", help="JSON snapshot object")
    p.add_argument("--endpoint", help="host:port of a running service")
    p.add_argument("--token")
    p.add_argument("--config")
    p.add_argument("--load", help="in-process mode: load a persisted store first")
    p.set_defaults(func=cmd_query)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
