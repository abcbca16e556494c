"""Command-line entry point: ``coordnet <subcommand> ...``.

Exit codes: 0 success, 1 fatal input error, 2 invalid arguments.
Every output is staged in memory and moved into place only after the whole
run succeeded, so a failing run leaves no partial files behind.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .graph_io import (
    FORMATS, SUFFIX, file_sha256, import_graph, read_component_members,
    render_components, render_graph,
)
from .ingest import IngestError, TweetStream, load_mapping, parse_stream, serialize_lines
from .network import connected_components
from .retweet_net import build_rapid_retweet_network
from .similar_net import build_similar_tweet_network, find_similar_pairs
from .stats import interval_distribution, similarity_distribution, histograms_csv
from .synth import ConfigError, GroundTruth, evaluate, generate, load_config
from .textsim import ratcliff_obershelp

logger = logging.getLogger("coordnet")


class Outputs:
    """Files staged in memory and committed together via temp-file-then-rename."""

    def __init__(self):
        self.files: list[tuple[Path, bytes]] = []

    def add(self, path: str | Path, data: bytes | str) -> None:
        if isinstance(data, str):
            data = data.encode("utf-8")
        self.files.append((Path(path), data))

    def commit(self) -> None:
        staged = []
        try:
            for path, data in self.files:
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
                tmp.write_bytes(data)
                staged.append((tmp, path))
            for tmp, path in staged:
                os.replace(tmp, path)
        except BaseException:
            for tmp, _ in staged:
                tmp.unlink(missing_ok=True)
            raise


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _manifest(args, started: str, counts: dict, input_path: str | None = None) -> str:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "verbose")}
    body = {
        "subcommand": args.command,
        "toolkit_version": __version__,
        "parameters": params,
        "input_sha256": file_sha256(input_path) if input_path else None,
        "started_at": started,
        "finished_at": _now(),
        "counts": counts,
    }
    return json.dumps(body, indent=2, sort_keys=True, default=str) + "\n"


def _load(args) -> TweetStream:
    stream, diagnostics = parse_stream(args.input, load_mapping(args.schema))
    if diagnostics:
        logger.info("%d input lines skipped or duplicated", len(diagnostics))
    return stream


def cmd_ingest(args) -> dict:
    started = _now()
    stream, diagnostics = parse_stream(args.input, load_mapping(args.schema))
    out = Outputs()
    out.add(args.out, "".join(serialize_lines(stream)))
    if args.diagnostics:
        out.add(args.diagnostics, "".join(
            json.dumps({"line": d.line, "reason": d.reason, "tweet_id": d.tweet_id}) + "\n" for d in diagnostics
        ))
    counts = {"records": len(stream), "diagnostics": len(diagnostics)}
    out.add(f"{args.out}.manifest.json", _manifest(args, started, counts, args.input))
    out.commit()
    print(f"{len(stream)} records, {len(diagnostics)} diagnostics")
    return counts


def _write_network(args, started, network, stream, counts) -> None:
    components = connected_components(network, stream, args.time_window)
    out_dir = Path(args.out)
    out = Outputs()
    out.add(out_dir / f"network{SUFFIX[args.format]}", render_graph(network, args.format, components))
    table, members, evidence = render_components(components)
    out.add(out_dir / "components.csv", table)
    out.add(out_dir / "components.jsonl", members)
    out.add(out_dir / "evidence.jsonl", evidence)
    counts.update(nodes=len(network), edges=len(network.edges), components=len(components))
    out.add(out_dir / "manifest.json", _manifest(args, started, counts, args.input))
    out.commit()
    print(f"{counts['nodes']} accounts, {counts['edges']} edges, {counts['components']} components -> {out_dir}")


def cmd_retweet_net(args) -> None:
    started = _now()
    stream = _load(args)
    network = build_rapid_retweet_network(stream, args.time_window, args.min_weight)
    _write_network(args, started, network, stream, {"records": len(stream)})


def cmd_similar_net(args) -> None:
    started = _now()
    stream = _load(args)
    diag: dict = {}
    pairs = find_similar_pairs(stream, args.sim_threshold, args.time_window,
                               args.max_stream_distance, args.threads, diag)
    network = build_similar_tweet_network(pairs, args.min_strength, args.min_edge_weight)
    counts = {"records": len(stream), "eligible": diag["eligible"], "pairs": len(pairs),
              "same_author_pairs": diag["same_author_pairs"]}
    _write_network(args, started, network, stream, counts)


def cmd_stats(args) -> None:
    started = _now()
    stream = _load(args)
    if args.which == "intervals":
        hists = interval_distribution(stream, args.sim_threshold, range(1, args.max_distance + 1), args.threads)
        items = [({"distance": d}, h) for d, h in sorted(hists.items())]
    else:
        items = [({}, similarity_distribution(stream, args.time_window, args.threads))]
    out = Outputs()
    out.add(args.out, histograms_csv(items))
    counts = {"records": len(stream), "observations": sum(h.total for _, h in items)}
    out.add(f"{args.out}.manifest.json", _manifest(args, started, counts, args.input))
    out.commit()
    print(f"{counts['observations']} observations -> {args.out}")


def cmd_synth(args) -> None:
    started = _now()
    stream, truth = generate(load_config(args.config))
    out = Outputs()
    out.add(args.out_stream, "".join(serialize_lines(stream)))
    out.add(args.out_truth, truth.render())
    counts = {"records": len(stream), "accounts": len(truth.membership), "groups": len(truth.groups)}
    out.add(f"{args.out_stream}.manifest.json", _manifest(args, started, counts, args.config))
    out.commit()
    print(f"{counts['records']} records, {counts['groups']} planted groups")


def cmd_evaluate(args) -> None:
    started = _now()
    truth = GroundTruth.read(args.truth)
    comps = read_component_members(args.components)
    kinds = args.kinds.split(",") if args.kinds else None
    result = evaluate(comps, truth, kinds)
    text = json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n"
    print(f"precision {result.precision:.4f} recall {result.recall:.4f}")
    for gid, status in result.groups.items():
        print(f"  {gid}: {status}")
    if args.out:
        out = Outputs()
        out.add(args.out, text)
        out.add(f"{args.out}.manifest.json", _manifest(args, started, {"components": len(comps)}, args.components))
        out.commit()


def cmd_sim(args) -> None:
    print(repr(ratcliff_obershelp(args.a, args.b)))


def cmd_export(args) -> None:
    started = _now()
    network = import_graph(args.graph, args.input_format)
    out = Outputs()
    out.add(args.out, render_graph(network, args.format))
    out.add(f"{args.out}.manifest.json",
            _manifest(args, started, {"nodes": len(network), "edges": len(network.edges)}, args.graph))
    out.commit()


def _threshold(value: str) -> float:
    x = float(value)
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError("must be strictly between 0 and 1")
    return x


def _positive(value: str) -> int:
    x = int(value)
    if x < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coordnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_input(p):
        p.add_argument("--input", required=True, help="JSON-lines tweet file")
        p.add_argument("--schema", default=None,
                       help="JSON field-mapping file, or a preset name: canonical, twitter-v1")
        p.add_argument("--threads", type=_positive, default=1, help="worker threads (output is identical for any value)")

    p = sub.add_parser("ingest", help="normalize a dump into a canonical sorted stream")
    p.add_argument("--input", required=True)
    p.add_argument("--schema", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--diagnostics", default=None, help="write rejected/duplicate lines here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("retweet-net", help="rapid-retweet promoter network")
    with_input(p)
    p.add_argument("--time-window", type=_positive, default=10)
    p.add_argument("--min-weight", type=_positive, default=2)
    p.add_argument("--format", choices=FORMATS, default="graphml")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_retweet_net)

    p = sub.add_parser("similar-net", help="similar-tweet coordination network")
    with_input(p)
    p.add_argument("--sim-threshold", type=_threshold, default=0.7)
    p.add_argument("--time-window", type=_positive, default=10)
    p.add_argument("--min-strength", type=_positive, default=2)
    p.add_argument("--min-edge-weight", type=_positive, default=1,
                   help="use 2 for the stricter variant that keeps only repeated pairings")
    p.add_argument("--max-stream-distance", type=_positive, default=None)
    p.add_argument("--format", choices=FORMATS, default="graphml")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_similar_net)

    p = sub.add_parser("stats", help="threshold-selection distributions as CSV")
    p.add_argument("which", choices=["intervals", "similarity"])
    with_input(p)
    p.add_argument("--sim-threshold", type=_threshold, default=0.7)
    p.add_argument("--time-window", type=_positive, default=10)
    p.add_argument("--max-distance", type=_positive, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="generate a stream with planted groups")
    p.add_argument("--config", required=True)
    p.add_argument("--out-stream", required=True)
    p.add_argument("--out-truth", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("evaluate", help="score detected components against ground truth")
    p.add_argument("--components", required=True, help="components.jsonl from a network run")
    p.add_argument("--truth", required=True)
    p.add_argument("--kinds", default=None, help="comma-separated group kinds to score")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sim", help="print the gestalt similarity of two strings")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("export", help="convert a graph file to another format")
    p.add_argument("--graph", required=True)
    p.add_argument("--input-format", choices=FORMATS, default=None)
    p.add_argument("--format", choices=FORMATS, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        args.func(args)
    except (IngestError, ConfigError, OSError, ValueError) as exc:
        print(f"coordnet: error: {exc}", file=sys.stderr)
        return 1
    logger.info("done in %.2fs", time.perf_counter() - t0)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
