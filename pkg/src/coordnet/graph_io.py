"""GraphML / GEXF / edge-CSV export of coordination networks, and component reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Iterable

import networkx as nx
from networkx.readwrite.gexf import GEXFWriter

from .network import ComponentReport, CoordinationNetwork, Edge, connected_components

FORMATS = ("graphml", "gexf", "csv")
SUFFIX = {"graphml": ".graphml", "gexf": ".gexf", "csv": ".csv"}


def to_networkx(network: CoordinationNetwork, components: list[ComponentReport] | None = None) -> nx.Graph:
    """Graph with ``strength`` and ``component`` node attributes and integer ``weight`` edges."""
    if components is None:
        components = connected_components(network)
    comp_of = {m: c.component_id for c in components for m in c.members}
    g = nx.DiGraph() if network.directed else nx.Graph()
    for n in sorted(network.strength):
        g.add_node(n, strength=int(network.strength[n]), component=int(comp_of.get(n, -1)))
    for (u, v), edge in sorted(network.edges.items()):
        g.add_edge(u, v, weight=int(edge.weight))
    return g


def render_graph(network: CoordinationNetwork, fmt: str = "graphml",
                 components: list[ComponentReport] | None = None) -> bytes:
    if fmt not in FORMATS:
        raise ValueError(f"unknown graph format {fmt!r}; expected one of {FORMATS}")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source", "target", "weight", "directed"])
        for (u, v), edge in sorted(network.edges.items()):
            w.writerow([u, v, edge.weight, str(network.directed).lower()])
        return buf.getvalue().encode("utf-8")
    g = to_networkx(network, components)
    buf = io.BytesIO()
    if fmt == "graphml":
        nx.write_graphml(g, buf)
    else:
        writer = GEXFWriter(encoding="utf-8", prettyprint=True)
        writer.add_graph(g)
        # the writer stamps today's date; drop it so output depends only on the graph
        for meta in writer.xml.iter("meta"):
            meta.attrib.pop("lastmodifieddate", None)
        writer.write(buf)
    return buf.getvalue()


def export_graph(network: CoordinationNetwork, path: str | Path, fmt: str = "graphml",
                 components: list[ComponentReport] | None = None) -> None:
    data = render_graph(network, fmt, components)
    with open(path, "wb") as f:
        f.write(data)


def guess_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix in FORMATS:
        return suffix
    raise ValueError(f"cannot tell graph format of {path}")


def import_graph(path: str | Path, fmt: str | None = None, directed: bool | None = None) -> CoordinationNetwork:
    """Read a network written by :func:`export_graph`.  Evidence lists come back empty.

    An edge CSV without rows carries no direction; ``directed`` fills it in.
    """
    fmt = fmt or guess_format(path)
    if fmt == "csv":
        net = CoordinationNetwork(directed=bool(directed))
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        if rows:
            net.directed = rows[0]["directed"].strip().lower() == "true"
        for row in rows:
            net.edges[net.key(row["source"], row["target"])] = Edge(int(row["weight"]))
        net.recompute_strength()
        return net

    g = nx.read_graphml(path) if fmt == "graphml" else nx.read_gexf(path)
    net = CoordinationNetwork(directed=g.is_directed())
    for u, v, data in g.edges(data=True):
        net.edges[net.key(str(u), str(v))] = Edge(int(round(float(data.get("weight", 1)))))
    net.recompute_strength()
    for n, data in g.nodes(data=True):
        if "strength" in data:
            net.strength[str(n)] = int(data["strength"])
        else:
            net.strength.setdefault(str(n), 0)
    return net


def _cell(x):
    return "" if x is None else x


def _evidence_row(cid: int, key: tuple[str, str], item) -> dict:
    row = {"component_id": cid, "source": key[0], "target": key[1]}
    if hasattr(item, "tweet_b"):
        row.update(kind="similar", tweet_a=item.tweet_a, tweet_b=item.tweet_b,
                   author_a=item.author_a, author_b=item.author_b,
                   score=item.score, delta_t=item.delta_t)
    else:
        row.update(kind="rapid_retweet", tweet_id=item.tweet_id, delta_t=item.delta_t)
    return row


COMPONENT_COLUMNS = [
    "component_id", "size", "edge_count", "total_weight",
    "domain_count", "median_delta_t", "burst_count",
]


def render_components(reports: Iterable[ComponentReport]) -> tuple[bytes, bytes, bytes]:
    """Component CSV, member JSON lines and per-edge evidence JSON lines."""
    table = io.StringIO()
    w = csv.writer(table, lineterminator="\n")
    w.writerow(COMPONENT_COLUMNS)
    members = io.StringIO()
    evidence = io.StringIO()
    for r in reports:
        w.writerow([r.component_id, r.size, r.edge_count, r.total_weight,
                    _cell(r.domain_count), _cell(r.median_delta_t), _cell(r.burst_count)])
        members.write(json.dumps({
            "component_id": r.component_id,
            "members": list(r.members),
            "size": r.size,
            "edge_count": r.edge_count,
            "total_weight": r.total_weight,
            "directed": r.directed,
        }, ensure_ascii=False) + "\n")
        for key, edge in r.edges.items():
            for item in edge.evidence:
                evidence.write(json.dumps(_evidence_row(r.component_id, key, item), ensure_ascii=False) + "\n")
    return (table.getvalue().encode("utf-8"), members.getvalue().encode("utf-8"),
            evidence.getvalue().encode("utf-8"))


def export_components(reports: Iterable[ComponentReport], csv_path: str | Path,
                      evidence_path: str | Path, members_path: str | Path | None = None) -> None:
    table, members, evidence = render_components(reports)
    Path(csv_path).write_bytes(table)
    Path(evidence_path).write_bytes(evidence)
    if members_path is not None:
        Path(members_path).write_bytes(members)


def read_component_members(path: str | Path) -> list[tuple[str, ...]]:
    """Member tuples from a components JSON-lines file."""
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                out.append(tuple(json.loads(line)["members"]))
    return out


def read_evidence(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()
