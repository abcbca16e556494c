"""Weighted account networks with per-edge evidence, and component extraction."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Any
from urllib.parse import urlsplit

from .ingest import TweetStream


@dataclass
class Edge:
    weight: int
    evidence: list[Any] = field(default_factory=list)


@dataclass
class CoordinationNetwork:
    """Account graph.  Undirected edge keys are sorted pairs; directed keys are (source, target).

    ``strength`` maps every node to the sum of its incident edge weights, or to
    its out-strength when the network is directed.
    """

    directed: bool
    edges: dict[tuple[str, str], Edge] = field(default_factory=dict)
    strength: dict[str, int] = field(default_factory=dict)

    @property
    def nodes(self) -> list[str]:
        return sorted(self.strength)

    def key(self, u: str, v: str) -> tuple[str, str]:
        if self.directed or u <= v:
            return (u, v)
        return (v, u)

    def weight(self, u: str, v: str) -> int:
        edge = self.edges.get(self.key(u, v))
        return edge.weight if edge else 0

    def recompute_strength(self) -> None:
        """Rebuild node strengths from edges; nodes without edges disappear."""
        strength: dict[str, int] = {}
        for (u, v), edge in self.edges.items():
            strength[u] = strength.get(u, 0) + edge.weight
            if self.directed:
                strength.setdefault(v, 0)
            else:
                strength[v] = strength.get(v, 0) + edge.weight
        self.strength = strength

    def structure(self) -> tuple[bool, dict[str, int], dict[tuple[str, str], int]]:
        """Direction, strengths and edge weights, ignoring evidence."""
        return (
            self.directed,
            dict(sorted(self.strength.items())),
            {k: e.weight for k, e in sorted(self.edges.items())},
        )

    def __len__(self) -> int:
        return len(self.strength)


@dataclass
class ComponentReport:
    component_id: int
    members: tuple[str, ...]
    edges: dict[tuple[str, str], Edge]
    directed: bool = False
    domain_count: int | None = None
    median_delta_t: float | None = None
    burst_count: int | None = None

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> int:
        return sum(e.weight for e in self.edges.values())


def url_domain(url: str) -> str | None:
    host = urlsplit(url if "//" in url else "//" + url).hostname
    if not host:
        return None
    host = host.lower()
    return host[4:] if host.startswith("www.") else host


def _evidence_tweets(item) -> list[str]:
    # SimilarPair carries two tweets, retweet evidence one
    if hasattr(item, "tweet_b"):
        return [item.tweet_a, item.tweet_b]
    return [item.tweet_id]


def count_bursts(times: list[int], time_window: int) -> int:
    """Maximal runs of sorted times whose consecutive gaps are below ``time_window``."""
    if not times:
        return 0
    times = sorted(times)
    return 1 + sum(1 for a, b in zip(times, times[1:]) if b - a >= time_window)


def connected_components(
    network: CoordinationNetwork,
    stream: TweetStream | None = None,
    time_window: int = 10,
) -> list[ComponentReport]:
    """Split the network into weakly connected components.

    Components are ordered by decreasing size, then by smallest member id.
    Domain and burst metrics need ``stream`` to look up the contributing
    tweets and are left as None without it.
    """
    parent = {n: n for n in network.strength}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in network.edges:
        parent.setdefault(u, u)
        parent.setdefault(v, v)
        ru, rv = find(u), find(v)
        if ru != rv:
            if rv < ru:
                ru, rv = rv, ru
            parent[rv] = ru

    groups: dict[str, list[str]] = {}
    for n in parent:
        groups.setdefault(find(n), []).append(n)
    edges_by_root: dict[str, dict[tuple[str, str], Edge]] = {}
    for key, edge in network.edges.items():
        edges_by_root.setdefault(find(key[0]), {})[key] = edge

    ordered = sorted(groups.items(), key=lambda kv: (-len(kv[1]), min(kv[1])))
    index = stream.by_id() if stream is not None else None
    reports = []
    for cid, (root, members) in enumerate(ordered):
        comp_edges = dict(sorted(edges_by_root.get(root, {}).items()))
        evidence = [item for e in comp_edges.values() for item in e.evidence]
        deltas = [item.delta_t for item in evidence]
        report = ComponentReport(
            component_id=cid,
            members=tuple(sorted(members)),
            edges=comp_edges,
            directed=network.directed,
            median_delta_t=float(statistics.median(deltas)) if deltas else None,
        )
        if index is not None:
            tweets = {t for item in evidence for t in _evidence_tweets(item) if t in index}
            domains = {url_domain(u) for t in tweets for u in index[t].urls}
            domains.discard(None)
            report.domain_count = len(domains)
            report.burst_count = count_bursts([index[t].created_at for t in tweets], time_window)
        reports.append(report)
    return reports
