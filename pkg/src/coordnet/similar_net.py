"""Similar-tweet coordination network.

Two accounts are linked when they post texts with gestalt similarity above a
threshold less than ``time_window`` seconds apart.  Edge weight counts such
tweet pairs; accounts whose strength falls below ``min_strength`` are pruned.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .ingest import TweetRecord, TweetStream
from .network import ComponentReport, CoordinationNetwork, Edge, connected_components

__all__ = [
    "SimilarPair",
    "PackedTexts",
    "find_similar_pairs",
    "build_similar_tweet_network",
    "connected_components",
    "ComponentReport",
]


@dataclass(frozen=True)
class SimilarPair:
    tweet_a: str
    tweet_b: str
    author_a: str
    author_b: str
    score: float
    delta_t: int


class PackedTexts:
    """Eligible tweets laid out as flat code-point arrays for the scan kernel."""

    def __init__(self, records: Sequence[TweetRecord]):
        self.records = list(records)
        n = len(self.records)
        chunks = [_kernels.to_codes(r.text) for r in self.records]
        lengths = np.fromiter((len(c) for c in chunks), dtype=np.int64, count=n)
        self.offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(lengths, out=self.offsets[1:])
        self.codes = np.concatenate(chunks) if n else np.zeros(0, dtype=np.int32)
        # each text's code points sorted in place, used for the multiset-overlap bound
        segment = np.repeat(np.arange(n, dtype=np.int64), lengths)
        self.sorted_codes = self.codes[np.lexsort((self.codes, segment))]
        self.times = np.fromiter((r.created_at for r in self.records), dtype=np.int64, count=n)

    def __len__(self) -> int:
        return len(self.records)

    def length(self, i: int) -> int:
        return int(self.offsets[i + 1] - self.offsets[i])

    def scan(
        self,
        window: int | None,
        max_distance: int | None,
        threshold: float,
        threads: int = 1,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Run the pair kernel over contiguous owner ranges and concatenate in order.

        Each pair belongs to the range holding its earlier tweet, so ranges never
        overlap and the result does not depend on ``threads``.
        """
        n = len(self)
        win = np.int64(window) if window is not None else np.iinfo(np.int64).max
        dist = max_distance or 0
        nchunks = max(1, min(n, threads * 8)) if threads > 1 else 1
        bounds = np.linspace(0, n, nchunks + 1).astype(np.int64)

        def run(k):
            return _kernels.scan_pairs(
                self.codes, self.sorted_codes, self.offsets, self.times,
                bounds[k], bounds[k + 1], win, dist, float(threshold),
            )

        if threads > 1 and nchunks > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(run, range(nchunks)))
        else:
            parts = [run(k) for k in range(nchunks)]
        if not parts:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty, empty
        return tuple(np.concatenate([p[c] for p in parts]) for c in range(3))


def find_similar_pairs(
    stream: TweetStream,
    sim_threshold: float = 0.7,
    time_window: int = 10,
    max_stream_distance: int | None = None,
    threads: int = 1,
    diagnostics: dict | None = None,
) -> list[SimilarPair]:
    """Pairs of eligible tweets by different authors that are similar and close in time.

    Every eligible tweet is compared with each later eligible tweet posted
    less than ``time_window`` seconds after it; ``max_stream_distance``
    additionally caps how many positions ahead (among eligible tweets) the
    comparison may look.  A pair qualifies when its score is strictly above
    ``sim_threshold``.  Output follows stream order of the earlier tweet,
    then of the later one.

    If ``diagnostics`` is a dict it receives ``same_author_pairs`` (similar
    pairs dropped because one account posted both) and ``eligible``.
    """
    if not 0 < sim_threshold < 1:
        raise ValueError("sim_threshold must be in (0, 1)")
    if time_window < 1:
        raise ValueError("time_window must be >= 1")
    if max_stream_distance is not None and max_stream_distance < 1:
        raise ValueError("max_stream_distance must be >= 1")

    packed = PackedTexts(stream.eligible())
    ii, jj, mm = packed.scan(time_window, max_stream_distance, sim_threshold, threads)
    recs = packed.records
    pairs = []
    same_author = 0
    for i, j, m in zip(ii.tolist(), jj.tolist(), mm.tolist()):
        a, b = recs[i], recs[j]
        if a.author_id == b.author_id:
            same_author += 1
            continue
        score = 2 * m / (packed.length(i) + packed.length(j))
        pairs.append(SimilarPair(a.tweet_id, b.tweet_id, a.author_id, b.author_id, score, b.created_at - a.created_at))
    if diagnostics is not None:
        diagnostics["same_author_pairs"] = same_author
        diagnostics["eligible"] = len(packed)
    return pairs


def build_similar_tweet_network(
    pairs: Sequence[SimilarPair],
    min_strength: int = 2,
    min_edge_weight: int = 1,
) -> CoordinationNetwork:
    """Aggregate similar pairs into an undirected weighted account network.

    Edges lighter than ``min_edge_weight`` go first; then accounts with
    strength below ``min_strength`` are removed together with their edges.
    The node filter runs once and is not iterated to a fixed point, so a
    surviving account may end up with strength below ``min_strength``.
    """
    if min_strength < 0 or min_edge_weight < 1:
        raise ValueError("min_strength must be >= 0 and min_edge_weight >= 1")
    net = CoordinationNetwork(directed=False)
    grouped: dict[tuple[str, str], list[SimilarPair]] = {}
    for p in pairs:
        if p.author_a == p.author_b:
            continue
        grouped.setdefault(net.key(p.author_a, p.author_b), []).append(p)
    for key in sorted(grouped):
        if len(grouped[key]) >= min_edge_weight:
            net.edges[key] = Edge(len(grouped[key]), grouped[key])
    net.recompute_strength()

    weak = {n for n, s in net.strength.items() if s < min_strength}
    if weak:
        net.edges = {k: e for k, e in net.edges.items() if k[0] not in weak and k[1] not in weak}
        net.recompute_strength()
    return net
