"""Directed promoter -> promoted network of rapid retweets."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .ingest import Diagnostic, Kind, TweetStream
from .network import CoordinationNetwork, Edge

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RetweetEvidence:
    tweet_id: str
    delta_t: int


def build_rapid_retweet_network(
    stream: TweetStream,
    time_window: int = 10,
    min_weight: int = 2,
    diagnostics: list[Diagnostic] | None = None,
) -> CoordinationNetwork:
    """Link each retweeter to the root author it retweeted within ``time_window`` seconds.

    A retweet is rapid when ``created_at - retweeted_created_at < time_window``.
    Edges with fewer than ``min_weight`` rapid retweets are dropped, and so are
    the accounts left without edges.  Self-retweets never form edges.
    Retweets lacking the original's timestamp are skipped and reported in
    ``diagnostics`` when a list is given.
    """
    if time_window < 1:
        raise ValueError("time_window must be >= 1")
    if min_weight < 1:
        raise ValueError("min_weight must be >= 1")

    evidence: dict[tuple[str, str], list[RetweetEvidence]] = {}
    for rec in stream:
        if rec.kind is not Kind.RETWEET:
            continue
        if rec.retweeted_created_at is None:
            logger.debug("retweet %s has no original timestamp", rec.tweet_id)
            if diagnostics is not None:
                diagnostics.append(Diagnostic(0, "retweet without original timestamp", rec.tweet_id))
            continue
        if rec.author_id == rec.retweeted_author_id:
            continue
        delta = rec.created_at - rec.retweeted_created_at
        if 0 <= delta < time_window:
            evidence.setdefault((rec.author_id, rec.retweeted_author_id), []).append(
                RetweetEvidence(rec.tweet_id, delta)
            )

    net = CoordinationNetwork(directed=True)
    for key in sorted(evidence):
        items = evidence[key]
        if len(items) >= min_weight:
            net.edges[key] = Edge(len(items), items)
    net.recompute_strength()
    return net
