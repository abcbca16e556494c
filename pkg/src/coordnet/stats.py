"""Distributions used to pick the similarity and time-window thresholds.

* ``interval_distribution``: for tweets ``d`` positions apart in the stream,
  the time gaps of the pairs whose texts are similar.
* ``similarity_distribution``: scores of all pairs posted within the window.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .ingest import TweetStream
from .similar_net import PackedTexts

SIMILARITY_BINS = 20
# zero bin [0, 1) then five log bins per decade up to 10**6 seconds
TIME_EDGES = np.concatenate([[0.0], np.logspace(0, 6, 31)])


@dataclass
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    candidates: int | None = None
    bin_widths: np.ndarray | None = None  # exact widths when edge differences would round

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges) if self.bin_widths is None else self.bin_widths

    @property
    def density(self) -> np.ndarray:
        """Probability density; all zeros for an empty histogram."""
        if self.total == 0:
            return np.zeros(len(self.counts))
        return self.counts / (self.total * self.widths)

    def rows(self) -> Iterable[tuple[float, float, int, float]]:
        for lo, hi, c, d in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts, self.density):
            yield float(lo), float(hi), int(c), float(d)


def _time_bins(deltas: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(TIME_EDGES, deltas, side="right") - 1
    # gaps beyond the last edge are folded into the last bin
    idx = np.clip(idx, 0, len(TIME_EDGES) - 2)
    return np.bincount(idx, minlength=len(TIME_EDGES) - 1)


def interval_distribution(
    stream: TweetStream,
    sim_threshold: float = 0.7,
    distances: Iterable[int] = range(1, 11),
    threads: int = 1,
) -> dict[int, Histogram]:
    """Per stream distance ``d``, histogram of time gaps between similar tweets ``d`` apart.

    Positions count eligible tweets only, so a stream of ``N`` eligible tweets
    yields ``N - d`` candidate pairs at distance ``d``.  Pairs by the same
    author are included.
    """
    distances = sorted(set(distances))
    if not distances or distances[0] < 1:
        raise ValueError("distances must be positive")
    packed = PackedTexts(stream.eligible())
    n = len(packed)
    ii, jj, _ = packed.scan(None, distances[-1], sim_threshold, threads)
    gaps = packed.times[jj] - packed.times[ii]
    dist = jj - ii
    out = {}
    for d in distances:
        out[d] = Histogram(TIME_EDGES.copy(), _time_bins(gaps[dist == d]), candidates=max(n - d, 0))
    return out


def similarity_distribution(stream: TweetStream, time_window: int = 10, threads: int = 1) -> Histogram:
    """Histogram of gestalt scores over all eligible pairs less than ``time_window`` apart.

    Bins are 0.05 wide; the top bin is closed at 1.0.  Pairs of two empty
    texts are left out.
    """
    if time_window < 1:
        raise ValueError("time_window must be >= 1")
    packed = PackedTexts(stream.eligible())
    ii, jj, mm = packed.scan(time_window, None, -1.0, threads)
    lengths = np.diff(packed.offsets)
    total = lengths[ii] + lengths[jj]
    # floor(score * 20) in exact integer arithmetic
    idx = np.minimum((2 * SIMILARITY_BINS * mm) // np.maximum(total, 1), SIMILARITY_BINS - 1)
    counts = np.bincount(idx, minlength=SIMILARITY_BINS)
    edges = np.array([k / SIMILARITY_BINS for k in range(SIMILARITY_BINS + 1)])
    widths = np.full(SIMILARITY_BINS, 1 / SIMILARITY_BINS)
    return Histogram(edges, counts, candidates=len(ii), bin_widths=widths)


def histograms_csv(items: list[tuple[dict, Histogram]]) -> str:
    """CSV rows of bin_lo, bin_hi, count, density, prefixed by any label columns."""
    labels = list(items[0][0]) if items else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(labels + ["bin_lo", "bin_hi", "count", "density"])
    for extra, hist in items:
        for lo, hi, c, d in hist.rows():
            w.writerow([extra[k] for k in labels] + [repr(lo), repr(hi), c, repr(d)])
    return buf.getvalue()


def write_histogram_csv(hist: Histogram, path: str | Path) -> None:
    Path(path).write_text(histograms_csv([({}, hist)]), encoding="utf-8")
