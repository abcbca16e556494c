"""Synthetic tweet streams with planted coordinated groups, and scoring against them.

Randomness comes from numpy's PCG64 bit generator seeded with
``CampaignConfig.seed``; the same config always yields the same stream.

Text alphabets are chosen so negatives are exact rather than probable:

* background originals use CJK ideographs; consecutive background tweets
  draw characters without replacement from a shuffled half of the block,
  alternating halves per pass, so two background tweets closer than one
  full pass never share a non-space character;
* every planted group owns a private slice of the Hangul syllable block.

Words are at least two characters long, so spaces are at most a third of
any text and a pair sharing only spaces scores at most 1/3.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ingest import Kind, TweetRecord, TweetStream
from .network import ComponentReport

CJK = (0x4E00, 0x9FFF)
HANGUL = (0xAC00, 0xD7A3)
DEFAULT_START = 1_530_000_000  # 2018-06-26T08:00:00Z


class ConfigError(ValueError):
    """Campaign config that is malformed or cannot behave as declared."""


class GroupKind(str, Enum):
    COPYPASTA = "copypasta"
    RETWEET_RING = "retweet_ring"
    NEWS_FACTORY = "news_factory"
    ORGANIC_SHARE = "organic_share"


_KIND_ALIASES = {
    "copypastagroup": GroupKind.COPYPASTA,
    "retweetring": GroupKind.RETWEET_RING,
    "newsfactory": GroupKind.NEWS_FACTORY,
    "organicsharecontrol": GroupKind.ORGANIC_SHARE,
}


def _group_kind(value) -> GroupKind:
    if isinstance(value, GroupKind):
        return value
    s = str(value)
    try:
        return GroupKind(s.lower())
    except ValueError:
        pass
    try:
        return _KIND_ALIASES[s.lower().replace("_", "")]
    except KeyError:
        raise ConfigError(f"unknown group kind {value!r}") from None


@dataclass
class GroupSpec:
    """One planted group.

    ``latency`` is an inclusive integer range in seconds: the delay of each
    member's post after the burst start (copypasta, factory), of each
    retweet after the source tweet (retweet ring), or the gap between
    consecutive shares (organic control).  ``bursts`` and ``burst_gap``
    schedule the group's activity.  For a retweet ring the first member is
    the promoted source and the rest retweet each of its posts.
    """

    kind: GroupKind
    size: int
    latency: tuple[int, int] = (0, 9)
    mutation_rate: float = 0.0
    bursts: int = 3
    burst_gap: tuple[int, int] = (600, 3600)
    text_length: int = 60
    detectable: bool | None = None

    def __post_init__(self):
        self.kind = _group_kind(self.kind)
        self.latency = tuple(int(x) for x in self.latency)
        self.burst_gap = tuple(int(x) for x in self.burst_gap)


@dataclass
class CampaignConfig:
    seed: int = 0
    start_time: int = DEFAULT_START
    duration: int = 6 * 3600
    background_accounts: int = 500
    background_rate: float = 0.2  # tweets per second across all background accounts
    background_retweet_fraction: float = 0.2
    organic_latency: tuple[int, int] = (60, 3600)
    planted_groups: list[GroupSpec] = field(default_factory=list)
    # thresholds the detectability flags refer to
    sim_threshold: float = 0.7
    time_window: int = 10
    min_strength: int = 2
    min_retweets: int = 2

    @classmethod
    def from_dict(cls, data: dict) -> CampaignConfig:
        data = dict(data)
        groups = [g if isinstance(g, GroupSpec) else GroupSpec(**g) for g in data.pop("planted_groups", [])]
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "organic_latency" in data:
            data["organic_latency"] = tuple(data["organic_latency"])
        return cls(planted_groups=groups, **data)

    def to_dict(self) -> dict:
        out = asdict(self)
        for g in out["planted_groups"]:
            g["kind"] = g["kind"].value
        return out


def load_config(path: str | Path) -> CampaignConfig:
    with open(path, encoding="utf-8") as f:
        try:
            return CampaignConfig.from_dict(json.load(f))
        except (TypeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"bad campaign config {path}: {exc}") from exc


@dataclass
class GroupInfo:
    group_id: str
    kind: GroupKind
    members: tuple[str, ...]
    detectable: bool


@dataclass
class GroundTruth:
    membership: dict[str, str | None]
    groups: dict[str, GroupInfo]

    def render(self) -> str:
        """One JSON line per account: account_id, group_id and, for planted accounts, kind and flag."""
        lines = []
        for account in sorted(self.membership):
            gid = self.membership[account]
            row = {"account_id": account, "group_id": gid}
            if gid is not None:
                info = self.groups[gid]
                row["group_kind"] = info.kind.value
                row["detectable"] = info.detectable
            lines.append(json.dumps(row) + "\n")
        return "".join(lines)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.render(), encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> GroundTruth:
        membership: dict[str, str | None] = {}
        members: dict[str, list[str]] = {}
        meta: dict[str, tuple[GroupKind, bool]] = {}
        with open(path, encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                row = json.loads(line)
                gid = row.get("group_id")
                membership[str(row["account_id"])] = gid
                if gid is not None:
                    members.setdefault(gid, []).append(str(row["account_id"]))
                    meta[gid] = (_group_kind(row.get("group_kind", "copypasta")), bool(row.get("detectable", True)))
        groups = {
            gid: GroupInfo(gid, meta[gid][0], tuple(sorted(ms)), meta[gid][1])
            for gid, ms in sorted(members.items())
        }
        return cls(membership, groups)


def expected_score(mutation_rate: float) -> float:
    """Rough expected similarity of two independently mutated copies of a template."""
    return (1.0 - mutation_rate) ** 2


def _detectable(spec: GroupSpec, cfg: CampaignConfig) -> bool:
    lo, hi = spec.latency
    if spec.kind is GroupKind.ORGANIC_SHARE:
        return False
    if spec.kind is GroupKind.RETWEET_RING:
        return hi < cfg.time_window and spec.bursts >= cfg.min_retweets
    # every member pairs with size-1 others per burst
    strength = (spec.size - 1) * spec.bursts
    return (
        hi - lo < cfg.time_window
        and expected_score(spec.mutation_rate) > cfg.sim_threshold
        and strength >= cfg.min_strength
    )


def validate(cfg: CampaignConfig) -> list[bool]:
    """Check the config and return the detectability flag for each group."""
    if cfg.duration < 1 or cfg.background_accounts < 0 or cfg.background_rate < 0:
        raise ConfigError("duration, background_accounts and background_rate must be non-negative")
    if cfg.background_rate > 0 and cfg.background_accounts < 2:
        raise ConfigError("background tweets need at least two background accounts")
    if not 0 <= cfg.background_retweet_fraction < 1:
        raise ConfigError("background_retweet_fraction must be in [0, 1)")
    if cfg.organic_latency[0] < cfg.time_window or cfg.organic_latency[0] > cfg.organic_latency[1]:
        raise ConfigError("organic_latency must be an ordered range starting at or above time_window")
    flags = []
    for n, g in enumerate(cfg.planted_groups):
        where = f"planted_groups[{n}] ({g.kind.value})"
        if g.size < 2:
            raise ConfigError(f"{where}: size must be >= 2")
        if g.bursts < 1:
            raise ConfigError(f"{where}: bursts must be >= 1")
        if not 0 <= g.latency[0] <= g.latency[1]:
            raise ConfigError(f"{where}: latency must be an ordered non-negative range")
        if not 0 <= g.burst_gap[0] <= g.burst_gap[1]:
            raise ConfigError(f"{where}: burst_gap must be an ordered non-negative range")
        if not 0 <= g.mutation_rate <= 1:
            raise ConfigError(f"{where}: mutation_rate must be in [0, 1]")
        if g.text_length < 2:
            raise ConfigError(f"{where}: text_length must be >= 2")
        if g.kind is GroupKind.ORGANIC_SHARE and g.latency[0] < 60:
            raise ConfigError(f"{where}: organic shares need gaps of at least 60 s")
        feasible = _detectable(g, cfg)
        if g.detectable and not feasible:
            raise ConfigError(
                f"{where}: declared detectable but cannot pass default thresholds"
                f" (expected score {expected_score(g.mutation_rate):.3f}, latency {g.latency},"
                f" bursts {g.bursts})"
            )
        flags.append(feasible if g.detectable is None else bool(g.detectable))
    return flags


class _Writer:
    """Collects raw events; ids are assigned after the final sort."""

    def __init__(self):
        self.events: list[dict] = []

    def post(self, author, t, text, kind=Kind.ORIGINAL, urls=(), ref=None):
        ev = {"author": author, "t": int(t), "text": text, "kind": kind, "urls": tuple(urls), "ref": ref}
        self.events.append(ev)
        return len(self.events) - 1


def _alphabet_slice(n_groups: int, index: int) -> np.ndarray:
    lo, hi = HANGUL
    span = (hi - lo + 1) // max(n_groups, 1)
    return np.arange(lo + index * span, lo + (index + 1) * span, dtype=np.int64)


def _words(rng: np.random.Generator, chars: Sequence[int], length: int) -> str:
    """Text of about ``length`` characters: words of 2-7 characters joined by spaces."""
    out: list[str] = []
    used = 0
    while used < length:
        w = int(rng.integers(2, 8))
        out.append("".join(chr(int(c)) for c in rng.choice(chars, size=w)))
        used += w + 1
    return " ".join(out)


def _mutate(rng: np.random.Generator, text: str, rate: float, chars: Sequence[int]) -> str:
    if rate <= 0:
        return text
    flips = rng.random(len(text)) < rate
    repl = rng.choice(chars, size=len(text))
    return "".join(
        chr(int(r)) if f and c != " " else c for c, f, r in zip(text, flips, repl)
    )


def _ascii_token(rng: np.random.Generator, n: int) -> str:
    return "".join(chr(int(c)) for c in rng.integers(ord("a"), ord("z") + 1, size=n))


class _BackgroundText:
    # draws characters without replacement from alternating halves of the CJK block
    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        lo, hi = CJK
        mid = (lo + hi + 1) // 2
        self.halves = [np.arange(lo, mid, dtype=np.int64), np.arange(mid, hi + 1, dtype=np.int64)]
        self.half = 1
        self.pool = np.zeros(0, dtype=np.int64)
        self.pos = 0

    def _take(self, n: int) -> np.ndarray:
        if self.pos + n > len(self.pool):
            self.half ^= 1
            self.pool = self.rng.permutation(self.halves[self.half])
            self.pos = 0
        out = self.pool[self.pos:self.pos + n]
        self.pos += n
        return out

    def text(self) -> str:
        n_words = int(self.rng.integers(6, 16))
        sizes = self.rng.integers(2, 7, size=n_words)
        chars = self._take(int(sizes.sum()))
        words, k = [], 0
        for s in sizes:
            words.append("".join(chr(int(c)) for c in chars[k:k + s]))
            k += s
        return " ".join(words)


def generate(config: CampaignConfig) -> tuple[TweetStream, GroundTruth]:
    """Build a stream with background chatter and the configured planted groups."""
    flags = validate(config)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    w = _Writer()
    start, end = config.start_time, config.start_time + config.duration

    n_planted = sum(g.size for g in config.planted_groups)
    n_accounts = config.background_accounts + n_planted
    labels = [f"acct{k:06d}" for k in rng.permutation(n_accounts)]
    background = labels[: config.background_accounts]
    planted_accounts = labels[config.background_accounts:]

    # background originals, texts assigned in time order for the disjointness guarantee
    n_bg = int(round(config.background_rate * config.duration))
    n_rt = int(round(n_bg * config.background_retweet_fraction))
    n_orig = n_bg - n_rt
    times = np.sort(rng.integers(start, end, size=n_orig))
    authors = rng.integers(0, max(len(background), 1), size=n_orig)
    texts = _BackgroundText(rng)
    originals = [w.post(background[a], t, texts.text()) for t, a in zip(times.tolist(), authors.tolist())]
    if originals and n_rt:
        position = {a: k for k, a in enumerate(background)}
        picks = rng.integers(0, len(originals), size=n_rt)
        lags = rng.integers(config.organic_latency[0], config.organic_latency[1] + 1, size=n_rt)
        who = rng.integers(0, len(background) - 1, size=n_rt)
        for p, lag, k in zip(picks.tolist(), lags.tolist(), who.tolist()):
            src = w.events[originals[p]]
            # skip the source author so no self-retweets
            author_idx = position[src["author"]]
            retweeter = background[k if k < author_idx else k + 1]
            w.post(retweeter, src["t"] + lag, src["text"], Kind.RETWEET, ref=originals[p])

    membership: dict[str, str | None] = {a: None for a in background}
    groups: dict[str, GroupInfo] = {}
    cursor = 0
    n_groups = len(config.planted_groups)
    for gi, (spec, flag) in enumerate(zip(config.planted_groups, flags)):
        gid = f"g{gi}"
        members = planted_accounts[cursor:cursor + spec.size]
        cursor += spec.size
        for m in members:
            membership[m] = gid
        groups[gid] = GroupInfo(gid, spec.kind, tuple(sorted(members)), flag)
        chars = _alphabet_slice(n_groups, gi)
        _plant(rng, w, spec, members, chars, start, end)

    events = sorted(range(len(w.events)), key=lambda k: (w.events[k]["t"], k))
    ids = {k: f"t{n:09d}" for n, k in enumerate(events)}
    records = []
    for k in events:
        ev = w.events[k]
        if ev["kind"] is Kind.RETWEET:
            src = w.events[ev["ref"]]
            rec = TweetRecord(ids[k], ev["author"], ev["t"], ev["text"], Kind.RETWEET,
                              ids[ev["ref"]], src["author"], src["t"], ev["urls"])
        else:
            rec = TweetRecord(ids[k], ev["author"], ev["t"], ev["text"], ev["kind"], urls=ev["urls"])
        records.append(rec)
    return TweetStream(tuple(records)), GroundTruth(membership, groups)


def _burst_times(rng: np.random.Generator, spec: GroupSpec, start: int, end: int) -> list[int]:
    first = int(rng.integers(start, max(start + 1, start + (end - start) // (spec.bursts + 1))))
    gaps = rng.integers(spec.burst_gap[0], spec.burst_gap[1] + 1, size=spec.bursts - 1)
    return [first] + (first + np.cumsum(gaps)).tolist()


def _plant(rng, w: _Writer, spec: GroupSpec, members: list[str], chars, start: int, end: int) -> None:
    lo, hi = spec.latency
    if spec.kind is GroupKind.COPYPASTA:
        for t0 in _burst_times(rng, spec, start, end):
            template = _words(rng, chars, spec.text_length)
            for m, lag in zip(members, rng.integers(lo, hi + 1, size=len(members)).tolist()):
                w.post(m, t0 + lag, _mutate(rng, template, spec.mutation_rate, chars))

    elif spec.kind is GroupKind.RETWEET_RING:
        source, promoters = members[0], members[1:]
        for t0 in _burst_times(rng, spec, start, end):
            orig = w.post(source, t0, _words(rng, chars, spec.text_length))
            for m, lag in zip(promoters, rng.integers(lo, hi + 1, size=len(promoters)).tolist()):
                w.post(m, t0 + lag, w.events[orig]["text"], Kind.RETWEET, ref=orig)

    elif spec.kind is GroupKind.NEWS_FACTORY:
        domains = [f"{_ascii_token(rng, 8)}-news.com" for _ in members]
        for t0 in _burst_times(rng, spec, start, end):
            headline = _words(rng, chars, spec.text_length)
            slug = _ascii_token(rng, 6)
            for m, dom, lag in zip(members, domains, rng.integers(lo, hi + 1, size=len(members)).tolist()):
                url = f"https://{dom}/{slug}"
                w.post(m, t0 + lag, _mutate(rng, headline, spec.mutation_rate, chars) + " " + url, urls=(url,))

    elif spec.kind is GroupKind.ORGANIC_SHARE:
        headline = _words(rng, chars, spec.text_length)
        url = f"https://{_ascii_token(rng, 7)}.com/{_ascii_token(rng, 10)}"
        text = f"{headline} {url}"
        t = int(rng.integers(start, max(start + 1, (start + end) // 2)))
        order = rng.permutation(len(members)).tolist()
        for n, k in enumerate(order):
            if n:
                t += int(rng.integers(lo, hi + 1))
            w.post(members[k], t, text, urls=(url,))


@dataclass
class Evaluation:
    precision: float
    recall: float
    detected_pairs: int
    true_pairs: int
    correct_pairs: int
    no_detected_pairs: bool
    no_true_pairs: bool
    groups: dict[str, str]

    def to_dict(self) -> dict:
        return asdict(self)


def _pairs(n: int) -> int:
    return n * (n - 1) // 2


def evaluate(
    detected: Iterable[ComponentReport | Iterable[str]],
    truth: GroundTruth,
    kinds: Iterable[GroupKind | str] | None = None,
) -> Evaluation:
    """Pair-level precision/recall of detected components against planted groups.

    A pair of accounts is predicted when both sit in one detected component
    and is true when both belong to one planted group of the selected
    ``kinds`` (all kinds by default).  With no predicted pairs precision is
    reported as 1.0 and ``no_detected_pairs`` is set; likewise recall.

    Group statuses: ``missed`` (no member detected), ``merged`` (a component
    holding members also holds outsiders), ``split`` (members spread over
    several components or only some detected), ``recovered`` otherwise.
    """
    wanted = None if kinds is None else {_group_kind(k) for k in kinds}
    selected = {gid: g for gid, g in truth.groups.items() if wanted is None or g.kind in wanted}
    comps = [tuple(c.members) if isinstance(c, ComponentReport) else tuple(c) for c in detected]

    detected_pairs = sum(_pairs(len(set(c))) for c in comps)
    correct = 0
    where: dict[str, list[int]] = {gid: [] for gid in selected}
    for n, comp in enumerate(comps):
        counts: dict[str, int] = {}
        for account in set(comp):
            gid = truth.membership.get(account)
            if gid in selected:
                counts[gid] = counts.get(gid, 0) + 1
        for gid, c in counts.items():
            correct += _pairs(c)
            where[gid].append(n)
    true_pairs = sum(_pairs(len(g.members)) for g in selected.values())

    statuses = {}
    for gid, g in sorted(selected.items()):
        hits = where[gid]
        members = set(g.members)
        if not hits:
            statuses[gid] = "missed"
        elif any(set(comps[n]) - members for n in hits):
            statuses[gid] = "merged"
        elif len(hits) > 1 or set(comps[hits[0]]) != members:
            statuses[gid] = "split"
        else:
            statuses[gid] = "recovered"

    return Evaluation(
        precision=correct / detected_pairs if detected_pairs else 1.0,
        recall=correct / true_pairs if true_pairs else 1.0,
        detected_pairs=detected_pairs,
        true_pairs=true_pairs,
        correct_pairs=correct,
        no_detected_pairs=detected_pairs == 0,
        no_true_pairs=true_pairs == 0,
        groups=statuses,
    )
