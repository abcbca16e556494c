"""Parse, normalize, deduplicate and order tweet records from JSON-lines dumps."""

from __future__ import annotations

import json
import logging
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping

logger = logging.getLogger(__name__)


class IngestError(Exception):
    """Fatal input problem: unreadable file or a schema mapping that rejects most lines."""


class Kind(str, Enum):
    ORIGINAL = "original"
    REPLY = "reply"
    QUOTE = "quote"
    RETWEET = "retweet"


@dataclass(frozen=True)
class TweetRecord:
    tweet_id: str
    author_id: str
    created_at: int
    text: str
    kind: Kind
    retweeted_tweet_id: str | None = None
    retweeted_author_id: str | None = None
    retweeted_created_at: int | None = None
    urls: tuple[str, ...] = ()

    @property
    def sort_key(self) -> tuple[int, str]:
        return (self.created_at, self.tweet_id)

    def to_json(self) -> dict[str, Any]:
        return {
            "tweet_id": self.tweet_id,
            "author_id": self.author_id,
            "created_at": self.created_at,
            "text": self.text,
            "kind": self.kind.value,
            "retweeted_tweet_id": self.retweeted_tweet_id,
            "retweeted_author_id": self.retweeted_author_id,
            "retweeted_created_at": self.retweeted_created_at,
            "urls": list(self.urls),
        }


@dataclass(frozen=True)
class TweetStream:
    """Records sorted by (created_at, tweet_id) with unique tweet ids."""

    records: tuple[TweetRecord, ...] = ()
    _index: dict[str, TweetRecord] = field(default=None, repr=False, compare=False)  # type: ignore[assignment]

    @classmethod
    def from_records(cls, records: Iterable[TweetRecord]) -> TweetStream:
        """Sort and keep the first record seen for each tweet id."""
        seen: dict[str, TweetRecord] = {}
        for rec in records:
            seen.setdefault(rec.tweet_id, rec)
        return cls(tuple(sorted(seen.values(), key=lambda r: r.sort_key)))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TweetRecord]:
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def by_id(self) -> dict[str, TweetRecord]:
        if self._index is None:
            object.__setattr__(self, "_index", {r.tweet_id: r for r in self.records})
        return self._index

    def eligible(self) -> list[TweetRecord]:
        return [r for r in self.records if eligible_for_similarity(r)]


@dataclass(frozen=True)
class Diagnostic:
    line: int
    reason: str
    tweet_id: str | None = None


def eligible_for_similarity(record: TweetRecord) -> bool:
    """Originals, replies and quotes take part in text comparison; retweets do not."""
    return record.kind is not Kind.RETWEET


# canonical field -> source path; the identity mapping reads our own serialized streams
DEFAULT_MAPPING: dict[str, str] = {
    "tweet_id": "tweet_id",
    "author_id": "author_id",
    "created_at": "created_at",
    "text": "text",
    "kind": "kind",
    "retweeted_tweet_id": "retweeted_tweet_id",
    "retweeted_author_id": "retweeted_author_id",
    "retweeted_created_at": "retweeted_created_at",
    "urls": "urls",
}

# Twitter v1.1 statuses.  retweeted_status always points at the root tweet.
TWITTER_V1_MAPPING: dict[str, str] = {
    "tweet_id": "id_str",
    "author_id": "user.id_str",
    "created_at": "created_at",
    "text": "full_text|text",
    "retweeted_tweet_id": "retweeted_status.id_str",
    "retweeted_author_id": "retweeted_status.user.id_str",
    "retweeted_created_at": "retweeted_status.created_at",
    "reply_to_id": "in_reply_to_status_id_str",
    "quoted_tweet_id": "quoted_status_id_str",
    "urls": "entities.urls[].expanded_url",
}

PRESETS = {"canonical": DEFAULT_MAPPING, "twitter-v1": TWITTER_V1_MAPPING}

_MISSING = object()


def load_mapping(path: str | Path | None) -> dict[str, str]:
    """Read a JSON schema-mapping file, or return a preset when given its name."""
    if path is None:
        return dict(DEFAULT_MAPPING)
    if str(path) in PRESETS:
        return dict(PRESETS[str(path)])
    try:
        with open(path, encoding="utf-8") as f:
            mapping = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestError(f"cannot read schema mapping {path}: {exc}") from exc
    if not isinstance(mapping, dict) or not all(isinstance(v, str) for v in mapping.values()):
        raise IngestError(f"schema mapping {path} must be an object of field -> path strings")
    return mapping


def resolve_path(obj: Any, path: str) -> Any:
    """Look up a dotted path; ``a[].b`` projects ``b`` over list ``a``; ``x|y`` falls back."""
    for alternative in path.split("|"):
        value = _resolve(obj, alternative.split("."))
        if value is not _MISSING and value is not None:
            return value
    return None


def _resolve(obj: Any, parts: list[str]) -> Any:
    for n, part in enumerate(parts):
        project = part.endswith("[]")
        key = part[:-2] if project else part
        if not isinstance(obj, Mapping) or key not in obj:
            return _MISSING
        obj = obj[key]
        if project:
            if not isinstance(obj, list):
                return _MISSING
            rest = parts[n + 1:]
            if not rest:
                return obj
            out = [_resolve(item, rest) for item in obj]
            return [v for v in out if v is not _MISSING and v is not None]
    return obj


def parse_timestamp(value: Any) -> int:
    """Epoch seconds from an int, numeric string, RFC 3339 string or Twitter's legacy format."""
    if isinstance(value, bool):
        raise ValueError("boolean is not a timestamp")
    if isinstance(value, (int, float)):
        return int(value // 1)
    if not isinstance(value, str):
        raise ValueError(f"unsupported timestamp {value!r}")
    s = value.strip()
    try:
        return int(float(s) // 1)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(s[:-1] + "+00:00" if s.endswith(("Z", "z")) else s)
    except ValueError:
        try:
            dt = datetime.strptime(s, "%a %b %d %H:%M:%S %z %Y")
        except ValueError:
            raise ValueError(f"unparseable timestamp {value!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp() // 1)


def _as_id(value: Any) -> str | None:
    if value is None or isinstance(value, (dict, list, bool)):
        return None
    s = str(value)
    return s or None


def record_from_object(obj: Mapping[str, Any], mapping: Mapping[str, str]) -> TweetRecord:
    """Build one TweetRecord from a decoded line; raises ValueError when invalid."""
    def get(name):
        path = mapping.get(name)
        return resolve_path(obj, path) if path else None

    tweet_id = _as_id(get("tweet_id"))
    author_id = _as_id(get("author_id"))
    if tweet_id is None:
        raise ValueError("missing tweet_id")
    if author_id is None:
        raise ValueError("missing author_id")
    raw_time = get("created_at")
    if raw_time is None:
        raise ValueError("missing created_at")
    created_at = parse_timestamp(raw_time)

    text = get("text")
    if text is None:
        text = ""
    if not isinstance(text, str):
        raise ValueError("text is not a string")
    text = unicodedata.normalize("NFC", text)

    rt_id = _as_id(get("retweeted_tweet_id"))
    rt_author = _as_id(get("retweeted_author_id"))
    rt_time_raw = get("retweeted_created_at")
    rt_time = parse_timestamp(rt_time_raw) if rt_time_raw is not None else None

    raw_kind = get("kind")
    if raw_kind is not None:
        try:
            kind = Kind(str(raw_kind).lower())
        except ValueError:
            raise ValueError(f"unknown kind {raw_kind!r}") from None
    elif rt_id is not None:
        kind = Kind.RETWEET
    elif _as_id(get("quoted_tweet_id")) is not None:
        kind = Kind.QUOTE
    elif _as_id(get("reply_to_id")) is not None:
        kind = Kind.REPLY
    else:
        kind = Kind.ORIGINAL

    if kind is Kind.RETWEET:
        if rt_id is None or rt_author is None:
            raise ValueError("retweet without retweeted tweet/author id")
        if rt_time is not None and created_at < rt_time:
            raise ValueError("retweet created before its original")
    else:
        rt_id = rt_author = rt_time = None

    urls = get("urls")
    if urls is None:
        urls = ()
    elif isinstance(urls, str):
        urls = (urls,)
    elif isinstance(urls, list):
        urls = tuple(str(u) for u in urls if u)
    else:
        raise ValueError("urls is not a list")

    return TweetRecord(
        tweet_id=tweet_id,
        author_id=author_id,
        created_at=created_at,
        text=text,
        kind=kind,
        retweeted_tweet_id=rt_id,
        retweeted_author_id=rt_author,
        retweeted_created_at=rt_time,
        urls=urls,
    )


def parse_lines(
    lines: Iterable[str],
    mapping: Mapping[str, str] | None = None,
    max_reject_fraction: float = 0.5,
) -> tuple[TweetStream, list[Diagnostic]]:
    """Parse JSON lines into a canonical stream plus per-line diagnostics.

    Blank lines are ignored.  Malformed lines and duplicate tweet ids are
    reported and skipped; the first occurrence of an id wins.
    """
    mapping = DEFAULT_MAPPING if mapping is None else mapping
    diagnostics: list[Diagnostic] = []
    kept: dict[str, TweetRecord] = {}
    nonblank = 0
    rejected = 0
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        nonblank += 1
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError("line is not a JSON object")
            rec = record_from_object(obj, mapping)
        except (ValueError, TypeError, OverflowError) as exc:
            rejected += 1
            diagnostics.append(Diagnostic(lineno, str(exc)))
            continue
        if rec.tweet_id in kept:
            diagnostics.append(Diagnostic(lineno, "duplicate tweet_id", rec.tweet_id))
            logger.debug("line %d: duplicate tweet_id %s", lineno, rec.tweet_id)
            continue
        kept[rec.tweet_id] = rec

    if nonblank and rejected / nonblank > max_reject_fraction:
        raise IngestError(
            f"{rejected} of {nonblank} lines rejected; check the schema mapping"
            f" (first error: line {diagnostics[0].line}: {diagnostics[0].reason})"
        )

    records = _flatten_retweets(kept, diagnostics)
    return TweetStream.from_records(records), diagnostics


def _flatten_retweets(kept: dict[str, TweetRecord], diagnostics: list[Diagnostic]) -> list[TweetRecord]:
    # a retweet pointing at another retweet in the dump is re-pointed at that one's root
    out = []
    for rec in kept.values():
        if rec.kind is Kind.RETWEET:
            target = kept.get(rec.retweeted_tweet_id)
            hops = 0
            while target is not None and target.kind is Kind.RETWEET and hops < len(kept):
                rec = TweetRecord(
                    rec.tweet_id, rec.author_id, rec.created_at, rec.text, rec.kind,
                    target.retweeted_tweet_id, target.retweeted_author_id,
                    target.retweeted_created_at, rec.urls,
                )
                target = kept.get(rec.retweeted_tweet_id)
                hops += 1
            if target is not None and rec.retweeted_created_at is None:
                rec = TweetRecord(
                    rec.tweet_id, rec.author_id, rec.created_at, rec.text, rec.kind,
                    rec.retweeted_tweet_id, target.author_id, target.created_at, rec.urls,
                )
        out.append(rec)
    return out


def parse_stream(
    path: str | Path,
    mapping: Mapping[str, str] | None = None,
) -> tuple[TweetStream, list[Diagnostic]]:
    """Read a JSON-lines file.  Raises IngestError if it cannot be read."""
    try:
        with open(path, encoding="utf-8") as f:
            return parse_lines(f, mapping)
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc


def serialize_lines(stream: TweetStream) -> Iterator[str]:
    for rec in stream:
        yield json.dumps(rec.to_json(), ensure_ascii=False, separators=(",", ":")) + "\n"


def write_stream(stream: TweetStream, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.writelines(serialize_lines(stream))
