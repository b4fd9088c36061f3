"""Tweet corpus ingestion, text normalisation and per-user views."""

from __future__ import annotations

import errno
import json
import re
from collections import Counter, defaultdict
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from tweetdemog.errors import DataError, ParameterError

REQUIRED_FIELDS = ("tweet_id", "user_id", "text", "lang", "created_at")

_URL_RE = re.compile(r"(?:\b[a-z][a-z0-9+.\-]*://|\bwww\.)\S*", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#\w+")
_SPACE_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class Tweet:
    tweet_id: str
    user_id: str
    text: str
    lang: str
    created_at: datetime
    retweet_of_user_id: str | None = None

    @property
    def is_retweet(self) -> bool:
        return self.retweet_of_user_id is not None

    def to_json(self) -> dict:
        return {
            "tweet_id": self.tweet_id,
            "user_id": self.user_id,
            "text": self.text,
            "lang": self.lang,
            "created_at": format_timestamp(self.created_at),
            "retweet_of_user_id": self.retweet_of_user_id,
        }


@dataclass(frozen=True)
class UserTimeline:
    user_id: str
    tweets: tuple[Tweet, ...]

    @property
    def basque_fraction(self) -> Fraction:
        if not self.tweets:
            return Fraction(0)
        return Fraction(sum(t.lang == "eu" for t in self.tweets), len(self.tweets))

    def __len__(self) -> int:
        return len(self.tweets)


@dataclass(frozen=True)
class CorpusStats:
    n_users: int
    n_tweets: int
    n_retweets: int
    lang_counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n_users": self.n_users,
            "n_tweets": self.n_tweets,
            "n_retweets": self.n_retweets,
            "lang_counts": dict(sorted(self.lang_counts.items())),
        }


class Corpus(Mapping):
    """Read-only mapping ``user_id -> UserTimeline`` iterated in user_id order."""

    def __init__(self, timelines: Mapping[str, UserTimeline] | None = None):
        timelines = timelines or {}
        self._timelines = {uid: timelines[uid] for uid in sorted(timelines)}
        self._by_id = {t.tweet_id: t for tl in self._timelines.values() for t in tl.tweets}

    @classmethod
    def from_tweets(cls, tweets) -> Corpus:
        grouped: dict[str, list[Tweet]] = defaultdict(list)
        seen: set[str] = set()
        for tw in tweets:
            if tw.tweet_id in seen:
                raise DataError(f"duplicate tweet_id {tw.tweet_id!r}")
            seen.add(tw.tweet_id)
            grouped[tw.user_id].append(tw)
        return cls({
            uid: UserTimeline(uid, tuple(sorted(tws, key=lambda t: (t.created_at, t.tweet_id))))
            for uid, tws in grouped.items()
        })

    def __getitem__(self, user_id: str) -> UserTimeline:
        return self._timelines[user_id]

    def __iter__(self) -> Iterator[str]:
        return iter(self._timelines)

    def __len__(self) -> int:
        return len(self._timelines)

    def tweets(self) -> Iterator[Tweet]:
        for tl in self._timelines.values():
            yield from tl.tweets

    def tweet(self, tweet_id: str) -> Tweet:
        return self._by_id[tweet_id]

    def user_of(self, tweet_id: str) -> str:
        return self._by_id[tweet_id].user_id

    def __contains__(self, user_id) -> bool:
        return user_id in self._timelines

    def subset(self, user_ids) -> Corpus:
        return Corpus({u: self._timelines[u] for u in user_ids if u in self._timelines})

    def stats(self) -> CorpusStats:
        langs = Counter(t.lang for t in self.tweets())
        n_tweets = sum(len(tl) for tl in self._timelines.values())
        n_rt = sum(t.is_retweet for t in self.tweets())
        return CorpusStats(len(self), n_tweets, n_rt, dict(langs))


def parse_timestamp(value: str) -> datetime:
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    ts = datetime.fromisoformat(value)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def tweet_from_record(rec: dict) -> Tweet:
    if not isinstance(rec, dict):
        raise DataError("record is not a JSON object")
    missing = [k for k in REQUIRED_FIELDS if k not in rec]
    if missing:
        raise DataError(f"missing field(s): {', '.join(missing)}")
    tweet_id, user_id, text = str(rec["tweet_id"]), str(rec["user_id"]), rec["text"]
    if not tweet_id:
        raise DataError("empty tweet_id")
    if not isinstance(text, str) or not text:
        raise DataError(f"tweet {tweet_id!r} has empty text")
    # self-retweets are accepted here; the graph builder drops and counts them
    rt = rec.get("retweet_of_user_id")
    if rt is not None:
        rt = str(rt)
    try:
        created = parse_timestamp(str(rec["created_at"]))
    except ValueError as exc:
        raise DataError(f"bad created_at for tweet {tweet_id!r}: {exc}") from None
    return Tweet(tweet_id, user_id, text, str(rec["lang"] or ""), created, rt)


def read_tweets(path) -> Iterator[Tweet]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield tweet_from_record(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None


def ingest(path, format: str = "jsonl") -> Corpus:
    """Load a JSON-lines tweet file into a :class:`Corpus`.

    Raises :class:`DataError` with the line number on malformed input and
    naming the id on a duplicated ``tweet_id``.
    """
    if format != "jsonl":
        raise ParameterError(f"unsupported corpus format {format!r}")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(errno.ENOENT, "no such corpus file", str(path))
    return Corpus.from_tweets(read_tweets(path))


def write_tweets(tweets, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tw in tweets:
            fh.write(json.dumps(tw.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


def _strip_once(text: str) -> str:
    text = _URL_RE.sub("", text)
    text = _MENTION_RE.sub("", text)
    return _HASHTAG_RE.sub("", text)


def preprocess(text: str) -> str:
    """Remove URLs, @mentions and #hashtags, then collapse whitespace."""
    # repeat until stable: a deletion can splice a new match together
    prev = None
    while prev != text:
        prev, text = text, _strip_once(text)
    return _SPACE_RE.sub(" ", text).strip()


def as_fraction(value) -> Fraction:
    """Exact rational for a threshold given as float, str, int or Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def basque_users(corpus: Corpus, min_fraction=0.20) -> set[str]:
    """Users writing at least ``min_fraction`` of their tweets in Basque (``lang == "eu"``)."""
    threshold = as_fraction(min_fraction)
    if not 0 <= threshold <= 1:
        raise ParameterError(f"min_fraction must lie in [0, 1], got {min_fraction}")
    if len(corpus) == 0:
        raise DataError("corpus is empty")
    return {uid for uid, tl in corpus.items() if tl.basque_fraction >= threshold}
