"""Synthetic corpora with planted style populations and retweet communities.

The generators double as oracles: every label they plant is returned (or
written to ``truth.json``) so downstream stages can be scored against it.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

from tweetdemog.corpus import Tweet, write_tweets
from tweetdemog.dataset import Example, LabeledDataset

NEUTRAL = (
    "gaur bihar etxe lagun kale mendi herri hiri denbora ondo gero orain egun gau "
    "urte asteburu bidaia musika liburu film jokoa ura kafe janari goiz arratsalde "
    "hori hau dena beti inoiz agian bai ez oso asko gutxi beste berri zahar handi txiki"
).split()
SLANG = "xd ta bro tope lol ostia puta guay jeje buaa wtf pff mazo flipau tio tia".split()
ELONGATION_STEMS = ("ja", "je", "ha", "xo", "ai", "mo", "o", "e", "a", "i")
FORMAL = (
    "bilera udalak ekitaldia aurkezpena jardunaldia batzarra jakinarazten informazioa "
    "egitaraua hitzaldia erakundea proiektua gonbidatzen zuzendaritza txostena "
    "aurrekontua osoko hautagaitza mintegia argitalpena"
).split()
SPANISH = "hoy mañana casa amigo calle ciudad tiempo bien luego ahora noche año fin viaje".split()

YOUNG, ADULT, MIXED = "young", "adult", "underdetermined"


def _elongation(rng: random.Random) -> str:
    stem = rng.choice(ELONGATION_STEMS)
    if len(stem) == 2 and rng.random() < 0.5:
        return stem * rng.randint(3, 5)
    # stretch one letter of a word: "ondooo", "mooola"
    word = rng.choice(NEUTRAL)
    i = rng.randrange(len(word))
    return word[:i] + word[i] * rng.randint(3, 6) + word[i + 1:]


def _decorate(tokens, rng: random.Random):
    r = rng.random()
    if r < 0.15:
        tokens.append(f"https://t.co/{rng.getrandbits(32):08x}")
    elif r < 0.25:
        tokens.insert(0, f"@lagun{rng.randint(1, 99)}")
    elif r < 0.32:
        tokens.append(f"#gaia{rng.randint(1, 9)}")
    return tokens


def style_text(style: str, rng: random.Random, marker_free: float = 0.03) -> str:
    """One tweet in ``style`` ("young"/"informal" or "adult"/"formal").

    With probability ``marker_free`` the tweet carries neutral words only.
    """
    tokens = [rng.choice(NEUTRAL) for _ in range(rng.randint(4, 9))]
    informal = style in (YOUNG, "informal")
    if rng.random() >= marker_free:
        n_markers = rng.randint(1, 3)
        for _ in range(n_markers):
            if informal:
                marker = _elongation(rng) if rng.random() < 0.5 else rng.choice(SLANG)
            else:
                marker = rng.choice(FORMAL)
            tokens.insert(rng.randrange(len(tokens) + 1), marker)
        if informal and rng.random() < 0.4:
            tokens.append(rng.choice(["!!!", "??", ":)", ":D"]))
        if not informal:
            tokens[0] = tokens[0].capitalize()
            tokens[-1] += "."
    return " ".join(_decorate(tokens, rng))


def style_corpus(n: int = 2000, seed: int = 0, marker_free: float = 0.03,
                 labels=(YOUNG, ADULT)) -> LabeledDataset:
    """``n`` labelled tweets, half per class, one single-class pseudo-user per 10 tweets."""
    rng = random.Random(seed)
    examples = []
    for i in range(n):
        label = labels[i % 2]
        examples.append(Example(style_text(label, rng, marker_free), label,
                                f"s{i % 2}{i // 20:04d}", f"st{i:06d}"))
    return LabeledDataset(examples)


@dataclass
class FixtureTruth:
    lifestage: dict = field(default_factory=dict)  # user -> young/adult/underdetermined
    community: dict = field(default_factory=dict)  # young users and accounts -> planted block
    basque: list = field(default_factory=list)
    non_basque: list = field(default_factory=list)
    accounts: list = field(default_factory=list)
    n_tweets: int = 0
    n_retweets: int = 0

    def to_json(self) -> dict:
        return {
            "lifestage": dict(sorted(self.lifestage.items())),
            "community": dict(sorted(self.community.items())),
            "basque_users": sorted(self.basque),
            "non_basque_users": sorted(self.non_basque),
            "accounts": sorted(self.accounts),
            "n_tweets": self.n_tweets,
            "n_retweets": self.n_retweets,
        }


def fixture_tweets(seed: int = 0, n_young: int = 90, n_adult: int = 90, n_mixed: int = 20,
                   n_foreign: int = 5, tweets_per_user: int = 60, retweet_share: float = 0.2,
                   n_communities: int = 4, accounts_per_community: int = 12,
                   in_community: float = 0.9, style_purity: float = 0.9):
    """Tweets of a small Basque population plus the labels planted in them.

    Young users each belong to one of ``n_communities`` blocks and retweet an
    account of their own block with probability ``in_community``. Original
    tweets follow the user's style with probability ``style_purity``.
    """
    rng = random.Random(seed)
    roles = [YOUNG] * n_young + [ADULT] * n_adult + [MIXED] * n_mixed + ["foreign"] * n_foreign
    rng.shuffle(roles)
    users = [f"u{i:04d}" for i in range(1, len(roles) + 1)]
    n_accounts = n_communities * accounts_per_community
    account_block = [i % n_communities for i in range(n_accounts)]
    rng.shuffle(account_block)
    accounts = [f"acc{i:03d}" for i in range(1, n_accounts + 1)]
    by_block = {b: [a for a, ab in zip(accounts, account_block) if ab == b] for b in range(n_communities)}

    truth = FixtureTruth(accounts=list(accounts))
    for a, b in zip(accounts, account_block):
        truth.community[a] = b
    start = datetime(2021, 1, 1, tzinfo=timezone.utc)
    tweets = []
    n_rt = round(tweets_per_user * retweet_share)
    young_seen = 0
    for uid, role in zip(users, roles):
        if role == "foreign":
            truth.non_basque.append(uid)
        else:
            truth.basque.append(uid)
            truth.lifestage[uid] = role
        block = None
        if role == YOUNG:
            block = young_seen % n_communities
            young_seen += 1
            truth.community[uid] = block
        is_rt = [True] * n_rt + [False] * (tweets_per_user - n_rt)
        rng.shuffle(is_rt)
        for k, rt in enumerate(is_rt):
            ts = start + timedelta(minutes=37 * len(tweets) + 3 * k)
            if role == "foreign":
                lang = "eu" if rng.random() < 0.1 else "es"
                text = " ".join(rng.choice(SPANISH) for _ in range(rng.randint(4, 9)))
            else:
                lang = "es" if (not rt and rng.random() < 0.1) else "eu"
                if role == MIXED:
                    style = YOUNG if rng.random() < 0.5 else ADULT
                else:
                    other = ADULT if role == YOUNG else YOUNG
                    style = role if rng.random() < style_purity else other
                text = style_text(style, rng)
            target = None
            if rt:
                if block is not None and rng.random() < in_community:
                    target = rng.choice(by_block[block])
                elif block is not None:
                    target = rng.choice([a for a in accounts if a not in by_block[block]])
                else:
                    target = rng.choice(accounts)
                text = f"RT @{target}: {text}"
                truth.n_retweets += 1
            tweets.append(Tweet(f"t{len(tweets) + 1:07d}", uid, text, lang, ts, target))
    truth.n_tweets = len(tweets)
    return tweets, truth


def style_seed(n: int = 600, seed: int = 0) -> LabeledDataset:
    """Formal/informal seed examples used to bootstrap the user ranking."""
    ds = style_corpus(n, seed, labels=("informal", "formal"))
    return LabeledDataset(Example(e.text, e.label, e.user_id, e.tweet_id, "train") for e in ds)


FIXTURE_CONFIG = """\
seed = {seed}
corpus = "tweets.jsonl"
style_seed = "style_seed.jsonl"
output_dir = "run"
train = true

[dataset]
n_per_class = 40
per_user = 30

[classifier]
epochs = 10

[communities]
k = 4

[walks]
walk_length = 40
walks_per_node = 10

[sgns]
dimensions = 64
window = 5
epochs = 1

[layout]
iterations = 500
"""


def make_fixture(out_dir, seed: int = 0) -> FixtureTruth:
    """Write tweets.jsonl, style_seed.jsonl, truth.json and pipeline.toml."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tweets, truth = fixture_tweets(seed)
    write_tweets(tweets, out / "tweets.jsonl")
    style_seed(seed=seed + 1).to_jsonl(out / "style_seed.jsonl")
    with open(out / "truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    (out / "pipeline.toml").write_text(FIXTURE_CONFIG.format(seed=seed), encoding="utf-8")
    return truth
