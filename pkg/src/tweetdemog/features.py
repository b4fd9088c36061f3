"""Shallow local features for tweet classification.

Every feature is a string key with a real value; categorical features are
binary indicators. Kinds:

* ``w:`` token unigrams and ``bi:`` token bigrams (lower-cased)
* ``c2:``/``c3:``/``c4:`` character n-grams inside each token
* ``pre1:``..``pre4:`` and ``suf1:``..``suf4:`` token prefixes/suffixes
* ``shape:`` orthography: digits, all-caps tokens, punctuation density,
  elongation (a letter or letter pair repeated three or more times in a row)
* ``clus:`` cluster ids looked up in token -> cluster lexicons
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from tweetdemog.errors import DataError

CHAR_NGRAM_SIZES = (2, 3, 4)
AFFIX_SIZES = (1, 2, 3, 4)
MAX_LEXICONS = 3

# "aaa", "jajaja", "hahaha": a 1- or 2-letter unit repeated >= 3 times
_ELONGATION_RE = re.compile(r"([^\W\d_]{1,2})\1{2,}")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] in "PS"


def tokenize(text: str) -> list[str]:
    """Whitespace split, then peel leading/trailing punctuation into own tokens."""
    tokens = []
    for chunk in text.split():
        i, j = 0, len(chunk)
        while i < j and _is_punct(chunk[i]):
            i += 1
        while j > i and _is_punct(chunk[j - 1]):
            j -= 1
        if i:
            tokens.append(chunk[:i])
        if i < j:
            tokens.append(chunk[i:j])
        if j < len(chunk):
            tokens.append(chunk[j:])
    return tokens


@dataclass
class ClusterLexicon:
    clusters: dict[str, str] = field(default_factory=dict)
    name: str = ""

    def feature(self, token: str) -> str | None:
        cid = self.clusters.get(token)
        if cid is None:
            return None
        return f"clus:{cid}" if not self.name else f"clus:{self.name}:{cid}"

    @classmethod
    def load(cls, path, name: str | None = None) -> ClusterLexicon:
        path = Path(path)
        clusters: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise DataError(f"{path}:{lineno}: expected 'token<TAB>cluster_id'")
                token, cid = parts
                if token in clusters:
                    raise DataError(f"{path}:{lineno}: duplicate token {token!r}")
                clusters[token] = cid
        return cls(clusters, path.stem if name is None else name)


def _is_elongated(token: str) -> bool:
    return _ELONGATION_RE.search(token.lower()) is not None


def extract_features(text: str, lexicons=()) -> dict[str, float]:
    """Feature vector for one preprocessed tweet; ``""`` yields ``{}``."""
    if len(lexicons) > MAX_LEXICONS:
        raise DataError(f"at most {MAX_LEXICONS} cluster lexicons are supported")
    tokens = tokenize(text)
    if not tokens:
        return {}
    feats: dict[str, float] = {}
    lowered = [t.lower() for t in tokens]
    for tok, low in zip(tokens, lowered):
        feats["w:" + low] = 1.0
        for n in CHAR_NGRAM_SIZES:
            for i in range(len(low) - n + 1):
                feats[f"c{n}:{low[i:i + n]}"] = 1.0
        for n in AFFIX_SIZES:
            if len(low) >= n:
                feats[f"pre{n}:{low[:n]}"] = 1.0
                feats[f"suf{n}:{low[-n:]}"] = 1.0
        if any(ch.isdigit() for ch in tok):
            feats["shape:has_digit"] = 1.0
        if len(tok) > 1 and tok.isupper():
            feats["shape:all_caps"] = 1.0
        if _is_elongated(tok):
            feats["shape:elongation"] = 1.0
        for lex in lexicons:
            # lexicons are matched on the surface form first, then lower-cased
            cf = lex.feature(tok) or lex.feature(low)
            if cf is not None:
                feats[cf] = 1.0
    for a, b in zip(lowered, lowered[1:]):
        feats[f"bi:{a}|{b}"] = 1.0
    chars = [ch for ch in text if not ch.isspace()]
    n_punct = sum(_is_punct(ch) for ch in chars)
    if n_punct:
        feats["shape:punct_density"] = n_punct / len(chars)
    return feats
