"""Tweet tokenization and token filtering.

The tokenizer scans left to right and, at each position, tries the token
classes in a fixed precedence order::

    HtmlTag > Url > Mention > Hashtag > Emoticon > Number
            > HyphenatedWord > Word > Punctuation

Whitespace separates tokens and is never part of one. Any character that no
other class accepts becomes a single-character Punctuation token, so every
input tokenizes.
"""
from __future__ import annotations

import enum
import re
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple

from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import IoFailure


class TokenKind(enum.Enum):
    WORD = "word"
    HYPHENATED_WORD = "hyphenated_word"
    EMOTICON = "emoticon"
    URL = "url"
    MENTION = "mention"
    HASHTAG = "hashtag"
    NUMBER = "number"
    HTML_TAG = "html_tag"
    PUNCTUATION = "punctuation"


class Token(NamedTuple):
    text: str
    kind: TokenKind


EMOTICONS = (
    ":)", ":-)", ":]", ":-]", ":}", ":o)", ":c)", ":^)", "=)", "=]", ":')",
    ":(", ":-(", ":[", ":-[", ":{", ":c", ":-c", "=(", "=[", ":'(", ":'-(",
    ";)", ";-)", ";]", ";d", "*)", "*-)",
    ":d", ":-d", "=d", "8d", "8-d", "xd", "x-d", "=3", ":3",
    ":p", ":-p", ";p", ";-p", "=p", "xp", "x-p", ":b", ":-b",
    ":o", ":-o", ":0", "8-0", "o_o", "o.o", "o_0", "0_o",
    ":/", ":-/", ":\\", ":-\\", "=/", "=\\", ":|", ":-|", ":s", ":-s",
    ":*", ":-*", ":x", ":-x", ">:(", ">:-(", ">:)", ">:-)",
    "<3", "</3", "<\\3", "^_^", "^^", "^.^", "-_-", "-.-", "t_t", ";_;",
)

_HTML_ENTITIES = {"&amp;": "&", "&lt;": "<", "&gt;": ">", "&quot;": '"', "&apos;": "'", "&#39;": "'"}
_ENTITY_RE = re.compile("|".join(re.escape(e) for e in _HTML_ENTITIES), re.IGNORECASE)


def _emoticon_pattern() -> str:
    alts = []
    for emo in sorted(set(EMOTICONS), key=lambda e: (-len(e), e)):
        pat = re.escape(emo)
        # ":d" must not eat the start of ":dog"
        if emo[-1].isalnum():
            pat += r"(?!\w)"
        alts.append(pat)
    return "|".join(alts)


# (kind, pattern) in precedence order
_TOKEN_SPECS = (
    (TokenKind.HTML_TAG, r"<[^<>\s]+>"),
    (TokenKind.URL, r"(?:https?://|www\.)\S+"),
    (TokenKind.MENTION, r"@\w+"),
    (TokenKind.HASHTAG, r"\#\w+"),
    (TokenKind.EMOTICON, _emoticon_pattern()),
    (TokenKind.NUMBER, r"[+-]?\d+(?:[.,]\d+)?%?"),
    (TokenKind.HYPHENATED_WORD, r"\w+(?:-\w+)+"),
    (TokenKind.WORD, r"\w+"),
    (TokenKind.PUNCTUATION, r"[^\w\s]"),
)

_TOKEN_RE = re.compile(
    "|".join(f"(?P<{kind.name}>{pat})" for kind, pat in _TOKEN_SPECS),
    re.IGNORECASE,
)

_LOWERCASED_KINDS = frozenset({TokenKind.WORD, TokenKind.HYPHENATED_WORD})

KEPT_KINDS = frozenset({
    TokenKind.WORD, TokenKind.HYPHENATED_WORD, TokenKind.EMOTICON,
    TokenKind.NUMBER, TokenKind.URL,
})


def decode_entities(text: str) -> str:
    """Decode the handful of named HTML entities found in tweet dumps."""
    return _ENTITY_RE.sub(lambda m: _HTML_ENTITIES[m.group(0).lower()], text)


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into typed tokens; Word kinds come out lowercased."""
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        kind = TokenKind[m.lastgroup]
        surface = m.group(0)
        if kind in _LOWERCASED_KINDS:
            surface = surface.lower()
        tokens.append(Token(surface, kind))
    return tokens


def filter_tokens(tokens: Iterable[Token], stopwords=frozenset(), drop_urls: bool = False) -> list[str]:
    out = []
    for tok in tokens:
        if tok.kind not in KEPT_KINDS:
            continue
        if tok.kind is TokenKind.URL and drop_urls:
            continue
        if tok.kind in _LOWERCASED_KINDS and tok.text.lower() in stopwords:
            continue
        out.append(tok.text)
    return out


def preprocess(text: str, stopwords=frozenset(), drop_urls: bool = False) -> list[str]:
    """Full pipeline: decode entities, lowercase, tokenize, filter."""
    return filter_tokens(tokenize(decode_entities(text).lower()), stopwords, drop_urls)


def parse_stopwords(lines: Iterable[str]) -> frozenset:
    words = set()
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.add(line.lower())
    return frozenset(words)


def load_stopwords(path=None) -> frozenset:
    """Load a stopword file, or the bundled English list when ``path`` is None."""
    if path is None:
        text = resources.files("polarity").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
        return parse_stopwords(text.splitlines())
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(f"cannot read stopword file {path}: {exc}") from exc
    return parse_stopwords(text.splitlines())


class TweetPreprocessor(BaseEstimator, TransformerMixin):
    """Stateless transformer mapping raw texts to filtered token lists.

    Parameters
    ----------
    stopwords : iterable of str or None
        Words to remove. ``None`` uses the bundled English list.
    drop_urls : bool, default False
        Also remove URL tokens.
    """

    def __init__(self, stopwords=None, drop_urls=False):
        self.stopwords = stopwords
        self.drop_urls = drop_urls

    def fit(self, X, y=None):
        self.stopwords_ = (
            load_stopwords() if self.stopwords is None
            else frozenset(w.lower() for w in self.stopwords)
        )
        return self

    def transform(self, X):
        stop = getattr(self, "stopwords_", None)
        if stop is None:
            stop = self.fit(X).stopwords_
        return [preprocess(text, stop, self.drop_urls) for text in X]
