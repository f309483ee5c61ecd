"""Text preprocessing: sentence dedupe, HTML stripping, tokenization,
stopword removal and stemming, composed per text view of a post.

All functions are pure; token sequences are plain ``list[str]``.
"""

from __future__ import annotations

import os
import re
from enum import Enum
from functools import lru_cache
from importlib import resources

from .corpus import Post
from .porter import NUMBER_TOKEN, porter_stem

STOPWORDS_ENV_VAR = "BAITPRESS_STOPWORDS"

TokenSeq = list[str]


class FieldView(str, Enum):
    """The seven text views a post exposes to the models."""

    POST_TEXT = "postText"
    TARGET_TITLE = "targetTitle"
    TARGET_DESCRIPTION = "targetDescription"
    TARGET_KEYWORDS = "targetKeywords"
    TARGET_PARAGRAPHS = "targetParagraphs"
    TARGET_CAPTIONS = "targetCaptions"
    ALL_CONCATENATED = "allConcatenated"

    @property
    def display_name(self) -> str:
        return "all concatenated" if self is FieldView.ALL_CONCATENATED else self.value


SINGLE_VIEWS = tuple(v for v in FieldView if v is not FieldView.ALL_CONCATENATED)

_TAG_RE = re.compile(r"<[^<]*>")
_ENTITIES = (("&lt;", "<"), ("&gt;", ">"), ("&quot;", '"'), ("&#39;", "'"), ("&amp;", "&"))

# A token is either a number (digits, optionally interleaved with , or .) or a
# maximal run of letters/digits/apostrophes; the literal number placeholder
# survives re-tokenization.
_NUMBER = r"\d+(?:[.,]\d+)*"
_TOKEN_RE = re.compile(rf"\[n\]|(?:{_NUMBER}|[^\W\d_]|['’])+")
_NUMBER_RE = re.compile(_NUMBER)
_SENTENCE_END_RE = re.compile(r"[.!?](?=\s|$)")
_WS_RE = re.compile(r"\s+")


def strip_html(text: str) -> str:
    """Delete ``<...>`` tag spans, then unescape the five basic entities.

    An unbalanced ``<`` with no closing ``>`` is left verbatim.
    """
    text = _TAG_RE.sub("", text)
    for entity, char in _ENTITIES:
        text = text.replace(entity, char)
    return text


def _sentences(text: str) -> list[str]:
    pieces = []
    start = 0
    for match in _SENTENCE_END_RE.finditer(text):
        pieces.append(text[start : match.end()])
        start = match.end()
    pieces.append(text[start:])
    return [p.strip() for p in pieces if p.strip()]


def dedupe_sentences(texts: list[str]) -> list[str]:
    """Drop repeated sentences within one field, keeping first occurrences.

    Sentences end at '.', '!' or '?' followed by whitespace or end of string.
    Repeats are detected on the casefolded, whitespace-collapsed form; the
    comparison spans the whole field, so duplicates across paragraphs are
    dropped too.
    """
    seen: set[str] = set()
    out = []
    for text in texts:
        kept = []
        for sentence in _sentences(text):
            key = _WS_RE.sub(" ", sentence.casefold())
            if key in seen:
                continue
            seen.add(key)
            kept.append(sentence)
        out.append(" ".join(kept))
    return out


def tokenize(text: str) -> TokenSeq:
    """Casefold and split into tokens; pure numbers become ``[n]``.

    Tokens are runs of letters, digits and apostrophes; apostrophes are folded
    away inside tokens ("won't" -> "wont"). A token that is digits optionally
    interleaved with ',' or '.' is replaced by the number placeholder.
    """
    tokens = []
    for raw in _TOKEN_RE.findall(text.casefold()):
        if raw == NUMBER_TOKEN:
            tokens.append(raw)
            continue
        token = raw.replace("'", "").replace("’", "")
        if not token:
            continue
        tokens.append(NUMBER_TOKEN if _NUMBER_RE.fullmatch(token) else token)
    return tokens


@lru_cache(maxsize=8)
def _load_stopwords(path: str | None) -> frozenset[str]:
    if path is None:
        text = resources.files("baitpress").joinpath("data/stopwords.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def stopwords() -> frozenset[str]:
    """The active stopword set (the embedded list, unless overridden)."""
    return _load_stopwords(os.environ.get(STOPWORDS_ENV_VAR) or None)


def remove_stopwords(seq: TokenSeq) -> TokenSeq:
    words = stopwords()
    return [t for t in seq if t == NUMBER_TOKEN or t not in words]


def view_texts(post: Post, view: FieldView) -> list[str]:
    """The raw text pieces backing a view, in canonical field order."""
    if view is FieldView.POST_TEXT:
        return list(post.post_text)
    if view is FieldView.TARGET_TITLE:
        return [post.target_title]
    if view is FieldView.TARGET_DESCRIPTION:
        return [post.target_description]
    if view is FieldView.TARGET_KEYWORDS:
        return [post.target_keywords]
    if view is FieldView.TARGET_PARAGRAPHS:
        return list(post.target_paragraphs)
    if view is FieldView.TARGET_CAPTIONS:
        return list(post.target_captions)
    pieces: list[str] = []
    for single in SINGLE_VIEWS:
        pieces.extend(view_texts(post, single))
    return pieces


def preprocess_text(texts: list[str]) -> TokenSeq:
    """dedupe -> strip HTML -> tokenize -> drop stopwords -> stem."""
    deduped = dedupe_sentences(texts)
    stripped = " ".join(strip_html(t) for t in deduped)
    return [porter_stem(t) for t in remove_stopwords(tokenize(stripped))]


def preprocess_field(post: Post, view: FieldView) -> TokenSeq:
    """Normalized token sequence for one view of a post."""
    return preprocess_text(view_texts(post, view))
