"""Text preparation pipeline: markup/code/URL stripping, noise removal,
lowercasing and lemmatization, and empty-document elimination.

The step order is fixed and pinned by golden tests:

1. ``strip_code_and_urls`` -- drop code regions and URLs, strip remaining
   markup to its text content (Markdown code fences are first rewritten to
   ``<code>`` tags so one stripper serves HTML and Markdown alike).
2. ``strip_noise`` -- remove punctuation (keeping ``.`` and ``_`` because
   they concatenate words), emoji and other symbols, digits, and English
   stopwords.
3. ``normalize`` -- lowercase, lemmatize, collapse whitespace.
4. Empty results are dropped, never emitted.

The stopword list and lemma tables are vendored data files
(``data/stopwords.txt``: one token per line; ``data/lemma_exceptions.tsv``:
tab-separated form -> lemma) whose checksums are pinned in the test suite.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from datetime import datetime
from functools import lru_cache
from html.parser import HTMLParser
from importlib import resources
from typing import Iterable

from .corpus import Discussion

# ---------------------------------------------------------------------------
# step 1: code, URL, and markup removal
# ---------------------------------------------------------------------------

# Markdown constructs rewritten to the HTML tag vocabulary before stripping.
_FENCE_RE = re.compile(r"```.*?```|~~~.*?~~~", re.DOTALL)
_INLINE_CODE_RE = re.compile(r"`[^`\n]*`")
_MD_IMAGE_RE = re.compile(r"!\[([^\]]*)\]\([^)]*\)")
_MD_LINK_RE = re.compile(r"\[([^\]]*)\]\([^)]*\)")

_URL_RE = re.compile(r"(?:(?:https?|ftp)://|www\.)[^\s<>\"'\)\]]+", re.IGNORECASE)

# Content inside these tags is machine text, not prose; drop it entirely.
_CODE_TAGS = frozenset({"code", "pre", "script", "style", "samp", "kbd", "tt"})


class _TextExtractor(HTMLParser):
    """Lenient tag stripper that suppresses content of code-like regions."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._code_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _CODE_TAGS:
            self._code_depth += 1

    def handle_endtag(self, tag):
        if tag in _CODE_TAGS and self._code_depth > 0:
            self._code_depth -= 1

    def handle_data(self, data):
        if self._code_depth == 0:
            self.parts.append(data)


def strip_code_and_urls(html_or_md: str) -> str:
    """Remove code regions and URLs; strip remaining markup to text.

    Malformed markup degrades to text passthrough; this function never
    raises. Surrounding whitespace is left untouched (collapsing happens
    later in :func:`normalize`).
    """
    text = _FENCE_RE.sub(lambda m: "<code></code>", html_or_md)
    text = _INLINE_CODE_RE.sub("<code></code>", text)
    text = _MD_IMAGE_RE.sub(lambda m: m.group(1), text)
    text = _MD_LINK_RE.sub(lambda m: m.group(1), text)
    try:
        extractor = _TextExtractor()
        extractor.feed(text)
        extractor.close()
        text = "".join(extractor.parts)
    except Exception:
        # Pathological markup: fall back to a crude tag erase.
        text = re.sub(r"<[^>]*>", "", text)
    return _URL_RE.sub("", text)


# ---------------------------------------------------------------------------
# step 2: punctuation / emoji / digit / stopword removal
# ---------------------------------------------------------------------------

_KEPT_PUNCT = frozenset({".", "_"})  # they concatenate words: next.js, version_1.3

# Emoji presentation machinery that unicodedata categories alone miss.
_VARIATION_SELECTORS = frozenset(chr(c) for c in range(0xFE00, 0xFE10))
_EMOJI_JOINERS = frozenset({"‍", "⃣"})


def _keep_char(ch: str) -> str | None:
    """Classify one character: kept as-is, turned into a boundary space, or
    dropped in place.

    Removed punctuation and symbols (emoji are symbols) separate tokens,
    matching toolkit tokenizers that split contractions apart -- which is
    why the stopword list carries standalone entries like ``s`` and ``t``.
    Digits vanish without a boundary so ``version_1.3`` degrades to the
    single token ``version_.``, and so do the invisible emoji modifiers.
    """
    if ch in _KEPT_PUNCT:
        return ch
    if ch in _VARIATION_SELECTORS or ch in _EMOJI_JOINERS:
        return None
    if ch.isspace():
        return " "
    cat = unicodedata.category(ch)
    if cat[0] in ("L", "M"):
        return ch
    if cat[0] == "Z":
        return " "
    if cat[0] in ("P", "S"):
        return " "
    return None  # numbers, controls, format characters


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    """The vendored stopword list; tokens match entries casefolded."""
    raw = resources.files("doppel").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in raw.splitlines() if w.strip())


def strip_noise(text: str) -> str:
    """Remove punctuation (except ``.`` and ``_``), emoji, digits, and
    stopwords; token boundaries collapse to single spaces.

    Tokens left with no letters at all (for example a bare ``.``) are
    dropped: the kept punctuation only matters inside words.
    """
    kept = (_keep_char(ch) for ch in text)
    filtered = "".join(c for c in kept if c is not None)
    stops = stopwords()
    tokens = [
        tok
        for tok in filtered.split()
        if tok.casefold() not in stops and any(ch.isalpha() for ch in tok)
    ]
    return " ".join(tokens)


# ---------------------------------------------------------------------------
# step 3: lowercasing and lemmatization
# ---------------------------------------------------------------------------

_VOWELS = frozenset("aeiou")
_UNDOUBLE = frozenset({"bb", "dd", "ff", "gg", "mm", "nn", "pp", "rr", "tt"})


@lru_cache(maxsize=1)
def lemma_exceptions() -> dict[str, str]:
    raw = resources.files("doppel").joinpath("data/lemma_exceptions.tsv").read_text("utf-8")
    table = {}
    for line in raw.splitlines():
        if not line.strip():
            continue
        form, lemma = line.split("\t")
        table[form] = lemma
    return table


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        # y is a consonant at the start or after a vowel ("yes", "play"),
        # a vowel after a consonant ("try").
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel-to-consonant transitions: the [C](VC)^m[V] exponent."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        consonant = _is_consonant(stem, i)
        if prev_vowel and consonant:
            m += 1
        prev_vowel = not consonant
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_cvc(stem: str) -> bool:
    n = len(stem)
    if n < 3:
        return False
    cvc = (
        _is_consonant(stem, n - 3)
        and not _is_consonant(stem, n - 2)
        and _is_consonant(stem, n - 1)
    )
    return cvc and stem[-1] not in "wxy"


def _strip_participle(stem: str) -> str:
    """Cleanup after removing -ing/-ed: undouble or restore a silent e."""
    if len(stem) >= 2 and stem[-2:] in _UNDOUBLE:
        return stem[:-1]
    if _measure(stem) == 1 and _ends_cvc(stem):
        return stem + "e"
    return stem


def lemmatize_token(token: str) -> str:
    """Deterministic English lemma of one lowercase token.

    Exception-table lookup first, then suffix rules. Tokens that are not
    pure ASCII words (anything holding ``.``, ``_``, or non-ASCII letters)
    pass through unchanged: they are identifiers, not dictionary words.
    """
    if not token.isascii() or not token.isalpha():
        return token
    exceptions = lemma_exceptions()
    if token in exceptions:
        return exceptions[token]
    if len(token) >= 5 and token.endswith("ies"):
        return token[:-3] + "y"
    if token.endswith("sses"):
        return token[:-2]
    if token.endswith(("ches", "shes")):
        return token[:-2]
    if token.endswith("xes"):
        return token[:-2]
    if len(token) >= 6 and token.endswith("ing") and _has_vowel(token[:-3]):
        return _strip_participle(token[:-3])
    if len(token) >= 5 and token.endswith("ed") and _has_vowel(token[:-2]):
        return _strip_participle(token[:-2])
    if len(token) >= 4 and token.endswith("s") and not token.endswith(("ss", "us", "is")):
        return token[:-1]
    return token


def normalize(text: str) -> str:
    """Lowercase, lemmatize each token, and collapse whitespace."""
    tokens = text.lower().split()
    return " ".join(lemmatize_token(tok) for tok in tokens)


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PreparedDoc:
    """Preprocessed title+body text of one discussion."""

    discussion_id: int
    project: str
    created_at: datetime
    text: str


@dataclass
class PipelineStats:
    """Counters for one preprocessing pass; merging is a commutative sum."""

    input_count: int = 0
    dropped_empty: int = 0
    removed_code_urls: int = 0
    removed_noise: int = 0
    removed_normalize: int = 0

    @property
    def emitted(self) -> int:
        return self.input_count - self.dropped_empty

    def merge(self, other: "PipelineStats") -> "PipelineStats":
        return PipelineStats(
            input_count=self.input_count + other.input_count,
            dropped_empty=self.dropped_empty + other.dropped_empty,
            removed_code_urls=self.removed_code_urls + other.removed_code_urls,
            removed_noise=self.removed_noise + other.removed_noise,
            removed_normalize=self.removed_normalize + other.removed_normalize,
        )


def prepare(d: Discussion, stats: PipelineStats | None = None) -> PreparedDoc | None:
    """Run the full pipeline on one discussion.

    Title and body are joined by a single space before processing. Returns
    ``None`` when the pipeline output is empty (zero-length elimination);
    never raises on any UTF-8 input.
    """
    raw = d.title + " " + d.body
    stripped = strip_code_and_urls(raw)
    denoised = strip_noise(stripped)
    text = normalize(denoised)
    if stats is not None:
        stats.input_count += 1
        stats.removed_code_urls += max(0, len(raw) - len(stripped))
        stats.removed_noise += max(0, len(stripped) - len(denoised))
        stats.removed_normalize += max(0, len(denoised) - len(text))
        if not text:
            stats.dropped_empty += 1
    if not text:
        return None
    return PreparedDoc(
        discussion_id=d.id, project=d.project, created_at=d.created_at, text=text
    )


def prepare_corpus(
    discussions: Iterable[Discussion],
) -> tuple[list[PreparedDoc], PipelineStats]:
    """Prepare a whole corpus, keeping input order and collecting stats."""
    stats = PipelineStats()
    docs = []
    for d in discussions:
        doc = prepare(d, stats)
        if doc is not None:
            docs.append(doc)
    return docs, stats
