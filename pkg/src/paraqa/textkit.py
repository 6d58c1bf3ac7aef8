"""Deterministic text normalization shared by every other module.

All questions, paraphrases, and answer sentences flow through
:func:`normalize` exactly once, so downstream components (rule matching,
template mining, feature extraction) can compare tokens with plain
equality.  Normalization is tokenization on whitespace/punctuation
boundaries, lowercasing, and stemming; stemming is the classic Porter
algorithm composed with a small irregular-verb table (is/are/was/were/am
-> be, does/did -> do, has/had -> have) and iterated to a fixed point so
that ``stem(stem(t)) == stem(t)`` holds for every token.

Punctuation tokens are retained and flagged as stopwords.  The stopword
list itself is a frozen file shipped with the package (one token per
line, UTF-8, already in normalized form).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import EmptyInputError

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

_IRREGULAR = {
    "is": "be",
    "are": "be",
    "was": "be",
    "were": "be",
    "am": "be",
    "does": "do",
    "did": "do",
    "has": "have",
    "had": "have",
}


@dataclass(frozen=True)
class TokenSeq:
    """A normalized token sequence with per-token stopword flags."""

    tokens: tuple[str, ...]
    stop_flags: tuple[bool, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.stop_flags):
            raise ValueError("tokens and stop_flags must have equal length")

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def text(self) -> str:
        return " ".join(self.tokens)

    def content_tokens(self) -> tuple[str, ...]:
        """Tokens with stopwords and punctuation removed."""
        return tuple(t for t, s in zip(self.tokens, self.stop_flags) if not s)


# ---------------------------------------------------------------------------
# Porter stemmer
# ---------------------------------------------------------------------------


def _is_cons(word: str, i: int) -> bool:
    c = word[i]
    if c in "aeiou":
        return False
    if c == "y":
        return True if i == 0 else not _is_cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of VC sequences in the [C](VC)^m[V] form of ``stem``."""
    m = 0
    i = 0
    n = len(stem)
    while i < n and _is_cons(stem, i):
        i += 1
    while i < n:
        while i < n and not _is_cons(stem, i):
            i += 1
        if i >= n:
            break
        m += 1
        while i < n and _is_cons(stem, i):
            i += 1
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_cons(stem, i) for i in range(len(stem)))


def _ends_double_cons(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_cons(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    if not (
        _is_cons(word, len(word) - 3)
        and not _is_cons(word, len(word) - 2)
        and _is_cons(word, len(word) - 1)
    ):
        return False
    return word[-1] not in "wxy"


def _porter_pass(word: str) -> str:
    # Step 1a
    if word.endswith("sses"):
        word = word[:-2]
    elif word.endswith("ies"):
        word = word[:-2]
    elif word.endswith("ss"):
        pass
    elif word.endswith("s"):
        word = word[:-1]

    # Step 1b
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            word = word[:-1]
    else:
        flag = False
        if word.endswith("ed") and _has_vowel(word[:-2]):
            word = word[:-2]
            flag = True
        elif word.endswith("ing") and _has_vowel(word[:-3]):
            word = word[:-3]
            flag = True
        if flag:
            if word.endswith(("at", "bl", "iz")):
                word += "e"
            elif _ends_double_cons(word) and word[-1] not in "lsz":
                word = word[:-1]
            elif _measure(word) == 1 and _ends_cvc(word):
                word += "e"

    # Step 1c
    if word.endswith("y") and _has_vowel(word[:-1]):
        word = word[:-1] + "i"

    # Steps 2 and 3: longest matching suffix wins, and per the original
    # algorithm only that suffix's condition is tested.
    for rules in (
        (
            ("ational", "ate"), ("tional", "tion"), ("enci", "ence"),
            ("anci", "ance"), ("izer", "ize"), ("abli", "able"),
            ("alli", "al"), ("entli", "ent"), ("eli", "e"),
            ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
            ("ator", "ate"), ("alism", "al"), ("iveness", "ive"),
            ("fulness", "ful"), ("ousness", "ous"), ("aliti", "al"),
            ("iviti", "ive"), ("biliti", "ble"),
        ),
        (
            ("icate", "ic"), ("ative", ""), ("alize", "al"),
            ("iciti", "ic"), ("ical", "ic"), ("ful", ""), ("ness", ""),
        ),
    ):
        best = None
        for suffix, repl in rules:
            if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
                best = (suffix, repl)
        if best is not None:
            suffix, repl = best
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > 0:
                word = stem + repl

    # Step 4: drop the suffix when the remaining stem has m > 1; "ion"
    # additionally requires the stem to end in s or t.
    best = None
    for suffix in (
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
        "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
    ):
        if word.endswith(suffix) and (best is None or len(suffix) > len(best)):
            best = suffix
    if best is not None:
        stem = word[: len(word) - len(best)]
        if _measure(stem) > 1 and (best != "ion" or stem.endswith(("s", "t"))):
            word = stem

    # Step 5a
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            word = stem

    # Step 5b
    if _measure(word[:-1]) > 1 and _ends_double_cons(word) and word.endswith("l"):
        word = word[:-1]

    return word


@lru_cache(maxsize=65536)
def stem(token: str) -> str:
    """Stem one lowercase token.

    Irregular verb forms are mapped first; everything else goes through
    Porter, iterated until stable.  Tokens of length <= 2 or containing
    non-alphabetic characters are returned unchanged.
    """
    if token in _IRREGULAR:
        return _IRREGULAR[token]
    if len(token) <= 2 or not token.isalpha():
        return token
    prev = token
    for _ in range(5):
        if len(prev) <= 2:
            return prev
        cur = _porter_pass(prev)
        if cur == prev:
            return cur
        prev = cur
    return prev


# ---------------------------------------------------------------------------
# Stopwords
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1)
def stopword_set() -> frozenset[str]:
    """The frozen stopword list shipped with the package."""
    text = resources.files("paraqa").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def is_stopword(token: str) -> bool:
    """True iff ``token`` (already normalized) is a function word or punctuation."""
    if not any(ch.isalnum() for ch in token):
        return True
    return token in stopword_set()


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def normalize(raw_text: str) -> TokenSeq:
    """Tokenize, lowercase, and stem ``raw_text``.

    Raises :class:`EmptyInputError` on empty or whitespace-only input.
    """
    if not raw_text or not raw_text.strip():
        raise EmptyInputError("input text is empty or whitespace-only")
    tokens = []
    flags = []
    for piece in _TOKEN_RE.findall(raw_text.lower()):
        tok = stem(piece)
        tokens.append(tok)
        flags.append(is_stopword(tok))
    return TokenSeq(tuple(tokens), tuple(flags))


def token_seq(tokens) -> TokenSeq:
    """Build a TokenSeq from already-normalized tokens (flags recomputed)."""
    toks = tuple(tokens)
    if not toks:
        raise EmptyInputError("token sequence is empty")
    return TokenSeq(toks, tuple(is_stopword(t) for t in toks))
