"""Deterministic text utilities: tokenization, normalization, sentence
splitting, and token-set similarity.

Every downstream consumer (duplicate collapsing, similarity scoring, BLEU,
vocabulary statistics) goes through these functions so that numbers agree
across modules without an external tokenizer.
"""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)*")
_WS_RE = re.compile(r"\s+")
_SPACE_BEFORE_PUNCT_RE = re.compile(r"\s+([.,!?;:])")
_SENTENCE_BREAK_RE = re.compile(r"[.!?](?=\s+[A-Z0-9])")

# Tokens whose trailing period does not end a sentence.
ABBREVIATIONS = frozenset(
    {
        "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "mt.",
        "e.g.", "i.e.", "etc.", "vs.", "a.m.", "p.m.", "u.s.",
    }
)


def tokenize(text: str) -> list[str]:
    """Case-folded word tokens; punctuation acts as a separator and is dropped.

    Apostrophes inside a word are kept ("you're" is one token).
    """
    return _TOKEN_RE.findall(text.lower())


def normalize(text: str) -> str:
    """Case-fold, collapse whitespace, and tighten space before punctuation.

    Used as the duplicate-collapsing and frequency-count key for generated
    candidates; punctuation itself is preserved.
    """
    folded = _WS_RE.sub(" ", text.casefold()).strip()
    return _SPACE_BEFORE_PUNCT_RE.sub(r"\1", folded)


def jaccard(a: str, b: str) -> float:
    """Token-set Jaccard similarity in [0, 1]; both-empty is defined as 0.0."""
    sa, sb = set(tokenize(a)), set(tokenize(b))
    if not sa and not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


def split_sentences(text: str) -> list[str]:
    """Split on ``.``/``!``/``?`` followed by whitespace and an uppercase
    letter or digit, except after known abbreviations.

    The returned sentences are trimmed slices of the input, so their
    concatenation differs from the input only in inter-sentence whitespace.
    """
    cuts: list[int] = []
    for match in _SENTENCE_BREAK_RE.finditer(text):
        end = match.end()
        tail = re.search(r"(\S+)$", text[:end])
        if tail and tail.group(1).lower() in ABBREVIATIONS:
            continue
        cuts.append(end)
    pieces = []
    prev = 0
    for cut in cuts:
        pieces.append(text[prev:cut].strip())
        prev = cut
    pieces.append(text[prev:].strip())
    return [p for p in pieces if p]
