"""Hybrid candidate filter: bad-pattern rejection, posterior scoring, and
greedy diversity-aware selection down to the top k per dialogue.

The selection score combines five signals: the scorer posterior, minus
weighted penalties for run-level frequency, similarity to already-selected
candidates (recomputed each step, maximal-marginal-relevance style), and
similarity to the system response being augmented. Candidates matching any
bad pattern never survive. All ties break on (turn, prepend-first, text),
so ranking is a pure function of the pool contents.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .backends import ScorerBackend
from .corpus import Dialogue
from .errors import ProtocolError
from .generation import CandidatePool, ChitChatCandidate, Position
from .textnorm import jaccard, normalize, tokenize


@dataclass(frozen=True)
class BadPattern:
    name: str
    kind: str  # "regex" or "token"
    body: str

    def matches(self, text: str) -> bool:
        if self.kind == "regex":
            return re.search(self.body, text, flags=re.IGNORECASE) is not None
        tokens = set(tokenize(text))
        return any(tok in tokens for tok in self.body.lower().split())


DEFAULT_BAD_PATTERNS: tuple[BadPattern, ...] = (
    BadPattern("url", "regex", r"(?:https?://|www\.)\S+|\b[a-z0-9-]+\.(?:com|org|net|io|co)\b"),
    BadPattern("email", "regex", r"\b[\w.+-]+@[\w-]+\.[\w.-]+\b"),
    BadPattern("phone", "regex", r"\b(?:\+?\d[\d\s().-]{7,}\d)\b"),
    BadPattern(
        "physical_action",
        "regex",
        r"\bi\s*(?:'ll|will|can|could|would|'m\s+going\s+to|am\s+going\s+to)\s+"
        r"(?:drive|pick|meet|walk|carry|bring|grab|hug|lift|drop|come\s+over|visit|swing\s+by)\b",
    ),
    BadPattern("profanity", "token", "fuck shit bitch asshole bastard damn"),
)

MAX_CANDIDATE_TOKENS = 30
MAX_NON_ASCII_RATIO = 0.3


def match_bad_patterns(
    text: str, patterns: Sequence[BadPattern] = DEFAULT_BAD_PATTERNS
) -> list[str]:
    """Names of every configured pattern the text trips, plus the two
    built-in structural checks (length, non-ASCII ratio)."""
    hits = [p.name for p in patterns if p.matches(text)]
    if len(tokenize(text)) > MAX_CANDIDATE_TOKENS:
        hits.append("too_long")
    if text and sum(ord(ch) > 127 for ch in text) / len(text) > MAX_NON_ASCII_RATIO:
        hits.append("non_ascii")
    return hits


def load_bad_patterns(path: str | Path) -> list[BadPattern]:
    """Read patterns from a plain-text file: ``name kind body`` per line,
    blank lines and ``#`` comments skipped."""
    patterns = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 2)
        if len(parts) != 3 or parts[1] not in ("regex", "token"):
            raise ValueError(f"{path}:{lineno}: expected 'name regex|token body'")
        patterns.append(BadPattern(parts[0], parts[1], parts[2]))
    return patterns


def similarity(a: str, b: str) -> float:
    """Token-set Jaccard over case-folded, punctuation-stripped tokens."""
    return jaccard(a, b)


@dataclass(frozen=True)
class FilterWeights:
    frequency: float = 0.3
    cross_candidate: float = 0.3
    response: float = 0.2


@dataclass(frozen=True)
class RankedCandidate:
    candidate: ChitChatCandidate
    posterior: float
    bad_pattern_hits: tuple[str, ...]
    freq_norm: float
    max_sim_to_kept: float
    sim_to_response: float
    final_score: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "candidate": self.candidate.to_dict(),
            "posterior": self.posterior,
            "bad_pattern_hits": list(self.bad_pattern_hits),
            "freq_norm": self.freq_norm,
            "max_sim_to_kept": self.max_sim_to_kept,
            "sim_to_response": self.sim_to_response,
            "final_score": self.final_score,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RankedCandidate:
        return cls(
            candidate=ChitChatCandidate.from_dict(d["candidate"]),
            posterior=d["posterior"],
            bad_pattern_hits=tuple(d.get("bad_pattern_hits", [])),
            freq_norm=d["freq_norm"],
            max_sim_to_kept=d["max_sim_to_kept"],
            sim_to_response=d["sim_to_response"],
            final_score=d["final_score"],
        )


def _tie_key(candidate: ChitChatCandidate) -> tuple[int, int, str]:
    return (
        candidate.turn_index,
        0 if candidate.position is Position.PREPEND else 1,
        candidate.text,
    )


def _scorer_context(dialogue: Dialogue | None, turn_index: int) -> list[tuple[str, str]]:
    if dialogue is None:
        return []
    return [
        (t.speaker.value.lower(), t.utterance) for t in dialogue.turns[: turn_index + 1]
    ]


def rank_pool(
    pool: CandidatePool,
    dialogue: Dialogue | None,
    scorer: ScorerBackend,
    k: int = 10,
    weights: FilterWeights = FilterWeights(),
    patterns: Sequence[BadPattern] = DEFAULT_BAD_PATTERNS,
    per_turn: bool = False,
) -> list[RankedCandidate]:
    """Greedy top-k selection of a pool's candidates.

    With ``per_turn`` the cut applies independently to each system turn
    instead of once per dialogue.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    survivors = [
        c for c in pool.candidates if not match_bad_patterns(c.text, patterns)
    ]
    if not survivors:
        return []

    max_count = max(pool.frequency.values(), default=0)
    responses = {
        t.index: t.utterance for t in (dialogue.turns if dialogue else ())
    }

    scored: list[tuple[ChitChatCandidate, float, float, float]] = []
    for candidate in sorted(survivors, key=_tie_key):
        posterior = scorer.score(
            _scorer_context(dialogue, candidate.turn_index),
            candidate.text,
            candidate.position.value,
        )
        if not 0.0 <= posterior <= 1.0:
            raise ProtocolError(f"scorer posterior {posterior} outside [0, 1]")
        count = pool.frequency.get(normalize(candidate.text), 1)
        freq_norm = count / max_count if max_count else 0.0
        sim_resp = similarity(candidate.text, responses.get(candidate.turn_index, ""))
        scored.append((candidate, posterior, freq_norm, sim_resp))

    if per_turn:
        ranked: list[RankedCandidate] = []
        turn_indices = sorted({c.turn_index for c, *_ in scored})
        for turn_index in turn_indices:
            group = [item for item in scored if item[0].turn_index == turn_index]
            ranked.extend(_greedy_select(group, k, weights))
        return ranked
    return _greedy_select(scored, k, weights)


def _greedy_select(
    scored: Sequence[tuple[ChitChatCandidate, float, float, float]],
    k: int,
    weights: FilterWeights,
) -> list[RankedCandidate]:
    remaining = list(scored)
    selected: list[RankedCandidate] = []
    while remaining and len(selected) < k:
        best = None
        best_key = None
        for item in remaining:
            candidate, posterior, freq_norm, sim_resp = item
            max_sim = max(
                (similarity(candidate.text, s.candidate.text) for s in selected),
                default=0.0,
            )
            score = (
                posterior
                - weights.frequency * freq_norm
                - weights.cross_candidate * max_sim
                - weights.response * sim_resp
            )
            key = (-score, _tie_key(candidate))
            if best_key is None or key < best_key:
                best = (item, max_sim, score)
                best_key = key
        item, max_sim, score = best
        candidate, posterior, freq_norm, sim_resp = item
        remaining.remove(item)
        selected.append(
            RankedCandidate(
                candidate=candidate,
                posterior=posterior,
                bad_pattern_hits=(),
                freq_norm=freq_norm,
                max_sim_to_kept=max_sim,
                sim_to_response=sim_resp,
                final_score=score,
            )
        )
    return selected
