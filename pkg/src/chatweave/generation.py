"""Chit-chat candidate generation.

For every system turn two contexts are built: one ending at the system turn
(the backend extends it; the harvest is appended) and one ending at the user
turn (the backend writes a fresh turn; the harvest is prepended). Each raw
generation yields the whole text as a candidate plus one candidate per
sentence when it splits, all deduplicated per (turn, position) with
run-level frequency counts kept for the ranker.
"""

from __future__ import annotations

import enum
import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .backends import DecodingParams, GeneratorBackend
from .corpus import Dialogue
from .errors import PermanentBackendError
from .textnorm import normalize, split_sentences


class GenerationMode(enum.Enum):
    CONTINUE = "continue"
    NEW_TURN = "new_turn"


class Position(enum.Enum):
    PREPEND = "prepend"
    APPEND = "append"


MODE_POSITION = {
    GenerationMode.CONTINUE: Position.APPEND,
    GenerationMode.NEW_TURN: Position.PREPEND,
}


@dataclass(frozen=True)
class ChitChatCandidate:
    candidate_id: str
    dialogue_id: str
    turn_index: int
    text: str
    position: Position
    source: tuple[str, str]  # (backend id, decoding-params id)
    parent_id: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "candidate_id": self.candidate_id,
            "dialogue_id": self.dialogue_id,
            "turn_index": self.turn_index,
            "text": self.text,
            "position": self.position.value,
            "source": list(self.source),
            "parent_id": self.parent_id,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ChitChatCandidate:
        return cls(
            candidate_id=d["candidate_id"],
            dialogue_id=d["dialogue_id"],
            turn_index=d["turn_index"],
            text=d["text"],
            position=Position(d["position"]),
            source=(d["source"][0], d["source"][1]),
            parent_id=d.get("parent_id"),
        )


@dataclass(frozen=True)
class RequestFailure:
    dialogue_id: str
    turn_index: int
    mode: str
    backend_id: str
    params_id: str
    message: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "dialogue_id": self.dialogue_id,
            "turn_index": self.turn_index,
            "mode": self.mode,
            "backend_id": self.backend_id,
            "params_id": self.params_id,
            "message": self.message,
        }


@dataclass
class CandidatePool:
    dialogue_id: str
    candidates: list[ChitChatCandidate] = field(default_factory=list)
    frequency: dict[str, int] = field(default_factory=dict)
    failures: list[RequestFailure] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dialogue_id": self.dialogue_id,
            "candidates": [c.to_dict() for c in self.candidates],
            "frequency": dict(sorted(self.frequency.items())),
            "failures": [f.to_dict() for f in self.failures],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> CandidatePool:
        return cls(
            dialogue_id=d["dialogue_id"],
            candidates=[ChitChatCandidate.from_dict(c) for c in d.get("candidates", [])],
            frequency=dict(d.get("frequency", {})),
            failures=[RequestFailure(**f) for f in d.get("failures", [])],
        )


def _candidate_id(dialogue_id: str, turn_index: int, position: Position, text: str) -> str:
    key = f"{dialogue_id}|{turn_index}|{position.value}|{text}"
    return hashlib.sha1(key.encode("utf-8")).hexdigest()[:12]


def build_context(
    dialogue: Dialogue, i: int, mode: GenerationMode
) -> list[tuple[str, str]]:
    """Context for the i-th system turn (1-based ordinal).

    CONTINUE includes turns through the system turn itself; NEW_TURN stops
    at the user turn before it.
    """
    n_system = len(dialogue.system_turns())
    if not 1 <= i <= n_system:
        raise IndexError(f"system turn ordinal {i} out of range 1..{n_system}")
    system_index = 2 * i - 1
    cut = system_index + 1 if mode is GenerationMode.CONTINUE else system_index
    return [(t.speaker.value.lower(), t.utterance) for t in dialogue.turns[:cut]]


def harvest(
    raw_generation: str,
    mode: GenerationMode,
    *,
    dialogue_id: str,
    turn_index: int,
    source: tuple[str, str],
) -> list[ChitChatCandidate]:
    """Candidates from one raw generation: the whole text, plus each
    sentence when there are at least two. Split children inherit the
    parent's position and link back through parent_id."""
    text = raw_generation.strip()
    if not text:
        return []
    position = MODE_POSITION[mode]
    whole = ChitChatCandidate(
        candidate_id=_candidate_id(dialogue_id, turn_index, position, text),
        dialogue_id=dialogue_id,
        turn_index=turn_index,
        text=text,
        position=position,
        source=source,
    )
    out = [whole]
    pieces = split_sentences(text)
    if len(pieces) >= 2:
        for piece in pieces:
            out.append(
                ChitChatCandidate(
                    candidate_id=_candidate_id(dialogue_id, turn_index, position, piece),
                    dialogue_id=dialogue_id,
                    turn_index=turn_index,
                    text=piece,
                    position=position,
                    source=source,
                    parent_id=whole.candidate_id,
                )
            )
    return out


def generate_pool(
    dialogue: Dialogue,
    backends: Sequence[GeneratorBackend],
    params_grid: Sequence[DecodingParams],
    max_in_flight: int = 8,
) -> CandidatePool:
    """Fan every (system turn, mode, backend, params) request out to the
    backends and assemble the harvested candidates into a pool.

    Transport errors propagate (callers may retry); permanent per-request
    rejections are recorded on the pool and do not abort the run. Assembly
    is order-independent: candidates are canonically sorted and exact
    duplicates per (turn, position) are collapsed, with every occurrence
    counted in the frequency map.
    """
    if not backends:
        raise ValueError("at least one generator backend is required")
    if not params_grid:
        raise ValueError("params_grid must not be empty")

    requests = [
        (ordinal, mode, backend, params)
        for ordinal in range(1, len(dialogue.system_turns()) + 1)
        for mode in GenerationMode
        for backend in backends
        for params in params_grid
    ]

    def run(req: tuple[int, GenerationMode, GeneratorBackend, DecodingParams]):
        ordinal, mode, backend, params = req
        context = build_context(dialogue, ordinal, mode)
        turn_index = 2 * ordinal - 1
        try:
            text = backend.generate(context, mode.value, params)
        except PermanentBackendError as exc:
            return RequestFailure(
                dialogue.id, turn_index, mode.value, backend.backend_id,
                params.params_id, str(exc),
            )
        return harvest(
            text,
            mode,
            dialogue_id=dialogue.id,
            turn_index=turn_index,
            source=(backend.backend_id, params.params_id),
        )

    if max_in_flight > 1 and len(requests) > 1:
        with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
            results = list(pool.map(run, requests))
    else:
        results = [run(req) for req in requests]

    harvested: list[ChitChatCandidate] = []
    failures: list[RequestFailure] = []
    for result in results:
        if isinstance(result, RequestFailure):
            failures.append(result)
        else:
            harvested.extend(result)

    frequency: dict[str, int] = {}
    for candidate in harvested:
        key = normalize(candidate.text)
        frequency[key] = frequency.get(key, 0) + 1

    harvested.sort(key=lambda c: (c.turn_index, c.position.value, c.text, c.source))
    seen: set[tuple[int, str, str]] = set()
    deduped: list[ChitChatCandidate] = []
    for candidate in harvested:
        key = (candidate.turn_index, candidate.position.value, normalize(candidate.text))
        if key in seen:
            continue
        seen.add(key)
        deduped.append(candidate)

    failures.sort(key=lambda f: (f.turn_index, f.mode, f.backend_id, f.params_id))
    return CandidatePool(
        dialogue_id=dialogue.id,
        candidates=deduped,
        frequency=frequency,
        failures=failures,
    )


def run_generation(
    dialogues: Iterable[Dialogue],
    backends: Sequence[GeneratorBackend],
    params_grid: Sequence[DecodingParams],
    max_in_flight: int = 8,
) -> list[CandidatePool]:
    """Generate pools for a whole corpus and spread run-level frequency
    counts back onto each pool, which is what the ranker's frequency
    criterion expects."""
    pools = [
        generate_pool(d, backends, params_grid, max_in_flight=max_in_flight)
        for d in dialogues
    ]
    run_frequency: dict[str, int] = {}
    for pool in pools:
        for key, count in pool.frequency.items():
            run_frequency[key] = run_frequency.get(key, 0) + count
    for pool in pools:
        pool.frequency = {key: run_frequency[key] for key in pool.frequency}
    return pools
