from __future__ import annotations

import pytest

from chatweave.corpus import (
    ActionTriplet,
    BeliefTriplet,
    CorpusFormat,
    Dialogue,
    Frame,
    SlotSpan,
    Speaker,
    Turn,
    ingest_corpus,
)

from .synth import corpus_bytes


def make_turn(
    index: int,
    speaker: Speaker,
    utterance: str,
    service: str = "restaurants",
    belief: list[tuple[str, str, str]] | None = None,
    actions: list[tuple[str, str, str]] | None = None,
    spans: list[tuple[str, int, int]] | None = None,
) -> Turn:
    frame = Frame(
        service=service,
        belief=frozenset(BeliefTriplet(*t) for t in belief or []),
        actions=frozenset(ActionTriplet(*t) for t in actions or []),
        slot_spans=tuple(SlotSpan(*s) for s in spans or []),
    )
    has_payload = bool(belief or actions or spans)
    return Turn(
        index=index,
        speaker=speaker,
        utterance=utterance,
        frames=(frame,) if has_payload else (),
    )


def make_dialogue(
    turns: list[Turn], dialogue_id: str = "d1", services: tuple[str, ...] = ("restaurants",)
) -> Dialogue:
    return Dialogue(id=dialogue_id, services=services, turns=tuple(turns))


def simple_dialogue(n_exchanges: int = 2, dialogue_id: str = "d1") -> Dialogue:
    turns = []
    for i in range(n_exchanges):
        turns.append(
            make_turn(
                2 * i,
                Speaker.USER,
                f"User message {i}.",
                belief=[("restaurants", "city", "San Jose")],
            )
        )
        turns.append(
            make_turn(
                2 * i + 1,
                Speaker.SYSTEM,
                f"System reply {i}.",
                actions=[("restaurants", "inform", "city")],
            )
        )
    return make_dialogue(turns, dialogue_id=dialogue_id)


@pytest.fixture(scope="session")
def synthetic_dialogues() -> list[Dialogue]:
    return ingest_corpus(corpus_bytes(50, seed=7), CorpusFormat.SGD)
