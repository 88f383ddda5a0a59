"""Serialization of causal-LM training sequences and parsing of generated
output back into structured belief states, actions, and responses.

Three sequence flavors share one delimiter inventory:

* baseline: history, belief, actions, response
* chitchat-augmented: adds a chit-chat action marker and a candidate
                        segment, before the actions/response for prepended
                        candidates and after them for appended ones; with no
                        good candidate it degenerates byte-for-byte to the
                        baseline encoding
* rewriter: baseline/augmented tail preceded by the two model
                        outputs being rewritten (task response, chit-chat)

Triplets serialize as space-joined fields separated by ", "; the value is
everything after the first two fields, so values may contain spaces but not
a comma followed by a space.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Any, Iterable, Mapping, Sequence

from .corpus import (
    ActionTriplet,
    BeliefTriplet,
    Dialogue,
    Speaker,
    belief_at_system_turn,
    delexicalize,
    history_before,
)
from .errors import UnparseableError
from .generation import Position
from .annotation import LabeledCandidate


class Flavor(enum.Enum):
    SIMPLETOD = "simpletod"
    SIMPLETOD_PLUS = "plus"
    REWRITER = "rewriter"


class SegmentKind(enum.Enum):
    HISTORY = "HISTORY"
    TASK_RESPONSE_IN = "TASK_RESPONSE_IN"
    CHITCHAT_IN = "CHITCHAT_IN"
    BELIEF = "BELIEF"
    CHITCHAT_ACT = "CHITCHAT_ACT"
    ACTIONS = "ACTIONS"
    CANDIDATE = "CANDIDATE"
    RESPONSE = "RESPONSE"


TOKENS: dict[SegmentKind, str] = {
    SegmentKind.HISTORY: "<|history|>",
    SegmentKind.TASK_RESPONSE_IN: "<|task|>",
    SegmentKind.CHITCHAT_IN: "<|chitchat_in|>",
    SegmentKind.BELIEF: "<|belief|>",
    SegmentKind.CHITCHAT_ACT: "<|chitchat|>",
    SegmentKind.ACTIONS: "<|action|>",
    SegmentKind.CANDIDATE: "<|candidate|>",
    SegmentKind.RESPONSE: "<|response|>",
}


@dataclass(frozen=True)
class TrainingSequence:
    flavor: Flavor
    segments: tuple[tuple[SegmentKind, str], ...]
    text: str
    dialogue_id: str = ""
    turn_index: int = -1

    def to_dict(self) -> dict[str, Any]:
        return {
            "flavor": self.flavor.value,
            "segments": [[k.value, payload] for k, payload in self.segments],
            "text": self.text,
            "dialogue_id": self.dialogue_id,
            "turn_index": self.turn_index,
        }


@dataclass(frozen=True)
class ParsedGeneration:
    belief: frozenset[BeliefTriplet]
    actions: frozenset[ActionTriplet]
    has_chitchat_act: bool
    response: str
    dropped_triplets: int = 0


def serialize_history(history: Sequence[tuple[str, str]]) -> str:
    return " ".join(f"{speaker.lower()}: {utterance}" for speaker, utterance in history)


def serialize_belief(belief: Iterable[BeliefTriplet]) -> str:
    return ", ".join(f"{t.domain} {t.slot} {t.value}" for t in sorted(belief))


def serialize_actions(actions: Iterable[ActionTriplet]) -> str:
    return ", ".join(
        f"{t.domain} {t.action_type} {t.slot}".rstrip() for t in sorted(actions)
    )


def encode(
    flavor: Flavor,
    history: Sequence[tuple[str, str]],
    belief: Iterable[BeliefTriplet],
    actions: Iterable[ActionTriplet],
    task_response: str,
    candidate: tuple[str, Position] | None = None,
    rewriter_inputs: tuple[str, str] | None = None,
) -> TrainingSequence:
    """Build one training sequence.

    ``candidate`` is (text, position); passing one with the baseline flavor
    is an error, and the rewriter flavor requires ``rewriter_inputs``
    (task response and chit-chat output being rewritten).
    """
    if candidate is not None and flavor is Flavor.SIMPLETOD:
        raise ValueError("the baseline flavor cannot carry a chit-chat candidate")
    if flavor is Flavor.REWRITER and rewriter_inputs is None:
        raise ValueError("rewriter sequences require rewriter_inputs")

    segments: list[tuple[SegmentKind, str]] = [
        (SegmentKind.HISTORY, serialize_history(history))
    ]
    if flavor is Flavor.REWRITER:
        task_in, chitchat_in = rewriter_inputs  # type: ignore[misc]
        segments.append((SegmentKind.TASK_RESPONSE_IN, task_in))
        segments.append((SegmentKind.CHITCHAT_IN, chitchat_in))
    segments.append((SegmentKind.BELIEF, serialize_belief(belief)))

    if candidate is None:
        segments.append((SegmentKind.ACTIONS, serialize_actions(actions)))
        segments.append((SegmentKind.RESPONSE, task_response))
    else:
        text, position = candidate
        if position is Position.PREPEND:
            segments.append((SegmentKind.CHITCHAT_ACT, ""))
            segments.append((SegmentKind.ACTIONS, serialize_actions(actions)))
            segments.append((SegmentKind.CANDIDATE, text))
            segments.append((SegmentKind.RESPONSE, task_response))
        else:
            segments.append((SegmentKind.ACTIONS, serialize_actions(actions)))
            segments.append((SegmentKind.CHITCHAT_ACT, ""))
            segments.append((SegmentKind.RESPONSE, task_response))
            segments.append((SegmentKind.CANDIDATE, text))

    parts: list[str] = []
    for kind, payload in segments:
        parts.append(TOKENS[kind])
        if payload:
            parts.append(payload)
    return TrainingSequence(flavor=flavor, segments=tuple(segments), text=" ".join(parts))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _parse_belief(section: str) -> tuple[set[BeliefTriplet], int]:
    triplets: set[BeliefTriplet] = set()
    dropped = 0
    for item in filter(None, (s.strip() for s in section.split(", "))):
        fields = item.split()
        if len(fields) < 3:
            dropped += 1
            continue
        triplets.add(BeliefTriplet(fields[0], fields[1], " ".join(fields[2:])))
    return triplets, dropped


def _parse_actions(section: str) -> tuple[set[ActionTriplet], int]:
    triplets: set[ActionTriplet] = set()
    dropped = 0
    for item in filter(None, (s.strip() for s in section.split(", "))):
        fields = item.split()
        if len(fields) < 2:
            dropped += 1
            continue
        triplets.add(ActionTriplet(fields[0], fields[1], " ".join(fields[2:])))
    return triplets, dropped


def parse_generation(flavor: Flavor, generated_text: str) -> ParsedGeneration:
    """Recover structured fields from a generated sequence.

    Malformed triplets are dropped and counted; the surface response is
    reassembled with the candidate before or after the task response
    depending on where the chit-chat marker/candidate sits. Text without a
    single delimiter is rejected.
    """
    hits: list[tuple[int, SegmentKind]] = []
    for kind, token in TOKENS.items():
        start = 0
        while True:
            pos = generated_text.find(token, start)
            if pos < 0:
                break
            hits.append((pos, kind))
            start = pos + len(token)
    if not hits:
        raise UnparseableError("no boundary tokens found in generated text")
    hits.sort()

    payloads: dict[SegmentKind, str] = {}
    positions: dict[SegmentKind, int] = {}
    for i, (pos, kind) in enumerate(hits):
        begin = pos + len(TOKENS[kind])
        end = hits[i + 1][0] if i + 1 < len(hits) else len(generated_text)
        if kind not in payloads:  # first occurrence wins
            payloads[kind] = generated_text[begin:end].strip()
            positions[kind] = pos

    belief, dropped_b = _parse_belief(payloads.get(SegmentKind.BELIEF, ""))
    actions, dropped_a = _parse_actions(payloads.get(SegmentKind.ACTIONS, ""))
    has_marker = SegmentKind.CHITCHAT_ACT in payloads

    task_response = payloads.get(SegmentKind.RESPONSE, "")
    candidate = payloads.get(SegmentKind.CANDIDATE, "")
    if candidate:
        candidate_first = positions.get(SegmentKind.CANDIDATE, 0) < positions.get(
            SegmentKind.RESPONSE, len(generated_text)
        )
        pieces = [candidate, task_response] if candidate_first else [task_response, candidate]
        response = " ".join(p for p in pieces if p)
    else:
        response = task_response

    return ParsedGeneration(
        belief=frozenset(belief),
        actions=frozenset(actions),
        has_chitchat_act=has_marker,
        response=response,
        dropped_triplets=dropped_b + dropped_a,
    )


# ---------------------------------------------------------------------------
# Training-set expansion
# ---------------------------------------------------------------------------


def expand_training_set(
    dialogue: Dialogue,
    labeled_by_turn: Mapping[int, Sequence[LabeledCandidate]],
    flavor: Flavor,
) -> list[TrainingSequence]:
    """Sequences for every system turn of one dialogue.

    Baseline: one plain sequence per turn. Augmented: one sequence per good
    candidate, or the plain sequence when the turn has none. Rewriter: one
    sequence per candidate regardless of label; each candidate becomes the
    chit-chat input, and bad inputs pair with the first good candidate as
    target when one exists, teaching the model to recover; turns with no
    candidates contribute a plain sequence with an empty chit-chat input.
    """
    sequences: list[TrainingSequence] = []
    for turn in dialogue.turns:
        if turn.speaker is not Speaker.SYSTEM:
            continue
        history = history_before(dialogue, turn.index)
        belief = belief_at_system_turn(dialogue, turn.index)
        actions = turn.actions
        task_response = delexicalize(turn)
        labeled = list(labeled_by_turn.get(turn.index, ()))
        goods = [item for item in labeled if item.is_good]

        turn_sequences: list[TrainingSequence] = []
        if flavor is Flavor.SIMPLETOD:
            turn_sequences.append(encode(flavor, history, belief, actions, task_response))
        elif flavor is Flavor.SIMPLETOD_PLUS:
            if not goods:
                turn_sequences.append(
                    encode(flavor, history, belief, actions, task_response)
                )
            else:
                for item in goods:
                    turn_sequences.append(
                        encode(
                            flavor,
                            history,
                            belief,
                            actions,
                            task_response,
                            candidate=(item.candidate.text, item.candidate.position),
                        )
                    )
        else:  # Flavor.REWRITER
            if not labeled:
                turn_sequences.append(
                    encode(
                        flavor,
                        history,
                        belief,
                        actions,
                        task_response,
                        rewriter_inputs=(task_response, ""),
                    )
                )
            else:
                for item in labeled:
                    target = item if item.is_good else (goods[0] if goods else None)
                    candidate = (
                        (target.candidate.text, target.candidate.position)
                        if target is not None
                        else None
                    )
                    turn_sequences.append(
                        encode(
                            flavor,
                            history,
                            belief,
                            actions,
                            task_response,
                            candidate=candidate,
                            rewriter_inputs=(task_response, item.candidate.text),
                        )
                    )
        sequences.extend(
            replace(seq, dialogue_id=dialogue.id, turn_index=turn.index)
            for seq in turn_sequences
        )
    return sequences
