"""Response arranging: combine an off-the-shelf task response with an
off-the-shelf chit-chat response by picking one of three layouts, and keep
per-dialogue chit-chat frequency under a configurable ceiling.

The arranger never touches belief states or action decisions; it only
composes response text, so those pass through whatever produced them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Any, Iterable, Mapping, Sequence

from .annotation import LabeledCandidate
from .backends import ChoiceScorer
from .errors import ProtocolError
from .generation import Position


class ArrangementChoice(enum.Enum):
    CHITCHAT_FIRST = "CHITCHAT_FIRST"
    TASK_FIRST = "TASK_FIRST"
    TASK_ONLY = "TASK_ONLY"


CHOICE_ORDER = (
    ArrangementChoice.CHITCHAT_FIRST,
    ArrangementChoice.TASK_FIRST,
    ArrangementChoice.TASK_ONLY,
)


@dataclass(frozen=True)
class Arrangement:
    choice: ArrangementChoice
    text: str
    task_response: str
    chitchat: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "choice": self.choice.value,
            "text": self.text,
            "task_response": self.task_response,
            "chitchat": self.chitchat,
        }


def _joined(*parts: str) -> str:
    return " ".join(p for p in parts if p)


def make_arrangements(task_response: str, chitchat: str) -> list[Arrangement]:
    """The three layouts, in fixed order: chit-chat first, task first,
    task only. An empty chit-chat degenerates the combined layouts to the
    task-only text."""
    if not task_response:
        raise ValueError("task_response must be non-empty")
    return [
        Arrangement(
            ArrangementChoice.CHITCHAT_FIRST,
            _joined(chitchat, task_response),
            task_response,
            chitchat,
        ),
        Arrangement(
            ArrangementChoice.TASK_FIRST,
            _joined(task_response, chitchat),
            task_response,
            chitchat,
        ),
        Arrangement(
            ArrangementChoice.TASK_ONLY, task_response, task_response, chitchat
        ),
    ]


@dataclass(frozen=True)
class ArrangerTrainingInstance:
    history: tuple[tuple[str, str], ...]
    arrangements: tuple[str, str, str]
    target: ArrangementChoice

    def to_dict(self) -> dict[str, Any]:
        return {
            "history": [{"speaker": s, "utterance": u} for s, u in self.history],
            "arrangements": list(self.arrangements),
            "target": self.target.value,
        }


def target_choice(label_is_good: bool, position: Position) -> ArrangementChoice:
    """Training target from a candidate's label and position: good prepends
    lead, good appends trail, bad candidates are dropped entirely."""
    if not label_is_good:
        return ArrangementChoice.TASK_ONLY
    return (
        ArrangementChoice.CHITCHAT_FIRST
        if position is Position.PREPEND
        else ArrangementChoice.TASK_FIRST
    )


def build_training_instances(
    history: Sequence[tuple[str, str]],
    task_response: str,
    labeled: Iterable[LabeledCandidate],
) -> list[ArrangerTrainingInstance]:
    """One instance per labeled candidate for a system turn, with the
    ground-truth task response as the task side of every arrangement."""
    instances = []
    for item in labeled:
        arrangements = make_arrangements(task_response, item.candidate.text)
        instances.append(
            ArrangerTrainingInstance(
                history=tuple(history),
                arrangements=tuple(a.text for a in arrangements),  # type: ignore[arg-type]
                target=target_choice(item.is_good, item.candidate.position),
            )
        )
    return instances


def choose(
    history: Sequence[tuple[str, str]],
    task_response: str,
    chitchat: str,
    scorer: ChoiceScorer,
) -> Arrangement:
    """Pick the arrangement the scorer prefers; exact ties resolve in the
    fixed arrangement order."""
    arrangements = make_arrangements(task_response, chitchat)
    probs = scorer.probs(list(history), [a.text for a in arrangements])
    if len(probs) != 3:
        raise ProtocolError(f"choice scorer returned {len(probs)} probabilities")
    if abs(sum(probs) - 1.0) > 1e-6:
        raise ProtocolError(f"choice probabilities sum to {sum(probs)}, not 1")
    best = max(range(3), key=lambda i: (probs[i], -i))
    return arrangements[best]


# ---------------------------------------------------------------------------
# Injection-frequency gate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrequencyState:
    """Per-dialogue running counts; the gate reads them with the current
    turn already counted in the total."""

    system_turns_so_far: int = 0
    augmented_turns_so_far: int = 0

    @property
    def frequency(self) -> float:
        if self.system_turns_so_far == 0:
            return 0.0
        return self.augmented_turns_so_far / self.system_turns_so_far

    def begin_turn(self) -> FrequencyState:
        return replace(self, system_turns_so_far=self.system_turns_so_far + 1)


def frequency_gate(
    state: FrequencyState,
    proposed: Arrangement,
    threshold: float = 0.3,
) -> tuple[Arrangement, FrequencyState]:
    """Let the proposed arrangement through only while the chit-chat
    frequency (counting the turn under decision) stays strictly below the
    threshold; otherwise force the task-only layout. Returns the final
    arrangement and the state advanced by this turn's outcome."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    if state.augmented_turns_so_far > state.system_turns_so_far:
        raise ValueError("augmented turn count exceeds total turns")
    final = proposed
    if proposed.choice is not ArrangementChoice.TASK_ONLY and state.frequency >= threshold:
        final = Arrangement(
            ArrangementChoice.TASK_ONLY,
            proposed.task_response,
            proposed.task_response,
            proposed.chitchat,
        )
    new_state = replace(
        state,
        augmented_turns_so_far=state.augmented_turns_so_far
        + (1 if final.choice is not ArrangementChoice.TASK_ONLY else 0),
    )
    return final, new_state


@dataclass(frozen=True)
class ArrangedTurn:
    turn_index: int
    arrangement: Arrangement

    def to_dict(self) -> dict[str, Any]:
        return {"turn_index": self.turn_index, **self.arrangement.to_dict()}


def arrange_dialogue(
    history_by_turn: Mapping[int, Sequence[tuple[str, str]]],
    task_responses: Mapping[int, str],
    chitchats: Mapping[int, str],
    scorer: ChoiceScorer,
    max_injection_frequency: float | None = None,
    gate_counts_candidate_turns_only: bool = False,
) -> list[ArrangedTurn]:
    """Arrange every system turn of one dialogue in order, optionally
    applying the injection-frequency gate. The inputs are keyed by system
    turn index; the frequency state is confined to this dialogue.

    By default the gate denominator counts every system turn; with
    ``gate_counts_candidate_turns_only`` it counts only turns that actually
    have a chit-chat response available.
    """
    state = FrequencyState()
    arranged: list[ArrangedTurn] = []
    for turn_index in sorted(task_responses):
        chitchat = chitchats.get(turn_index, "")
        proposed = choose(
            history_by_turn.get(turn_index, ()),
            task_responses[turn_index],
            chitchat,
            scorer,
        )
        if max_injection_frequency is not None and (
            chitchat or not gate_counts_candidate_turns_only
        ):
            state = state.begin_turn()
            final, state = frequency_gate(state, proposed, max_injection_frequency)
        else:
            final = proposed
        arranged.append(ArrangedTurn(turn_index=turn_index, arrangement=final))
    return arranged
