"""Dialogue corpus model, ingestion, validation, and delexicalization.

The internal model mirrors schema-guided corpora: a dialogue is a strict
user/system alternation; user turns carry belief annotations, system turns
carry action annotations and character-offset slot spans. Two public input
formats are supported (schema-guided JSON and MultiWOZ-style JSON) plus the
canonical line-delimited format this package writes.

Values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Any, Iterable, Iterator

from .errors import CorpusParseError, CorpusValidationError


class Speaker(enum.Enum):
    USER = "USER"
    SYSTEM = "SYSTEM"


class CorpusFormat(enum.Enum):
    SGD = "sgd"
    MULTIWOZ21 = "multiwoz21"
    CANONICAL = "canonical"


@dataclass(frozen=True, order=True)
class BeliefTriplet:
    domain: str
    slot: str
    value: str

    def as_list(self) -> list[str]:
        return [self.domain, self.slot, self.value]


@dataclass(frozen=True, order=True)
class ActionTriplet:
    domain: str
    action_type: str
    slot: str = ""

    def as_list(self) -> list[str]:
        return [self.domain, self.action_type, self.slot]


@dataclass(frozen=True, order=True)
class SlotSpan:
    slot: str
    start: int
    end: int  # exclusive


@dataclass(frozen=True)
class Frame:
    service: str
    belief: frozenset[BeliefTriplet] = frozenset()
    actions: frozenset[ActionTriplet] = frozenset()
    slot_spans: tuple[SlotSpan, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "service": self.service,
            "belief": [t.as_list() for t in sorted(self.belief)],
            "actions": [t.as_list() for t in sorted(self.actions)],
            "slot_spans": [[s.slot, s.start, s.end] for s in self.slot_spans],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Frame:
        return cls(
            service=d["service"],
            belief=frozenset(BeliefTriplet(*t) for t in d.get("belief", [])),
            actions=frozenset(ActionTriplet(*t) for t in d.get("actions", [])),
            slot_spans=tuple(SlotSpan(s[0], s[1], s[2]) for s in d.get("slot_spans", [])),
        )


@dataclass(frozen=True)
class Turn:
    index: int
    speaker: Speaker
    utterance: str
    frames: tuple[Frame, ...] = ()

    @property
    def belief(self) -> frozenset[BeliefTriplet]:
        return frozenset(t for f in self.frames for t in f.belief)

    @property
    def actions(self) -> frozenset[ActionTriplet]:
        return frozenset(t for f in self.frames for t in f.actions)

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "speaker": self.speaker.value,
            "utterance": self.utterance,
            "frames": [f.to_dict() for f in self.frames],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Turn:
        return cls(
            index=d["index"],
            speaker=Speaker(d["speaker"]),
            utterance=d["utterance"],
            frames=tuple(Frame.from_dict(f) for f in d.get("frames", [])),
        )


@dataclass(frozen=True)
class Dialogue:
    id: str
    services: tuple[str, ...]
    turns: tuple[Turn, ...]

    def system_turns(self) -> list[Turn]:
        return [t for t in self.turns if t.speaker is Speaker.SYSTEM]

    def user_turns(self) -> list[Turn]:
        return [t for t in self.turns if t.speaker is Speaker.USER]

    def to_dict(self) -> dict[str, Any]:
        return {
            "dialogue_id": self.id,
            "services": list(self.services),
            "turns": [t.to_dict() for t in self.turns],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Dialogue:
        return cls(
            id=d["dialogue_id"],
            services=tuple(d.get("services", [])),
            turns=tuple(Turn.from_dict(t) for t in d.get("turns", [])),
        )


@dataclass(frozen=True)
class Violation:
    dialogue_id: str
    turn_index: int | None
    rule: str
    detail: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "dialogue_id": self.dialogue_id,
            "turn_index": self.turn_index,
            "rule": self.rule,
            "detail": self.detail,
        }


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def dialogue_violations(dialogue: Dialogue) -> list[Violation]:
    """All invariant violations in one dialogue; empty means valid."""
    out: list[Violation] = []

    def bad(turn_index: int | None, rule: str, detail: str = "") -> None:
        out.append(Violation(dialogue.id, turn_index, rule, detail))

    if not dialogue.turns:
        bad(None, "speaker_alternation", "dialogue has no turns")
        return out
    if dialogue.turns[0].speaker is not Speaker.USER:
        bad(0, "speaker_alternation", "first turn must be USER")
    if dialogue.turns[-1].speaker is not Speaker.SYSTEM:
        bad(len(dialogue.turns) - 1, "speaker_alternation", "last turn must be SYSTEM")
    for i, turn in enumerate(dialogue.turns):
        expected = Speaker.USER if i % 2 == 0 else Speaker.SYSTEM
        if turn.speaker is not expected and i not in (0, len(dialogue.turns) - 1):
            # first/last-turn problems are already reported above
            bad(i, "speaker_alternation", f"expected {expected.value}")
        if turn.index != i:
            bad(i, "turn_index", f"index field is {turn.index}")
        if turn.speaker is Speaker.USER and turn.actions:
            bad(i, "annotation_side", "USER turn carries action annotations")
        if turn.speaker is Speaker.SYSTEM and turn.belief:
            bad(i, "annotation_side", "SYSTEM turn carries belief annotations")
        for t in turn.belief:
            if not (t.domain and t.slot and t.value):
                bad(i, "triplet_fields", f"empty component in belief triplet {t.as_list()}")
        for a in turn.actions:
            if not (a.domain and a.action_type):
                bad(i, "triplet_fields", f"empty component in action triplet {a.as_list()}")
        spans = sorted(
            (s for f in turn.frames for s in f.slot_spans), key=lambda s: (s.start, s.end)
        )
        for s in spans:
            if not (0 <= s.start <= s.end <= len(turn.utterance)):
                bad(i, "slot_span_bounds", f"span {s.slot}@[{s.start},{s.end})")
        for prev, cur in zip(spans, spans[1:]):
            if cur.start < prev.end:
                bad(i, "slot_span_overlap", f"{prev.slot} overlaps {cur.slot}")
    return out


def validate_corpus(dialogues: Iterable[Dialogue]) -> list[Violation]:
    """Collect violations across a corpus; violations are data, not errors."""
    out: list[Violation] = []
    for dialogue in dialogues:
        out.extend(dialogue_violations(dialogue))
    return out


def _check_or_raise(dialogue: Dialogue) -> Dialogue:
    violations = dialogue_violations(dialogue)
    if violations:
        v = violations[0]
        raise CorpusValidationError(v.dialogue_id, v.turn_index, v.rule, v.detail)
    return dialogue


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


def ingest_corpus(raw: bytes, format: CorpusFormat) -> list[Dialogue]:
    """Parse a corpus file into validated dialogues.

    Raises CorpusParseError (with byte offset) on malformed input and
    CorpusValidationError (naming dialogue and turn) on invariant breaks.
    """
    if format is CorpusFormat.CANONICAL:
        return [_check_or_raise(Dialogue.from_dict(d)) for d in _iter_jsonl(raw)]
    try:
        payload = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusParseError(f"malformed {format.value} corpus: {exc.msg}", exc.pos) from exc
    except UnicodeDecodeError as exc:
        raise CorpusParseError("corpus is not valid UTF-8", exc.start) from exc
    if format is CorpusFormat.SGD:
        if not isinstance(payload, list):
            raise CorpusParseError("expected a top-level list of dialogues", 0)
        return [_check_or_raise(_dialogue_from_sgd(d)) for d in payload]
    if format is CorpusFormat.MULTIWOZ21:
        if not isinstance(payload, dict):
            raise CorpusParseError("expected a top-level id -> dialogue mapping", 0)
        return [
            _check_or_raise(_dialogue_from_multiwoz(did, d)) for did, d in payload.items()
        ]
    raise ValueError(f"unsupported corpus format: {format}")


def _iter_jsonl(raw: bytes) -> Iterator[dict[str, Any]]:
    offset = 0
    for line in raw.splitlines(keepends=True):
        stripped = line.strip()
        if stripped:
            try:
                record = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(
                    f"malformed record line: {exc.msg}", offset + exc.pos
                ) from exc
            if not (isinstance(record, dict) and record.get("kind") == "header"):
                yield record
        offset += len(line)


def _dialogue_from_sgd(d: dict[str, Any]) -> Dialogue:
    turns = []
    for i, t in enumerate(d.get("turns", [])):
        frames = []
        for f in t.get("frames", []):
            service = f.get("service", "")
            belief: set[BeliefTriplet] = set()
            state = f.get("state", {})
            for slot, values in state.get("slot_values", {}).items():
                if values:
                    belief.add(BeliefTriplet(service, slot, values[0]))
            actions = {
                ActionTriplet(service, a.get("act", ""), a.get("slot", "") or "")
                for a in f.get("actions", [])
            }
            spans = tuple(
                SlotSpan(s["slot"], s["start"], s["exclusive_end"])
                for s in f.get("slots", [])
            )
            frames.append(
                Frame(
                    service=service,
                    belief=frozenset(belief),
                    actions=frozenset(actions),
                    slot_spans=spans,
                )
            )
        turns.append(
            Turn(
                index=i,
                speaker=Speaker(t.get("speaker", "")),
                utterance=t.get("utterance", ""),
                frames=tuple(frames),
            )
        )
    return Dialogue(
        id=str(d.get("dialogue_id", "")),
        services=tuple(d.get("services", [])),
        turns=tuple(turns),
    )


_MULTIWOZ_SKIP_VALUES = {"", "not mentioned", "none"}


def _multiwoz_belief(metadata: dict[str, Any]) -> dict[str, set[BeliefTriplet]]:
    by_domain: dict[str, set[BeliefTriplet]] = {}
    for domain, sections in (metadata or {}).items():
        triplets: set[BeliefTriplet] = set()
        for section in ("semi", "book"):
            for slot, value in (sections.get(section) or {}).items():
                if slot == "booked" or not isinstance(value, str):
                    continue
                if value.strip().lower() in _MULTIWOZ_SKIP_VALUES:
                    continue
                triplets.add(BeliefTriplet(domain, slot, value))
        if triplets:
            by_domain[domain] = triplets
    return by_domain


def _dialogue_from_multiwoz(dialogue_id: str, d: dict[str, Any]) -> Dialogue:
    """Normalize a MultiWOZ-style record into the internal model.

    The log alternates user/system starting with the user; the system entry's
    ``metadata`` is the belief state after the preceding user turn, so it is
    attached to that user turn (service = domain). Dialogue acts become
    action triplets; spans are recovered by locating the span value in the
    system utterance.
    """
    log = d.get("log", [])
    turns: list[Turn] = []
    services: set[str] = set()
    for i, entry in enumerate(log):
        text = entry.get("text", "")
        if i % 2 == 0:  # user turn; belief lives on the next system entry
            belief_by_domain: dict[str, set[BeliefTriplet]] = {}
            if i + 1 < len(log):
                belief_by_domain = _multiwoz_belief(log[i + 1].get("metadata") or {})
            frames = tuple(
                Frame(service=domain, belief=frozenset(triplets))
                for domain, triplets in sorted(belief_by_domain.items())
            )
            services.update(belief_by_domain)
            turns.append(Turn(index=i, speaker=Speaker.USER, utterance=text, frames=frames))
        else:
            actions_by_domain: dict[str, set[ActionTriplet]] = {}
            for act_name, slot_pairs in (entry.get("dialog_act") or {}).items():
                domain, _, act_type = act_name.partition("-")
                domain = domain.lower()
                services.add(domain)
                for pair in slot_pairs:
                    slot = pair[0] if pair else "none"
                    slot = "" if slot in ("none", "?") else slot.lower()
                    actions_by_domain.setdefault(domain, set()).add(
                        ActionTriplet(domain, act_type.lower(), slot)
                    )
            spans_by_domain: dict[str, list[SlotSpan]] = {}
            taken: list[tuple[int, int]] = []
            for info in entry.get("span_info") or []:
                act_name, slot, value = info[0], info[1], str(info[2])
                domain = act_name.partition("-")[0].lower()
                start = _find_free_span(text, value, taken)
                if start is None:
                    continue
                taken.append((start, start + len(value)))
                spans_by_domain.setdefault(domain, []).append(
                    SlotSpan(slot.lower(), start, start + len(value))
                )
            frame_domains = sorted(set(actions_by_domain) | set(spans_by_domain))
            frames = tuple(
                Frame(
                    service=domain,
                    actions=frozenset(actions_by_domain.get(domain, set())),
                    slot_spans=tuple(spans_by_domain.get(domain, [])),
                )
                for domain in frame_domains
            )
            turns.append(Turn(index=i, speaker=Speaker.SYSTEM, utterance=text, frames=frames))
    return Dialogue(id=dialogue_id, services=tuple(sorted(services)), turns=tuple(turns))


def _find_free_span(text: str, value: str, taken: list[tuple[int, int]]) -> int | None:
    start = 0
    while True:
        pos = text.find(value, start)
        if pos < 0:
            return None
        end = pos + len(value)
        if all(end <= s or pos >= e for s, e in taken):
            return pos
        start = pos + 1


# ---------------------------------------------------------------------------
# Serialization (canonical line-delimited format)
# ---------------------------------------------------------------------------


def serialize_corpus(dialogues: Iterable[Dialogue]) -> bytes:
    """One dialogue per line, canonical field order, stable key order."""
    lines = [
        json.dumps(d.to_dict(), sort_keys=True, ensure_ascii=False) for d in dialogues
    ]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


# ---------------------------------------------------------------------------
# Delexicalization
# ---------------------------------------------------------------------------


def placeholder(service: str, slot: str) -> str:
    name = f"{service}_{slot}".lower().replace(" ", "_")
    return f"[{name}]"


def delexicalize(turn: Turn, frames: Iterable[Frame] | None = None) -> str:
    """Replace annotated slot-value spans with ``[service_slot]`` placeholders.

    Spans are applied right to left so remaining offsets stay valid; text
    outside the spans is untouched. Text with no spans comes back unchanged,
    which also makes the operation idempotent on already-replaced output.
    """
    if turn.speaker is not Speaker.SYSTEM:
        raise ValueError("only SYSTEM turns are delexicalized")
    frame_list = list(frames) if frames is not None else list(turn.frames)
    tagged: list[tuple[SlotSpan, str]] = [
        (span, frame.service) for frame in frame_list for span in frame.slot_spans
    ]
    tagged.sort(key=lambda pair: (pair[0].start, pair[0].end))
    for (prev, _), (cur, _) in zip(tagged, tagged[1:]):
        if cur.start < prev.end:
            raise CorpusValidationError(
                "?", turn.index, "slot_span_overlap", f"{prev.slot} overlaps {cur.slot}"
            )
    text = turn.utterance
    for span, service in reversed(tagged):
        if not (0 <= span.start <= span.end <= len(text)):
            raise CorpusValidationError(
                "?", turn.index, "slot_span_bounds", f"span {span.slot} out of bounds"
            )
        text = text[: span.start] + placeholder(service, span.slot) + text[span.end :]
    return text


# ---------------------------------------------------------------------------
# Convenience lookups used by downstream modules
# ---------------------------------------------------------------------------


def history_before(dialogue: Dialogue, turn_index: int) -> list[tuple[str, str]]:
    """(speaker, utterance) pairs for all turns before ``turn_index``."""
    return [
        (t.speaker.value.lower(), t.utterance) for t in dialogue.turns[:turn_index]
    ]


def belief_at_system_turn(dialogue: Dialogue, turn_index: int) -> frozenset[BeliefTriplet]:
    """Belief state for a system turn: the preceding user turn's annotations."""
    if turn_index <= 0 or turn_index >= len(dialogue.turns):
        raise ValueError(f"turn index {turn_index} out of range")
    return dialogue.turns[turn_index - 1].belief
