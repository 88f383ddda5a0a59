"""Human annotation over filtered candidates: the good/bad + justification
schema, label aggregation, inter-annotator agreement, corpus statistics,
and annotation task export.

Each annotator judges a candidate independently, as if it were the only
add-on in the dialogue; the task payload therefore bundles the full
dialogue context, the candidate with its position, and the assistant-role
guidance shown to annotators.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .errors import NotFoundError, SchemaError, UndefinedAgreementError
from .generation import ChitChatCandidate
from .store import RecordLog
from .textnorm import normalize, tokenize


class Label(enum.Enum):
    GOOD = "GOOD"
    BAD = "BAD"


class Justification(enum.Enum):
    SOCIAL = "SOCIAL"
    USEFUL = "USEFUL"
    INAPPROPRIATE = "INAPPROPRIATE"
    MISLEADING = "MISLEADING"


LEGAL_JUSTIFICATIONS: dict[Label, frozenset[Justification]] = {
    Label.GOOD: frozenset({Justification.SOCIAL, Justification.USEFUL}),
    Label.BAD: frozenset({Justification.INAPPROPRIATE, Justification.MISLEADING}),
}

ASSISTANT_ROLE_GUIDANCE = (
    "Who is the virtual assistant? This digital assistant is more than just a "
    "bot that spits out facts. It has access to a wide range of information "
    "which can express not only as factual commentaries but also as opinions "
    "and preferences. However, it is not a person and should not pretend to "
    "have real experiences or be capable of physical actions. It should be "
    "personable and personlike, without appearing counterfeit.\n\n"
    "Appropriate: general opinions on impersonal, non-sensitive topics "
    "(\"I love penguins.\"); preferences in impersonal recommendations "
    "(\"Their food is good.\"); epistemic or hearsay framing for actions it "
    "cannot perform (\"I hear it's beautiful.\"); referring to others' "
    "experiences or ones it is capable of (\"That sounds like a great trip!\").\n"
    "Inappropriate: strong personal or sensitive opinions (\"I love you.\"); "
    "strong dispreferences (\"I hated it, but you might like it.\"); acting as "
    "if it could perform physical tasks (\"I can drive you there.\"); "
    "pretending to experiences it cannot have (\"We didn't have that when I "
    "was a kid.\")."
)


@dataclass(frozen=True)
class AnnotationRecord:
    candidate_id: str
    annotator_id: str
    label: Label
    justifications: frozenset[Justification] = frozenset()
    timestamp: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "candidate_id": self.candidate_id,
            "annotator_id": self.annotator_id,
            "label": self.label.value,
            "justifications": sorted(j.value for j in self.justifications),
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> AnnotationRecord:
        return cls(
            candidate_id=d["candidate_id"],
            annotator_id=d["annotator_id"],
            label=Label(d["label"]),
            justifications=frozenset(Justification(j) for j in d.get("justifications", [])),
            timestamp=d.get("timestamp", ""),
        )


def validate_record(record: AnnotationRecord) -> None:
    """Enforce the label/justification pairing; zero, one, or both of the
    label's legal justifications are allowed."""
    legal = LEGAL_JUSTIFICATIONS[record.label]
    for justification in sorted(record.justifications, key=lambda j: j.value):
        if justification not in legal:
            raise SchemaError(
                f"justification {justification.value} is not valid for label "
                f"{record.label.value}"
            )


@dataclass
class LabeledCandidate:
    candidate: ChitChatCandidate
    final_label: Label
    justification_tally: dict[Justification, int]
    records: list[AnnotationRecord]

    @property
    def is_good(self) -> bool:
        return self.final_label is Label.GOOD

    def to_dict(self) -> dict[str, Any]:
        return {
            "candidate": self.candidate.to_dict(),
            "final_label": self.final_label.value,
            "justification_tally": {
                j.value: n for j, n in sorted(self.justification_tally.items(), key=lambda kv: kv[0].value)
            },
            "records": [r.to_dict() for r in self.records],
        }


def aggregate(candidate: ChitChatCandidate, records: Sequence[AnnotationRecord]) -> LabeledCandidate:
    """Strict majority vote; ties resolve to BAD (a bad add-on shipped is
    costlier than a good one missed)."""
    if not records:
        raise ValueError("cannot aggregate zero records")
    good = sum(1 for r in records if r.label is Label.GOOD)
    bad = len(records) - good
    final = Label.GOOD if good > bad else Label.BAD
    tally: Counter[Justification] = Counter()
    for record in records:
        tally.update(record.justifications)
    return LabeledCandidate(
        candidate=candidate,
        final_label=final,
        justification_tally=dict(tally),
        records=list(records),
    )


class AnnotationStore:
    """Log-backed store with last-write-wins per (candidate, annotator).

    ``known_ids`` (when provided) pins the set of candidates that may be
    annotated; unknown ids are rejected.
    """

    def __init__(self, log: RecordLog, known_ids: set[str] | None = None):
        self.log = log
        self.known_ids = known_ids

    def record_annotation(self, record: AnnotationRecord) -> dict[str, Any]:
        validate_record(record)
        if self.known_ids is not None and record.candidate_id not in self.known_ids:
            raise NotFoundError(f"unknown candidate {record.candidate_id}")
        overwrote = any(
            r.candidate_id == record.candidate_id and r.annotator_id == record.annotator_id
            for r in self.annotations()
        )
        self.log.append(record.to_dict())
        return {"status": "ok", "candidate_id": record.candidate_id, "overwrote": overwrote}

    def annotations(self) -> list[AnnotationRecord]:
        return [AnnotationRecord.from_dict(r) for r in self.log.records()]

    def latest(self) -> dict[tuple[str, str], AnnotationRecord]:
        """Resolved view of the log: last record per (candidate, annotator)."""
        resolved: dict[tuple[str, str], AnnotationRecord] = {}
        for record in self.annotations():
            resolved[(record.candidate_id, record.annotator_id)] = record
        return resolved

    def records_by_candidate(self) -> dict[str, list[AnnotationRecord]]:
        grouped: dict[str, list[AnnotationRecord]] = {}
        for (candidate_id, _), record in sorted(self.latest().items()):
            grouped.setdefault(candidate_id, []).append(record)
        return grouped

    def labeled(
        self, candidates: Mapping[str, ChitChatCandidate]
    ) -> list[LabeledCandidate]:
        out = []
        for candidate_id, records in self.records_by_candidate().items():
            candidate = candidates.get(candidate_id)
            if candidate is not None:
                out.append(aggregate(candidate, records))
        return out

    def annotated_ids(self, annotator_id: str) -> set[str]:
        return {
            cid for (cid, aid) in self.latest() if aid == annotator_id
        }


# ---------------------------------------------------------------------------
# Agreement
# ---------------------------------------------------------------------------


def fleiss_kappa(
    ratings_by_item: Mapping[str, Sequence[str]],
    categories: Sequence[str] = (Label.GOOD.value, Label.BAD.value),
    ratings_per_item: int | None = None,
) -> float:
    """Chance-corrected agreement across many raters.

    Items must share one rating count n >= 2; when counts vary, n defaults
    to the most common count (larger count on ties) and items with a
    different count are excluded. Mean per-item agreement is compared with
    the agreement expected from the overall category proportions.
    """
    report = agreement_report(ratings_by_item, categories, ratings_per_item)
    return report["kappa"]


def agreement_report(
    ratings_by_item: Mapping[str, Sequence[str]],
    categories: Sequence[str] = (Label.GOOD.value, Label.BAD.value),
    ratings_per_item: int | None = None,
) -> dict[str, Any]:
    counts = [len(r) for r in ratings_by_item.values() if len(r) >= 2]
    if ratings_per_item is None:
        if not counts:
            raise UndefinedAgreementError("no item has two or more ratings")
        tallies = Counter(counts)
        ratings_per_item = max(tallies, key=lambda n: (tallies[n], n))
    n = ratings_per_item
    if n < 2:
        raise ValueError("ratings_per_item must be >= 2")

    included = {
        item: ratings for item, ratings in ratings_by_item.items() if len(ratings) == n
    }
    excluded = sorted(set(ratings_by_item) - set(included))
    if not included:
        raise UndefinedAgreementError("all items excluded: no item has the required rating count")

    index = {c: i for i, c in enumerate(categories)}
    table: list[list[int]] = []
    for item in sorted(included):
        row = [0] * len(categories)
        for rating in included[item]:
            if rating not in index:
                raise ValueError(f"rating {rating!r} outside categories {list(categories)}")
            row[index[rating]] += 1
        table.append(row)

    n_items = len(table)
    p_item = [
        (sum(c * c for c in row) - n) / (n * (n - 1)) for row in table
    ]
    p_bar = sum(p_item) / n_items
    proportions = [
        sum(row[j] for row in table) / (n_items * n) for j in range(len(categories))
    ]
    p_expected = sum(p * p for p in proportions)
    if p_expected == 1.0:
        if p_bar == 1.0:
            kappa = 1.0
        else:
            raise UndefinedAgreementError("expected agreement is 1 but observed is below 1")
    else:
        kappa = (p_bar - p_expected) / (1 - p_expected)
    return {
        "kappa": kappa,
        "observed_agreement": p_bar,
        "expected_agreement": p_expected,
        "items": n_items,
        "ratings_per_item": n,
        "categories": list(categories),
        "excluded_items": excluded,
    }


# ---------------------------------------------------------------------------
# Corpus statistics
# ---------------------------------------------------------------------------


@dataclass
class CorpusStats:
    n_candidates: int = 0
    n_unique: int = 0
    vocab_size: int = 0
    avg_length_tokens: float = 0.0
    label_counts: dict[str, int] = field(default_factory=dict)
    breakdown: dict[str, dict[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        total = self.n_candidates

        def with_pct(count: int) -> dict[str, float | int]:
            return {
                "count": count,
                "pct": round(100.0 * count / total, 1) if total else 0.0,
            }

        return {
            "n_candidates": self.n_candidates,
            "n_unique": self.n_unique,
            "vocab_size": self.vocab_size,
            "avg_length_tokens": self.avg_length_tokens,
            "labels": {name: with_pct(count) for name, count in sorted(self.label_counts.items())},
            "breakdown": {
                label: {name: with_pct(count) for name, count in sorted(groups.items())}
                for label, groups in sorted(self.breakdown.items())
            },
        }


def corpus_stats(labeled: Iterable[LabeledCandidate]) -> CorpusStats:
    """Corpus-level statistics over aggregated candidates.

    The per-label breakdown partitions candidates into the two pure
    justification groups, their intersection, and an ``other`` bucket for
    candidates whose raters picked neither.
    """
    labeled = list(labeled)
    texts = [item.candidate.text for item in labeled]
    token_lists = [tokenize(t) for t in texts]
    vocab = {tok for tokens in token_lists for tok in tokens}
    total_tokens = sum(len(tokens) for tokens in token_lists)

    label_counts = {Label.GOOD.value: 0, Label.BAD.value: 0}
    breakdown = {
        Label.GOOD.value: {"social": 0, "useful": 0, "social_and_useful": 0, "other": 0},
        Label.BAD.value: {
            "inappropriate": 0,
            "misleading": 0,
            "inappropriate_and_misleading": 0,
            "other": 0,
        },
    }
    for item in labeled:
        label_counts[item.final_label.value] += 1
        tally = item.justification_tally
        if item.final_label is Label.GOOD:
            first, second = Justification.SOCIAL, Justification.USEFUL
            names = ("social", "useful", "social_and_useful")
        else:
            first, second = Justification.INAPPROPRIATE, Justification.MISLEADING
            names = ("inappropriate", "misleading", "inappropriate_and_misleading")
        has_first = tally.get(first, 0) > 0
        has_second = tally.get(second, 0) > 0
        if has_first and has_second:
            bucket = names[2]
        elif has_first:
            bucket = names[0]
        elif has_second:
            bucket = names[1]
        else:
            bucket = "other"
        breakdown[item.final_label.value][bucket] += 1

    return CorpusStats(
        n_candidates=len(labeled),
        n_unique=len({normalize(t) for t in texts}),
        vocab_size=len(vocab),
        avg_length_tokens=(total_tokens / len(labeled)) if labeled else 0.0,
        label_counts=label_counts,
        breakdown=breakdown,
    )


# ---------------------------------------------------------------------------
# Task export
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnotationTask:
    task_id: str
    candidate: ChitChatCandidate
    context: tuple[tuple[str, str], ...]
    batch_index: int
    guidance: str = ASSISTANT_ROLE_GUIDANCE

    def to_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "candidate": self.candidate.to_dict(),
            "context": [{"speaker": s, "utterance": u} for s, u in self.context],
            "batch_index": self.batch_index,
            "guidance": self.guidance,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> AnnotationTask:
        return cls(
            task_id=d["task_id"],
            candidate=ChitChatCandidate.from_dict(d["candidate"]),
            context=tuple((t["speaker"], t["utterance"]) for t in d.get("context", [])),
            batch_index=d["batch_index"],
            guidance=d.get("guidance", ASSISTANT_ROLE_GUIDANCE),
        )


def export_tasks(
    candidates: Sequence[ChitChatCandidate],
    batch_size: int,
    contexts: Mapping[str, Sequence[tuple[str, str]]],
) -> list[list[AnnotationTask]]:
    """Bundle filtered candidates into disjoint annotation batches.

    ``contexts`` maps dialogue id to the full (speaker, utterance) transcript
    shown next to the candidate.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    batches: list[list[AnnotationTask]] = []
    for i, candidate in enumerate(candidates):
        batch_index = i // batch_size
        if batch_index == len(batches):
            batches.append([])
        batches[batch_index].append(
            AnnotationTask(
                task_id=f"annot-{candidate.candidate_id}",
                candidate=candidate,
                context=tuple(contexts.get(candidate.dialogue_id, ())),
                batch_index=batch_index,
            )
        )
    return batches
