"""Automatic evaluation: belief-state accuracy (joint and per-slot), action
F1, corpus BLEU with two reference variants, and chit-chat injection
frequency.

Matching normalizes values by case-folding and whitespace collapse only; no
fuzzy matching. The per-slot accuracy is recall-style: unpredicted gold
slots count as errors, spurious predictions are ignored (they are already
penalized by the action F1 and BLEU).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .corpus import ActionTriplet, BeliefTriplet
from .textnorm import tokenize

INJECTION_INTERVALS: tuple[tuple[float, float], ...] = (
    (0.1, 0.2),
    (0.2, 0.3),
    (0.3, 0.4),
    (0.4, 1.0),
)


def _norm_value(value: str) -> str:
    return " ".join(value.casefold().split())


def _norm_belief(triplets: Iterable[BeliefTriplet]) -> frozenset[tuple[str, str, str]]:
    return frozenset(
        (t.domain.casefold(), t.slot.casefold(), _norm_value(t.value)) for t in triplets
    )


def _norm_actions(triplets: Iterable[ActionTriplet]) -> frozenset[tuple[str, str, str]]:
    return frozenset(
        (t.domain.casefold(), t.action_type.casefold(), t.slot.casefold())
        for t in triplets
    )


def joint_goal_accuracy(
    pred: Sequence[Iterable[BeliefTriplet]], gold: Sequence[Iterable[BeliefTriplet]]
) -> float:
    """Fraction of turns whose predicted belief set matches gold exactly."""
    if len(pred) != len(gold):
        raise ValueError(f"pred has {len(pred)} turns, gold has {len(gold)}")
    if not gold:
        return 1.0
    hits = sum(
        1 for p, g in zip(pred, gold) if _norm_belief(p) == _norm_belief(g)
    )
    return hits / len(gold)


def average_goal_accuracy(
    pred: Sequence[Iterable[BeliefTriplet]], gold: Sequence[Iterable[BeliefTriplet]]
) -> float:
    """Per-slot accuracy averaged over turns: each turn with gold slots
    contributes the fraction of its non-empty gold slots whose exact triplet
    appears in the prediction. Turns without gold slots are excluded;
    vacuously 1.0 when no turn has any. Averaging per turn (not pooling
    slots) keeps this metric an upper bound on the exact-match accuracy."""
    if len(pred) != len(gold):
        raise ValueError(f"pred has {len(pred)} turns, gold has {len(gold)}")
    per_turn: list[float] = []
    for p, g in zip(pred, gold):
        pset = _norm_belief(p)
        gold_slots = [item for item in _norm_belief(g) if item[2]]
        if not gold_slots:
            continue
        per_turn.append(sum(1 for item in gold_slots if item in pset) / len(gold_slots))
    return sum(per_turn) / len(per_turn) if per_turn else 1.0


def act_slot_f1(
    pred: Sequence[Iterable[ActionTriplet]], gold: Sequence[Iterable[ActionTriplet]]
) -> float:
    """Micro-averaged F1 over action triplets pooled across turns."""
    if len(pred) != len(gold):
        raise ValueError(f"pred has {len(pred)} turns, gold has {len(gold)}")
    n_pred = n_gold = n_common = 0
    for p, g in zip(pred, gold):
        pset, gset = _norm_actions(p), _norm_actions(g)
        n_pred += len(pset)
        n_gold += len(gset)
        n_common += len(pset & gset)
    if n_pred == 0 and n_gold == 0:
        return 1.0
    if n_common == 0:
        return 0.0
    precision = n_common / n_pred
    recall = n_common / n_gold
    return 2 * precision * recall / (precision + recall)


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(hypotheses: Sequence[str], references: Sequence[str]) -> float:
    """Corpus-level BLEU on orders 1-4 with uniform weights, brevity
    penalty, and add-one smoothing on orders 2-4 whenever that order has no
    matches. Returned on the 0-100 convention.

    Whether this scores against original or augmented responses is purely a
    matter of which reference list the caller passes.
    """
    if not hypotheses:
        raise ValueError("hypothesis list must not be empty")
    if len(hypotheses) != len(references):
        raise ValueError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    hyp_tokens = [tokenize(h) for h in hypotheses]
    ref_tokens = [tokenize(r) for r in references]
    hyp_len = sum(len(t) for t in hyp_tokens)
    ref_len = sum(len(t) for t in ref_tokens)
    if hyp_len == 0:
        return 0.0

    log_sum = 0.0
    for n in range(1, 5):
        matches = 0
        possible = 0
        for hyp, ref in zip(hyp_tokens, ref_tokens):
            hyp_counts = _ngrams(hyp, n)
            ref_counts = _ngrams(ref, n)
            matches += sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
            possible += max(len(hyp) - n + 1, 0)
        if n >= 2 and matches == 0:
            precision = (matches + 1) / (possible + 1)
        elif possible == 0 or matches == 0:
            return 0.0
        else:
            precision = matches / possible
        log_sum += math.log(precision)

    brevity = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(log_sum / 4.0)


# ---------------------------------------------------------------------------
# Injection frequency
# ---------------------------------------------------------------------------


def injection_frequency(augmented_flags: Sequence[bool]) -> float:
    """Fraction of system turns carrying a chit-chat augmentation; one flag
    per system turn."""
    if not augmented_flags:
        raise ValueError("dialogue has no system turns")
    return sum(bool(f) for f in augmented_flags) / len(augmented_flags)


def injection_interval(frequency: float) -> tuple[float, float] | None:
    """The half-open interval (lo, hi] the frequency falls into, if any."""
    for lo, hi in INJECTION_INTERVALS:
        if lo < frequency <= hi:
            return (lo, hi)
    return None


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------


@dataclass
class SplitScores:
    n_dialogues: int = 0
    joint_ga: float | None = None
    avg_ga: float | None = None
    act_slot_f1: float | None = None
    bleu_o: float | None = None
    bleu_a: float | None = None
    injection_frequency: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_dialogues": self.n_dialogues,
            "joint_ga": self.joint_ga,
            "avg_ga": self.avg_ga,
            "act_slot_f1": self.act_slot_f1,
            "bleu_o": self.bleu_o,
            "bleu_a": self.bleu_a,
            "injection_frequency": self.injection_frequency,
        }


@dataclass
class EvalReport:
    splits: dict[str, SplitScores] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {name: scores.to_dict() for name, scores in self.splits.items()}


@dataclass
class DialogueEval:
    """Aligned per-dialogue inputs for report assembly.

    Belief lists are per user turn; action/response lists are per system
    turn, all in turn order.
    """

    dialogue_id: str
    services: tuple[str, ...]
    pred_belief: list[frozenset[BeliefTriplet]]
    gold_belief: list[frozenset[BeliefTriplet]]
    pred_actions: list[frozenset[ActionTriplet]]
    gold_actions: list[frozenset[ActionTriplet]]
    pred_responses: list[str]
    gold_responses: list[str]
    augmented_responses: list[str] | None = None
    augmented_flags: list[bool] | None = None


def _score_split(items: Sequence[DialogueEval]) -> SplitScores:
    if not items:
        return SplitScores(n_dialogues=0)
    pred_belief = [b for item in items for b in item.pred_belief]
    gold_belief = [b for item in items for b in item.gold_belief]
    pred_actions = [a for item in items for a in item.pred_actions]
    gold_actions = [a for item in items for a in item.gold_actions]
    pred_resp = [r for item in items for r in item.pred_responses]
    gold_resp = [r for item in items for r in item.gold_responses]
    aug_resp = [
        r
        for item in items
        if item.augmented_responses is not None
        for r in item.augmented_responses
    ]
    flags = [
        f for item in items if item.augmented_flags is not None for f in item.augmented_flags
    ]
    return SplitScores(
        n_dialogues=len(items),
        joint_ga=joint_goal_accuracy(pred_belief, gold_belief),
        avg_ga=average_goal_accuracy(pred_belief, gold_belief),
        act_slot_f1=act_slot_f1(pred_actions, gold_actions),
        bleu_o=bleu4(pred_resp, gold_resp) if pred_resp else None,
        bleu_a=(
            bleu4(pred_resp, aug_resp) if aug_resp and len(aug_resp) == len(pred_resp) else None
        ),
        injection_frequency=(sum(flags) / len(flags)) if flags else None,
    )


def build_report(
    items: Sequence[DialogueEval], train_services: Iterable[str] | None = None
) -> EvalReport:
    """Scores over all dialogues plus the subset whose services all appeared
    in training (when a training-service list is supplied)."""
    report = EvalReport()
    report.splits["ALL"] = _score_split(items)
    if train_services is not None:
        seen_set = set(train_services)
        seen_items = [
            item for item in items if all(s in seen_set for s in item.services)
        ]
        report.splits["SEEN"] = _score_split(seen_items)
    return report


def render_table(report: EvalReport) -> str:
    """Aligned plain-text table, one metric column pair per split."""
    columns = ["Joint GA", "Avg GA", "Act-Slot F1", "BLEU-O", "BLEU-A"]
    fields = ["joint_ga", "avg_ga", "act_slot_f1", "bleu_o", "bleu_a"]
    split_names = list(report.splits)
    header = ["Metric"] + [name.title() for name in split_names]
    rows = [header]
    for column, field_name in zip(columns, fields):
        row = [column]
        for name in split_names:
            value = getattr(report.splits[name], field_name)
            if value is None:
                row.append("-")
            elif field_name.startswith("bleu"):
                row.append(f"{value:.1f}")
            else:
                row.append(f"{100.0 * value:.1f}")
        rows.append(row)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = [
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        for row in rows
    ]
    return "\n".join(lines)
