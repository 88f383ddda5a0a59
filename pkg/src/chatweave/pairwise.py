"""Pairwise preference evaluation over complete dialogues.

Judges see two transcripts side by side and make a forced choice on one of
four axes; system identities stay hidden behind a seeded left/right
shuffle. Aggregation unshuffles the sides, reports win percentages per
(system pair, axis), and attaches an exact two-sided binomial p-value
against the even-split null.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Any, Iterable, Mapping, Sequence

from .corpus import Dialogue
from .errors import InfeasibleError, InsufficientDataError, NotFoundError
from .generation import Position
from .metrics import injection_frequency


class Axis(enum.Enum):
    ENGAGING = "ENGAGING"
    INTERESTING = "INTERESTING"
    HUMANLIKE = "HUMANLIKE"
    KNOWLEDGEABLE = "KNOWLEDGEABLE"


AXIS_PROMPTS: dict[Axis, str] = {
    Axis.ENGAGING: (
        "Who would you prefer to talk to? Which version is more likely to hold "
        "your attention and make you want to hear more?"
    ),
    Axis.INTERESTING: (
        "Who would you say is more interesting? Which version arouses your "
        "curiosity or tells you something new or useful?"
    ),
    Axis.HUMANLIKE: (
        "Who would you say sounds more human? Which version is more natural "
        "and personable?"
    ),
    Axis.KNOWLEDGEABLE: (
        "Who would you say is more knowledgeable? Which version seems more "
        "well informed and confident in the information?"
    ),
}

Transcript = tuple[tuple[str, str], ...]  # (speaker, text) pairs


class Side(enum.Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"


@dataclass(frozen=True)
class ComparisonTask:
    task_id: str
    axis: Axis
    left: Transcript
    right: Transcript
    left_system: str
    right_system: str
    dialogue_id: str

    @property
    def prompt(self) -> str:
        return AXIS_PROMPTS[self.axis]

    def to_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "axis": self.axis.value,
            "prompt": self.prompt,
            "dialogue_id": self.dialogue_id,
            "left": [{"speaker": s, "text": t} for s, t in self.left],
            "right": [{"speaker": s, "text": t} for s, t in self.right],
            "left_system": self.left_system,
            "right_system": self.right_system,
        }

    def public_dict(self) -> dict[str, Any]:
        """Judge-facing view; system labels never leave the server."""
        d = self.to_dict()
        d.pop("left_system")
        d.pop("right_system")
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ComparisonTask:
        return cls(
            task_id=d["task_id"],
            axis=Axis(d["axis"]),
            left=tuple((t["speaker"], t["text"]) for t in d["left"]),
            right=tuple((t["speaker"], t["text"]) for t in d["right"]),
            left_system=d["left_system"],
            right_system=d["right_system"],
            dialogue_id=d["dialogue_id"],
        )


@dataclass(frozen=True)
class ComparisonResult:
    task_id: str
    judge_id: str
    winner: Side
    timestamp: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "judge_id": self.judge_id,
            "winner": self.winner.value,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ComparisonResult:
        return cls(
            task_id=d["task_id"],
            judge_id=d["judge_id"],
            winner=Side(d["winner"]),
            timestamp=d.get("timestamp", ""),
        )


# ---------------------------------------------------------------------------
# Dialogue sampling and frequency variants
# ---------------------------------------------------------------------------


def sample_eval_dialogues(
    dialogues: Sequence[Dialogue],
    good_turns: Mapping[str, Iterable[int]],
    n: int,
    min_turns: int = 8,
    min_good_coverage: float = 0.4,
    seed: int = 0,
) -> list[Dialogue]:
    """Uniform seeded sample of dialogues long enough and with good
    candidates covering strictly more than ``min_good_coverage`` of their
    system turns."""
    qualifying = []
    for dialogue in dialogues:
        n_system = len(dialogue.system_turns())
        if len(dialogue.turns) < min_turns or n_system == 0:
            continue
        coverage = len(set(good_turns.get(dialogue.id, ()))) / n_system
        if coverage > min_good_coverage:
            qualifying.append(dialogue)
    if len(qualifying) < n:
        raise InsufficientDataError(
            f"only {len(qualifying)} dialogues qualify, {n} requested", len(qualifying)
        )
    rng = random.Random(seed)
    picked = rng.sample(qualifying, n)
    return sorted(picked, key=lambda d: d.id)


INJECTION_TOP_INTERVAL = (0.4, 1.0)


@dataclass(frozen=True)
class AugmentedDialogue:
    dialogue_id: str
    transcript: Transcript
    augmented_turns: tuple[int, ...]
    frequency: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "dialogue_id": self.dialogue_id,
            "transcript": [{"speaker": s, "text": t} for s, t in self.transcript],
            "augmented_turns": list(self.augmented_turns),
            "frequency": self.frequency,
        }


def make_frequency_variant(
    dialogue: Dialogue,
    good_by_turn: Mapping[int, Sequence[tuple[str, Position]]],
    target_interval: tuple[float, float],
    seed: int = 0,
) -> AugmentedDialogue:
    """Augment a seeded-random subset of augmentable system turns so the
    injection frequency lands in (lo, hi]; the top interval augments every
    turn that has a good candidate. One candidate per selected turn, the
    highest-ranked good one."""
    lo, hi = target_interval
    system_turns = dialogue.system_turns()
    total = len(system_turns)
    if total == 0:
        raise ValueError(f"dialogue {dialogue.id} has no system turns")
    augmentable = sorted(t for t, cands in good_by_turn.items() if cands)

    if (lo, hi) == INJECTION_TOP_INTERVAL:
        chosen = augmentable
        if not chosen or not lo < len(chosen) / total <= hi:
            raise InfeasibleError(
                f"augmenting all {len(chosen)} augmentable turns of {total} "
                f"gives frequency outside ({lo}, {hi}]"
            )
    else:
        feasible = [
            c for c in range(1, len(augmentable) + 1) if lo < c / total <= hi
        ]
        if not feasible:
            raise InfeasibleError(
                f"no augmentable-turn count in ({lo}, {hi}] is reachable with "
                f"{len(augmentable)} of {total} turns augmentable"
            )
        count = max(feasible)
        rng = random.Random(seed)
        chosen = sorted(rng.sample(augmentable, count))

    transcript = []
    for turn in dialogue.turns:
        text = turn.utterance
        if turn.index in chosen:
            candidate_text, position = good_by_turn[turn.index][0]
            if position is Position.PREPEND:
                text = f"{candidate_text} {text}".strip()
            else:
                text = f"{text} {candidate_text}".strip()
        transcript.append((turn.speaker.value.lower(), text))
    flags = [t.index in chosen for t in system_turns]
    return AugmentedDialogue(
        dialogue_id=dialogue.id,
        transcript=tuple(transcript),
        augmented_turns=tuple(chosen),
        frequency=injection_frequency(flags),
    )


def transcript_of(dialogue: Dialogue) -> Transcript:
    return tuple((t.speaker.value.lower(), t.utterance) for t in dialogue.turns)


# ---------------------------------------------------------------------------
# Pair construction
# ---------------------------------------------------------------------------


def build_pairs(
    variants: Mapping[str, Mapping[str, Transcript]],
    axes: Sequence[Axis] = tuple(Axis),
    seed: int = 0,
) -> list[ComparisonTask]:
    """One task per (unordered system pair, shared dialogue, axis), with a
    seeded random side assignment per task."""
    systems = sorted(variants)
    if len(systems) < 2:
        raise ValueError("at least two systems are required")
    tasks: list[ComparisonTask] = []
    any_shared = False
    rng = random.Random(seed)
    for i, sys_a in enumerate(systems):
        for sys_b in systems[i + 1 :]:
            shared = sorted(set(variants[sys_a]) & set(variants[sys_b]))
            if shared:
                any_shared = True
            for dialogue_id in shared:
                for axis in axes:
                    flip = rng.random() < 0.5
                    left_system, right_system = (
                        (sys_b, sys_a) if flip else (sys_a, sys_b)
                    )
                    tasks.append(
                        ComparisonTask(
                            task_id=f"cmp-{sys_a}-{sys_b}-{dialogue_id}-{axis.value.lower()}",
                            axis=axis,
                            left=variants[left_system][dialogue_id],
                            right=variants[right_system][dialogue_id],
                            left_system=left_system,
                            right_system=right_system,
                            dialogue_id=dialogue_id,
                        )
                    )
    if not any_shared:
        raise ValueError("systems share no dialogue ids")
    return tasks


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def binomial_p_value(k: int, n: int) -> float:
    """Exact two-sided binomial test against p = 0.5, as twice the smaller
    tail, capped at 1."""
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    if n == 0:
        return 1.0
    denom = Fraction(1, 2**n)
    lower = sum(comb(n, i) for i in range(0, k + 1)) * denom
    upper = sum(comb(n, i) for i in range(k, n + 1)) * denom
    return float(min(Fraction(1), 2 * min(lower, upper)))


@dataclass
class PairCell:
    system_a: str
    system_b: str
    axis: Axis
    wins_a: int = 0
    wins_b: int = 0

    @property
    def n(self) -> int:
        return self.wins_a + self.wins_b

    def to_dict(self) -> dict[str, Any]:
        n = self.n
        return {
            "system_a": self.system_a,
            "system_b": self.system_b,
            "axis": self.axis.value,
            "n": n,
            "wins_a": self.wins_a,
            "wins_b": self.wins_b,
            "win_pct_a": 100.0 * self.wins_a / n if n else None,
            "win_pct_b": 100.0 * self.wins_b / n if n else None,
            "p_value": binomial_p_value(self.wins_a, n) if n else None,
        }


def aggregate_results(
    results: Iterable[ComparisonResult], tasks: Sequence[ComparisonTask]
) -> list[dict[str, Any]]:
    """Win percentages and significance per (system pair, axis).

    Sides are unshuffled through each task's hidden assignment; duplicate
    submissions by the same judge on the same task keep only the last one.
    Cells with no results are reported empty rather than fabricated.
    """
    by_id = {t.task_id: t for t in tasks}
    latest: dict[tuple[str, str], ComparisonResult] = {}
    for result in results:
        if result.task_id not in by_id:
            raise NotFoundError(f"result references unknown task {result.task_id}")
        latest[(result.task_id, result.judge_id)] = result

    cells: dict[tuple[str, str, Axis], PairCell] = {}
    for task in tasks:
        pair = tuple(sorted((task.left_system, task.right_system)))
        key = (pair[0], pair[1], task.axis)
        cells.setdefault(key, PairCell(pair[0], pair[1], task.axis))

    for (task_id, _), result in sorted(latest.items()):
        task = by_id[task_id]
        winner_system = (
            task.left_system if result.winner is Side.LEFT else task.right_system
        )
        pair = tuple(sorted((task.left_system, task.right_system)))
        cell = cells[(pair[0], pair[1], task.axis)]
        if winner_system == cell.system_a:
            cell.wins_a += 1
        else:
            cell.wins_b += 1

    return [
        cells[key].to_dict()
        for key in sorted(cells, key=lambda k: (k[0], k[1], k[2].value))
    ]


def render_matrix(cells: Sequence[dict[str, Any]]) -> str:
    """Plain-text win-percentage matrix, one block per axis."""
    blocks: list[str] = []
    axes = sorted({cell["axis"] for cell in cells})
    for axis in axes:
        axis_cells = [c for c in cells if c["axis"] == axis]
        systems = sorted(
            {c["system_a"] for c in axis_cells} | {c["system_b"] for c in axis_cells}
        )
        width = max(len(s) for s in systems) + 2
        lines = [f"[{axis}]"]
        header = " " * width + "".join(s.rjust(width) for s in systems)
        lines.append(header)
        for row in systems:
            cells_out = []
            for col in systems:
                if row == col:
                    cells_out.append("-".rjust(width))
                    continue
                a, b = sorted((row, col))
                cell = next(
                    (c for c in axis_cells if c["system_a"] == a and c["system_b"] == b),
                    None,
                )
                if cell is None or not cell["n"]:
                    cells_out.append("".rjust(width))
                    continue
                pct = cell["win_pct_a"] if row == a else cell["win_pct_b"]
                mark = "**" if (cell["p_value"] or 1.0) < 0.005 else ""
                cells_out.append(f"{pct:.0f}{mark}".rjust(width))
            lines.append(row.rjust(width) + "".join(cells_out))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)
