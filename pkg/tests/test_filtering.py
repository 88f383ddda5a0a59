from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chatweave.backends import TableScorerStub
from chatweave.errors import ProtocolError
from chatweave.filtering import (
    FilterWeights,
    load_bad_patterns,
    match_bad_patterns,
    rank_pool,
    similarity,
)
from chatweave.generation import CandidatePool, ChitChatCandidate, Position
from chatweave.textnorm import normalize

from .conftest import simple_dialogue

NO_DIVERSITY = FilterWeights(0.0, 0.0, 0.0)


def make_candidate(
    text: str, turn_index: int = 1, position: Position = Position.APPEND
) -> ChitChatCandidate:
    return ChitChatCandidate(
        candidate_id=f"c-{turn_index}-{position.value}-{abs(hash(text)) % 10**8}",
        dialogue_id="d1",
        turn_index=turn_index,
        text=text,
        position=position,
        source=("stub", "p0"),
    )


def make_pool(texts: list[str], frequency: dict[str, int] | None = None) -> CandidatePool:
    candidates = [make_candidate(t) for t in texts]
    if frequency is None:
        frequency = {}
        for t in texts:
            key = normalize(t)
            frequency[key] = frequency.get(key, 0) + 1
    return CandidatePool(dialogue_id="d1", candidates=candidates, frequency=frequency)


def test_bad_patterns_url() -> None:
    assert match_bad_patterns("Check http://x.co now") == ["url"]


def test_bad_patterns_clean_text() -> None:
    assert match_bad_patterns("I hear it's beautiful.") == []


def test_bad_patterns_physical_action() -> None:
    assert "physical_action" in match_bad_patterns("I can drive you there.")
    assert "physical_action" in match_bad_patterns("I'll meet you at the door.")


def test_bad_patterns_email_and_phone() -> None:
    assert "email" in match_bad_patterns("Write to me at bot@example.com")
    assert "phone" in match_bad_patterns("Call 415-555-0199 today")


def test_bad_patterns_length_and_non_ascii() -> None:
    long_text = " ".join(["word"] * 31)
    assert "too_long" in match_bad_patterns(long_text)
    assert "non_ascii" in match_bad_patterns("☃☃☃ hi ☃☃☃")


def test_load_bad_patterns(tmp_path) -> None:
    config = tmp_path / "patterns.txt"
    config.write_text(
        "# comment\n"
        "url regex https?://\\S+\n"
        "brands token acme globex\n"
    )
    patterns = load_bad_patterns(config)
    assert [p.name for p in patterns] == ["url", "brands"]
    assert match_bad_patterns("Acme is great", patterns) == ["brands"]


def test_load_bad_patterns_rejects_malformed_line(tmp_path) -> None:
    config = tmp_path / "patterns.txt"
    config.write_text("url https?://\n")
    with pytest.raises(ValueError):
        load_bad_patterns(config)


def test_similarity_identical_token_sets() -> None:
    assert similarity("I love penguins.", "I love penguins") == 1.0


def test_similarity_disjoint() -> None:
    assert similarity("hello there", "goodbye now") == 0.0


def test_similarity_half_overlap() -> None:
    assert similarity("I love penguins", "I love pandas") == 0.5


def test_similarity_both_empty_defined_zero() -> None:
    assert similarity("!!!", "...") == 0.0


def test_rank_pool_top_ten_by_posterior_with_zero_weights() -> None:
    texts = [f"candidate number {i} alpha" for i in range(12)]
    posteriors = {t: 0.99 - 0.05 * i for i, t in enumerate(texts)}
    pool = make_pool(texts)
    ranked = rank_pool(
        pool, None, TableScorerStub(posteriors), k=10, weights=NO_DIVERSITY
    )
    assert len(ranked) == 10
    assert [r.candidate.text for r in ranked] == texts[:10]
    assert [r.posterior for r in ranked] == sorted(
        (posteriors[t] for t in texts), reverse=True
    )[:10]


def test_rank_pool_returns_all_when_under_k() -> None:
    pool = make_pool(["one fine day", "two big cats", "three old maps"])
    ranked = rank_pool(pool, None, TableScorerStub({}, default=0.5), k=10)
    assert len(ranked) == 3


def test_rank_pool_punishes_high_frequency_duplicates() -> None:
    texts = ["You're welcome", "You're welcome", "Enjoy the show"]
    frequency = {"you're welcome": 40, "enjoy the show": 1}
    pool = CandidatePool(
        dialogue_id="d1",
        candidates=[
            make_candidate("You're welcome", position=Position.APPEND),
            make_candidate("You're welcome", position=Position.PREPEND),
            make_candidate("Enjoy the show", position=Position.APPEND),
        ],
        frequency=frequency,
    )
    posteriors = {t: 0.8 for t in texts}
    ranked = rank_pool(pool, None, TableScorerStub(posteriors), k=3)
    assert ranked[0].candidate.text == "Enjoy the show"


def test_rank_pool_never_keeps_bad_pattern_candidates() -> None:
    pool = make_pool(["Visit http://spam.example now", "A lovely evening ahead"])
    ranked = rank_pool(pool, None, TableScorerStub({}, default=0.9), k=10)
    assert [r.candidate.text for r in ranked] == ["A lovely evening ahead"]
    assert all(not r.bad_pattern_hits for r in ranked)


def test_rank_pool_rejects_out_of_range_posterior() -> None:
    pool = make_pool(["fine words here"])
    with pytest.raises(ProtocolError):
        rank_pool(pool, None, TableScorerStub({}, default=1.7), k=5)


def test_rank_pool_uses_similarity_to_augmented_response() -> None:
    dialogue = simple_dialogue(n_exchanges=1)
    echo = "System reply 0."
    fresh = "Completely unrelated words"
    pool = make_pool([echo, fresh])
    ranked = rank_pool(
        pool,
        dialogue,
        TableScorerStub({}, default=0.8),
        k=2,
        weights=FilterWeights(0.0, 0.0, 0.5),
    )
    assert ranked[0].candidate.text == fresh
    assert ranked[1].sim_to_response > 0.9


def test_rank_pool_per_turn_mode_cuts_each_turn() -> None:
    candidates = [
        make_candidate(f"turn one option {i} x", turn_index=1) for i in range(4)
    ] + [make_candidate(f"turn three option {i} y", turn_index=3) for i in range(4)]
    frequency = {normalize(c.text): 1 for c in candidates}
    pool = CandidatePool("d1", candidates, frequency)
    ranked = rank_pool(
        pool, None, TableScorerStub({}, default=0.5), k=2, per_turn=True
    )
    by_turn = {}
    for r in ranked:
        by_turn.setdefault(r.candidate.turn_index, []).append(r)
    assert {t: len(rs) for t, rs in by_turn.items()} == {1: 2, 3: 2}


@settings(max_examples=30, deadline=None)
@given(st.permutations(list(range(6))))
def test_rank_pool_invariant_under_input_permutation(order: list[int]) -> None:
    texts = [
        "a quiet night out",
        "a quiet night in",
        "what a lovely plan",
        "hope the weather holds",
        "sounds like a blast",
        "enjoy every minute",
    ]
    posteriors = {t: 0.5 + 0.07 * i for i, t in enumerate(texts)}
    base = make_pool(texts)
    shuffled = CandidatePool(
        dialogue_id="d1",
        candidates=[base.candidates[i] for i in order],
        frequency=base.frequency,
    )
    scorer = TableScorerStub(posteriors)
    want = [r.candidate.text for r in rank_pool(base, None, scorer, k=4)]
    got = [r.candidate.text for r in rank_pool(shuffled, None, scorer, k=4)]
    assert got == want


def brute_force_select(
    pool: CandidatePool, posteriors: dict[str, float], k: int, weights: FilterWeights
) -> list[str]:
    """Oracle: enumerate every selection order and pick the stepwise-best
    sequence under the same scoring, comparing lexicographically."""
    import itertools

    survivors = [c for c in pool.candidates if not match_bad_patterns(c.text)]
    max_count = max(pool.frequency.values(), default=0)

    def step_key(candidate, chosen):
        max_sim = max((similarity(candidate.text, s.text) for s in chosen), default=0.0)
        freq = pool.frequency.get(normalize(candidate.text), 1) / max_count if max_count else 0.0
        score = (
            posteriors.get(candidate.text, 0.5)
            - weights.frequency * freq
            - weights.cross_candidate * max_sim
            - weights.response * 0.0
        )
        tie = (
            candidate.turn_index,
            0 if candidate.position is Position.PREPEND else 1,
            candidate.text,
        )
        return (-score, tie)

    m = min(k, len(survivors))
    best_sequence = None
    best_key = None
    for sequence in itertools.permutations(survivors, m):
        key = []
        chosen: list = []
        for candidate in sequence:
            key.append(step_key(candidate, chosen))
            chosen.append(candidate)
        if best_key is None or key < best_key:
            best_key = key
            best_sequence = sequence
    return [c.text for c in (best_sequence or ())]


def test_rank_pool_matches_brute_force_on_small_pools() -> None:
    rng = random.Random(11)
    vocabulary = "night out plan lovely weather blast minute quiet show trip".split()
    for _ in range(20):
        texts = list(
            {
                " ".join(rng.sample(vocabulary, rng.randint(2, 4)))
                for _ in range(rng.randint(2, 6))
            }
        )
        posteriors = {t: round(rng.random(), 3) for t in texts}
        pool = make_pool(texts)
        weights = FilterWeights(0.3, 0.3, 0.2)
        ranked = rank_pool(pool, None, TableScorerStub(posteriors), k=4, weights=weights)
        assert [r.candidate.text for r in ranked] == brute_force_select(
            pool, posteriors, 4, weights
        )
