from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chatweave.annotation import AnnotationRecord, Label, aggregate
from chatweave.codec import (
    Flavor,
    SegmentKind,
    encode,
    expand_training_set,
    parse_generation,
)
from chatweave.corpus import ActionTriplet, BeliefTriplet, Speaker
from chatweave.errors import UnparseableError
from chatweave.generation import ChitChatCandidate, Position

from .conftest import make_dialogue, make_turn

HIST = [("user", "Find food in San Jose.")]
BELIEF = [BeliefTriplet("restaurants", "city", "San Jose")]
ACTIONS = [ActionTriplet("restaurants", "inform", "city")]


def test_baseline_encoding_matches_hand_written_string() -> None:
    seq = encode(Flavor.SIMPLETOD, HIST, BELIEF, ACTIONS, "Found it.")
    assert seq.text == (
        "<|history|> user: Find food in San Jose. "
        "<|belief|> restaurants city San Jose "
        "<|action|> restaurants inform city "
        "<|response|> Found it."
    )


def test_augmented_flavor_without_candidate_is_byte_identical_to_baseline() -> None:
    baseline = encode(Flavor.SIMPLETOD, HIST, BELIEF, ACTIONS, "Found it.")
    plus = encode(Flavor.SIMPLETOD_PLUS, HIST, BELIEF, ACTIONS, "Found it.")
    assert plus.text == baseline.text


def test_append_candidate_puts_candidate_segment_last() -> None:
    seq = encode(
        Flavor.SIMPLETOD_PLUS,
        HIST,
        BELIEF,
        ACTIONS,
        "Found it.",
        candidate=("Enjoy!", Position.APPEND),
    )
    kinds = [kind for kind, _ in seq.segments]
    assert kinds == [
        SegmentKind.HISTORY,
        SegmentKind.BELIEF,
        SegmentKind.ACTIONS,
        SegmentKind.CHITCHAT_ACT,
        SegmentKind.RESPONSE,
        SegmentKind.CANDIDATE,
    ]
    assert seq.text.endswith("<|response|> Found it. <|candidate|> Enjoy!")


def test_prepend_candidate_order() -> None:
    seq = encode(
        Flavor.SIMPLETOD_PLUS,
        HIST,
        BELIEF,
        ACTIONS,
        "Found it.",
        candidate=("Enjoy!", Position.PREPEND),
    )
    kinds = [kind for kind, _ in seq.segments]
    assert kinds == [
        SegmentKind.HISTORY,
        SegmentKind.BELIEF,
        SegmentKind.CHITCHAT_ACT,
        SegmentKind.ACTIONS,
        SegmentKind.CANDIDATE,
        SegmentKind.RESPONSE,
    ]


def test_rewriter_inputs_sit_between_history_and_belief() -> None:
    seq = encode(
        Flavor.REWRITER,
        HIST,
        BELIEF,
        ACTIONS,
        "Found it.",
        rewriter_inputs=("Found it.", "Enjoy!"),
    )
    kinds = [kind for kind, _ in seq.segments]
    assert kinds[:4] == [
        SegmentKind.HISTORY,
        SegmentKind.TASK_RESPONSE_IN,
        SegmentKind.CHITCHAT_IN,
        SegmentKind.BELIEF,
    ]


def test_encode_rejects_candidate_on_baseline() -> None:
    with pytest.raises(ValueError):
        encode(
            Flavor.SIMPLETOD,
            HIST,
            BELIEF,
            ACTIONS,
            "x",
            candidate=("y", Position.APPEND),
        )


def test_encode_rejects_rewriter_without_inputs() -> None:
    with pytest.raises(ValueError):
        encode(Flavor.REWRITER, HIST, BELIEF, ACTIONS, "x")


def test_parse_round_trips_encoder_output() -> None:
    seq = encode(
        Flavor.SIMPLETOD_PLUS,
        HIST,
        BELIEF,
        ACTIONS,
        "Found it.",
        candidate=("Enjoy!", Position.APPEND),
    )
    parsed = parse_generation(Flavor.SIMPLETOD_PLUS, seq.text)
    assert parsed.belief == frozenset(BELIEF)
    assert parsed.actions == frozenset(ACTIONS)
    assert parsed.has_chitchat_act is True
    assert parsed.response == "Found it. Enjoy!"
    assert parsed.dropped_triplets == 0


def test_parse_drops_malformed_triplet_with_warning_count() -> None:
    text = (
        "<|history|> user: hi "
        "<|belief|> restaurants city San Jose, restaurants city, hotels area north "
        "<|action|> restaurants inform city "
        "<|response|> ok"
    )
    parsed = parse_generation(Flavor.SIMPLETOD, text)
    assert parsed.belief == frozenset(
        {
            BeliefTriplet("restaurants", "city", "San Jose"),
            BeliefTriplet("hotels", "area", "north"),
        }
    )
    assert parsed.dropped_triplets == 1


def test_parse_rejects_text_without_delimiters() -> None:
    with pytest.raises(UnparseableError):
        parse_generation(Flavor.SIMPLETOD, "just some free text")


def test_chitchat_marker_appears_iff_candidate_present() -> None:
    plain = encode(Flavor.SIMPLETOD_PLUS, HIST, BELIEF, ACTIONS, "Found it.")
    augmented = encode(
        Flavor.SIMPLETOD_PLUS,
        HIST,
        BELIEF,
        ACTIONS,
        "Found it.",
        candidate=("Nice!", Position.PREPEND),
    )
    assert "<|chitchat|>" not in plain.text
    assert "<|chitchat|>" in augmented.text


# -- randomized round trip ---------------------------------------------------

_word = st.text(alphabet="abcdefghij", min_size=1, max_size=6)
_value = st.lists(_word, min_size=1, max_size=3).map(" ".join)
_belief_sets = st.sets(
    st.builds(BeliefTriplet, _word, _word, _value), max_size=4
)
_action_sets = st.sets(
    st.builds(ActionTriplet, _word, _word, st.one_of(st.just(""), _word)), max_size=4
)
_texts = st.lists(_word, min_size=1, max_size=5).map(" ".join)
_flavors = st.sampled_from(list(Flavor))
_positions = st.sampled_from(list(Position))


@settings(max_examples=150, deadline=None)
@given(
    flavor=_flavors,
    belief=_belief_sets,
    actions=_action_sets,
    response=_texts,
    candidate_text=st.one_of(st.none(), _texts),
    position=_positions,
    chitchat_in=_texts,
)
def test_round_trip_over_randomized_structures(
    flavor, belief, actions, response, candidate_text, position, chitchat_in
) -> None:
    candidate = None
    if candidate_text is not None and flavor is not Flavor.SIMPLETOD:
        candidate = (candidate_text, position)
    rewriter_inputs = (response, chitchat_in) if flavor is Flavor.REWRITER else None
    seq = encode(
        flavor,
        [("user", "hello there")],
        belief,
        actions,
        response,
        candidate=candidate,
        rewriter_inputs=rewriter_inputs,
    )
    parsed = parse_generation(flavor, seq.text)
    assert parsed.belief == frozenset(belief)
    assert parsed.actions == frozenset(actions)
    assert parsed.has_chitchat_act == (candidate is not None)
    if candidate is None:
        assert parsed.response == response
    elif position is Position.PREPEND:
        assert parsed.response == f"{candidate[0]} {response}"
    else:
        assert parsed.response == f"{response} {candidate[0]}"


# -- training-set expansion ---------------------------------------------------


def _labeled(text: str, position: Position, good: bool, turn_index: int = 1):
    candidate = ChitChatCandidate(
        candidate_id=f"c-{text}",
        dialogue_id="d1",
        turn_index=turn_index,
        text=text,
        position=position,
        source=("stub", "p0"),
    )
    record = AnnotationRecord(
        candidate_id=candidate.candidate_id,
        annotator_id="a1",
        label=Label.GOOD if good else Label.BAD,
    )
    return aggregate(candidate, [record])


def _dialogue():
    return make_dialogue(
        [
            make_turn(0, Speaker.USER, "Hi", belief=[("restaurants", "city", "SF")]),
            make_turn(
                1,
                Speaker.SYSTEM,
                "Sure thing.",
                actions=[("restaurants", "inform", "city")],
            ),
            make_turn(2, Speaker.USER, "Thanks", belief=[("restaurants", "city", "SF")]),
            make_turn(3, Speaker.SYSTEM, "Enjoy.", actions=[("restaurants", "goodbye", "")]),
        ]
    )


def test_expand_plus_one_sequence_per_good_candidate() -> None:
    labeled = {
        1: [
            _labeled("Nice one!", Position.APPEND, True),
            _labeled("Great pick.", Position.PREPEND, True),
            _labeled("Love that!", Position.APPEND, True),
        ]
    }
    sequences = expand_training_set(_dialogue(), labeled, Flavor.SIMPLETOD_PLUS)
    by_turn = [s for s in sequences if s.turn_index == 1]
    assert len(by_turn) == 3
    assert len(sequences) == 4  # turn 3 has no candidates -> one plain sequence


def test_expand_plus_plain_sequence_when_no_goods() -> None:
    labeled = {1: [_labeled("Meh.", Position.APPEND, False)]}
    sequences = expand_training_set(_dialogue(), labeled, Flavor.SIMPLETOD_PLUS)
    assert len(sequences) == 2
    assert all("<|chitchat|>" not in s.text for s in sequences)


def test_expand_count_matches_sum_of_max_goods_or_one() -> None:
    labeled = {
        1: [
            _labeled("a nice add", Position.APPEND, True),
            _labeled("b fine add", Position.APPEND, True),
        ],
        3: [_labeled("c bad add", Position.PREPEND, False, turn_index=3)],
    }
    sequences = expand_training_set(_dialogue(), labeled, Flavor.SIMPLETOD_PLUS)
    assert len(sequences) == max(2, 1) + max(0, 1)


def test_expand_rewriter_uses_every_candidate_as_input() -> None:
    labeled = {
        1: [
            _labeled("good one", Position.APPEND, True),
            _labeled("good two", Position.PREPEND, True),
            _labeled("bad one", Position.APPEND, False),
        ]
    }
    sequences = expand_training_set(_dialogue(), labeled, Flavor.REWRITER)
    turn_one = [s for s in sequences if s.turn_index == 1]
    assert len(turn_one) == 3
    chitchat_inputs = {
        dict(s.segments)[SegmentKind.CHITCHAT_IN] for s in turn_one
    }
    assert chitchat_inputs == {"good one", "good two", "bad one"}
    bad_input = next(
        s for s in turn_one if dict(s.segments)[SegmentKind.CHITCHAT_IN] == "bad one"
    )
    # bad chit-chat input still trains toward a good augmentation
    assert dict(bad_input.segments)[SegmentKind.CANDIDATE] == "good one"


def test_expand_rewriter_without_goods_targets_plain_response() -> None:
    labeled = {1: [_labeled("bad add", Position.APPEND, False)]}
    sequences = expand_training_set(_dialogue(), labeled, Flavor.REWRITER)
    turn_one = [s for s in sequences if s.turn_index == 1]
    assert len(turn_one) == 1
    assert "<|chitchat|>" not in turn_one[0].text


def test_expand_baseline_is_one_per_system_turn() -> None:
    sequences = expand_training_set(_dialogue(), {}, Flavor.SIMPLETOD)
    assert len(sequences) == 2
    assert [s.turn_index for s in sequences] == [1, 3]
    assert all(s.dialogue_id == "d1" for s in sequences)
