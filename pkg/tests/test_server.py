from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from chatweave.annotation import AnnotationTask
from chatweave.generation import ChitChatCandidate, Position
from chatweave.pairwise import AXIS_PROMPTS, Axis, build_pairs, transcript_of
from chatweave.server import AnnotationService, create_app

from .conftest import simple_dialogue


def make_task(cid: str, text: str) -> AnnotationTask:
    return AnnotationTask(
        task_id=f"annot-{cid}",
        candidate=ChitChatCandidate(
            candidate_id=cid,
            dialogue_id="d1",
            turn_index=1,
            text=text,
            position=Position.APPEND,
            source=("stub", "p0"),
        ),
        context=(("user", "Hi"), ("system", "Hello")),
        batch_index=0,
    )


@pytest.fixture()
def client(tmp_path) -> TestClient:
    tasks = [make_task(f"c{i}", f"Candidate text {i}.") for i in range(4)]
    transcripts = {
        "sysa": {"d1": transcript_of(simple_dialogue(2, "d1"))},
        "sysb": {"d1": transcript_of(simple_dialogue(2, "d1"))},
    }
    pairs = build_pairs(transcripts, axes=(Axis.ENGAGING, Axis.HUMANLIKE), seed=1)
    service = AnnotationService.from_dir(tmp_path, tasks=tasks, comparison_tasks=pairs)
    return TestClient(create_app(service))


def test_tasks_served_until_annotated(client) -> None:
    response = client.get("/tasks", params={"annotator": "a1", "n": 2})
    assert response.status_code == 200
    tasks = response.json()["tasks"]
    assert len(tasks) == 2
    first = tasks[0]["candidate"]["candidate_id"]

    submitted = client.post(
        "/annotations",
        json={
            "candidate_id": first,
            "annotator_id": "a1",
            "label": "GOOD",
            "justifications": ["SOCIAL"],
        },
    )
    assert submitted.status_code == 200

    remaining = client.get("/tasks", params={"annotator": "a1", "n": 10}).json()["tasks"]
    assert first not in [t["candidate"]["candidate_id"] for t in remaining]
    assert len(remaining) == 3

    other = client.get("/tasks", params={"annotator": "a2", "n": 10}).json()["tasks"]
    assert len(other) == 4  # queue is per annotator


def test_tasks_require_annotator_id(client) -> None:
    assert client.get("/tasks").status_code == 422


def test_annotation_schema_violation_is_422(client) -> None:
    response = client.post(
        "/annotations",
        json={
            "candidate_id": "c0",
            "annotator_id": "a1",
            "label": "BAD",
            "justifications": ["SOCIAL"],
        },
    )
    assert response.status_code == 422
    assert "SOCIAL" in response.json()["detail"]


def test_annotation_neither_justification_accepted(client) -> None:
    response = client.post(
        "/annotations",
        json={"candidate_id": "c1", "annotator_id": "a1", "label": "GOOD"},
    )
    assert response.status_code == 200


def test_annotation_unknown_candidate_is_404(client) -> None:
    response = client.post(
        "/annotations",
        json={"candidate_id": "ghost", "annotator_id": "a1", "label": "GOOD"},
    )
    assert response.status_code == 404


def test_annotation_unknown_label_is_422(client) -> None:
    response = client.post(
        "/annotations",
        json={"candidate_id": "c0", "annotator_id": "a1", "label": "MAYBE"},
    )
    assert response.status_code == 422


def test_stats_and_kappa_endpoints(client) -> None:
    for annotator in ("a1", "a2"):
        for cid, label in (("c0", "GOOD"), ("c1", "BAD")):
            client.post(
                "/annotations",
                json={"candidate_id": cid, "annotator_id": annotator, "label": label},
            )
    stats = client.get("/stats").json()
    assert stats["n_candidates"] == 2
    assert stats["labels"]["GOOD"]["count"] == 1
    kappa = client.get("/kappa").json()
    assert kappa["kappa"] == 1.0
    assert kappa["items"] == 2


def test_kappa_with_no_annotations(client) -> None:
    response = client.get("/kappa")
    assert response.status_code == 200
    assert response.json()["kappa"] is None


def test_comparison_tasks_hide_system_identity(client) -> None:
    response = client.get("/tasks", params={"type": "comparison", "judge": "j1", "n": 5})
    assert response.status_code == 200
    tasks = response.json()["tasks"]
    assert len(tasks) == 2
    for task in tasks:
        assert "left_system" not in task and "right_system" not in task
        assert task["prompt"] in {
            AXIS_PROMPTS[Axis.ENGAGING],
            AXIS_PROMPTS[Axis.HUMANLIKE],
        }


def test_judgment_flow_and_dedup_queue(client) -> None:
    [task, _] = client.get(
        "/tasks", params={"type": "comparison", "judge": "j1", "n": 5}
    ).json()["tasks"]
    posted = client.post(
        "/judgments",
        json={"task_id": task["task_id"], "judge_id": "j1", "winner": "LEFT"},
    )
    assert posted.status_code == 200
    remaining = client.get(
        "/tasks", params={"type": "comparison", "judge": "j1", "n": 5}
    ).json()["tasks"]
    assert task["task_id"] not in [t["task_id"] for t in remaining]
    assert len(remaining) == 1


def test_comparisons_stop_serving_at_judgment_cap(tmp_path) -> None:
    transcripts = {
        "sysa": {"d1": transcript_of(simple_dialogue(2, "d1"))},
        "sysb": {"d1": transcript_of(simple_dialogue(2, "d1"))},
    }
    pairs = build_pairs(transcripts, axes=(Axis.ENGAGING,), seed=1)
    service = AnnotationService.from_dir(
        tmp_path, comparison_tasks=pairs, judgments_per_task=2
    )
    test_client = TestClient(create_app(service))
    task_id = pairs[0].task_id

    for judge in ("j1", "j2"):
        served = test_client.get(
            "/tasks", params={"type": "comparison", "judge": judge, "n": 5}
        ).json()["tasks"]
        assert [t["task_id"] for t in served] == [task_id]
        test_client.post(
            "/judgments", json={"task_id": task_id, "judge_id": judge, "winner": "LEFT"}
        )

    served = test_client.get(
        "/tasks", params={"type": "comparison", "judge": "j3", "n": 5}
    ).json()["tasks"]
    assert served == []  # two judges already covered it


def test_judgment_unknown_task_404(client) -> None:
    response = client.post(
        "/judgments", json={"task_id": "nope", "judge_id": "j1", "winner": "LEFT"}
    )
    assert response.status_code == 404


def test_judgment_invalid_winner_422(client) -> None:
    response = client.post(
        "/judgments", json={"task_id": "t", "judge_id": "j1", "winner": "BOTH"}
    )
    assert response.status_code == 422
