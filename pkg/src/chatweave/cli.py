"""Command-line pipeline.

Commands mirror the pipeline stages: ingest, generate, filter,
export-tasks, serve, stats, kappa, build-sequences, arrange, evaluate, and
the acute sample/build-pairs/aggregate trio. Every command is idempotent
given identical inputs and seed, artifacts carry provenance headers, and
errors leave machine-readable records on stderr.

Precedence for settings: environment variable, then flag, then config
file, then built-in default.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import click

from .annotation import (
    AnnotationStore,
    AnnotationTask,
    agreement_report,
    corpus_stats,
    export_tasks,
)
from .arranging import arrange_dialogue
from .artifacts import DirectoryLock, read_artifact, write_artifact
from .backends import (
    DecodingParams,
    resolve_choice_scorer,
    resolve_generators,
    resolve_scorer,
)
from .codec import Flavor, expand_training_set
from .corpus import (
    ActionTriplet,
    BeliefTriplet,
    CorpusFormat,
    Dialogue,
    Speaker,
    delexicalize,
    ingest_corpus,
    validate_corpus,
)
from .errors import ChatweaveError, UndefinedAgreementError
from .filtering import FilterWeights, load_bad_patterns, rank_pool, DEFAULT_BAD_PATTERNS
from .generation import CandidatePool, ChitChatCandidate, run_generation
from .metrics import DialogueEval, build_report, render_table
from .pairwise import (
    Axis,
    ComparisonResult,
    ComparisonTask,
    aggregate_results,
    build_pairs,
    render_matrix,
    sample_eval_dialogues,
)
from .server import AnnotationService, create_app
from .store import RecordLog

FLAVORS = {
    "simpletod": Flavor.SIMPLETOD,
    "plus": Flavor.SIMPLETOD_PLUS,
    "rewriter": Flavor.REWRITER,
}


class Settings:
    def __init__(self, config: dict[str, Any], seed: int):
        self.config = config
        self.seed = seed

    def get(self, name: str, flag: Any, env: str | None = None, default: Any = None) -> Any:
        if env and os.environ.get(env):
            return os.environ[env]
        if flag is not None:
            return flag
        if name in self.config:
            return self.config[name]
        return default


def _fail(error: Exception, code: int = 1) -> None:
    record = {"error": type(error).__name__, "message": str(error)}
    click.echo(json.dumps(record, sort_keys=True), err=True)
    sys.exit(code)


def _load_corpus(path: str | Path) -> list[Dialogue]:
    return [Dialogue.from_dict(d) for d in read_artifact(path)]


def _load_pools(path: str | Path) -> list[CandidatePool]:
    return [CandidatePool.from_dict(d) for d in read_artifact(path)]


def _load_tasks(path: str | Path) -> list[AnnotationTask]:
    return [AnnotationTask.from_dict(d) for d in read_artifact(path)]


def _labeled_by_dialogue_turn(
    store: AnnotationStore, tasks: Sequence[AnnotationTask]
) -> dict[str, dict[int, list]]:
    candidates = {t.candidate.candidate_id: t.candidate for t in tasks}
    grouped: dict[str, dict[int, list]] = {}
    for item in store.labeled(candidates):
        by_turn = grouped.setdefault(item.candidate.dialogue_id, {})
        by_turn.setdefault(item.candidate.turn_index, []).append(item)
    return grouped


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None, help="RNG seed recorded in artifacts.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None, seed: int | None) -> None:
    """Chit-chat augmentation pipeline for task-oriented dialogue corpora."""
    config: dict[str, Any] = {}
    if config_path:
        config = json.loads(Path(config_path).read_text(encoding="utf-8"))
    if seed is None:
        seed = int(os.environ.get("CHATWEAVE_SEED", config.get("seed", 0)))
    ctx.obj = Settings(config, seed)


@main.command()
@click.argument("corpus_in", type=click.Path(exists=True))
@click.option("--format", "format_name", type=click.Choice([f.value for f in CorpusFormat]), default="sgd")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_obj
def ingest(settings: Settings, corpus_in: str, format_name: str, out_path: str) -> None:
    """Parse a raw corpus into the canonical line-delimited form."""
    try:
        raw = Path(corpus_in).read_bytes()
        dialogues = ingest_corpus(raw, CorpusFormat(format_name))
        violations = validate_corpus(dialogues)
        if violations:
            raise ChatweaveError(f"{len(violations)} validation violations")
        with DirectoryLock(Path(out_path).parent):
            write_artifact(
                out_path,
                (d.to_dict() for d in dialogues),
                settings.seed,
                inputs={"corpus": corpus_in},
            )
        click.echo(f"ingested {len(dialogues)} dialogues -> {out_path}")
    except ChatweaveError as exc:
        _fail(exc)


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--generator-urls", "generator_urls", default=None)
@click.option("--params", "params_path", type=click.Path(exists=True), default=None,
              help="JSON list of decoding parameter sets.")
@click.option("--max-in-flight", type=int, default=8)
@click.pass_obj
def generate(
    settings: Settings,
    corpus_path: str,
    out_path: str,
    generator_urls: str | None,
    params_path: str | None,
    max_in_flight: int,
) -> None:
    """Generate chit-chat candidate pools for every dialogue."""
    try:
        urls = settings.get("generator_urls", generator_urls, env="GENERATOR_URLS")
        backends = resolve_generators(urls)
        if params_path:
            grid = [
                DecodingParams(**p)
                for p in json.loads(Path(params_path).read_text(encoding="utf-8"))
            ]
        else:
            grid = [DecodingParams(seed=settings.seed)]
        dialogues = _load_corpus(corpus_path)
        pools = run_generation(dialogues, backends, grid, max_in_flight=max_in_flight)
        with DirectoryLock(Path(out_path).parent):
            write_artifact(
                out_path,
                (p.to_dict() for p in pools),
                settings.seed,
                inputs={"corpus": corpus_path},
            )
        n = sum(len(p.candidates) for p in pools)
        click.echo(f"generated {n} candidates over {len(pools)} dialogues -> {out_path}")
    except ChatweaveError as exc:
        _fail(exc)


@main.command("filter")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--pools", "pools_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--scorer-url", default=None)
@click.option("--k", type=int, default=None)
@click.option("--w-freq", type=float, default=None)
@click.option("--w-cross", type=float, default=None)
@click.option("--w-resp", type=float, default=None)
@click.option("--per-turn", is_flag=True, default=False)
@click.option("--bad-patterns", "patterns_path", type=click.Path(exists=True), default=None)
@click.pass_obj
def filter_command(
    settings: Settings,
    corpus_path: str,
    pools_path: str,
    out_path: str,
    scorer_url: str | None,
    k: int | None,
    w_freq: float | None,
    w_cross: float | None,
    w_resp: float | None,
    per_turn: bool,
    patterns_path: str | None,
) -> None:
    """Score, diversify, and cut candidate pools to the top k."""
    try:
        scorer = resolve_scorer(settings.get("scorer_url", scorer_url, env="SCORER_URL"))
        weights = FilterWeights(
            frequency=float(settings.get("w_freq", w_freq, default=0.3)),
            cross_candidate=float(settings.get("w_cross", w_cross, default=0.3)),
            response=float(settings.get("w_resp", w_resp, default=0.2)),
        )
        k_value = int(settings.get("k", k, default=10))
        patterns = (
            load_bad_patterns(patterns_path) if patterns_path else DEFAULT_BAD_PATTERNS
        )
        dialogues = {d.id: d for d in _load_corpus(corpus_path)}
        records = []
        for pool in _load_pools(pools_path):
            ranked = rank_pool(
                pool,
                dialogues.get(pool.dialogue_id),
                scorer,
                k=k_value,
                weights=weights,
                patterns=patterns,
                per_turn=per_turn,
            )
            records.append(
                {
                    "dialogue_id": pool.dialogue_id,
                    "ranked": [r.to_dict() for r in ranked],
                }
            )
        with DirectoryLock(Path(out_path).parent):
            write_artifact(
                out_path,
                records,
                settings.seed,
                inputs={"corpus": corpus_path, "pools": pools_path},
            )
        n = sum(len(r["ranked"]) for r in records)
        click.echo(f"kept {n} candidates -> {out_path}")
    except ChatweaveError as exc:
        _fail(exc)


@main.command("export-tasks")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--ranked", "ranked_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--batch-size", type=int, default=10)
@click.pass_obj
def export_tasks_command(
    settings: Settings, corpus_path: str, ranked_path: str, out_path: str, batch_size: int
) -> None:
    """Bundle filtered candidates into annotation task batches."""
    try:
        dialogues = {d.id: d for d in _load_corpus(corpus_path)}
        contexts = {
            did: [(t.speaker.value.lower(), t.utterance) for t in d.turns]
            for did, d in dialogues.items()
        }
        candidates = [
            ChitChatCandidate.from_dict(r["candidate"])
            for record in read_artifact(ranked_path)
            for r in record["ranked"]
        ]
        batches = export_tasks(candidates, batch_size, contexts)
        with DirectoryLock(Path(out_path).parent):
            write_artifact(
                out_path,
                (t.to_dict() for batch in batches for t in batch),
                settings.seed,
                inputs={"corpus": corpus_path, "ranked": ranked_path},
            )
        n = sum(len(b) for b in batches)
        click.echo(f"exported {n} tasks in {len(batches)} batches -> {out_path}")
    except ChatweaveError as exc:
        _fail(exc)


@main.command()
@click.option("--tasks", "tasks_path", type=click.Path(exists=True), default=None)
@click.option("--pairs", "pairs_path", type=click.Path(exists=True), default=None)
@click.option("--data-dir", "data_dir", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8400)
@click.option("--judgments-per-task", type=int, default=1,
              help="Distinct judges to collect per comparison task.")
def serve(
    tasks_path: str | None,
    pairs_path: str | None,
    data_dir: str,
    host: str,
    port: int,
    judgments_per_task: int,
) -> None:
    """Run the annotation and judging HTTP API."""
    import uvicorn

    tasks = _load_tasks(tasks_path) if tasks_path else []
    pairs = (
        [ComparisonTask.from_dict(d) for d in read_artifact(pairs_path)]
        if pairs_path
        else []
    )
    service = AnnotationService.from_dir(
        data_dir,
        tasks=tasks,
        comparison_tasks=pairs,
        judgments_per_task=judgments_per_task,
    )
    uvicorn.run(create_app(service), host=host, port=port, log_level="warning")


@main.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--tasks", "tasks_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_obj
def stats(settings: Settings, log_path: str, tasks_path: str, out_path: str) -> None:
    """Corpus statistics over aggregated annotations."""
    try:
        tasks = _load_tasks(tasks_path)
        store = AnnotationStore(RecordLog(log_path))
        labeled = store.labeled({t.candidate.candidate_id: t.candidate for t in tasks})
        report = corpus_stats(labeled).to_dict()
        with DirectoryLock(Path(out_path).parent):
            write_artifact(
                out_path,
                [report],
                settings.seed,
                inputs={"log": log_path, "tasks": tasks_path},
            )
        click.echo(json.dumps(report, sort_keys=True))
    except ChatweaveError as exc:
        _fail(exc)


@main.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_obj
def kappa(settings: Settings, log_path: str, out_path: str) -> None:
    """Inter-annotator agreement over the annotation log."""
    try:
        store = AnnotationStore(RecordLog(log_path))
        ratings = {
            cid: [r.label.value for r in records]
            for cid, records in store.records_by_candidate().items()
        }
        report = agreement_report(ratings)
        with DirectoryLock(Path(out_path).parent):
            write_artifact(out_path, [report], settings.seed, inputs={"log": log_path})
        click.echo(json.dumps(report, sort_keys=True))
    except (ChatweaveError, UndefinedAgreementError) as exc:
        _fail(exc)


@main.command("build-sequences")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--tasks", "tasks_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--flavor", "flavor_name", type=click.Choice(sorted(FLAVORS)), required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_obj
def build_sequences(
    settings: Settings,
    corpus_path: str,
    tasks_path: str,
    log_path: str,
    flavor_name: str,
    out_path: str,
) -> None:
    """Emit training sequences for one model flavor."""
    try:
        flavor = FLAVORS[flavor_name]
        dialogues = _load_corpus(corpus_path)
        tasks = _load_tasks(tasks_path)
        store = AnnotationStore(RecordLog(log_path))
        labeled = _labeled_by_dialogue_turn(store, tasks)
        records = []
        for dialogue in dialogues:
            for seq in expand_training_set(dialogue, labeled.get(dialogue.id, {}), flavor):
                records.append(
                    {
                        "flavor": seq.flavor.value,
                        "text": seq.text,
                        "dialogue_id": seq.dialogue_id,
                        "turn_index": seq.turn_index,
                    }
                )
        with DirectoryLock(Path(out_path).parent):
            write_artifact(
                out_path,
                records,
                settings.seed,
                inputs={"corpus": corpus_path, "tasks": tasks_path, "log": log_path},
            )
        click.echo(f"wrote {len(records)} sequences -> {out_path}")
    except ChatweaveError as exc:
        _fail(exc)


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--arranger-scorer-url", "chooser_url", default=None)
@click.option("--generator-urls", "generator_urls", default=None,
              help="Chit-chat source used for each system turn.")
@click.option("--max-injection-frequency", type=float, default=None)
@click.option("--gate-candidate-turns-only", is_flag=True, default=False,
              help="Count only chit-chat-bearing turns in the gate denominator.")
@click.pass_obj
def arrange(
    settings: Settings,
    corpus_path: str,
    out_path: str,
    chooser_url: str | None,
    generator_urls: str | None,
    max_injection_frequency: float | None,
    gate_candidate_turns_only: bool,
) -> None:
    """Batch inference: arrange task and chit-chat responses per turn."""
    try:
        chooser = resolve_choice_scorer(
            settings.get("arranger_scorer_url", chooser_url, env="ARRANGER_SCORER_URL")
        )
        urls = settings.get("generator_urls", generator_urls, env="GENERATOR_URLS")
        generator = resolve_generators(urls)[0]
        params = DecodingParams(seed=settings.seed)
        threshold = settings.get(
            "max_injection_frequency", max_injection_frequency, default=None
        )
        threshold = float(threshold) if threshold is not None else None
        records = []
        for dialogue in _load_corpus(corpus_path):
            histories: dict[int, list[tuple[str, str]]] = {}
            task_responses: dict[int, str] = {}
            chitchats: dict[int, str] = {}
            for turn in dialogue.system_turns():
                history = [
                    (t.speaker.value.lower(), t.utterance)
                    for t in dialogue.turns[: turn.index]
                ]
                histories[turn.index] = history
                task_responses[turn.index] = delexicalize(turn) or turn.utterance
                chitchats[turn.index] = generator.generate(history, "new_turn", params)
            arranged = arrange_dialogue(
                histories,
                task_responses,
                chitchats,
                chooser,
                max_injection_frequency=threshold,
                gate_counts_candidate_turns_only=gate_candidate_turns_only,
            )
            by_index = {a.turn_index: a.arrangement for a in arranged}
            turns = []
            for turn in dialogue.turns:
                if turn.index in by_index:
                    arrangement = by_index[turn.index]
                    turns.append(
                        {
                            "speaker": "system",
                            "text": arrangement.text,
                            "augmented": arrangement.choice.value != "TASK_ONLY",
                            "choice": arrangement.choice.value,
                        }
                    )
                else:
                    turns.append(
                        {"speaker": turn.speaker.value.lower(), "text": turn.utterance}
                    )
            records.append({"dialogue_id": dialogue.id, "turns": turns})
        with DirectoryLock(Path(out_path).parent):
            write_artifact(
                out_path, records, settings.seed, inputs={"corpus": corpus_path}
            )
        click.echo(f"arranged {len(records)} dialogues -> {out_path}")
    except ChatweaveError as exc:
        _fail(exc)


def _belief_from_lists(items: Sequence[Sequence[str]]) -> frozenset[BeliefTriplet]:
    return frozenset(BeliefTriplet(*t) for t in items)


def _actions_from_lists(items: Sequence[Sequence[str]]) -> frozenset[ActionTriplet]:
    return frozenset(ActionTriplet(*t) for t in items)


@main.command()
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--augmented", "augmented_path", type=click.Path(exists=True), default=None,
              help="Transcript file whose system responses serve as the second BLEU reference.")
@click.option("--train-services", "train_services_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_obj
def evaluate(
    settings: Settings,
    pred_path: str,
    gold_path: str,
    augmented_path: str | None,
    train_services_path: str | None,
    out_path: str,
) -> None:
    """Automatic metrics for per-turn predictions against a gold corpus."""
    try:
        gold = {d.id: d for d in _load_corpus(gold_path)}
        augmented: dict[str, dict[int, str]] = {}
        if augmented_path:
            for record in read_artifact(augmented_path):
                augmented[record["dialogue_id"]] = {
                    i: t["text"]
                    for i, t in enumerate(record["turns"])
                    if t["speaker"] == "system"
                }
        items = []
        for record in read_artifact(pred_path):
            dialogue = gold.get(record["dialogue_id"])
            if dialogue is None:
                raise ChatweaveError(f"prediction for unknown dialogue {record['dialogue_id']}")
            by_index = {t["index"]: t for t in record["turns"]}
            pred_belief, gold_belief = [], []
            pred_actions, gold_actions = [], []
            pred_resp, gold_resp, aug_resp, flags = [], [], [], []
            for turn in dialogue.turns:
                pred_turn = by_index.get(turn.index, {})
                if turn.speaker is Speaker.USER:
                    pred_belief.append(_belief_from_lists(pred_turn.get("belief", [])))
                    gold_belief.append(turn.belief)
                else:
                    pred_actions.append(_actions_from_lists(pred_turn.get("actions", [])))
                    gold_actions.append(turn.actions)
                    pred_resp.append(pred_turn.get("response", ""))
                    gold_resp.append(delexicalize(turn) or turn.utterance)
                    flags.append(bool(pred_turn.get("augmented", False)))
                    if dialogue.id in augmented and turn.index in augmented[dialogue.id]:
                        aug_resp.append(augmented[dialogue.id][turn.index])
            items.append(
                DialogueEval(
                    dialogue_id=dialogue.id,
                    services=dialogue.services,
                    pred_belief=pred_belief,
                    gold_belief=gold_belief,
                    pred_actions=pred_actions,
                    gold_actions=gold_actions,
                    pred_responses=pred_resp,
                    gold_responses=gold_resp,
                    augmented_responses=aug_resp if len(aug_resp) == len(pred_resp) else None,
                    augmented_flags=flags,
                )
            )
        train_services = None
        if train_services_path:
            raw = Path(train_services_path).read_text(encoding="utf-8")
            train_services = [line.strip() for line in raw.splitlines() if line.strip()]
        report = build_report(items, train_services)
        with DirectoryLock(Path(out_path).parent):
            write_artifact(
                out_path,
                [report.to_dict()],
                settings.seed,
                inputs={"pred": pred_path, "gold": gold_path},
            )
        click.echo(render_table(report))
    except ChatweaveError as exc:
        _fail(exc)


@main.group()
def acute() -> None:
    """Pairwise human-preference evaluation."""


@acute.command("sample")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--tasks", "tasks_path", required=True, type=click.Path(exists=True))
@click.option("--n", "n", type=int, required=True)
@click.option("--min-turns", type=int, default=8)
@click.option("--min-good-coverage", type=float, default=0.4)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_obj
def acute_sample(
    settings: Settings,
    corpus_path: str,
    log_path: str,
    tasks_path: str,
    n: int,
    min_turns: int,
    min_good_coverage: float,
    out_path: str,
) -> None:
    """Sample long, well-covered dialogues for pairwise evaluation."""
    try:
        dialogues = _load_corpus(corpus_path)
        tasks = _load_tasks(tasks_path)
        store = AnnotationStore(RecordLog(log_path))
        labeled = _labeled_by_dialogue_turn(store, tasks)
        good_turns = {
            did: [
                turn for turn, items in by_turn.items() if any(i.is_good for i in items)
            ]
            for did, by_turn in labeled.items()
        }
        sampled = sample_eval_dialogues(
            dialogues,
            good_turns,
            n,
            min_turns=min_turns,
            min_good_coverage=min_good_coverage,
            seed=settings.seed,
        )
        with DirectoryLock(Path(out_path).parent):
            write_artifact(
                out_path,
                (d.to_dict() for d in sampled),
                settings.seed,
                inputs={"corpus": corpus_path, "log": log_path},
            )
        click.echo(f"sampled {len(sampled)} dialogues -> {out_path}")
    except ChatweaveError as exc:
        _fail(exc)


def _read_transcripts(path: str | Path) -> dict[str, tuple[tuple[str, str], ...]]:
    """Accepts canonical corpus records or arranged-transcript records."""
    transcripts = {}
    for record in read_artifact(path):
        turns = record["turns"]
        transcript = tuple(
            (t["speaker"].lower(), t.get("text", t.get("utterance", ""))) for t in turns
        )
        transcripts[record["dialogue_id"]] = transcript
    return transcripts


@acute.command("build-pairs")
@click.option("--system", "systems", multiple=True, required=True,
              help="NAME=TRANSCRIPTS file; repeat per system.")
@click.option("--axes", "axes_value", default="all")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_obj
def acute_build_pairs(
    settings: Settings, systems: tuple[str, ...], axes_value: str, out_path: str
) -> None:
    """Build side-randomized comparison tasks for every system pair."""
    try:
        variants = {}
        for spec_item in systems:
            name, _, path = spec_item.partition("=")
            if not path:
                raise click.UsageError(f"--system expects NAME=PATH, got {spec_item!r}")
            variants[name] = _read_transcripts(path)
        if axes_value == "all":
            axes = tuple(Axis)
        else:
            axes = tuple(Axis(a.strip().upper()) for a in axes_value.split(","))
        tasks = build_pairs(variants, axes=axes, seed=settings.seed)
        with DirectoryLock(Path(out_path).parent):
            write_artifact(
                out_path, (t.to_dict() for t in tasks), settings.seed
            )
        click.echo(f"built {len(tasks)} comparison tasks -> {out_path}")
    except (ChatweaveError, ValueError) as exc:
        _fail(exc)


@acute.command("aggregate")
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--judgments", "judgments_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_obj
def acute_aggregate(
    settings: Settings, pairs_path: str, judgments_path: str, out_path: str
) -> None:
    """Win rates and exact binomial significance per (pair, axis)."""
    try:
        tasks = [ComparisonTask.from_dict(d) for d in read_artifact(pairs_path)]
        results = [
            ComparisonResult.from_dict(r) for r in RecordLog(judgments_path).records()
        ]
        cells = aggregate_results(results, tasks)
        with DirectoryLock(Path(out_path).parent):
            write_artifact(
                out_path,
                cells,
                settings.seed,
                inputs={"pairs": pairs_path, "judgments": judgments_path},
            )
        click.echo(render_matrix(cells))
    except ChatweaveError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
