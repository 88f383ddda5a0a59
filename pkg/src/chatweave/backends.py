"""Backend wire protocols and deterministic test stubs.

Three external model roles sit behind small HTTP contracts:

* generator: POST {context, mode, params} -> {text} | {error}
* scorer:    POST {context, candidate, position} -> {posterior}
* chooser:   POST {history, arrangements} -> {probs}

Endpoints come from GENERATOR_URLS (comma-separated), SCORER_URL, and
ARRANGER_SCORER_URL. The special URL ``stub`` (or ``stub://...``) selects
the built-in deterministic stub for that role, which is what the test
suite and the offline pipeline run on.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Mapping, Protocol, Sequence

import httpx

from .errors import PermanentBackendError, ProtocolError, TransportError

Context = Sequence[tuple[str, str]]  # (speaker, utterance) pairs


@dataclass(frozen=True)
class DecodingParams:
    max_new_tokens: int = 40
    temperature: float = 0.7
    top_p: float = 0.9
    seed: int = 0

    @property
    def params_id(self) -> str:
        return f"n{self.max_new_tokens}-t{self.temperature:g}-p{self.top_p:g}-s{self.seed}"

    def to_dict(self) -> dict[str, float | int]:
        return {
            "max_new_tokens": self.max_new_tokens,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "seed": self.seed,
        }


def _context_payload(context: Context) -> list[dict[str, str]]:
    return [{"speaker": s.lower(), "utterance": u} for s, u in context]


class GeneratorBackend(Protocol):
    backend_id: str

    def generate(self, context: Context, mode: str, params: DecodingParams) -> str: ...


class ScorerBackend(Protocol):
    def score(self, context: Context, candidate: str, position: str) -> float: ...


class ChoiceScorer(Protocol):
    def probs(self, history: Context, arrangements: Sequence[str]) -> list[float]: ...


# ---------------------------------------------------------------------------
# HTTP implementations
# ---------------------------------------------------------------------------


def _post(url: str, payload: dict, timeout: float) -> dict:
    try:
        response = httpx.post(url, json=payload, timeout=timeout)
    except httpx.HTTPError as exc:
        raise TransportError(f"backend {url} unreachable: {exc}") from exc
    if 400 <= response.status_code < 500:
        raise PermanentBackendError(f"backend {url} rejected request: {response.status_code}")
    if response.status_code >= 500:
        raise TransportError(f"backend {url} failed: {response.status_code}")
    try:
        return response.json()
    except ValueError as exc:
        raise ProtocolError(f"backend {url} returned non-JSON body") from exc


class HttpGeneratorBackend:
    def __init__(self, url: str, timeout: float = 30.0):
        self.url = url
        self.timeout = timeout
        self.backend_id = url

    def generate(self, context: Context, mode: str, params: DecodingParams) -> str:
        body = _post(
            self.url,
            {
                "context": _context_payload(context),
                "mode": mode,
                "params": params.to_dict(),
            },
            self.timeout,
        )
        if "error" in body:
            raise PermanentBackendError(f"backend {self.url}: {body['error']}")
        if "text" not in body or not isinstance(body["text"], str):
            raise ProtocolError(f"backend {self.url} response lacks a text field")
        return body["text"]


class HttpScorerBackend:
    def __init__(self, url: str, timeout: float = 30.0):
        self.url = url
        self.timeout = timeout

    def score(self, context: Context, candidate: str, position: str) -> float:
        body = _post(
            self.url,
            {
                "context": _context_payload(context),
                "candidate": candidate,
                "position": position,
            },
            self.timeout,
        )
        if "posterior" not in body:
            raise ProtocolError(f"scorer {self.url} response lacks a posterior field")
        return float(body["posterior"])


class HttpChoiceScorer:
    def __init__(self, url: str, timeout: float = 30.0):
        self.url = url
        self.timeout = timeout

    def probs(self, history: Context, arrangements: Sequence[str]) -> list[float]:
        body = _post(
            self.url,
            {
                "history": _context_payload(history),
                "arrangements": list(arrangements),
            },
            self.timeout,
        )
        if "probs" not in body or len(body["probs"]) != len(arrangements):
            raise ProtocolError(f"chooser {self.url} returned malformed probs")
        return [float(p) for p in body["probs"]]


# ---------------------------------------------------------------------------
# Deterministic stubs
# ---------------------------------------------------------------------------

STUB_PHRASES: tuple[str, ...] = (
    "You're welcome.",
    "I hear it's beautiful.",
    "That sounds like a great trip!",
    "There's a lot of fun stuff to do.",
    "Enjoy your time there. It's a lovely spot this time of year.",
    "Happy to help. Let me know if anything else comes up.",
    "They say it tastes like chicken.",
    "Their food is good.",
    "Great choice! I hope it goes well.",
    "Sounds exciting. Have a wonderful evening!",
)


def _stable_index(key: str, size: int) -> int:
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % size


class PhraseBankGeneratorStub:
    """Table-driven generator: picks a phrase by hashing the request key.

    Deterministic across processes for a fixed (context, mode, seed).
    """

    def __init__(self, phrases: Sequence[str] = STUB_PHRASES, backend_id: str = "stub"):
        if not phrases:
            raise ValueError("phrase bank must not be empty")
        self.phrases = tuple(phrases)
        self.backend_id = backend_id

    def generate(self, context: Context, mode: str, params: DecodingParams) -> str:
        key = "\x1e".join(u for _, u in context) + f"|{mode}|{params.seed}"
        return self.phrases[_stable_index(key, len(self.phrases))]


class TableGeneratorStub:
    """Generator stub scripted per (system turn index, mode).

    The turn index is recovered from the context length, so scripted tests
    can address exactly one request. Missing keys fall back to ``default``;
    a ``None`` default raises a permanent error (useful for 4xx paths).
    """

    def __init__(
        self,
        table: Mapping[tuple[int, str], str],
        default: str | None = None,
        backend_id: str = "table-stub",
    ):
        self.table = dict(table)
        self.default = default
        self.backend_id = backend_id

    def generate(self, context: Context, mode: str, params: DecodingParams) -> str:
        # mode "continue" context ends at the system turn, "new_turn" at the user turn
        turn_index = len(context) - 1 if mode == "continue" else len(context)
        text = self.table.get((turn_index, mode), self.default)
        if text is None:
            raise PermanentBackendError(
                f"{self.backend_id}: no scripted output for turn {turn_index} mode {mode}"
            )
        return text


class UnreachableBackend:
    """Always raises a retriable transport error."""

    backend_id = "unreachable"

    def generate(self, context: Context, mode: str, params: DecodingParams) -> str:
        raise TransportError("backend unreachable")

    def score(self, context: Context, candidate: str, position: str) -> float:
        raise TransportError("backend unreachable")


class HeuristicScorerStub:
    """Length- and pattern-based posterior in [0, 1].

    Short, clean candidates score high; long ones and ones that merely echo
    the context score lower. Purely lexical and deterministic.
    """

    def __init__(self, base: float = 0.9, length_penalty: float = 0.04):
        self.base = base
        self.length_penalty = length_penalty

    def score(self, context: Context, candidate: str, position: str) -> float:
        from .textnorm import tokenize

        tokens = tokenize(candidate)
        score = self.base - self.length_penalty * max(0, len(tokens) - 5)
        if context:
            last = set(tokenize(context[-1][1]))
            if tokens and len(set(tokens) & last) / len(set(tokens)) > 0.6:
                score -= 0.2
        if candidate.rstrip().endswith("?"):
            score += 0.02
        return min(1.0, max(0.0, round(score, 6)))


class TableScorerStub:
    """Scorer stub with explicit posteriors per candidate text."""

    def __init__(self, posteriors: Mapping[str, float], default: float = 0.5):
        self.posteriors = dict(posteriors)
        self.default = default

    def score(self, context: Context, candidate: str, position: str) -> float:
        return self.posteriors.get(candidate, self.default)


class UniformChoiceStub:
    """Chooser stub returning equal probability for every arrangement."""

    def probs(self, history: Context, arrangements: Sequence[str]) -> list[float]:
        n = len(arrangements)
        return [1.0 / n] * n


class TableChoiceStub:
    """Chooser stub driven by an explicit function or fixed vector."""

    def __init__(self, probs: Sequence[float] | Callable[[Context, Sequence[str]], Sequence[float]]):
        self._probs = probs

    def probs(self, history: Context, arrangements: Sequence[str]) -> list[float]:
        if callable(self._probs):
            return [float(p) for p in self._probs(history, arrangements)]
        return [float(p) for p in self._probs]


# ---------------------------------------------------------------------------
# URL resolution
# ---------------------------------------------------------------------------


def resolve_generators(urls: str | None) -> list[GeneratorBackend]:
    """Build generator backends from a comma-separated URL list.

    ``None``/empty and the literal ``stub`` select the built-in stub.
    """
    if not urls:
        return [PhraseBankGeneratorStub()]
    backends: list[GeneratorBackend] = []
    for part in (p.strip() for p in urls.split(",")):
        if not part:
            continue
        if part == "stub" or part.startswith("stub:"):
            backends.append(PhraseBankGeneratorStub(backend_id=part))
        else:
            backends.append(HttpGeneratorBackend(part))
    if not backends:
        raise ValueError("no generator backends configured")
    return backends


def resolve_scorer(url: str | None) -> ScorerBackend:
    if not url or url == "stub" or url.startswith("stub:"):
        return HeuristicScorerStub()
    return HttpScorerBackend(url)


def resolve_choice_scorer(url: str | None) -> ChoiceScorer:
    if not url or url == "stub" or url.startswith("stub:"):
        return UniformChoiceStub()
    return HttpChoiceScorer(url)
