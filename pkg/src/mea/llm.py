"""Chat-completion client for lexicon filtering and action classification.

Three modes: live (HTTP endpoint, cached), replay (bundled fixtures, never
touches the network) and heuristic (keyword table, no endpoint needed).
Responses must parse to a closed label set; anything else is an error, never
a guess.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .dag import ActionClass

log = logging.getLogger(__name__)

ENDPOINT_ENV = "MEA_LLM_ENDPOINT"
API_KEY_ENV = "MEA_LLM_API_KEY"
MODEL_ENV = "MEA_LLM_MODEL"
DEFAULT_MODEL = "glm-4"

TEMPLATE_NAMES = ("filter_feeling_neg", "filter_emotion", "classify_action")

_TEMPLATE_LABELS: dict[str, tuple[frozenset[str], str | None]] = {
    "filter_feeling_neg": (frozenset({"yes", "no"}), "yes"),
    "filter_emotion": (frozenset({"yes", "no"}), "yes"),
    "classify_action": (frozenset({"mental", "physical", "social"}), None),
}

_LABEL_TO_CLASS = {
    "mental": ActionClass.MENTAL,
    "physical": ActionClass.PHYSICAL,
    "social": ActionClass.SOCIAL,
}


class LlmError(Exception):
    pass


class LlmTransportError(LlmError):
    pass


class LlmParseError(LlmError):
    def __init__(self, message: str, raw_response: str):
        self.raw_response = raw_response
        super().__init__(message)


class ReplayMissError(LlmError):
    pass


class CacheFormatError(LlmError):
    def __init__(self, path: str, line_no: int, message: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class ClientMode(str, Enum):
    LIVE = "live"
    REPLAY = "replay"
    HEURISTIC = "heuristic"


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    template_text: str
    expected_labels: frozenset[str]
    keep_label: str | None = None

    def __post_init__(self) -> None:
        if self.name not in _TEMPLATE_LABELS:
            raise ValueError(f"unknown template name {self.name!r}")
        if self.template_text.count("{input}") != 1:
            raise ValueError(f"template {self.name!r} must contain exactly one {{input}} slot")
        if not self.expected_labels:
            raise ValueError("expected_labels must be non-empty")

    def render(self, value: str) -> str:
        return self.template_text.replace("{input}", value)


def load_template(name: str, directory: str | Path | None = None) -> PromptTemplate:
    """Load a template body from a text file; defaults to the bundled set."""
    labels, keep = _TEMPLATE_LABELS[name]
    if directory is not None:
        text = (Path(directory) / f"{name}.txt").read_text(encoding="utf-8")
    else:
        text = resources.files("mea").joinpath(f"templates/{name}.txt").read_text(encoding="utf-8")
    return PromptTemplate(name, text.strip(), labels, keep)


@dataclass
class ClientConfig:
    endpoint: str = ""
    api_key: str = ""
    model: str = DEFAULT_MODEL
    temperature: float = 0.0
    timeout: float = 30.0
    retries: int = 2
    mode: ClientMode = ClientMode.LIVE
    fixture_path: Path | None = None
    cache_path: Path | None = None
    max_in_flight: int = 4

    def __post_init__(self) -> None:
        if self.mode is ClientMode.REPLAY and self.fixture_path is None:
            raise ValueError("replay mode requires a fixture file")
        if self.mode is ClientMode.LIVE and self.temperature != 0.0:
            raise ValueError("live mode is pinned to temperature 0")

    @classmethod
    def from_env(cls, **overrides) -> "ClientConfig":
        base = {
            "endpoint": os.environ.get(ENDPOINT_ENV, ""),
            "api_key": os.environ.get(API_KEY_ENV, ""),
            "model": os.environ.get(MODEL_ENV, DEFAULT_MODEL),
        }
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class CacheEntry:
    key: str
    template: str
    input: str
    model: str
    raw_response: str
    parsed_label: str
    timestamp: float


def cache_key(template: str, input_text: str, model: str) -> str:
    payload = "\x1f".join((template, input_text, model)).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def _load_entries(path: Path) -> dict[str, CacheEntry]:
    entries: dict[str, CacheEntry] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise CacheFormatError(str(path), line_no, f"invalid JSON: {exc}") from None
        try:
            entry = CacheEntry(
                key=doc["key"],
                template=doc["template"],
                input=doc["input"],
                model=doc["model"],
                raw_response=doc["raw_response"],
                parsed_label=doc["parsed_label"],
                timestamp=doc["timestamp"],
            )
        except KeyError as exc:
            raise CacheFormatError(str(path), line_no, f"missing field {exc}") from None
        if entry.template not in _TEMPLATE_LABELS:
            raise CacheFormatError(str(path), line_no, f"unknown template {entry.template!r}")
        labels, _ = _TEMPLATE_LABELS[entry.template]
        if entry.parsed_label not in labels:
            raise CacheFormatError(str(path), line_no, f"label {entry.parsed_label!r} not allowed")
        expected = cache_key(entry.template, entry.input, entry.model)
        if entry.key != expected:
            raise CacheFormatError(str(path), line_no, "key does not match entry fields")
        entries[entry.key] = entry
    return entries


def _http_transport(config: ClientConfig, prompt: str) -> str:
    import requests

    headers = {"Content-Type": "application/json"}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"
    body = {
        "model": config.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": config.temperature,
    }
    try:
        response = requests.post(config.endpoint, json=body, headers=headers, timeout=config.timeout)
        response.raise_for_status()
        doc = response.json()
        return doc["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise LlmTransportError(f"malformed completion response: {exc}") from exc
    except requests.RequestException as exc:
        raise LlmTransportError(str(exc)) from exc


Transport = Callable[[ClientConfig, str], str]


# Keyword tables seeded with the subtype exemplar verbs; unknown verbs default
# to physical, the most common class in a food-review corpus.
_MENTAL_VERBS = frozenset(
    {"analyze", "versify", "think", "consider", "decide", "expect", "want", "wonder", "remember", "feel", "believe", "love", "hate"}
)
_SOCIAL_VERBS = frozenset(
    {"denounce", "rent", "recommend", "tell", "share", "ask", "thank", "invite", "give", "serve"}
)
_PHYSICAL_VERBS = frozenset(
    {"wash", "peel", "cook", "eat", "buy", "drink", "slice", "bake", "push", "pour", "freeze", "mix", "go", "pay", "wait", "try"}
)


def heuristic_classifier(text: str) -> ActionClass:
    """Offline fallback: first known keyword wins, default physical."""
    for raw in text.lower().split():
        word = raw.strip(".,!?;:'\"()")
        if word in _MENTAL_VERBS:
            return ActionClass.MENTAL
        if word in _SOCIAL_VERBS:
            return ActionClass.SOCIAL
        if word in _PHYSICAL_VERBS:
            return ActionClass.PHYSICAL
    return ActionClass.PHYSICAL


class LlmClient:
    """Thread-safe completion client with an append-only response cache."""

    def __init__(
        self,
        config: ClientConfig,
        transport: Transport | None = None,
        template_dir: str | Path | None = None,
    ):
        self.config = config
        self._transport = transport or _http_transport
        self._template_dir = template_dir
        self._templates: dict[str, PromptTemplate] = {}
        self._lock = threading.Lock()
        self._in_flight = threading.Semaphore(config.max_in_flight)
        self.calls = 0
        self.cache_hits = 0
        self._fixture: dict[str, CacheEntry] = {}
        if config.mode is ClientMode.REPLAY:
            self._fixture = _load_entries(config.fixture_path)
        self._cache: dict[str, CacheEntry] = {}
        if config.cache_path is not None and Path(config.cache_path).exists():
            self._cache = _load_entries(Path(config.cache_path))

    def template(self, name: str) -> PromptTemplate:
        if name not in self._templates:
            self._templates[name] = load_template(name, self._template_dir)
        return self._templates[name]

    def stats(self) -> tuple[int, int]:
        with self._lock:
            return self.calls, self.cache_hits

    def classify_action_event(self, text: str) -> ActionClass:
        """Classify one first-person action event as mental, physical or social."""
        if not text.strip():
            raise ValueError("event text must be non-empty")
        if self.config.mode is ClientMode.HEURISTIC:
            with self._lock:
                self.calls += 1
            return heuristic_classifier(text)
        label = self._complete(self.template("classify_action"), text)
        return _LABEL_TO_CLASS[label]

    def filter_candidates(self, words: Sequence[str], template: PromptTemplate | str) -> list[str]:
        """Keep the words the model accepts; on a parse failure keep the word.

        Rule-based compilation already admitted every candidate, so an
        unreadable verdict conservatively keeps it.
        """
        if not words:
            raise ValueError("words must be non-empty")
        if isinstance(template, str):
            template = self.template(template)
        if template.keep_label is None:
            raise ValueError(f"template {template.name!r} is not a filter template")
        if self.config.mode is ClientMode.HEURISTIC:
            log.warning("heuristic mode cannot filter candidates; keeping all %d words", len(words))
            return list(words)
        kept: list[str] = []
        for word in words:
            try:
                label = self._complete(template, word)
            except LlmParseError as exc:
                log.warning("unparseable filter verdict for %r (%r); keeping it", word, exc.raw_response)
                kept.append(word)
                continue
            if label == template.keep_label:
                kept.append(word)
        return kept

    def _complete(self, template: PromptTemplate, input_text: str) -> str:
        key = cache_key(template.name, input_text, self.config.model)
        with self._lock:
            self.calls += 1
        if self.config.mode is ClientMode.REPLAY:
            entry = self._fixture.get(key)
            if entry is None:
                raise ReplayMissError(
                    f"no fixture entry for template={template.name!r} input={input_text!r} "
                    f"model={self.config.model!r}"
                )
            with self._lock:
                self.cache_hits += 1
            return entry.parsed_label

        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            with self._lock:
                self.cache_hits += 1
            return cached.parsed_label

        raw = self._request(template.render(input_text))
        label = raw.strip().casefold()
        if label not in template.expected_labels:
            raise LlmParseError(
                f"response is not one of {sorted(template.expected_labels)}", raw_response=raw
            )
        entry = CacheEntry(key, template.name, input_text, self.config.model, raw, label, time.time())
        with self._lock:
            self._cache[key] = entry
            if self.config.cache_path is not None:
                with open(self.config.cache_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry.__dict__) + "\n")
        return label

    def _request(self, prompt: str) -> str:
        last: LlmTransportError | None = None
        for attempt in range(self.config.retries + 1):
            try:
                with self._in_flight:
                    return self._transport(self.config, prompt)
            except LlmTransportError as exc:
                last = exc
                if attempt < self.config.retries:
                    time.sleep(0.2 * (attempt + 1))
        raise last
