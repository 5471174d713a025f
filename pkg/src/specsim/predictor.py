"""Continuation prediction backends: scripted fixtures, n-gram, remote HTTP.

A backend maps (context, observed source prefix, k) to a ranked set of
full-continuation hypotheses with probabilities and target translations.
Residual probability mass (1 - sum of reported p) models the continuations
the backend did not enumerate. Backends are immutable after construction;
predict calls are deterministic and safe to issue concurrently.
"""

from __future__ import annotations

import json
import math
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

from .ngram import END, START, NgramModel
from .phrases import PhraseTable, StreamTranslation
from .stream import ContextDoc

_EPS = 1e-9


class NoPrediction(Exception):
    """The backend has nothing for this prefix; callers treat it as other_mass = 1."""


@dataclass(frozen=True, slots=True)
class Prediction:
    """One hypothetical continuation of the source, with its translation.

    A continuation that runs to utterance end carries the internal end
    symbol as its last token; a continuation without it was truncated at the
    prediction horizon and may be extended later.
    """

    continuation: tuple[str, ...]
    p: float
    translation: tuple[str, ...]

    @property
    def terminal(self) -> bool:
        return bool(self.continuation) and self.continuation[-1] == END

    @property
    def source_tokens(self) -> tuple[str, ...]:
        """Continuation without the end marker."""
        return self.continuation[:-1] if self.terminal else self.continuation


@dataclass(frozen=True, slots=True)
class PredictionSet:
    """Ranked hypotheses (p descending, ties lexicographic) plus residual mass."""

    items: tuple[Prediction, ...]
    other_mass: float

    def validate(self, k: int | None = None) -> list[str]:
        bad = []
        total = math.fsum(pr.p for pr in self.items)
        if total > 1 + _EPS:
            bad.append(f"probabilities sum to {total:.6f} > 1")
        if self.other_mass < -_EPS:
            bad.append(f"other_mass {self.other_mass:.6f} < 0")
        if k is not None and len(self.items) > k:
            bad.append(f"{len(self.items)} items exceed k={k}")
        for pr in self.items:
            if not pr.continuation:
                bad.append("empty continuation")
            if not 0 < pr.p <= 1:
                bad.append(f"probability {pr.p} outside (0, 1]")
        ranked = sorted(self.items, key=lambda pr: (-pr.p, pr.continuation))
        if tuple(ranked) != self.items:
            bad.append("items not sorted by p desc / continuation")
        return bad


def prediction_set(items: Sequence[Prediction]) -> PredictionSet:
    """Sort items canonically and derive the residual mass."""
    ranked = tuple(sorted(items, key=lambda pr: (-pr.p, pr.continuation)))
    other = 1.0 - math.fsum(pr.p for pr in ranked)
    if -_EPS < other < 0:
        other = 0.0
    return PredictionSet(ranked, other)


class Backend(Protocol):
    def predict(self, context: ContextDoc, prefix: Sequence[str], k: int,
                aux: Sequence[str] | None = None) -> PredictionSet: ...


def predict(backend: Backend, context: ContextDoc, prefix: Sequence[str], k: int,
            aux: Sequence[str] | None = None) -> PredictionSet:
    """Query a backend; raises NoPrediction when it has nothing for the prefix."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return backend.predict(context, prefix, k, aux)


class ScriptedBackend:
    """Deterministic test backend: exact (context id, prefix) -> PredictionSet."""

    def __init__(self, entries: dict[tuple[str, tuple[str, ...]], PredictionSet]):
        self.entries = dict(entries)

    @property
    def context_ids(self) -> list[str]:
        return sorted({cid for cid, _ in self.entries})

    def predict(self, context: ContextDoc, prefix: Sequence[str], k: int,
                aux: Sequence[str] | None = None) -> PredictionSet:
        ps = self.entries.get((context.id, tuple(prefix)))
        if ps is None:
            raise NoPrediction(f"no entry for context {context.id!r}, "
                               f"prefix of {len(tuple(prefix))} tokens")
        return _cap(ps, k)

    def validate(self) -> list[str]:
        bad = []
        for (cid, prefix), ps in sorted(self.entries.items()):
            for msg in ps.validate():
                bad.append(f"context {cid!r} prefix {' '.join(prefix) or '<empty>'}: {msg}")
        return bad


def _cap(ps: PredictionSet, k: int) -> PredictionSet:
    if len(ps.items) <= k:
        return ps
    kept = ps.items[:k]
    other = 1.0 - math.fsum(pr.p for pr in kept)
    return PredictionSet(kept, other)


def load_scripted_fixture(text: str) -> ScriptedBackend:
    """Fixture file: {"contexts": {id: [{"prefix": [...], "items": [...]}, ...]}}.

    Each item is {"cont": [...tokens...], "p": float, "tr": [...tokens...]};
    a continuation ending with "</s>" marks an utterance-end hypothesis.
    """
    data = json.loads(text)
    contexts = data.get("contexts")
    if not isinstance(contexts, dict):
        raise ValueError('fixture must carry a "contexts" object')
    entries: dict[tuple[str, tuple[str, ...]], PredictionSet] = {}
    for cid, recs in contexts.items():
        for rec in recs:
            prefix = tuple(rec["prefix"])
            items = [Prediction(tuple(it["cont"]), float(it["p"]), tuple(it["tr"]))
                     for it in rec.get("items", [])]
            key = (cid, prefix)
            if key in entries:
                raise ValueError(f"duplicate fixture entry for context {cid!r}, "
                                 f"prefix {' '.join(prefix) or '<empty>'}")
            entries[key] = prediction_set(items)
    return ScriptedBackend(entries)


class NgramBackend:
    """n-gram continuation search plus phrase-table translation of hypotheses.

    Continuation search depends only on the last order-1 prefix tokens and is
    memoized on them; hypothesis translation reuses an incremental stream
    translation of the prefix, so repeated predictions over a growing prefix
    cost time proportional to the new tokens.
    """

    def __init__(self, model: NgramModel, table: PhraseTable, max_len: int = 12):
        self.model = model
        self.table = table
        self.max_len = max_len
        self._enum_cache: dict[tuple, list[tuple[tuple[str, ...], float]]] = {}
        self._tx: tuple[tuple[str, ...], StreamTranslation] = ((), StreamTranslation())

    def predict(self, context: ContextDoc, prefix: Sequence[str], k: int,
                aux: Sequence[str] | None = None) -> PredictionSet:
        prefix = tuple(prefix)
        hist = self.model._effective_history(
            (START,) * max(0, self.model.order - 1 - len(prefix)) + prefix)
        key = (hist, k, self.max_len)
        conts = self._enum_cache.get(key)
        if conts is None:
            conts = self.model.continuations(prefix, k, self.max_len)
            self._enum_cache[key] = conts
        state = self._tx_state(prefix)
        items = [Prediction(cont, p,
                            state.preview(self.table,
                                          cont[:-1] if cont and cont[-1] == END else cont))
                 for cont, p in conts]
        return prediction_set(items)

    def _tx_state(self, prefix: tuple[str, ...]) -> StreamTranslation:
        cached_prefix, state = self._tx
        if len(cached_prefix) <= len(prefix) and prefix[:len(cached_prefix)] == cached_prefix:
            state = state.extend(self.table, prefix[len(cached_prefix):])
        else:
            state = StreamTranslation().extend(self.table, prefix)
        self._tx = (prefix, state)
        return state

    def perplexity(self, window: Sequence[str]) -> float:
        return self.model.perplexity(window)


Transport = Callable[[str, bytes, float], tuple[int, bytes]]


def _http_post(url: str, payload: bytes, timeout_s: float) -> tuple[int, bytes]:
    req = urllib.request.Request(url, data=payload,
                                 headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req, timeout=timeout_s) as resp:
        return resp.status, resp.read()


class RemoteBackend:
    """HTTP predictor: POST {"context_id", "prefix", "k"} to <endpoint>/predict.

    Any transport failure, timeout or malformed response surfaces as
    NoPrediction; the engine then falls back to residual mass 1.
    """

    def __init__(self, endpoint: str, timeout_ms: int = 1000,
                 transport: Transport = _http_post):
        self.url = endpoint.rstrip("/") + "/predict"
        self.timeout_ms = timeout_ms
        self._transport = transport

    def predict(self, context: ContextDoc, prefix: Sequence[str], k: int,
                aux: Sequence[str] | None = None) -> PredictionSet:
        body: dict = {"context_id": context.id, "prefix": list(prefix), "k": k}
        if aux:
            body["aux"] = list(aux)
        payload = json.dumps(body, ensure_ascii=False).encode("utf-8")
        try:
            status, raw = self._transport(self.url, payload, self.timeout_ms / 1000.0)
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise NoPrediction(f"unreachable: {exc}") from exc
        if status != 200:
            raise NoPrediction(f"status {status}")
        try:
            items = self._parse(raw)
        except (ValueError, KeyError, TypeError) as exc:
            raise NoPrediction(f"malformed response: {exc}") from exc
        return _cap(prediction_set(items), k)

    @staticmethod
    def _parse(raw: bytes) -> list[Prediction]:
        data = json.loads(raw.decode("utf-8"))
        preds = []
        for it in data["items"]:
            cont = tuple(it["cont"])
            p = float(it["p"])
            tr = tuple(it["tr"])
            if not cont or p <= 0:
                raise ValueError(f"bad item {it!r}")
            preds.append(Prediction(cont, p, tr))
        total = math.fsum(pr.p for pr in preds)
        if total > 1.0:  # remote overshoot: rescale proportionally
            preds = [Prediction(pr.continuation, pr.p / total, pr.translation)
                     for pr in preds]
        return preds
