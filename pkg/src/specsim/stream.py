"""Token stream model: events, transcripts, contexts and engine configuration.

Transcripts replace live speech recognition: they carry pre-tokenized source
tokens with logical millisecond timestamps, so replays are deterministic and
never read the wall clock. All types here are immutable after construction
and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence


class TranscriptError(ValueError):
    """Base class for transcript validation failures."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedRecord(TranscriptError):
    pass


class NonMonotonicTime(TranscriptError):
    pass


class IndexGap(TranscriptError):
    pass


class MissingFinalMarker(TranscriptError):
    def __init__(self):
        super().__init__("no event carries the end-of-utterance marker")


@dataclass(frozen=True, slots=True)
class TokenEvent:
    """One timestamped source token from the (simulated) transcription stream."""

    index: int
    surface: str
    t_ms: int
    is_final: bool = False


@dataclass(frozen=True, slots=True)
class Transcript:
    """One utterance: ordered token events plus an optional scoring reference."""

    source_lang: str
    target_lang: str
    events: tuple[TokenEvent, ...]
    reference: tuple[str, ...] | None = None

    def tokens(self) -> tuple[str, ...]:
        return tuple(ev.surface for ev in self.events)


@dataclass(frozen=True, slots=True)
class ContextDoc:
    """Pre-loaded topical context handed to prediction backends."""

    id: str
    body: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class EngineConfig:
    """Engine knobs; see validate_config for the legal ranges."""

    k: int = 4                 # max named children per expansion
    d: int = 3                 # max tree depth in expansion rounds
    epsilon: float = 0.05      # prune threshold on path probability
    tau: float = 0.9           # commit mass threshold
    buffer_limit: int = 8      # max buffered events before catch-up
    drift_ratio: float = 2.0   # perplexity ratio triggering a context shift
    drift_window: int = 16     # tokens per drift check


def validate_config(cfg: EngineConfig) -> list[str]:
    """Return all constraint violations; an empty list means the config is valid."""
    bad = []
    if not cfg.k >= 1:
        bad.append("k >= 1")
    if not cfg.d >= 1:
        bad.append("d >= 1")
    if not 0 < cfg.epsilon:
        bad.append("epsilon > 0")
    if not cfg.epsilon < cfg.tau:
        bad.append("epsilon < tau")
    if not cfg.tau <= 1:
        bad.append("tau <= 1")
    if not cfg.buffer_limit >= 1:
        bad.append("buffer_limit >= 1")
    if not cfg.drift_ratio > 1:
        bad.append("drift_ratio > 1")
    if not cfg.drift_window >= 1:
        bad.append("drift_window >= 1")
    return bad


def config_from_json(text: str) -> EngineConfig:
    """Parse a JSON object whose keys mirror EngineConfig field names."""
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError("config must be a JSON object")
    known = set(EngineConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return EngineConfig(**data)


def _require(cond: bool, exc: TranscriptError):
    if not cond:
        raise exc


def parse_transcript(text: str) -> Transcript:
    """Parse the line-delimited JSON transcript format.

    First line is the header {"src":..,"tgt":..,"ref":[..]} (ref optional);
    every following line is {"i":..,"tok":..,"t_ms":..} with "final":true on
    the last event only.
    """
    lines = [ln for ln in text.splitlines()]
    if not lines or not lines[0].strip():
        raise MalformedRecord("missing header line", 1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError:
        raise MalformedRecord("header is not valid JSON", 1) from None
    if not isinstance(header, dict) or "src" not in header or "tgt" not in header:
        raise MalformedRecord("header must carry src and tgt", 1)
    src, tgt = header["src"], header["tgt"]
    if not isinstance(src, str) or not src or not isinstance(tgt, str) or not tgt:
        raise MalformedRecord("language tags must be non-empty strings", 1)
    ref = header.get("ref")
    if ref is not None:
        if not isinstance(ref, list) or not all(isinstance(t, str) for t in ref):
            raise MalformedRecord("ref must be a list of tokens", 1)
        ref = tuple(ref)

    events: list[TokenEvent] = []
    final_seen = False
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError:
            raise MalformedRecord("not valid JSON", lineno) from None
        if not isinstance(rec, dict):
            raise MalformedRecord("record must be a JSON object", lineno)
        _require(final_seen is False, MalformedRecord("event after final marker", lineno))
        try:
            idx, tok, t_ms = rec["i"], rec["tok"], rec["t_ms"]
        except KeyError as missing:
            raise MalformedRecord(f"missing field {missing}", lineno) from None
        if not isinstance(idx, int) or not isinstance(tok, str) or not isinstance(t_ms, int):
            raise MalformedRecord("field types must be i:int tok:str t_ms:int", lineno)
        if not tok:
            raise MalformedRecord("empty token", lineno)
        is_final = bool(rec.get("final", False))
        _require(idx == len(events), IndexGap(f"expected index {len(events)}, got {idx}", lineno))
        if events:
            _require(t_ms >= events[-1].t_ms,
                     NonMonotonicTime(f"t_ms {t_ms} < {events[-1].t_ms}", lineno))
        events.append(TokenEvent(idx, tok, t_ms, is_final))
        final_seen = is_final
    if not events or not final_seen:
        raise MissingFinalMarker()
    return Transcript(src, tgt, tuple(events), ref)


def serialize_transcript(tr: Transcript) -> str:
    """Inverse of parse_transcript (canonical key order, UTF-8 friendly)."""
    header: dict = {"src": tr.source_lang, "tgt": tr.target_lang}
    if tr.reference is not None:
        header["ref"] = list(tr.reference)
    out = [json.dumps(header, ensure_ascii=False)]
    for ev in tr.events:
        rec: dict = {"i": ev.index, "tok": ev.surface, "t_ms": ev.t_ms}
        if ev.is_final:
            rec["final"] = True
        out.append(json.dumps(rec, ensure_ascii=False))
    return "\n".join(out) + "\n"


def transcript_from_tokens(tokens: Sequence[str], source_lang: str = "ja",
                           target_lang: str = "en",
                           reference: Iterable[str] | None = None,
                           step_ms: int = 100) -> Transcript:
    """Convenience builder: evenly spaced events, final marker on the last."""
    if not tokens:
        raise ValueError("at least one token required")
    events = tuple(
        TokenEvent(i, tok, i * step_ms, is_final=(i == len(tokens) - 1))
        for i, tok in enumerate(tokens)
    )
    ref = tuple(reference) if reference is not None else None
    return Transcript(source_lang, target_lang, events, ref)
