"""Per-utterance session: advance, expand, prune, commit, emit, recover.

Each observed token advances the prediction tree; matches refresh the
consensus template and emit newly fixed tokens, divergences trigger
re-prediction on the full observed prefix, buffer overflow triggers a direct
catch-up translation, and a periodic perplexity check flags context drift.
Emission is append-only: committed output is never retracted.

One session is one logical execution stream; distinct sessions may run in
parallel over shared immutable backends.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .metrics import SessionReport, compute_report
from .phrases import PhraseTable, idiom_spans, translate
from .predictor import Backend, NoPrediction, PredictionSet
from .stream import ContextDoc, EngineConfig, TokenEvent, validate_config
from .template import (RevisionConflict, TargetTemplate, all_hole_template,
                       consensus, emittable, extend_into_hole, fixed_template,
                       refine, resolve_with)
from .tree import (PredictionTree, advance, build_tree, expand,
                   expandable_leaves, leaf_hypotheses, prune)


class OutOfOrderToken(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class OutputEvent:
    """One entry of the session's output log."""

    kind: str  # emit | diverge | repredict | catchup | context_shift | conflict
    t_ms: int
    toks: tuple[str, ...] = ()
    span: int = 0
    src_seen: int = 0
    slot: int | None = None
    committed: str | None = None
    got: str | None = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "t_ms": self.t_ms}
        if self.kind == "emit":
            out["toks"] = list(self.toks)
            out["src"] = self.src_seen
        elif self.kind == "catchup":
            out["span"] = self.span
        elif self.kind == "conflict":
            out["slot"] = self.slot
            out["committed"] = self.committed
            out["got"] = self.got
        return out


@dataclass
class Counters:
    hits: int = 0
    divergences: int = 0
    conflicts: int = 0
    catchups: int = 0
    drift_events: int = 0


class Session:
    """State for one utterance; see start_session."""

    def __init__(self, config: EngineConfig, context: ContextDoc,
                 backend: Backend, table: PhraseTable):
        bad = validate_config(config)
        if bad:
            raise ValueError("invalid config: " + "; ".join(bad))
        self.config = config
        self.context = context
        self.backend = backend
        self.table = table
        self.observed: list[str] = []
        self.delivered = 0
        self.processed = 0
        self.buffer: deque[TokenEvent] = deque()
        self.template: TargetTemplate = all_hole_template()
        self.emitted: list[str] = []
        self.counters = Counters()
        self.events: list[OutputEvent] = []
        self.aux: tuple[str, ...] | None = None
        self.last_t = 0
        self.finalized = False
        self.tree: PredictionTree = self._predict_tree(())
        self._dirty = True
        self._baseline_ppl = self._context_perplexity()

    # -- predictor plumbing ------------------------------------------------

    def _predict(self, prefix: Sequence[str]) -> PredictionSet | None:
        try:
            return self.backend.predict(self.context, tuple(prefix),
                                        self.config.k, self.aux)
        except NoPrediction:
            return None

    def _predict_tree(self, prefix: Sequence[str]) -> PredictionTree:
        return build_tree(tuple(prefix), self._predict(prefix))

    def _context_perplexity(self) -> float | None:
        ppl = getattr(self.backend, "perplexity", None)
        if ppl is None or not self.context.body:
            return None
        return ppl(self.context.body)

    # -- emission ----------------------------------------------------------

    def _emit(self, t_ms: int) -> list[OutputEvent]:
        spans = idiom_spans(self.table, self.template.fixed_tokens())
        toks, self.template = emittable(self.template, spans)
        if not toks:
            return []
        self.emitted.extend(toks)
        return [OutputEvent("emit", t_ms, toks=toks, src_seen=self.delivered)]

    def _commit(self, t_ms: int) -> list[OutputEvent]:
        """Consensus over current hypotheses, refine, emit."""
        events: list[OutputEvent] = []
        hyps = leaf_hypotheses(self.tree)
        fresh = consensus(hyps, self.config.tau)
        merged = refine(self.template, fresh)
        if isinstance(merged, RevisionConflict):
            self.counters.conflicts += 1
            events.append(OutputEvent("conflict", t_ms, slot=merged.slot,
                                      committed=merged.committed, got=merged.got))
        else:
            self.template = merged
        events.extend(self._emit(t_ms))
        self._dirty = False
        return events

    # -- per-event processing ----------------------------------------------

    def _process(self, ev: TokenEvent) -> list[OutputEvent]:
        token = ev.surface
        t_ms = ev.t_ms
        self.last_t = t_ms
        self.observed.append(token)
        self.processed += 1
        events: list[OutputEvent] = []

        outcome = advance(self.tree, token)
        if outcome.diverged:
            self.counters.divergences += 1
            events.append(OutputEvent("diverge", t_ms))
            events.append(OutputEvent("repredict", t_ms))
            self.tree = self._predict_tree(self.observed)
            self._dirty = True
        else:
            self.counters.hits += 1
            if outcome.changed:
                self._dirty = True
            for leaf in expandable_leaves(self.tree, self.config.d):
                if expand(self.tree, leaf, self.backend, self.context,
                          self.config.k, self.aux, max_depth=self.config.d):
                    self._dirty = True
            if prune(self.tree, self.config.epsilon, self.config.k):
                self._dirty = True

        if self._dirty:
            events.extend(self._commit(t_ms))
        events.extend(self._drift_check(t_ms))
        self.events.extend(events)
        return events

    def _drift_check(self, t_ms: int) -> list[OutputEvent]:
        cfg = self.config
        if self.processed % cfg.drift_window != 0 or self._baseline_ppl is None:
            return []
        window = tuple(self.observed[-cfg.drift_window:])
        ppl = self.backend.perplexity(window)  # type: ignore[attr-defined]
        if ppl / self._baseline_ppl <= cfg.drift_ratio:
            return []
        self.counters.drift_events += 1
        self.aux = window
        return [OutputEvent("context_shift", t_ms)]


def start_session(config: EngineConfig, context: ContextDoc, backend: Backend,
                  table: PhraseTable) -> Session:
    """Build the initial tree from the empty prefix and an empty template."""
    return Session(config, context, backend, table)


def deliver(session: Session, ev: TokenEvent) -> list[OutputEvent]:
    """Queue one event; an overfull buffer triggers catch-up immediately."""
    if session.finalized:
        raise ValueError("session already finalized")
    if ev.is_final:
        raise ValueError("final event must go to finalize()")
    if ev.index != session.delivered:
        raise OutOfOrderToken(f"expected index {session.delivered}, got {ev.index}")
    session.delivered += 1
    session.last_t = ev.t_ms
    session.buffer.append(ev)
    if len(session.buffer) > session.config.buffer_limit:
        return catchup(session)
    return []


def step(session: Session) -> list[OutputEvent]:
    """Process the oldest buffered event, if any."""
    if not session.buffer:
        return []
    return session._process(session.buffer.popleft())


def feed(session: Session, ev: TokenEvent) -> list[OutputEvent]:
    """Deliver one event and process one buffered event (the standard path)."""
    events = deliver(session, ev)
    if any(e.kind == "catchup" for e in events):
        return events
    return events + step(session)


def catchup(session: Session) -> list[OutputEvent]:
    """Drain the buffer, bypassing speculation: translate the span directly,
    commit it into the hole, re-anchor the tree at the new full prefix."""
    if not session.buffer:
        raise ValueError("catch-up requires a non-empty buffer")
    drained = list(session.buffer)
    session.buffer.clear()
    span = [ev.surface for ev in drained]
    t_ms = drained[-1].t_ms
    session.last_t = t_ms
    session.observed.extend(span)
    session.processed += len(span)
    session.counters.catchups += 1
    events = [OutputEvent("catchup", t_ms, span=len(span))]
    session.template = extend_into_hole(session.template,
                                        translate(session.table, span))
    events.extend(session._emit(t_ms))
    session.tree = session._predict_tree(session.observed)
    session._dirty = True
    session.events.extend(events)
    return events


def finalize(session: Session, ev: TokenEvent | None = None,
             reference: Sequence[str] | None = None
             ) -> tuple[list[OutputEvent], SessionReport]:
    """Drain pending events, resolve every hole, emit the remainder.

    The hole filler is the best surviving utterance-end hypothesis consistent
    with the full observed source; with none (typically after divergence) the
    observed source is translated directly. A conflicting filler is recorded
    and the committed template force-completes instead; emission never
    retracts.
    """
    if session.finalized:
        raise ValueError("session already finalized")
    events: list[OutputEvent] = []
    if ev is not None:
        if not ev.is_final:
            raise ValueError("finalize requires the final event")
        if ev.index != session.delivered:
            raise OutOfOrderToken(f"expected index {session.delivered}, got {ev.index}")
        session.delivered += 1
        session.buffer.append(ev)
    while session.buffer:
        events.extend(session._process(session.buffer.popleft()))

    t_ms = session.last_t
    final_tr = _consistent_translation(session)
    if final_tr is None:
        final_tr = translate(session.table, session.observed)
    merged = refine(session.template, fixed_template(final_tr))
    if isinstance(merged, RevisionConflict):
        session.counters.conflicts += 1
        conflict_ev = OutputEvent("conflict", t_ms, slot=merged.slot,
                                  committed=merged.committed, got=merged.got)
        events.append(conflict_ev)
        session.events.append(conflict_ev)
        session.template = resolve_with(session.template, final_tr)
    else:
        session.template = merged
    tail = session._emit(t_ms)
    events.extend(tail)
    session.events.extend(tail)
    session.finalized = True
    report = compute_report(session.events, session.delivered, reference)
    return events, report


def _consistent_translation(session: Session) -> tuple[str, ...] | None:
    """Translation of the best surviving terminal leaf with everything consumed."""
    best: tuple[float, tuple[str, ...]] | None = None
    for node in session.tree.leaves():
        if node.is_other or not node.terminal or not node.consumed:
            continue
        if node.translation is None:
            continue
        key = (-node.path_p, node.translation)
        if best is None or key < best:
            best = key
    return best[1] if best is not None else None
