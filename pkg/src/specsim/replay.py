"""Deterministic transcript replay with a scriptable lag profile.

The lag profile is a sequence of per-tick delivery counts; once the list is
exhausted every tick delivers one event (real time). Each tick first
delivers its events (an overfull buffer triggers catch-up at delivery time),
then the engine processes one buffered event. The final event always routes
through finalize, which drains the backlog.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Sequence

from .engine import OutputEvent, Session, deliver, finalize, step
from .metrics import SessionReport
from .stream import Transcript


def parse_lag_profile(text: str) -> tuple[int, ...]:
    """Comma-separated per-tick delivery counts, e.g. "3" or "3,1,2"."""
    try:
        counts = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"bad lag profile {text!r}") from None
    if not counts or any(c < 1 for c in counts):
        raise ValueError("lag profile counts must be positive")
    return counts


def replay(transcript: Transcript, session: Session,
           lag_profile: Sequence[int] = (1,)
           ) -> tuple[list[OutputEvent], SessionReport]:
    """Run one utterance through the session; returns the event log and report."""
    events: list[OutputEvent] = []
    queue = list(transcript.events)
    i = 0
    tick = 0
    while i < len(queue):
        count = lag_profile[tick] if tick < len(lag_profile) else 1
        for _ in range(count):
            if i >= len(queue):
                break
            ev = queue[i]
            i += 1
            if ev.is_final:
                fin, report = finalize(session, ev, transcript.reference)
                events.extend(fin)
                return events, report
            events.extend(deliver(session, ev))
        events.extend(step(session))
        tick += 1
    raise ValueError("transcript carries no final event")


def events_to_jsonl(events: Sequence[OutputEvent]) -> str:
    return "".join(json.dumps(ev.to_dict(), ensure_ascii=False) + "\n"
                   for ev in events)


def write_atomic(path: str, text: str):
    """Write via a temp file and rename, so failures never leave partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
