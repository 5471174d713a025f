"""Deterministic phrase-table translation with longest-match-leftmost scanning.

Doubles as the idiom glossary: entries flagged atomic mark target spans that
must be emitted as one unit. Tables are immutable after load and safe for
concurrent reads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True, slots=True)
class IdiomSpan:
    """Half-open target-token index range [start, end) of an atomic phrase."""

    start: int
    end: int


class PhraseTable:
    """Mapping of source token spans to target token spans.

    Lookup is longest-match-first at each position, scanning left to right;
    tokens with no matching entry pass through unchanged.
    """

    def __init__(self, entries: Mapping[Sequence[str], Sequence[str]] | None = None,
                 atomic: Iterable[Sequence[str]] = ()):
        self._entries: dict[tuple[str, ...], tuple[str, ...]] = {}
        self._atomic: set[tuple[str, ...]] = set()
        self._by_first: dict[str, list[int]] = {}
        self.max_source_len = 1
        if entries:
            atomic_keys = {tuple(a) for a in atomic}
            for src, tgt in entries.items():
                self.add(src, tgt, atomic=tuple(src) in atomic_keys)

    def add(self, source: Sequence[str], target: Sequence[str], atomic: bool = False):
        src = tuple(source)
        if not src:
            raise ValueError("empty source key")
        self._entries[src] = tuple(target)
        if atomic:
            self._atomic.add(src)
        lens = self._by_first.setdefault(src[0], [])
        if len(src) not in lens:
            lens.append(len(src))
            lens.sort(reverse=True)
        self.max_source_len = max(self.max_source_len, len(src))

    def __len__(self) -> int:
        return len(self._entries)

    def entries(self) -> dict[tuple[str, ...], tuple[str, ...]]:
        return dict(self._entries)

    def is_atomic(self, source: Sequence[str]) -> bool:
        return tuple(source) in self._atomic

    def atomic_targets(self) -> list[tuple[str, ...]]:
        """Target sides of atomic entries, longest first then lexicographic."""
        targets = {self._entries[src] for src in self._atomic if self._entries[src]}
        return sorted(targets, key=lambda t: (-len(t), t))

    def match_at(self, source: Sequence[str], pos: int) -> tuple[str, ...] | None:
        """Longest entry source matching at pos, or None."""
        first = source[pos]
        for ln in self._by_first.get(first, ()):
            if pos + ln <= len(source):
                cand = tuple(source[pos:pos + ln])
                if cand in self._entries:
                    return cand
        return None

    def validate(self) -> list[str]:
        bad = []
        for src in self._entries:
            if not src:
                bad.append("empty source key")
            if any(not t for t in src):
                bad.append(f"blank token in source key {src!r}")
        return bad


def translate(table: PhraseTable, source: Sequence[str]) -> tuple[str, ...]:
    """Greedy longest-match-leftmost translation; unmatched tokens pass through."""
    out: list[str] = []
    pos = 0
    n = len(source)
    while pos < n:
        key = table.match_at(source, pos)
        if key is None:
            out.append(source[pos])
            pos += 1
        else:
            out.extend(table._entries[key])
            pos += len(key)
    return tuple(out)


def idiom_spans(table: PhraseTable, target: Sequence[str]) -> list[IdiomSpan]:
    """All maximal non-overlapping occurrences of atomic targets, leftmost-longest."""
    targets = table.atomic_targets()
    if not targets:
        return []
    by_first: dict[str, list[tuple[str, ...]]] = {}
    for t in targets:
        by_first.setdefault(t[0], []).append(t)
    spans: list[IdiomSpan] = []
    pos = 0
    n = len(target)
    while pos < n:
        hit = None
        for cand in by_first.get(target[pos], ()):
            if pos + len(cand) <= n and tuple(target[pos:pos + len(cand)]) == cand:
                hit = cand
                break  # candidates are longest-first
        if hit is None:
            pos += 1
        else:
            spans.append(IdiomSpan(pos, pos + len(hit)))
            pos += len(hit)
    return spans


def parse_phrase_table(text: str) -> PhraseTable:
    """Tab-separated entries: `source tokens<TAB>target tokens[<TAB>atomic]`."""
    table = PhraseTable()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise ValueError(f"line {lineno}: expected 2 or 3 tab-separated fields")
        src = tuple(parts[0].split())
        tgt = tuple(parts[1].split())
        if not src:
            raise ValueError(f"line {lineno}: empty source key")
        atomic = False
        if len(parts) == 3:
            flag = parts[2].strip()
            if flag and flag != "atomic":
                raise ValueError(f"line {lineno}: unknown flag {flag!r}")
            atomic = flag == "atomic"
        table.add(src, tgt, atomic=atomic)
    return table


@dataclass(frozen=True, slots=True)
class StreamTranslation:
    """Incremental greedy translation state over a growing source stream.

    `out` is the committed target prefix: it only ever grows, because a match
    is committed only once no longer table entry could still start at or
    before the scan position (the pending window keeps the last
    max_source_len - 1 tokens open). `preview` translates pending + a
    hypothetical continuation without committing.
    """

    src: tuple[str, ...] = ()
    pos: int = 0
    out: tuple[str, ...] = ()

    def extend(self, table: PhraseTable, tokens: Sequence[str]) -> "StreamTranslation":
        src = self.src + tuple(tokens)
        pos = self.pos
        out = list(self.out)
        horizon = len(src) - (table.max_source_len - 1)
        while pos < horizon:
            key = table.match_at(src, pos)
            if key is None:
                out.append(src[pos])
                pos += 1
            elif pos + len(key) <= len(src):
                out.extend(table._entries[key])
                pos += len(key)
            else:  # pragma: no cover - key never exceeds remaining tokens
                break
        return StreamTranslation(src, pos, tuple(out))

    def preview(self, table: PhraseTable, continuation: Sequence[str]) -> tuple[str, ...]:
        """Translation of the full stream plus continuation; does not commit."""
        tail = translate(table, tuple(self.src[self.pos:]) + tuple(continuation))
        return self.out + tail

    def finish(self, table: PhraseTable) -> tuple[str, ...]:
        return self.preview(table, ())
