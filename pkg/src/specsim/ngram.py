"""Count-based n-gram language model with additive smoothing.

Desk-scale continuation predictor: additive-alpha smoothing over the full
vocabulary at the highest available order, dropping an order (scored with a
0.4 stupid-backoff factor) only when the queried history itself was never
seen. Models are immutable after training; all queries are read-only and
deterministic.
"""

from __future__ import annotations

import heapq
import json
import math
from typing import Iterable, Sequence

START = "<s>"
END = "</s>"

BACKOFF_FACTOR = 0.4


class EmptyCorpus(ValueError):
    pass


class NgramModel:
    """Raw occurrence counts for every history length up to order - 1."""

    def __init__(self, order: int, alpha: float, vocab: Iterable[str],
                 counts: dict[tuple[str, ...], dict[str, int]]):
        if order < 1:
            raise ValueError("order must be >= 1")
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.order = order
        self.alpha = alpha
        self.vocab = tuple(sorted(set(vocab) | {END}))
        self.counts = counts
        self.totals = {h: sum(d.values()) for h, d in counts.items()}
        self._dist_cache: dict[tuple[str, ...], list[float]] = {}

    def __eq__(self, other) -> bool:
        return (isinstance(other, NgramModel)
                and self.order == other.order and self.alpha == other.alpha
                and self.vocab == other.vocab and self.counts == other.counts)

    def _effective_history(self, history: Sequence[str]) -> tuple[str, ...]:
        if self.order == 1:
            return ()
        return tuple(history[-(self.order - 1):])

    def conditional(self, history: Sequence[str], token: str) -> float:
        """Smoothed P(token | history); backoff applies only to unseen histories."""
        hist = self._effective_history(history)
        factor = 1.0
        while hist and hist not in self.counts:
            hist = hist[1:]
            factor *= BACKOFF_FACTOR
        total = self.totals.get(hist, 0)
        c = self.counts.get(hist, {}).get(token, 0)
        v = len(self.vocab)
        return factor * (c + self.alpha) / (total + self.alpha * v)

    def distribution(self, history: Sequence[str]) -> list[float]:
        """Conditional probabilities aligned with self.vocab (backoff included)."""
        hist = self._effective_history(history)
        cached = self._dist_cache.get(hist)
        if cached is not None:
            return cached
        factor = 1.0
        h = hist
        while h and h not in self.counts:
            h = h[1:]
            factor *= BACKOFF_FACTOR
        total = self.totals.get(h, 0)
        row = self.counts.get(h, {})
        v = len(self.vocab)
        denom = total + self.alpha * v
        dist = [factor * (row.get(tok, 0) + self.alpha) / denom for tok in self.vocab]
        self._dist_cache[hist] = dist
        return dist

    def perplexity(self, window: Sequence[str]) -> float:
        """exp of the mean negative log conditional over the window."""
        if not window:
            raise ValueError("window must be non-empty")
        total = 0.0
        for i, tok in enumerate(window):
            total += math.log(self.conditional(window[:i], tok))
        return math.exp(-total / len(window))

    def continuations(self, prefix: Sequence[str], k: int,
                      max_len: int) -> list[tuple[tuple[str, ...], float]]:
        """Top-k continuations by best-first search over smoothed conditionals.

        A continuation ends with END (utterance end) or is truncated at
        max_len tokens; its probability is the product of step conditionals.
        Ties are broken lexicographically. Exact: every conditional is <= 1,
        so the first k completed states popped are the global top k.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if max_len < 1:
            raise ValueError("max_len must be >= 1")
        pad = (START,) * max(0, self.order - 1 - len(prefix))
        base = pad + tuple(prefix)
        start_hist = self._effective_history(base)
        heap: list[tuple[float, tuple[str, ...], tuple[str, ...]]] = [(-1.0, (), start_hist)]
        out: list[tuple[tuple[str, ...], float]] = []
        while heap and len(out) < k:
            neg_p, cont, hist = heapq.heappop(heap)
            if cont and (cont[-1] == END or len(cont) == max_len):
                out.append((cont, -neg_p))
                continue
            dist = self.distribution(hist)
            for tok, p in zip(self.vocab, dist):
                nhist = self._effective_history(hist + (tok,))
                heapq.heappush(heap, (neg_p * p, cont + (tok,), nhist))
        return out

    def to_json(self) -> str:
        data = {
            "order": self.order,
            "alpha": self.alpha,
            "vocab": list(self.vocab),
            "counts": {" ".join(h): dict(sorted(d.items()))
                       for h, d in sorted(self.counts.items())},
        }
        return json.dumps(data, ensure_ascii=False, sort_keys=True, indent=0) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "NgramModel":
        data = json.loads(text)
        counts = {tuple(h.split(" ")) if h else (): dict(d)
                  for h, d in data["counts"].items()}
        return cls(data["order"], data["alpha"], data["vocab"], counts)


def train_ngram(corpus: Sequence[Sequence[str]], order: int,
                alpha: float = 0.1) -> NgramModel:
    """Count-based training; sentences are start-padded and END-terminated."""
    if not corpus:
        raise EmptyCorpus("no sentences in corpus")
    counts: dict[tuple[str, ...], dict[str, int]] = {}
    vocab: set[str] = set()
    for sent in corpus:
        vocab.update(sent)
        seq = [START] * (order - 1) + list(sent) + [END]
        for i in range(order - 1, len(seq)):
            nxt = seq[i]
            for ell in range(order):
                hist = tuple(seq[i - ell:i])
                row = counts.setdefault(hist, {})
                row[nxt] = row.get(nxt, 0) + 1
    return NgramModel(order, alpha, vocab, counts)


def parse_corpus(text: str) -> list[list[str]]:
    """One sentence of whitespace-separated tokens per line; blank lines skipped."""
    return [line.split() for line in text.splitlines() if line.strip()]
