"""Shared fixtures: golden files, toy models, randomized scenario generator."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from specsim.ngram import END, train_ngram
from specsim.phrases import PhraseTable, parse_phrase_table, translate
from specsim.predictor import Prediction, ScriptedBackend, load_scripted_fixture, prediction_set
from specsim.stream import ContextDoc, EngineConfig, Transcript, parse_transcript, transcript_from_tokens

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def shopping_transcript() -> Transcript:
    return parse_transcript((FIXTURES / "shopping" / "transcript.jsonl").read_text("utf-8"))


@pytest.fixture(scope="session")
def shopping_backend() -> ScriptedBackend:
    return load_scripted_fixture((FIXTURES / "shopping" / "predictions.json").read_text("utf-8"))


@pytest.fixture(scope="session")
def shopping_table() -> PhraseTable:
    return parse_phrase_table((FIXTURES / "shopping" / "phrases.tsv").read_text("utf-8"))


@pytest.fixture()
def shopping_context() -> ContextDoc:
    return ContextDoc("daily-life")


@pytest.fixture(scope="session")
def toy_model():
    return train_ngram([["a", "b", "c"], ["a", "b", "d"]], 2, 0.1)


def make_scenario(rng: random.Random):
    """One randomized scripted scenario with table-derived translations.

    Returns (transcript, backend, table, context). Every hypothesis
    translation is the phrase translation of its full hypothetical source,
    so after any divergence the final output must equal the phrase
    translation of the observed source (absent conflicts).
    """
    vocab = [f"s{i}" for i in range(8)]
    n = rng.randint(3, 10)
    true = [rng.choice(vocab) for _ in range(n)]

    table = PhraseTable()
    for i, tok in enumerate(vocab):
        table.add((tok,), (f"t{i}",))
    for _ in range(rng.randint(0, 3)):
        start = rng.randrange(0, n)
        ln = rng.randint(2, 3)
        span = tuple(true[start:start + ln])
        if len(span) >= 2:
            tgt = tuple(f"g{rng.randrange(50)}" for _ in range(rng.randint(1, 3)))
            table.add(span, tgt)

    def make_ps(prefix: tuple[str, ...]):
        remainder = tuple(true[len(prefix):])
        count = rng.randint(1, 4)
        conts: list[tuple[str, ...]] = []
        if remainder and rng.random() < 0.7:
            conts.append(remainder)
        while len(conts) < count:
            ln = rng.randint(1, 6)
            cont = tuple(rng.choice(vocab) for _ in range(ln))
            if cont not in conts:
                conts.append(cont)
        masses = sorted((rng.uniform(0.05, 0.5) for _ in conts), reverse=True)
        scale = min(1.0, 0.97 / sum(masses))
        items = [
            Prediction(cont + (END,), m * scale,
                       translate(table, prefix + cont))
            for cont, m in zip(conts, masses)
        ]
        return prediction_set(items)

    entries = {("ctx", ()): make_ps(())}
    for i in range(1, n):
        if rng.random() < 0.8:
            prefix = tuple(true[:i])
            entries[("ctx", prefix)] = make_ps(prefix)
    backend = ScriptedBackend(entries)
    transcript = transcript_from_tokens(true, reference=translate(table, true))
    return transcript, backend, table, ContextDoc("ctx")


def random_config(rng: random.Random) -> EngineConfig:
    return EngineConfig(
        k=rng.randint(1, 5),
        d=rng.randint(1, 3),
        epsilon=rng.choice([0.01, 0.05, 0.1]),
        tau=rng.choice([0.6, 0.75, 0.9]),
        buffer_limit=rng.randint(1, 6),
    )
