"""Acceptance criteria, one test per criterion, at their stated tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to get one pass line per
criterion.
"""

from __future__ import annotations

import random
import time

import pytest

from specsim.engine import start_session
from specsim.metrics import average_lagging
from specsim.ngram import train_ngram
from specsim.phrases import PhraseTable
from specsim.predictor import NgramBackend
from specsim.replay import events_to_jsonl, replay
from specsim.stream import ContextDoc, EngineConfig, transcript_from_tokens
from specsim.template import consensus
from specsim.tree import advance, build_tree, leaf_hypotheses

import test_tree
from conftest import make_scenario
from oracles import consensus_oracle, enumerate_continuations, tree_survivor_oracle

MASS_TOL = 1e-9


def report_line(cid: str, text: str):
    print(f"\n[{cid}] {text}: PASS")


def golden_session(shopping_backend, shopping_table, **cfg):
    return start_session(EngineConfig(**cfg), ContextDoc("daily-life"),
                         shopping_backend, shopping_table)


def test_c1_golden_run(shopping_backend, shopping_table, shopping_transcript):
    started = time.perf_counter()
    session = golden_session(shopping_backend, shopping_table)
    pre_divergence_render = None
    events = []
    queue = list(shopping_transcript.events)
    from specsim.engine import feed, finalize
    for ev in queue[:-1]:
        events.extend(feed(session, ev))
        if ev.surface == "と":
            pre_divergence_render = session.template.render()
    fin, report = finalize(session, queue[-1], shopping_transcript.reference)
    events.extend(fin)
    elapsed = time.perf_counter() - started

    # (a) committed template before the divergence token
    assert pre_divergence_render == "Yesterday , I [*] with my friend"
    # (b) exactly one diverge and one repredict, at the divergence token's time
    diverges = [ev for ev in events if ev.kind == "diverge"]
    repredicts = [ev for ev in events if ev.kind == "repredict"]
    assert len(diverges) == 1 and len(repredicts) == 1
    t_divergence = next(ev.t_ms for ev in shopping_transcript.events
                        if ev.surface == "買い物")
    assert diverges[0].t_ms == t_divergence == repredicts[0].t_ms
    # (c) final emitted stream
    assert " ".join(session.emitted) == "Yesterday , I went shopping with my friend"
    # (d) zero revision conflicts
    assert report.conflicts == 0
    assert elapsed < 1.0
    report_line("C1", f"golden run reproduced in {elapsed * 1000:.0f} ms")


def test_c2_mass_conservation_1000_sequences():
    rng = random.Random(424242)
    for _ in range(1000):
        tree = test_tree.build_tree((), test_tree.random_ps(rng, k_max=5))
        assert abs(tree.total_mass() - 1.0) <= MASS_TOL
        for _ in range(rng.randint(1, 10)):
            test_tree.mutate_tree(tree, rng)
            assert abs(tree.total_mass() - 1.0) <= MASS_TOL
    report_line("C2", "1000 random build/advance/expand/prune sequences "
                      "conserve mass within 1e-9")


def test_c3_monotonic_emission_500_scenarios():
    rng = random.Random(99991)
    violations = 0
    for _ in range(500):
        transcript, backend, table, ctx = make_scenario(rng)
        cfg = EngineConfig(k=rng.randint(1, 5), d=rng.randint(1, 3),
                           tau=rng.choice([0.6, 0.75, 0.9]),
                           buffer_limit=rng.randint(1, 6))
        session = start_session(cfg, ctx, backend, table)
        profile = rng.choice([(1,), (2,), (3,), (3, 2)])
        seen: list[str] = []
        events, _ = replay(transcript, session, profile)
        for ev in events:
            if ev.kind == "emit":
                seen.extend(ev.toks)
                if seen != session.emitted[:len(seen)]:
                    violations += 1
        if seen != session.emitted:
            violations += 1
    assert violations == 0
    report_line("C3", "500 random scripted scenarios emit append-only streams")


def test_c4_consensus_oracle_equivalence_1000_sets():
    rng = random.Random(777)
    vocab = ["a", "b", "c", "d", "e"]
    for _ in range(1000):
        count = rng.randint(1, 6)
        raw = sorted((rng.uniform(0.01, 0.6) for _ in range(count)), reverse=True)
        scale = rng.uniform(0.4, 1.0) / sum(raw)
        hyps = sorted(
            ((tuple(rng.choice(vocab) for _ in range(rng.randint(0, 12))),
              mass * scale) for mass in raw),
            key=lambda h: (-h[1], h[0]))
        tau = rng.choice([0.5, 0.7, 0.9, 0.95])
        assert consensus(hyps, tau).slots == consensus_oracle(hyps, tau).slots
    report_line("C4", "consensus equals the brute-force prefix/suffix oracle "
                      "on 1000 random hypothesis sets")


def test_c5_ngram_matches_enumeration_and_normalization():
    rng = random.Random(31415)
    import math
    for _ in range(60):
        order = rng.randint(1, 3)
        sigma = ["a", "b", "c", "d", "e"][:rng.randint(2, 5)]
        corpus = [[rng.choice(sigma) for _ in range(rng.randint(1, 5))]
                  for _ in range(rng.randint(1, 6))]
        model = train_ngram(corpus, order, alpha=rng.choice([0.1, 0.5]))
        assert len(model.vocab) <= 6
        prefix = [rng.choice(sigma) for _ in range(rng.randint(0, 3))]
        k, max_len = rng.randint(1, 5), rng.randint(1, 4)
        got = model.continuations(prefix, k, max_len)
        want = enumerate_continuations(model, prefix, k, max_len)
        assert [c for c, _ in got] == [c for c, _ in want]
        assert all(abs(pg - pw) <= 1e-9 for (_, pg), (_, pw) in zip(got, want))
        for hist in model.counts:
            total = math.fsum(model.conditional(hist, tok) for tok in model.vocab)
            assert abs(total - 1.0) <= 1e-9
    report_line("C5", "continuation search matches exhaustive enumeration; "
                      "conditionals sum to 1 for every history")


def test_c6_bayes_advance_500_trees():
    rng = random.Random(161803)
    for _ in range(500):
        tree = test_tree.random_tree(rng)
        token = test_tree._some_token(tree, rng)
        want_diverged, want_masses = tree_survivor_oracle(tree, token)
        out = advance(tree, token)
        assert out.diverged == want_diverged
        if not out.diverged:
            got = {id(n): n.path_p for n in tree.leaves()}
            assert set(got) == set(want_masses)
            for leaf_id, mass in want_masses.items():
                assert abs(got[leaf_id] - mass) <= 1e-9
    # the worked hand example
    tree = build_tree((), test_tree.ps_of(("a x", 0.4, "ta"), ("b x", 0.3, "tb"),
                                          ("c x", 0.2, "tc")))
    advance(tree, "a")
    hyps = leaf_hypotheses(tree)
    assert abs(hyps[0][1] - 0.8) <= 1e-9
    report_line("C6", "advance posteriors match brute-force Bayes on 500 trees")


def test_c7_latency_metric(shopping_backend, shopping_table, shopping_transcript):
    assert average_lagging([3, 3, 3], 3) == 3.0
    assert average_lagging([1, 2, 3], 3) == 1.0
    session = golden_session(shopping_backend, shopping_table)
    _, report = replay(shopping_transcript, session)
    src_len = len(shopping_transcript.events)
    baseline = average_lagging([src_len] * report.emitted_len, src_len)
    assert report.al is not None and report.al < baseline
    report_line("C7", f"AL hand values exact; golden AL {report.al:.3f} < "
                      f"wait-until-end {baseline:.1f}")


def test_c8_catchup(shopping_backend, shopping_table, shopping_transcript):
    session = golden_session(shopping_backend, shopping_table, buffer_limit=2)
    events, report = replay(shopping_transcript, session, lag_profile=(3,))
    catchups = [ev for ev in events if ev.kind == "catchup"]
    assert len(catchups) == 1
    assert report.catchups == 1
    assert report.accuracy == 1.0
    report_line("C8", "burst of 3 against buffer_limit 2 fires exactly one "
                      "catch-up; accuracy 1.0")


def synthetic_workload(n_tokens=10000, seed=99):
    rng = random.Random(seed)
    vocab = [f"w{i}" for i in range(20)]
    sentences = [[rng.choice(vocab) for _ in range(rng.randint(4, 9))]
                 for _ in range(12)]
    model = train_ngram(sentences, 3, alpha=0.1)
    table = PhraseTable()
    for i, tok in enumerate(vocab):
        table.add((tok,), (f"T{i}",))
    toks: list[str] = []
    while len(toks) < n_tokens:
        toks.extend(rng.choice(sentences))
    toks = toks[:n_tokens]
    reference = tuple(f"T{vocab.index(t)}" for t in toks)
    transcript = transcript_from_tokens(toks, reference=reference)
    return transcript, model, table


def test_c9_determinism_and_throughput():
    transcript, model, table = synthetic_workload()

    logs = []
    elapsed = []
    for _ in range(2):
        backend = NgramBackend(model, table, max_len=10)
        session = start_session(EngineConfig(k=4, d=2), ContextDoc("c"),
                                backend, table)
        started = time.perf_counter()
        events, report = replay(transcript, session)
        elapsed.append(time.perf_counter() - started)
        logs.append(events_to_jsonl(events).encode("utf-8"))
        assert report.emitted_len == 10000
    assert logs[0] == logs[1]
    assert min(elapsed) < 5.0, f"10k-token replay took {min(elapsed):.2f}s"
    report_line("C9", f"byte-identical logs; 10k tokens in {min(elapsed):.2f}s "
                      f"(budget 5s)")
