#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Covers the two levels that matter: raw kernel microbenchmarks (sequence
scans, token edit distance) and a full 10k-token replay through the n-gram
backend. The replay is run in subprocesses so each measurement imports the
package with the wanted kernel selection.

Usage: python benchmarks/bench.py [--tokens 10000]
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from specsim._kernels import _pure  # noqa: E402

try:
    from specsim._kernels import _speed
except ImportError:
    _speed = None


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def micro(impls):
    rng = random.Random(1)
    near = tuple(f"t{rng.randrange(40)}" for _ in range(10000))
    mutated = list(near)
    for _ in range(20):
        mutated[rng.randrange(len(mutated))] = "X"
    mutated = tuple(mutated)
    far = tuple(f"t{rng.randrange(40)}" for _ in range(9000))
    long_a = tuple(f"w{i}" for i in range(200000))
    long_b = long_a[:-1] + ("z",)

    cases = [
        ("prefix scan, 200k tokens x50",
         lambda mod: lambda: [mod.common_prefix_len(long_a, long_b)
                              for _ in range(50)]),
        ("suffix scan, 200k tokens x50",
         lambda mod: lambda: [mod.common_suffix_len(long_a, long_b)
                              for _ in range(50)]),
        ("edit distance, 10k nearly equal",
         lambda mod: lambda: mod.levenshtein(near, mutated)),
        ("edit distance, 10k vs 9k random",
         lambda mod: lambda: mod.levenshtein(near, far)),
    ]
    print(f"{'kernel microbenchmark':40} " +
          " ".join(f"{name:>12}" for name, _ in impls))
    for label, make in cases:
        times = [timeit(make(mod), repeat=1 if "9k" in label else 3)
                 for _, mod in impls]
        row = " ".join(f"{t * 1000:>10.1f}ms" for t in times)
        print(f"{label:40} {row}", flush=True)


REPLAY_SNIPPET = r"""
import random, sys, time
from specsim.ngram import train_ngram
from specsim.phrases import PhraseTable
from specsim.predictor import NgramBackend
from specsim.stream import ContextDoc, EngineConfig, transcript_from_tokens
from specsim.engine import start_session
from specsim.replay import replay
from specsim._kernels import IMPLEMENTATION

n_tokens = int(sys.argv[1])
rng = random.Random(99)
vocab = [f"w{i}" for i in range(20)]
sentences = [[rng.choice(vocab) for _ in range(rng.randint(4, 9))] for _ in range(12)]
model = train_ngram(sentences, 3, alpha=0.1)
table = PhraseTable()
for i, tok in enumerate(vocab):
    table.add((tok,), (f"T{i}",))
toks = []
while len(toks) < n_tokens:
    toks.extend(rng.choice(sentences))
toks = toks[:n_tokens]
reference = tuple(f"T{vocab.index(t)}" for t in toks)
transcript = transcript_from_tokens(toks, reference=reference)
backend = NgramBackend(model, table, max_len=10)
session = start_session(EngineConfig(k=4, d=2), ContextDoc("c"), backend, table)
start = time.perf_counter()
events, report = replay(transcript, session)
elapsed = time.perf_counter() - start
print(f"{IMPLEMENTATION}: {n_tokens} tokens in {elapsed:.2f}s "
      f"({n_tokens / elapsed:,.0f} tok/s), divergences={report.divergences}, "
      f"accuracy={report.accuracy:.3f}")
"""


def replay_bench(n_tokens: int):
    print(f"\nend-to-end replay, n-gram backend, k=4 d=2, {n_tokens} tokens",
          flush=True)
    for env_extra in ({}, {"SPECSIM_PURE": "1"}):
        if env_extra and _speed is None:
            continue
        env = dict(os.environ, **env_extra)
        subprocess.run([sys.executable, "-c", REPLAY_SNIPPET, str(n_tokens)],
                       env=env, check=True)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--tokens", type=int, default=10000)
    args = parser.parse_args()

    impls = [("pure", _pure)]
    if _speed is not None:
        impls.append(("compiled", _speed))
    else:
        print("compiled kernels not built; benchmarking the fallback only\n")
    micro(impls)
    replay_bench(args.tokens)


if __name__ == "__main__":
    main()
