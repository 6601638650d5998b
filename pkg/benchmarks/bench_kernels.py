"""Compare the numba and numpy versions of the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both versions are called directly, so the env flag does not matter here.
Numba timings exclude the first (compiling) call.
"""

import argparse
import time

import numpy as np

from searchgen import kernels
from searchgen._accel import NUMBA_INSTALLED
from searchgen.lm import train_lm


def synthetic_corpus(n_sentences=3000, vocab=400, seed=0):
    rng = np.random.default_rng(seed)
    # Zipf-ish word choice so higher-order n-grams actually repeat
    weights = 1.0 / np.arange(1, vocab + 1)
    weights /= weights.sum()
    words = [f"w{i}" for i in range(vocab)]
    return [tuple(words[i] for i in rng.choice(vocab, size=rng.integers(5, 20), p=weights))
            for _ in range(n_sentences)]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--queries", type=int, default=200_000)
    args = ap.parse_args()

    lm = train_lm(synthetic_corpus(), order=3)
    rng = np.random.default_rng(1)
    hist = rng.integers(3, len(lm.vocab), size=(args.queries, lm.order - 1)).astype(np.int64)
    words = rng.integers(1, len(lm.vocab), size=args.queries).astype(np.int64)
    tables = lm._tables()
    a = rng.integers(0, 50, size=400).astype(np.int64)
    b = rng.integers(0, 50, size=400).astype(np.int64)

    cases = {
        f"token_probs ({args.queries} queries)": (
            lambda: kernels.token_probs_numpy(hist, words, *tables),
            lambda: kernels.token_probs_numba(hist, words, *tables)),
        "edit_table (400 x 400)": (
            lambda: kernels.edit_table_numpy(a, b),
            lambda: kernels.edit_table_numba(a, b)),
    }
    print(f"numba installed: {NUMBA_INSTALLED}; default backend: {kernels.BACKEND}")
    print(f"{'kernel':34s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speed-up':>9s}")
    for name, (np_fn, nb_fn) in cases.items():
        t_np = best_of(np_fn, args.repeat)
        if NUMBA_INSTALLED:
            ref, got = np_fn(), nb_fn()  # also warms up the jit
            assert np.allclose(ref, got, rtol=0, atol=1e-12), name
            t_nb = best_of(nb_fn, args.repeat)
            print(f"{name:34s} {t_np * 1e3:11.2f} {t_nb * 1e3:11.2f} {t_np / t_nb:8.1f}x")
        else:
            print(f"{name:34s} {t_np * 1e3:11.2f} {'n/a':>11s} {'':>9s}")


if __name__ == "__main__":
    main()
