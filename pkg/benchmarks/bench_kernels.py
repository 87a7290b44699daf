"""Throughput comparison of the compiled and pure-NumPy kernel paths.

Times each kernel pair from fairtrade.kernels on a desk-scale workload
(episode simulation at horizons around 10^5..10^6) and prints per-call
milliseconds plus the speedup of the compiled path.  Parity is checked on
the fly: any numeric disagreement between the two paths fails the run.

Usage:
    python benchmarks/bench_kernels.py [--reps N] [--quick]

With numba unavailable only the NumPy column is reported.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from fairtrade import kernels
from fairtrade.core import FiniteJointDistribution, fgft_candidates, fgft_vector
from fairtrade.environments import lb_mu


def _episode_arrays():
    env = lb_mu()
    cum = env.joint.cumulative_weights()
    sellers = np.asarray(env.joint.sellers, dtype=np.float64)
    buyers = np.asarray(env.joint.buyers, dtype=np.float64)
    weights = np.asarray(env.joint.weights, dtype=np.float64)
    return cum, sellers, buyers, weights


def _fbep_tables(joint: FiniteJointDistribution):
    sellers = np.asarray(joint.sellers, dtype=np.float64)
    buyers = np.asarray(joint.buyers, dtype=np.float64)
    cands = fgft_candidates(sellers, buyers)
    matrix = np.empty((cands.size, joint.n_atoms), dtype=np.float64)
    for j in range(joint.n_atoms):
        pair = joint.atom(j)
        matrix[:, j] = fgft_vector(cands, pair.seller, pair.buyer)
    return cands, np.ascontiguousarray(matrix)


def _workloads(quick: bool):
    cum, sellers, buyers, weights = _episode_arrays()
    T = 20_000 if quick else 200_000
    K = 1_000 if quick else 10_000
    M = 2_000 if quick else 10_000
    n_prices = 100_000 if quick else 1_000_000

    rng = np.random.default_rng(0)
    prices = rng.random(n_prices)
    av = np.zeros(K + 1)
    av[1:] = rng.integers(0, 2, K).astype(np.float64)
    bv = rng.integers(0, 2, 2 * K + 1).astype(np.float64)
    cands, matrix = _fbep_tables(lb_mu().joint)
    n_tri = 10_000 if quick else 20_000
    tri_p = rng.random(n_tri)
    tri_s = rng.random(n_tri)
    tri_b = rng.random(n_tri)

    return [
        (
            f"expected_fgft_at ({n_prices} prices, 3 atoms)",
            "expected_fgft_at",
            (prices, sellers, buyers, weights),
        ),
        (
            f"incomplete_convolution (K={K})",
            "incomplete_convolution",
            (av, bv, K),
        ),
        (
            f"conv_pricing_commit (K={K})",
            "conv_pricing_commit",
            (7, cum, sellers, buyers, K),
        ),
        (
            "dbs_explore (N=20)",
            "dbs_explore",
            (7, cum, sellers, buyers, 20),
        ),
        (
            f"fbep_prices (T={T}, {cands.size} candidates)",
            "fbep_prices",
            (7, cum, sellers, buyers, cands, matrix, T),
        ),
        (
            f"uniform_prices (T={T})",
            "uniform_prices",
            (7, T),
        ),
        (
            f"sample_counts ({T} draws)",
            "sample_counts",
            (7, cum, T),
        ),
        (
            f"convolution_approx_batch ({n_tri} triples, M={M})",
            "convolution_approx_batch",
            (tri_p, tri_s, tri_b, M),
        ),
    ]


def _best_ms(fn, args, reps: int) -> float:
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best * 1e3


def _flatten(result):
    if isinstance(result, tuple):
        return [np.asarray(part, dtype=np.float64).ravel() for part in result]
    return [np.asarray(result, dtype=np.float64).ravel()]


def _max_gap(a, b) -> float:
    parts_a, parts_b = _flatten(a), _flatten(b)
    gap = 0.0
    for x, y in zip(parts_a, parts_b):
        if x.size != y.size:
            return float("inf")
        if x.size:
            gap = max(gap, float(np.max(np.abs(x - y))))
    return gap


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=5, help="timing repetitions (best-of)")
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args(argv)

    if kernels.HAS_NUMBA:
        kernels.warmup()
        header = f"{'kernel':52s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s} {'max gap':>10s}"
    else:
        header = f"{'kernel':52s} {'numpy ms':>10s}"
        print("numba unavailable: timing the NumPy path only", file=sys.stderr)
    print(header)
    print("-" * len(header))

    worst_gap = 0.0
    for label, name, call_args in _workloads(args.quick):
        np_fn = getattr(kernels, name + "_numpy")
        np_ms = _best_ms(np_fn, call_args, args.reps)
        if not kernels.HAS_NUMBA:
            print(f"{label:52s} {np_ms:10.3f}")
            continue
        nb_fn = getattr(kernels, name + "_compiled")
        nb_ms = _best_ms(nb_fn, call_args, args.reps)
        gap = _max_gap(nb_fn(*call_args), np_fn(*call_args))
        worst_gap = max(worst_gap, gap)
        print(f"{label:52s} {nb_ms:10.3f} {np_ms:10.3f} {np_ms / nb_ms:7.1f}x {gap:10.3g}")

    if kernels.HAS_NUMBA and worst_gap != 0.0:
        print(f"parity violated: max gap {worst_gap:.3g}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
