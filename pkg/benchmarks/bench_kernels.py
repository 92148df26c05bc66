"""Compare the compiled and pure-Python search kernels.

Usage:
    python benchmarks/bench_kernels.py [--n 2000] [--dim 64] [--queries 50]

Measures flat top-k scoring, HNSW build, and HNSW search for both backends,
plus recall@10 of each against exact search.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import ragstack._kernels as kernels
from ragstack._kernels import python_backend


def _unit_vectors(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    vecs = rng.standard_normal((n, dim))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return vecs.astype(np.float32)


def bench(backend, name: str, vectors, queries, m, efc, ef_search, k) -> dict:
    n = vectors.shape[0]
    exact = vectors.astype(np.float64)

    t0 = time.perf_counter()
    for q in queries:
        backend.score_flat(vectors, q)
    flat_ms = (time.perf_counter() - t0) / len(queries) * 1e3

    t0 = time.perf_counter()
    graph = backend.build_graph(vectors, m, efc, seed=42)
    build_s = time.perf_counter() - t0

    t0 = time.perf_counter()
    recall = 0.0
    for q in queries:
        ids, _ = backend.search_graph(graph, vectors, q, ef_search)
        truth = set(np.argsort(-(exact @ q.astype(np.float64)))[:k].tolist())
        recall += len(truth & set(ids[:k].tolist())) / k
    search_ms = (time.perf_counter() - t0) / len(queries) * 1e3

    return {
        "backend": name,
        "flat_ms": flat_ms,
        "build_s": build_s,
        "search_ms": search_ms,
        "recall": recall / len(queries),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2000)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--queries", type=int, default=50)
    parser.add_argument("--m", type=int, default=16)
    parser.add_argument("--ef-construction", type=int, default=200)
    parser.add_argument("--ef-search", type=int, default=64)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    vectors = _unit_vectors(args.n, args.dim, rng)
    queries = _unit_vectors(args.queries, args.dim, rng)

    backends = [(python_backend, "python")]
    if kernels.BACKEND == "cython":
        backends.append((kernels._impl, "cython"))
    else:
        print("note: compiled extension not available; benchmarking python only")

    print(
        f"n={args.n} dim={args.dim} queries={args.queries} "
        f"M={args.m} ef_construction={args.ef_construction} ef_search={args.ef_search}"
    )
    header = f"{'backend':<8} {'flat ms/q':>10} {'build s':>9} {'search ms/q':>12} {'recall@%d' % args.k:>9}"
    print(header)
    print("-" * len(header))
    rows = {}
    for impl, name in backends:
        row = bench(impl, name, vectors, queries, args.m, args.ef_construction, args.ef_search, args.k)
        rows[name] = row
        print(
            f"{row['backend']:<8} {row['flat_ms']:>10.3f} {row['build_s']:>9.2f} "
            f"{row['search_ms']:>12.3f} {row['recall']:>9.3f}"
        )
    if "cython" in rows:
        py, cy = rows["python"], rows["cython"]
        print(
            f"\nspeedup (python/cython): flat {py['flat_ms'] / cy['flat_ms']:.1f}x, "
            f"build {py['build_s'] / cy['build_s']:.1f}x, "
            f"search {py['search_ms'] / cy['search_ms']:.1f}x"
        )


if __name__ == "__main__":
    main()
