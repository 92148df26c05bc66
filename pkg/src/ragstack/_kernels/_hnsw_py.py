"""Pure-Python twin of the compiled search kernels.

Same semantics as `_hnsw_cy`: flat cosine scoring with double accumulation,
and HNSW build/search with (distance, id) tie-breaking. Distances are
negative dot products of unit-norm vectors, so ascending distance order is
descending cosine order. Slower than the extension but dependency-free.
"""

from __future__ import annotations

import heapq

import numpy as np

from .graph import HnswGraph, assign_levels, links_to_csr


def score_flat(matrix: np.ndarray, query: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """Dot product of every row with the query, in float64; masked-out rows get -inf."""
    scores = matrix.astype(np.float64) @ query.astype(np.float64)
    if mask is not None:
        scores = np.where(np.asarray(mask).astype(bool), scores, -np.inf)
    return scores


def _search_layer(dist_many, neighbors_of, entry, level, ef, allowed=None):
    """Greedy best-first search on one layer.

    `entry` is a list of (dist, id); returns up to `ef` admitted nodes as a
    list of (dist, id) sorted ascending. With `allowed` given, disallowed
    nodes still steer the traversal but are never admitted to the result.
    """
    visited = {node for _, node in entry}
    candidates = list(entry)
    heapq.heapify(candidates)
    # Result is a max-heap via negated keys; the root is the current worst.
    result = [(-d, -node) for d, node in entry if allowed is None or allowed[node]]
    heapq.heapify(result)
    while len(result) > ef:
        heapq.heappop(result)
    while candidates:
        dist, node = heapq.heappop(candidates)
        if len(result) >= ef and dist > -result[0][0]:
            break
        fresh = [j for j in neighbors_of(node, level) if j not in visited]
        if not fresh:
            continue
        visited.update(fresh)
        dists = dist_many(fresh)
        for neighbor, d in zip(fresh, dists):
            d = float(d)
            if len(result) < ef or d < -result[0][0]:
                heapq.heappush(candidates, (d, neighbor))
                if allowed is None or allowed[neighbor]:
                    heapq.heappush(result, (-d, -neighbor))
                    if len(result) > ef:
                        heapq.heappop(result)
    return sorted((-nd, -nn) for nd, nn in result)


def _select_neighbors(mat64, candidates, m):
    """Diversity-aware selection: keep a candidate only if it is closer to the
    query than to every already-selected neighbor. Candidates arrive sorted
    ascending by (dist, id)."""
    selected: list[tuple[float, int]] = []
    for dist, cand in candidates:
        if len(selected) == m:
            break
        vec = mat64[cand]
        keep = True
        for _, chosen in selected:
            if -float(vec @ mat64[chosen]) < dist:
                keep = False
                break
        if keep:
            selected.append((dist, cand))
    return selected


def build_graph(matrix: np.ndarray, m: int, ef_construction: int, seed: int) -> HnswGraph:
    n = matrix.shape[0]
    if n < 1:
        raise ValueError("cannot build an index over zero vectors")
    mat64 = matrix.astype(np.float64)
    levels = assign_levels(n, seed, m)
    # Base-layer capacity 3M: the denser bottom layer is what recall at low
    # ef lives on for high-dimensional data; upper layers stay at M so the
    # navigation cost keeps its usual meaning.
    max_m0 = 3 * m
    # links[level][node] -> mutable neighbor list
    links: list[list[list[int]]] = [[[] for _ in range(n)] for _ in range(int(levels[0]) + 1)]
    entry_point = 0
    max_level = int(levels[0])

    def neighbors_of(node, level):
        return links[level][node]

    def connect(node, level, candidates, cap):
        """Wire `node` to a heuristic selection from sorted candidates, adding
        reverse edges and pruning any neighbor that exceeds the cap."""
        selected = _select_neighbors(mat64, candidates, cap)
        links[level][node] = [other for _, other in selected]
        for _, neighbor in selected:
            neigh_links = links[level][neighbor]
            if node in neigh_links:
                continue
            neigh_links.append(node)
            if len(neigh_links) > cap:
                dists = mat64[neigh_links] @ -mat64[neighbor]
                pruned = _select_neighbors(
                    mat64, sorted(zip(map(float, dists), neigh_links)), cap
                )
                links[level][neighbor] = [other for _, other in pruned]

    for i in range(1, n):
        q64 = mat64[i]
        level = int(levels[i])
        while len(links) <= level:
            links.append([[] for _ in range(n)])

        def dist_many(ids, q64=q64):
            return mat64[ids] @ -q64

        ep = [(float(-(mat64[entry_point] @ q64)), entry_point)]
        for lc in range(max_level, level, -1):
            ep = _search_layer(dist_many, neighbors_of, ep, lc, ef=1)
        for lc in range(min(level, max_level), -1, -1):
            found = _search_layer(dist_many, neighbors_of, ep, lc, ef=ef_construction)
            connect(i, lc, found, max_m0 if lc == 0 else m)
            ep = found
        if level > max_level:
            entry_point = i
            max_level = level

    # Refinement pass: early inserts chose their edges against a half-built
    # graph, so re-search the finished graph for every node and re-select its
    # base-layer edges from the union of old links and fresh candidates.
    for i in range(n):
        q64 = mat64[i]

        def dist_many(ids, q64=q64):
            return mat64[ids] @ -q64

        ep = [(float(-(mat64[entry_point] @ q64)), entry_point)]
        for lc in range(max_level, 0, -1):
            ep = _search_layer(dist_many, neighbors_of, ep, lc, ef=1)
        found = _search_layer(dist_many, neighbors_of, ep, 0, ef=ef_construction)
        pool = {node: dist for dist, node in found if node != i}
        for node in links[0][i]:
            if node not in pool:
                pool[node] = float(-(mat64[node] @ q64))
        connect(i, 0, sorted((dist, node) for node, dist in pool.items()), max_m0)

    level_links = [links_to_csr(n, links[lc]) for lc in range(max_level + 1)]
    return HnswGraph(
        m=m,
        ef_construction=ef_construction,
        seed=seed,
        entry_point=entry_point,
        max_level=max_level,
        levels=levels,
        level_links=level_links,
    )


def search_graph(
    graph: HnswGraph,
    matrix: np.ndarray,
    query: np.ndarray,
    ef: int,
    allowed: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Approximate top-`ef` search; returns (ids, scores) sorted by descending
    score with ties broken by ascending id."""
    q64 = query.astype(np.float64)

    def dist_many(ids):
        return matrix[ids].astype(np.float64) @ -q64

    def neighbors_of(node, level):
        return graph.neighbors(node, level)

    entry = graph.entry_point
    current = [(float(dist_many([entry])[0]), entry)]
    for lc in range(graph.max_level, 0, -1):
        current = _search_layer(dist_many, neighbors_of, current, lc, ef=1)
    mask = None if allowed is None else np.asarray(allowed).astype(bool)
    found = _search_layer(dist_many, neighbors_of, current, 0, ef=ef, allowed=mask)
    ids = np.array([node for _, node in found], dtype=np.int64)
    scores = np.array([-dist for dist, _ in found], dtype=np.float64)
    return ids, scores
