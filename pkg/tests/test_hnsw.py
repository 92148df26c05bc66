"""HNSW kernel tests, run against both the compiled and pure-Python backends."""

from __future__ import annotations

import numpy as np
import pytest

import ragstack._kernels as kernels
from conftest import make_store, random_unit_vectors
from oracle import brute_force_search
from ragstack._kernels import python_backend
from ragstack._kernels.graph import assign_levels
from ragstack.filters import FilterPredicate
from ragstack.hnsw import AnnIndex, AnnParams, CorruptIndexError

BACKENDS = {"python": python_backend}
if kernels.BACKEND == "cython":
    BACKENDS["cython"] = kernels._impl

backend = pytest.fixture(params=sorted(BACKENDS), name="backend")(
    lambda request: BACKENDS[request.param]
)


class TestAssignLevels:
    def test_deterministic(self):
        a = assign_levels(1000, seed=3, m=16)
        b = assign_levels(1000, seed=3, m=16)
        assert np.array_equal(a, b)

    def test_seed_changes_levels(self):
        a = assign_levels(1000, seed=3, m=16)
        b = assign_levels(1000, seed=4, m=16)
        assert not np.array_equal(a, b)

    def test_distribution_decays(self):
        levels = assign_levels(20000, seed=0, m=16)
        n1 = int(np.count_nonzero(levels >= 1))
        # P(level >= 1) = 1/16; allow generous slack.
        assert 0.03 < n1 / 20000 < 0.10


class TestScoreFlat:
    def test_matches_manual_dot(self, backend, rng):
        vecs = random_unit_vectors(100, 24, rng)
        q = random_unit_vectors(1, 24, rng)[0]
        scores = backend.score_flat(vecs, q)
        expected = vecs.astype(np.float64) @ q.astype(np.float64)
        assert np.allclose(scores, expected, atol=1e-12)

    def test_mask(self, backend, rng):
        vecs = random_unit_vectors(10, 8, rng)
        q = vecs[0]
        mask = np.zeros(10, dtype=np.uint8)
        mask[3] = mask[7] = 1
        scores = backend.score_flat(vecs, q, mask)
        assert np.isneginf(scores[0])
        assert not np.isneginf(scores[3])


class TestBuildAndSearch:
    def test_deterministic_build(self, backend, rng):
        vecs = random_unit_vectors(400, 16, rng)
        g1 = backend.build_graph(vecs, 8, 64, seed=5)
        g2 = backend.build_graph(vecs, 8, 64, seed=5)
        assert g1.entry_point == g2.entry_point
        assert g1.max_level == g2.max_level
        for (p1, i1), (p2, i2) in zip(g1.level_links, g2.level_links):
            assert np.array_equal(p1, p2)
            assert np.array_equal(i1, i2)

    def test_recall_vs_exact(self, backend, rng):
        n, dim, k = 900, 32, 10
        vecs = random_unit_vectors(n, dim, rng)
        graph = backend.build_graph(vecs, 16, 200, seed=1)
        queries = random_unit_vectors(30, dim, rng)
        total = 0.0
        for q in queries:
            ids, _ = backend.search_graph(graph, vecs, q, 64)
            exact = {i for i, _ in brute_force_search(vecs, q, k)}
            total += len(set(ids[:k].tolist()) & exact) / k
        assert total / len(queries) >= 0.95

    def test_results_sorted_desc_with_id_ties(self, backend, rng):
        vecs = random_unit_vectors(50, 8, rng)
        vecs[10] = vecs[3]
        vecs[20] = vecs[3]  # duplicates force score ties
        graph = backend.build_graph(vecs, 8, 64, seed=2)
        ids, scores = backend.search_graph(graph, vecs, vecs[3], 50)
        for a in range(len(ids) - 1):
            assert scores[a] > scores[a + 1] or (
                scores[a] == scores[a + 1] and ids[a] < ids[a + 1]
            )
        top3 = [i for i in ids[:3]]
        assert sorted(top3) == [3, 10, 20]

    def test_k_at_least_count_returns_everything(self, backend, rng):
        vecs = random_unit_vectors(12, 8, rng)
        graph = backend.build_graph(vecs, 8, 64, seed=3)
        ids, _ = backend.search_graph(graph, vecs, vecs[0], 50)
        assert sorted(ids.tolist()) == list(range(12))

    def test_single_node_graph(self, backend, rng):
        vecs = random_unit_vectors(1, 8, rng)
        graph = backend.build_graph(vecs, 8, 64, seed=4)
        ids, scores = backend.search_graph(graph, vecs, vecs[0], 5)
        assert ids.tolist() == [0]
        assert scores[0] == pytest.approx(1.0, abs=1e-6)

    def test_filtered_search_skips_disallowed(self, backend, rng):
        vecs = random_unit_vectors(200, 16, rng)
        graph = backend.build_graph(vecs, 8, 100, seed=6)
        allowed = np.zeros(200, dtype=np.uint8)
        allowed[::3] = 1
        q = random_unit_vectors(1, 16, rng)[0]
        ids, _ = backend.search_graph(graph, vecs, q, 20, allowed)
        assert len(ids) > 0
        assert all(i % 3 == 0 for i in ids.tolist())

    def test_filter_nobody_allowed(self, backend, rng):
        vecs = random_unit_vectors(30, 8, rng)
        graph = backend.build_graph(vecs, 8, 64, seed=6)
        ids, _ = backend.search_graph(
            graph, vecs, vecs[0], 10, np.zeros(30, dtype=np.uint8)
        )
        assert ids.tolist() == []


class TestBackendAgreement:
    def test_same_levels_both_backends(self, rng):
        if "cython" not in BACKENDS:
            pytest.skip("extension not built")
        vecs = random_unit_vectors(300, 16, rng)
        g_py = python_backend.build_graph(vecs, 8, 64, seed=9)
        g_cy = BACKENDS["cython"].build_graph(vecs, 8, 64, seed=9)
        assert np.array_equal(g_py.levels, g_cy.levels)
        assert g_py.max_level == g_cy.max_level

    def test_comparable_recall(self, rng):
        if "cython" not in BACKENDS:
            pytest.skip("extension not built")
        n, dim, k = 600, 16, 10
        vecs = random_unit_vectors(n, dim, rng)
        queries = random_unit_vectors(20, dim, rng)
        recalls = {}
        for name, impl in BACKENDS.items():
            graph = impl.build_graph(vecs, 16, 100, seed=11)
            total = 0.0
            for q in queries:
                ids, _ = impl.search_graph(graph, vecs, q, 64)
                exact = {i for i, _ in brute_force_search(vecs, q, k)}
                total += len(set(ids[:k].tolist()) & exact) / k
            recalls[name] = total / len(queries)
        assert min(recalls.values()) >= 0.95

    def test_cross_backend_graph_search(self, rng):
        """A graph built by one backend is searchable by the other."""
        if "cython" not in BACKENDS:
            pytest.skip("extension not built")
        vecs = random_unit_vectors(150, 8, rng)
        graph = BACKENDS["cython"].build_graph(vecs, 8, 64, seed=12)
        ids_py, _ = python_backend.search_graph(graph, vecs, vecs[5], 10)
        ids_cy, _ = BACKENDS["cython"].search_graph(graph, vecs, vecs[5], 10)
        assert ids_py.tolist() == ids_cy.tolist()
        assert ids_py[0] == 5


class TestAnnIndexSerialization:
    def test_roundtrip(self, rng):
        vecs = random_unit_vectors(120, 8, rng)
        index = AnnIndex.build(vecs, AnnParams(m=8, ef_construction=64), seed=13)
        blob = index.to_bytes()
        back = AnnIndex.from_bytes(blob)
        assert back.count == index.count
        assert back.graph.entry_point == index.graph.entry_point
        assert back.graph.max_level == index.graph.max_level
        assert back.params == index.params
        for (p1, i1), (p2, i2) in zip(index.graph.level_links, back.graph.level_links):
            assert np.array_equal(p1, p2)
            assert np.array_equal(i1, i2)
        # And it searches identically.
        q = random_unit_vectors(1, 8, rng)[0]
        a = index.search(vecs, q, 10)
        b = back.search(vecs, q, 10)
        assert a[0].tolist() == b[0].tolist()

    def test_truncated_blob(self, rng):
        vecs = random_unit_vectors(20, 8, rng)
        index = AnnIndex.build(vecs, AnnParams(m=8, ef_construction=32), seed=14)
        blob = index.to_bytes()
        with pytest.raises(CorruptIndexError):
            AnnIndex.from_bytes(blob[: len(blob) - 7])

    def test_bad_magic(self):
        with pytest.raises(CorruptIndexError):
            AnnIndex.from_bytes(b"XXXX" + b"\x00" * 64)


class TestStoreAnnRecall:
    def test_recall_through_store_api(self, rng):
        n, dim, k = 800, 32, 10
        vecs = random_unit_vectors(n, dim, rng)
        store = make_store(vecs)
        store.build_ann_index(AnnParams(m=16, ef_construction=200))
        queries = random_unit_vectors(25, dim, rng)
        total = 0.0
        for q in queries:
            approx = {h.record_id for h in store.search_ann(q, k, ef_search=64)}
            exact = {h.record_id for h in store.search_flat(q, k)}
            total += len(approx & exact) / k
        assert total / len(queries) >= 0.95

    def test_filtered_ann_matches_predicate(self, rng):
        vecs = random_unit_vectors(300, 16, rng)
        metadatas = [{"year": 2019 + (i % 3)} for i in range(300)]
        store = make_store(vecs, metadatas)
        store.build_ann_index(AnnParams(m=8, ef_construction=100))
        predicate = FilterPredicate.equals(year=2020)
        hits = store.search_ann(vecs[1], 10, ef_search=64, predicate=predicate)
        assert hits
        assert all(h.chunk.metadata["year"] == 2020 for h in hits)
