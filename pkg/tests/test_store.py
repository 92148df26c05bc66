from __future__ import annotations

import random

import numpy as np
import pytest

from conftest import make_store, random_unit_vectors, synthetic_chunk
from oracle import brute_force_search, predicate_matches
from ragstack.chunker import ChunkParams
from ragstack.embed import EmbedderSpec
from ragstack.errors import DimensionMismatchError
from ragstack.filters import Clause, FilterPredicate, InvalidFilterError
from ragstack.vectorstore import (
    CorruptStoreError,
    EmptyStoreError,
    IncompatibleVersionError,
    LengthMismatchError,
    StoreMeta,
    VectorStore,
    create_store,
)


def _meta(dim=8):
    return StoreMeta(dim=dim, embedder=EmbedderSpec(dim=dim))


class TestCreateAndInsert:
    def test_create_empty(self):
        store = create_store(_meta())
        assert store.count == 0

    def test_zero_dim_rejected(self):
        with pytest.raises(ValueError):
            StoreMeta(dim=0, embedder=EmbedderSpec(dim=1))

    def test_search_on_empty_store(self):
        store = create_store(_meta())
        query = np.zeros(8, dtype=np.float32)
        query[0] = 1.0
        assert store.search_flat(query, 5) == []

    def test_ids_consecutive(self, rng):
        store = create_store(_meta())
        vecs = random_unit_vectors(3, 8, rng)
        ids = store.insert([synthetic_chunk(i) for i in range(3)], list(vecs))
        assert ids == [0, 1, 2]
        more = store.insert([synthetic_chunk(3)], [vecs[0]])
        assert more == [3]
        assert store.count == 4

    def test_insert_empty(self):
        store = create_store(_meta())
        assert store.insert([], []) == []

    def test_dimension_mismatch(self, rng):
        store = create_store(_meta(dim=8))
        with pytest.raises(DimensionMismatchError):
            store.insert([synthetic_chunk(0)], [random_unit_vectors(1, 7, rng)[0]])

    def test_length_mismatch(self, rng):
        store = create_store(_meta(dim=8))
        with pytest.raises(LengthMismatchError):
            store.insert([synthetic_chunk(0)], list(random_unit_vectors(2, 8, rng)))


class TestSearchFlat:
    def test_identity_hit(self, rng):
        vecs = random_unit_vectors(20, 16, rng)
        store = make_store(vecs)
        hits = store.search_flat(vecs[7], 1)
        assert len(hits) == 1
        assert hits[0].record_id == 7
        assert hits[0].score == pytest.approx(1.0, abs=1e-6)

    def test_matches_brute_force_oracle(self, rng):
        vecs = random_unit_vectors(500, 64, rng)
        store = make_store(vecs)
        queries = random_unit_vectors(20, 64, rng)
        for q in queries:
            hits = store.search_flat(q, 10)
            expected = brute_force_search(vecs, q, 10)
            assert [h.record_id for h in hits] == [i for i, _ in expected]
            for hit, (_, score) in zip(hits, expected):
                assert hit.score == pytest.approx(score, abs=1e-6)

    def test_duplicate_vectors_tie_break_ascending_id(self, rng):
        one = random_unit_vectors(1, 8, rng)[0]
        vecs = np.stack([one] * 5)
        store = make_store(vecs)
        hits = store.search_flat(one, 3)
        assert [h.record_id for h in hits] == [0, 1, 2]

    def test_k_larger_than_count(self, rng):
        vecs = random_unit_vectors(4, 8, rng)
        store = make_store(vecs)
        assert len(store.search_flat(vecs[0], 100)) == 4

    def test_query_dim_checked(self, rng):
        store = make_store(random_unit_vectors(4, 8, rng))
        with pytest.raises(DimensionMismatchError):
            store.search_flat(np.ones(7, dtype=np.float32), 2)


class TestFilters:
    def test_clause_validation(self):
        with pytest.raises(InvalidFilterError):
            Clause("year", "~", 2020)
        with pytest.raises(InvalidFilterError):
            Clause("", "==", 2020)
        with pytest.raises(InvalidFilterError):
            Clause("year", "in", [])
        with pytest.raises(InvalidFilterError):
            Clause("year", "in", [2020, "x"])
        with pytest.raises(InvalidFilterError):
            Clause("flag", "<", True)

    def test_equality_filter_restricts_candidates(self, rng):
        vecs = random_unit_vectors(40, 16, rng)
        metadatas = [{"year": 2019 if i % 2 else 2020} for i in range(40)]
        store = make_store(vecs, metadatas)
        predicate = FilterPredicate.equals(year=2020)
        hits = store.search_flat(vecs[0], 10, predicate)
        assert hits
        assert all(h.chunk.metadata["year"] == 2020 for h in hits)

    def test_filter_completeness(self, rng):
        vecs = random_unit_vectors(30, 8, rng)
        metadatas = [{"year": 2018 + (i % 3)} for i in range(30)]
        store = make_store(vecs, metadatas)
        predicate = FilterPredicate.equals(year=2018)
        hits = store.search_flat(vecs[0], 100, predicate)
        assert len(hits) == sum(1 for m in metadatas if m["year"] == 2018)

    def test_no_matches(self, rng):
        vecs = random_unit_vectors(10, 8, rng)
        store = make_store(vecs, [{"year": 2019}] * 10)
        assert store.search_flat(vecs[0], 5, FilterPredicate.equals(year=1999)) == []

    def test_from_obj_forms(self):
        assert FilterPredicate.from_obj(None) is None
        p1 = FilterPredicate.from_obj({"year": 2020})
        assert p1.matches({"year": 2020})
        p2 = FilterPredicate.from_obj([{"key": "year", "op": ">=", "value": 2020}])
        assert p2.matches({"year": 2021}) and not p2.matches({"year": 2019})
        assert FilterPredicate.from_obj(p2.to_obj()) == p2

    def test_randomized_predicates_vs_oracle(self, rng):
        rnd = random.Random(4242)
        n = 250
        vecs = random_unit_vectors(n, 16, rng)
        categories = ["trade", "finance", "stats", "policy"]
        metadatas = []
        for i in range(n):
            md = {
                "year": rnd.randint(2015, 2024),
                "category": rnd.choice(categories),
                "weight": round(rnd.uniform(0, 1), 3),
                "flagged": rnd.random() < 0.5,
            }
            if rnd.random() < 0.2:
                del md["year"]  # exercise the missing-key rule
            metadatas.append(md)
        store = make_store(vecs, metadatas)
        queries = random_unit_vectors(5, 16, rng)
        ops = ["==", "!=", "<", "<=", ">", ">=", "in"]
        for trial in range(200):
            clauses = []
            for _ in range(rnd.randint(1, 3)):
                key = rnd.choice(["year", "category", "weight", "flagged"])
                if key == "year":
                    op = rnd.choice(ops)
                    value = (
                        [rnd.randint(2015, 2024) for _ in range(3)]
                        if op == "in"
                        else rnd.randint(2015, 2024)
                    )
                elif key == "category":
                    op = rnd.choice(["==", "!=", "in", "<", ">="])
                    value = (
                        rnd.sample(categories, 2) if op == "in" else rnd.choice(categories)
                    )
                elif key == "weight":
                    op = rnd.choice(["<", "<=", ">", ">="])
                    value = round(rnd.uniform(0, 1), 3)
                else:
                    op = rnd.choice(["==", "!="])
                    value = rnd.random() < 0.5
                clauses.append({"key": key, "op": op, "value": value})
            predicate = FilterPredicate.from_obj(clauses)
            query = queries[trial % len(queries)]
            k = rnd.randint(1, 20)
            hits = store.search_flat(query, k, predicate)
            # Soundness: every hit satisfies the predicate (checked by the oracle).
            for hit in hits:
                assert predicate_matches(clauses, hit.chunk.metadata)
            # Completeness: exactly min(k, #matching) hits, matching the oracle set.
            matching = [i for i in range(n) if predicate_matches(clauses, metadatas[i])]
            assert len(hits) == min(k, len(matching))
            allowed = [False] * n
            for i in matching:
                allowed[i] = True
            expected = brute_force_search(vecs, query, k, allowed)
            assert [h.record_id for h in hits] == [i for i, _ in expected]


class TestPersistence:
    def test_roundtrip_bit_exact(self, tmp_path, rng):
        vecs = random_unit_vectors(50, 12, rng)
        metadatas = [{"year": 2019 + (i % 4), "category": "c" + str(i % 3)} for i in range(50)]
        store = make_store(vecs, metadatas, chunk_params=ChunkParams(chunk_size=128, overlap=16))
        store.save(tmp_path / "s")
        loaded = VectorStore.load(tmp_path / "s")
        assert loaded.count == 50
        assert loaded.meta.embedder == store.meta.embedder
        assert loaded.meta.chunk_params == store.meta.chunk_params
        assert loaded.meta.ann_seed == store.meta.ann_seed
        assert np.array_equal(loaded.matrix, store.matrix)
        assert [c.metadata for c in loaded._chunks] == [c.metadata for c in store._chunks]
        # Saving the loaded store reproduces the vector file byte for byte.
        loaded.save(tmp_path / "s2")
        assert (tmp_path / "s" / "vectors.bin").read_bytes() == (
            tmp_path / "s2" / "vectors.bin"
        ).read_bytes()
        assert (tmp_path / "s" / "chunks.jsonl").read_bytes() == (
            tmp_path / "s2" / "chunks.jsonl"
        ).read_bytes()

    def test_roundtrip_search_identical(self, tmp_path, rng):
        vecs = random_unit_vectors(80, 16, rng)
        store = make_store(vecs)
        store.save(tmp_path / "s")
        loaded = VectorStore.load(tmp_path / "s")
        for q in random_unit_vectors(5, 16, rng):
            a = store.search_flat(q, 7)
            b = loaded.search_flat(q, 7)
            assert [(h.record_id, h.score) for h in a] == [(h.record_id, h.score) for h in b]

    def test_empty_store_roundtrip(self, tmp_path):
        store = create_store(_meta())
        store.save(tmp_path / "s")
        loaded = VectorStore.load(tmp_path / "s")
        assert loaded.count == 0

    def test_truncated_vectors_file(self, tmp_path, rng):
        store = make_store(random_unit_vectors(10, 8, rng))
        store.save(tmp_path / "s")
        path = tmp_path / "s" / "vectors.bin"
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(CorruptStoreError):
            VectorStore.load(tmp_path / "s")

    def test_bad_magic(self, tmp_path, rng):
        store = make_store(random_unit_vectors(4, 8, rng))
        store.save(tmp_path / "s")
        path = tmp_path / "s" / "vectors.bin"
        data = bytearray(path.read_bytes())
        data[:4] = b"JUNK"
        path.write_bytes(bytes(data))
        with pytest.raises(CorruptStoreError):
            VectorStore.load(tmp_path / "s")

    def test_unknown_version(self, tmp_path, rng):
        store = make_store(random_unit_vectors(4, 8, rng))
        store.save(tmp_path / "s")
        path = tmp_path / "s" / "vectors.bin"
        data = bytearray(path.read_bytes())
        data[4] = 99
        path.write_bytes(bytes(data))
        with pytest.raises(IncompatibleVersionError):
            VectorStore.load(tmp_path / "s")

    def test_chunk_count_disagreement(self, tmp_path, rng):
        store = make_store(random_unit_vectors(4, 8, rng))
        store.save(tmp_path / "s")
        path = tmp_path / "s" / "chunks.jsonl"
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(CorruptStoreError):
            VectorStore.load(tmp_path / "s")

    def test_meta_json_format(self, tmp_path, rng):
        import json

        store = make_store(random_unit_vectors(3, 8, rng), ann_seed=11)
        store.save(tmp_path / "s")
        meta = json.loads((tmp_path / "s" / "meta.json").read_text())
        assert meta == {
            "format_version": 1,
            "dim": 8,
            "embedder_id": "ref-tfidf-v1",
            "chunk_size": 256,
            "overlap": 32,
            "count": 3,
            "ann_seed": 11,
        }

    def test_vectors_bin_layout(self, tmp_path, rng):
        import struct

        vecs = random_unit_vectors(2, 3, rng)
        store = make_store(vecs)
        store.save(tmp_path / "s")
        data = (tmp_path / "s" / "vectors.bin").read_bytes()
        assert data[:4] == b"VRAG"
        version, dim, count = struct.unpack_from("<IIQ", data, 4)
        assert (version, dim, count) == (1, 3, 2)
        floats = np.frombuffer(data, dtype="<f4", offset=20).reshape(2, 3)
        assert np.array_equal(floats, vecs)


class TestAnnStoreIntegration:
    def test_build_requires_records(self):
        store = create_store(_meta())
        with pytest.raises(EmptyStoreError):
            store.build_ann_index()

    def test_single_record(self, rng):
        vecs = random_unit_vectors(1, 8, rng)
        store = make_store(vecs)
        store.build_ann_index()
        hits = store.search_ann(vecs[0], 1)
        assert [h.record_id for h in hits] == [0]
        assert hits[0].score == pytest.approx(1.0, abs=1e-6)

    def test_stale_after_insert(self, rng):
        from ragstack.vectorstore import StaleIndexError

        vecs = random_unit_vectors(5, 8, rng)
        store = make_store(vecs)
        store.build_ann_index()
        store.insert([synthetic_chunk(99)], [vecs[0]])
        with pytest.raises(StaleIndexError):
            store.search_ann(vecs[0], 1)
        store.build_ann_index()
        assert store.search_ann(vecs[0], 1)

    def test_search_without_index(self, rng):
        from ragstack.vectorstore import StaleIndexError

        store = make_store(random_unit_vectors(5, 8, rng))
        with pytest.raises(StaleIndexError):
            store.search_ann(np.ones(8, dtype=np.float32) / np.sqrt(8.0), 2)

    def test_ann_roundtrip_through_save(self, tmp_path, rng):
        vecs = random_unit_vectors(60, 16, rng)
        store = make_store(vecs)
        store.build_ann_index()
        store.save(tmp_path / "s")
        assert (tmp_path / "s" / "ann.idx").exists()
        loaded = VectorStore.load(tmp_path / "s")
        assert loaded.ann_index is not None
        for q in random_unit_vectors(4, 16, rng):
            a = store.search_ann(q, 5)
            b = loaded.search_ann(q, 5)
            assert [(h.record_id, h.score) for h in a] == [(h.record_id, h.score) for h in b]

    def test_stale_index_not_saved(self, tmp_path, rng):
        vecs = random_unit_vectors(5, 8, rng)
        store = make_store(vecs)
        store.build_ann_index()
        store.insert([synthetic_chunk(77)], [vecs[0]])
        store.save(tmp_path / "s")
        assert not (tmp_path / "s" / "ann.idx").exists()
