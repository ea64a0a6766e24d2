import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_embedding
from crosscam.embeddings import (
    Embedding,
    load_observations,
    normalize_parts,
    sim_app,
    iter_ndjson,
)
from crosscam.errors import (
    DuplicateObservationError,
    SchemaError,
    ShapeMismatchError,
    ValidationError,
    ZeroPartError,
)
from oracles import oracle_cosine


class TestNormalizeParts:
    def test_three_four_five(self):
        emb = normalize_parts([[3.0, 4.0]])
        assert emb.vector.tolist() == [0.6, 0.8]

    def test_two_parts(self):
        emb = normalize_parts([[1.0, 0.0], [0.0, 2.0]])
        assert emb.vector.tolist() == [1.0, 0.0, 0.0, 1.0]

    def test_zero_part_rejected(self):
        with pytest.raises(ZeroPartError):
            normalize_parts([[0.0, 0.0]])

    def test_flat_input_needs_shape(self):
        with pytest.raises(ShapeMismatchError):
            normalize_parts([1.0, 0.0, 0.0, 1.0])
        emb = normalize_parts([1.0, 0.0, 0.0, 1.0], parts=2, dim=2)
        assert emb.parts == 2

    def test_constructor_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            Embedding(np.array([3.0, 4.0]), parts=1, dim=2)

    def test_constructor_rejects_nonfinite(self):
        with pytest.raises(ValidationError):
            Embedding(np.array([np.nan, 1.0]), parts=1, dim=2)


class TestSimApp:
    def test_self_similarity_is_one(self, rng):
        emb = normalize_parts(rng.standard_normal((3, 5)))
        assert sim_app(emb, emb) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_parts_give_zero(self):
        a = make_embedding((1.0, 0.0), (1.0, 0.0))
        b = make_embedding((0.0, 1.0), (0.0, 1.0))
        assert sim_app(a, b) == 0.0

    def test_half_overlap(self):
        # dot = 1, norms sqrt(2) each: (1 + 0) / 2
        a = make_embedding((1.0, 0.0), (1.0, 0.0))
        b = make_embedding((1.0, 0.0), (0.0, 1.0))
        assert sim_app(a, b) == pytest.approx(0.5, abs=1e-12)

    def test_shape_mismatch(self):
        a = make_embedding((1.0, 0.0))
        b = make_embedding((1.0, 0.0), (0.0, 1.0))
        with pytest.raises(ShapeMismatchError):
            sim_app(a, b)

    def test_matches_naive_cosine(self, rng):
        a = normalize_parts(rng.standard_normal((2, 6)))
        b = normalize_parts(rng.standard_normal((2, 6)))
        naive = oracle_cosine(a.vector.tolist(), b.vector.tolist())
        assert sim_app(a, b) == pytest.approx(naive, abs=1e-12)

    @settings(max_examples=60)
    @given(st.integers(0, 2**32 - 1))
    def test_symmetry_is_bitwise(self, seed):
        r = np.random.default_rng(seed)
        a = normalize_parts(r.standard_normal((2, 8)))
        b = normalize_parts(r.standard_normal((2, 8)))
        assert sim_app(a, b) == sim_app(b, a)

    @settings(max_examples=60)
    @given(st.integers(0, 2**32 - 1))
    def test_bounded_by_one(self, seed):
        r = np.random.default_rng(seed)
        a = normalize_parts(r.standard_normal((3, 4)))
        b = normalize_parts(r.standard_normal((3, 4)))
        assert abs(sim_app(a, b)) <= 1.0 + 1e-9

    @settings(max_examples=40)
    @given(st.integers(0, 2**32 - 1),
           st.floats(min_value=1e-3, max_value=1e3))
    def test_prescaling_invariance(self, seed, scale):
        r = np.random.default_rng(seed)
        raw_a = r.standard_normal((2, 5))
        raw_b = r.standard_normal((2, 5))
        base = sim_app(normalize_parts(raw_a), normalize_parts(raw_b))
        scaled = sim_app(normalize_parts(raw_a * scale), normalize_parts(raw_b))
        assert scaled == pytest.approx(base, abs=1e-9)


def _lines(*objs):
    return [json.dumps(o) for o in objs]


HEADER = {"parts": 1, "dim": 2, "normalized": True}


def _record(obs_id, camera="C1", person="p1", emb=(1.0, 0.0), t=0.0):
    return {"obs_id": obs_id, "person_id": person, "camera": camera,
            "timestamp": t, "embedding": list(emb)}


class TestLoadObservations:
    def test_three_records(self):
        obs = load_observations(_lines(HEADER, _record("o1"), _record("o2"),
                                       _record("o3", camera="C2")))
        assert [o.obs_id for o in obs] == ["o1", "o2", "o3"]

    def test_missing_camera_is_schema_error_with_index(self):
        bad = _record("o2")
        del bad["camera"]
        with pytest.raises(SchemaError) as err:
            load_observations(_lines(HEADER, _record("o1"), bad))
        assert "record 2" in str(err.value)

    def test_duplicate_obs_id(self):
        with pytest.raises(DuplicateObservationError):
            load_observations(_lines(HEADER, _record("o1"), _record("o1")))

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            load_observations(_lines(HEADER, _record("o1", emb=(1.0, 0.0, 0.0))))

    def test_invalid_json_reports_line(self):
        with pytest.raises(SchemaError) as err:
            load_observations(["{not json"])
        assert err.value.line == 1

    def test_raw_features_are_normalized_on_load(self):
        header = {"parts": 1, "dim": 2, "normalized": False}
        obs = load_observations(_lines(header, _record("o1", emb=(3.0, 4.0))))
        assert obs[0].embedding.vector.tolist() == [0.6, 0.8]

    def test_normalized_claim_is_validated(self):
        with pytest.raises(ValidationError):
            load_observations(_lines(HEADER, _record("o1", emb=(3.0, 4.0))))

    def test_null_person_id_allowed(self):
        obs = load_observations(_lines(HEADER, _record("o1", person=None)))
        assert obs[0].person_id is None

    def test_round_trip_is_bit_exact(self, rng):
        from conftest import random_observation
        original = [random_observation(rng, f"o{i}", "C1", "p1", t=float(i))
                    for i in range(4)]
        text = list(iter_ndjson(original))
        loaded = load_observations(text)
        for before, after in zip(original, loaded):
            assert np.array_equal(before.embedding.vector,
                                  after.embedding.vector)
            assert before.timestamp == after.timestamp

    def test_stream_input(self):
        stream = io.StringIO("\n".join(_lines(HEADER, _record("o1"))) + "\n")
        assert len(load_observations(stream)) == 1
