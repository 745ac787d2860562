"""Latent decompositions, query projection, cosine ranking, libfm export."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expertsearch.latent import (
    EmptyQueryError,
    LsaModel,
    NmfModel,
    TermPersonMatrix,
    assign_libfm_ids,
    export_libfm,
    lsa_decompose,
    nmf_decompose,
    person_term_matrix,
    project_query,
    query_vector,
    rank_by_cosine,
)
from expertsearch.person import PersonTermIndex, build_person_index
from oracles import jacobi_singular_values


def make_matrix(values: np.ndarray) -> TermPersonMatrix:
    return TermPersonMatrix(
        values=values,
        terms=[f"t{i}" for i in range(values.shape[0])],
        researchers=[f"r{j}" for j in range(values.shape[1])],
    )


@pytest.fixture(scope="module")
def person_index(paper_index, authorship):
    return build_person_index(paper_index, authorship, formula="f1")


class TestMatrix:
    def test_shape_and_entries(self, person_index):
        matrix = person_term_matrix(person_index)
        assert matrix.values.shape == (len(matrix.terms), len(matrix.researchers))
        i = matrix.terms.index("machine translation")
        j = matrix.researchers.index("r1")
        assert matrix.values[i, j] == pytest.approx(
            person_index.postings["machine translation"]["r1"]
        )
        absent = matrix.researchers.index("r6")
        assert matrix.values[i, absent] == 0.0

    def test_column_normalization(self, person_index):
        matrix = person_term_matrix(person_index, normalize_columns=True)
        norms = np.linalg.norm(matrix.values, axis=0)
        assert np.all((norms == 0.0) | (np.abs(norms - 1.0) < 1e-12))


class TestLsa:
    def test_singulars_match_jacobi_oracle(self):
        rng = np.random.default_rng(11)
        m = rng.normal(size=(8, 6))
        oracle = jacobi_singular_values(m)
        model = lsa_decompose(make_matrix(m), 6, seed=0)
        assert np.max(np.abs(model.singulars - oracle)) < 1e-6

    def test_reconstruction_error_non_increasing_in_k(self):
        rng = np.random.default_rng(5)
        m = rng.normal(size=(9, 7))
        errors = []
        for k in range(1, 8):
            model = lsa_decompose(make_matrix(m), k, seed=0)
            recon = model.term_latent @ np.diag(model.singulars) @ model.latent_person
            errors.append(np.linalg.norm(m - recon))
        assert all(a >= b - 1e-9 for a, b in zip(errors, errors[1:]))

    def test_orthonormal_term_basis(self):
        rng = np.random.default_rng(2)
        model = lsa_decompose(make_matrix(rng.normal(size=(8, 6))), 4, seed=0)
        gram = model.term_latent.T @ model.term_latent
        assert np.allclose(gram, np.eye(4), atol=1e-10)

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(9)
        m = rng.normal(size=(8, 6))
        a = lsa_decompose(make_matrix(m), 3, seed=0)
        b = lsa_decompose(make_matrix(m), 3, seed=0)
        assert np.array_equal(a.term_latent, b.term_latent)
        assert np.array_equal(a.singulars, b.singulars)

    def test_k_validation(self):
        m = make_matrix(np.ones((4, 3)))
        with pytest.raises(ValueError):
            lsa_decompose(m, 0)
        with pytest.raises(ValueError):
            lsa_decompose(m, 4)

    def test_snapshot_round_trip(self, tmp_path):
        rng = np.random.default_rng(4)
        model = lsa_decompose(make_matrix(rng.normal(size=(6, 5))), 2, seed=0)
        path = tmp_path / "lsa.snap"
        model.save(path)
        loaded = LsaModel.load(path)
        assert np.array_equal(loaded.term_latent, model.term_latent)
        assert np.array_equal(loaded.singulars, model.singulars)
        assert loaded.researchers == model.researchers


class TestNmf:
    @pytest.mark.parametrize("seed", range(20))
    def test_objective_non_increasing(self, seed):
        rng = np.random.default_rng(seed)
        m = np.abs(rng.normal(size=(8, 6)))
        model = nmf_decompose(make_matrix(m), 3, max_iters=300, seed=seed)
        diffs = np.diff(model.objective)
        assert np.all(diffs <= 0.0)

    def test_planted_factorization_recovered(self):
        rng = np.random.default_rng(7)
        w = np.abs(rng.normal(size=(6, 2)))
        h = np.abs(rng.normal(size=(2, 5)))
        m = w @ h
        model = nmf_decompose(make_matrix(m), 2, max_iters=5000, tol=1e-13, seed=0)
        rel = np.linalg.norm(m - model.basis @ model.activations) / np.linalg.norm(m)
        assert rel < 1e-3

    def test_factors_non_negative(self):
        rng = np.random.default_rng(3)
        model = nmf_decompose(make_matrix(np.abs(rng.normal(size=(7, 5)))), 3, seed=1)
        assert np.all(model.basis >= 0.0)
        assert np.all(model.activations >= 0.0)

    def test_rejects_negative_input(self):
        m = make_matrix(np.array([[1.0, -0.5], [0.5, 1.0]]))
        with pytest.raises(ValueError):
            nmf_decompose(m, 1)

    def test_snapshot_round_trip(self, tmp_path):
        rng = np.random.default_rng(8)
        model = nmf_decompose(make_matrix(np.abs(rng.normal(size=(6, 4)))), 2, seed=0)
        path = tmp_path / "nmf.snap"
        model.save(path)
        loaded = NmfModel.load(path)
        assert np.array_equal(loaded.basis, model.basis)
        assert np.array_equal(loaded.activations, model.activations)
        assert loaded.objective == model.objective


class TestQueryProjection:
    def test_binary_vector(self):
        q = query_vector(["a", "c", "zz"], ["a", "b", "c"])
        assert q.tolist() == [1.0, 0.0, 1.0]

    def test_weighted_vector(self):
        q = query_vector(["a", "c"], ["a", "b", "c"], weights={"a": 2.0, "c": 0.25})
        assert q.tolist() == [2.0, 0.0, 0.25]

    def test_no_known_terms(self):
        with pytest.raises(EmptyQueryError):
            query_vector(["zz"], ["a", "b"])

    def test_lsa_projection_equals_lstsq(self):
        rng = np.random.default_rng(13)
        m = rng.normal(size=(8, 6))
        model = lsa_decompose(make_matrix(m), 4, seed=0)
        q = query_vector(["t0", "t3"], model.terms)
        projected = project_query(["t0", "t3"], model)
        basis = model.term_latent @ np.diag(model.singulars)
        reference, *_ = np.linalg.lstsq(basis, q, rcond=None)
        assert np.allclose(projected, reference, atol=1e-10)

    def test_nmf_projection_non_negative(self):
        rng = np.random.default_rng(14)
        model = nmf_decompose(make_matrix(np.abs(rng.normal(size=(8, 6)))), 3, seed=0)
        projected = project_query(["t1", "t2"], model)
        assert np.all(projected >= 0.0)


class TestCosineRanking:
    @given(st.integers(min_value=0, max_value=2**32 - 1),
           st.floats(min_value=1e-3, max_value=1e3))
    @settings(max_examples=100)
    def test_argsort_invariant_under_positive_scaling(self, seed, scale):
        rng = np.random.default_rng(seed)
        model = lsa_decompose(make_matrix(rng.normal(size=(6, 5))), 3, seed=0)
        q = rng.normal(size=3)
        if np.linalg.norm(q) == 0.0:
            q = np.ones(3)
        base = [r for r, _ in rank_by_cosine(q, model)]
        scaled = [r for r, _ in rank_by_cosine(q * scale, model)]
        assert base == scaled

    def test_zero_query_rejected(self):
        rng = np.random.default_rng(1)
        model = lsa_decompose(make_matrix(rng.normal(size=(5, 4))), 2, seed=0)
        with pytest.raises(ValueError):
            rank_by_cosine(np.zeros(2), model)

    def test_zero_person_vector_gets_zero_similarity(self):
        model = NmfModel(
            basis=np.eye(3)[:, :2],
            activations=np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
            terms=["t0", "t1", "t2"],
            researchers=["a", "b", "c"],
            objective=[1.0],
        )
        ranked = dict(rank_by_cosine(np.array([1.0, 0.0]), model))
        assert ranked["c"] == 0.0
        assert ranked["a"] == pytest.approx(1.0)

    def test_ties_break_by_researcher_id(self):
        model = NmfModel(
            basis=np.eye(2),
            activations=np.array([[1.0, 1.0], [1.0, 1.0]]),
            terms=["t0", "t1"],
            researchers=["b", "a"],
            objective=[0.0],
        )
        ranked = rank_by_cosine(np.array([1.0, 1.0]), model)
        assert [r for r, _ in ranked] == ["a", "b"]


class TestLibfm:
    def test_reproduces_reference_lines(self, tmp_path):
        index = PersonTermIndex(
            {
                "t-a": {"p-a": 2.271},
                "t-b": {"p-b": 5.357},
            }
        )
        researcher_ids = {"p-a": 2728, "p-b": 2694}
        term_ids = {"t-a": 236991, "t-b": 274922}
        path = tmp_path / "obs.libfm"
        count = export_libfm(index, path, researcher_ids, term_ids)
        assert count == 2
        assert path.read_bytes() == b"2.271 2728:1 236991:1\n5.357 2694:1 274922:1\n"

    def test_auto_ids_disjoint_and_dense(self, person_index):
        researcher_ids, term_ids = assign_libfm_ids(person_index)
        r_values = sorted(researcher_ids.values())
        t_values = sorted(term_ids.values())
        assert r_values == list(range(len(r_values)))
        assert t_values == list(range(len(r_values), len(r_values) + len(t_values)))

    def test_round_trip_parse(self, person_index, tmp_path):
        path = tmp_path / "obs.libfm"
        researcher_ids, term_ids = assign_libfm_ids(person_index)
        count = export_libfm(person_index, path)
        id_to_researcher = {i: r for r, i in researcher_ids.items()}
        id_to_term = {i: t for t, i in term_ids.items()}
        lines = path.read_text().splitlines()
        assert len(lines) == count == person_index.posting_count()
        for line in lines:
            score_text, rid_part, tid_part = line.split(" ")
            rid = int(rid_part.split(":")[0])
            tid = int(tid_part.split(":")[0])
            assert rid_part.endswith(":1") and tid_part.endswith(":1")
            researcher = id_to_researcher[rid]
            term = id_to_term[tid]
            stored = person_index.postings[term][researcher]
            assert score_text == f"{stored:.6g}"

    def test_overlapping_ids_rejected(self, person_index, tmp_path):
        researcher_ids, term_ids = assign_libfm_ids(person_index)
        collide = dict(term_ids)
        collide[next(iter(collide))] = 0  # collides with first researcher id
        with pytest.raises(ValueError, match="overlap"):
            export_libfm(person_index, tmp_path / "x.libfm", researcher_ids, collide)
