"""Latent-factor decompositions of the person-term matrix.

The sparse person-term index is densified at desk scale, factored with a
truncated randomized SVD (LSA) or multiplicative-update NMF, and queries
are folded into the latent space for cosine ranking.  A libfm-format
export of the raw person-term observations is also provided here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .person import PersonTermIndex
from .snapshot import load_snapshot, save_snapshot

LSA_SNAPSHOT_KIND = "lsa_model"
NMF_SNAPSHOT_KIND = "nmf_model"

DEFAULT_RANK = 64
DEFAULT_MAX_ITERS = 500
DEFAULT_TOL = 1e-5

_OVERSAMPLE = 8
_POWER_ITERS = 10


class EmptyQueryError(ValueError):
    """No query term is known to the model's vocabulary."""


@dataclass
class TermPersonMatrix:
    """Dense terms-by-researchers matrix with its row/column labels."""

    values: np.ndarray
    terms: list[str]
    researchers: list[str]


def person_term_matrix(index: PersonTermIndex, normalize_columns: bool = False) -> TermPersonMatrix:
    """Densify the person-term index; optionally L2-normalize each
    researcher column so cosine denominators collapse to dot products."""
    terms = index.terms()
    researchers = index.researchers()
    term_pos = {t: i for i, t in enumerate(terms)}
    person_pos = {r: j for j, r in enumerate(researchers)}
    values = np.zeros((len(terms), len(researchers)))
    for term, docs in index.postings.items():
        for researcher, score in docs.items():
            values[term_pos[term], person_pos[researcher]] = score
    if normalize_columns:
        norms = np.linalg.norm(values, axis=0)
        norms[norms == 0.0] = 1.0
        values = values / norms
    return TermPersonMatrix(values=values, terms=terms, researchers=researchers)


@dataclass
class LsaModel:
    """Truncated SVD factors: term_latent @ diag(singulars) @ latent_person."""

    term_latent: np.ndarray  # terms x k
    singulars: np.ndarray  # k, non-increasing
    latent_person: np.ndarray  # k x researchers
    terms: list[str]
    researchers: list[str]

    def person_vectors(self) -> np.ndarray:
        return self.latent_person

    def to_payload(self) -> dict:
        return {
            "term_latent": self.term_latent.tolist(),
            "singulars": self.singulars.tolist(),
            "latent_person": self.latent_person.tolist(),
            "terms": self.terms,
            "researchers": self.researchers,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "LsaModel":
        return cls(
            term_latent=np.asarray(payload["term_latent"]),
            singulars=np.asarray(payload["singulars"]),
            latent_person=np.asarray(payload["latent_person"]),
            terms=list(payload["terms"]),
            researchers=list(payload["researchers"]),
        )

    def save(self, path) -> None:
        save_snapshot(path, LSA_SNAPSHOT_KIND, self.to_payload())

    @classmethod
    def load(cls, path) -> "LsaModel":
        return cls.from_payload(load_snapshot(path, LSA_SNAPSHOT_KIND))


@dataclass
class NmfModel:
    """Non-negative factors: basis @ activations approximates the matrix."""

    basis: np.ndarray  # terms x k
    activations: np.ndarray  # k x researchers
    terms: list[str]
    researchers: list[str]
    objective: list[float] = field(default_factory=list)

    def person_vectors(self) -> np.ndarray:
        return self.activations

    def to_payload(self) -> dict:
        return {
            "basis": self.basis.tolist(),
            "activations": self.activations.tolist(),
            "terms": self.terms,
            "researchers": self.researchers,
            "objective": self.objective,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "NmfModel":
        return cls(
            basis=np.asarray(payload["basis"]),
            activations=np.asarray(payload["activations"]),
            terms=list(payload["terms"]),
            researchers=list(payload["researchers"]),
            objective=list(payload["objective"]),
        )

    def save(self, path) -> None:
        save_snapshot(path, NMF_SNAPSHOT_KIND, self.to_payload())

    @classmethod
    def load(cls, path) -> "NmfModel":
        return cls.from_payload(load_snapshot(path, NMF_SNAPSHOT_KIND))


def lsa_decompose(matrix: TermPersonMatrix, k: int, seed: int = 0) -> LsaModel:
    """Truncated rank-k SVD via randomized subspace iteration.

    Oversampling plus power iterations make the sketch essentially exact at
    desk scale; the fixed seed keeps runs reproducible.
    """
    values = np.asarray(matrix.values, dtype=float)
    rows, cols = values.shape
    if not 1 <= k <= min(rows, cols):
        raise ValueError(f"rank k={k} outside [1, {min(rows, cols)}]")
    rng = np.random.default_rng(seed)
    sketch = min(k + _OVERSAMPLE, min(rows, cols))
    omega = rng.standard_normal((cols, sketch))
    q, _ = np.linalg.qr(values @ omega)
    for _ in range(_POWER_ITERS):
        q, _ = np.linalg.qr(values.T @ q)
        q, _ = np.linalg.qr(values @ q)
    projected = q.T @ values
    u_small, singulars, vt = np.linalg.svd(projected, full_matrices=False)
    term_latent = q @ u_small
    return LsaModel(
        term_latent=term_latent[:, :k],
        singulars=singulars[:k],
        latent_person=vt[:k, :],
        terms=matrix.terms,
        researchers=matrix.researchers,
    )


def nmf_decompose(
    matrix: TermPersonMatrix,
    k: int,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> NmfModel:
    """Frobenius-error NMF via multiplicative updates.

    Stops when the relative objective improvement drops below tol or after
    max_iters; the per-iteration objective trace stays on the model.
    """
    values = np.asarray(matrix.values, dtype=float)
    if np.any(values < 0):
        raise ValueError("NMF input must be entrywise non-negative")
    if k < 1:
        raise ValueError("rank k must be at least 1")
    rng = np.random.default_rng(seed)
    scale = values.mean() / k
    w = np.abs(rng.standard_normal((values.shape[0], k))) * scale
    h = np.abs(rng.standard_normal((k, values.shape[1]))) * scale

    eps = 1e-12
    objective = [float(np.linalg.norm(values - w @ h))]
    for _ in range(max_iters):
        h *= (w.T @ values) / (w.T @ w @ h + eps)
        w *= (values @ h.T) / (w @ h @ h.T + eps)
        error = float(np.linalg.norm(values - w @ h))
        objective.append(error)
        previous = objective[-2]
        if previous <= 0.0 or (previous - error) / previous < tol:
            break
    return NmfModel(
        basis=w,
        activations=h,
        terms=matrix.terms,
        researchers=matrix.researchers,
        objective=objective,
    )


def query_vector(
    terms: Sequence[str],
    vocabulary: Sequence[str],
    weights: Mapping[str, float] | None = None,
) -> np.ndarray:
    """Term-space query vector: binary indicators by default, or supplied
    per-term weights.  Unknown terms are ignored."""
    positions = {t: i for i, t in enumerate(vocabulary)}
    q = np.zeros(len(vocabulary))
    known = 0
    for term in terms:
        i = positions.get(term)
        if i is None:
            continue
        known += 1
        q[i] = weights.get(term, 0.0) if weights is not None else 1.0
    if known == 0:
        raise EmptyQueryError("query contains no term known to the model")
    return q


def project_query(
    terms: Sequence[str],
    model: LsaModel | NmfModel,
    weights: Mapping[str, float] | None = None,
) -> np.ndarray:
    """Fold a query into the model's latent space."""
    q = query_vector(terms, model.terms, weights)
    if isinstance(model, LsaModel):
        inverse = np.where(model.singulars > 1e-12, 1.0 / model.singulars, 0.0)
        return inverse * (model.term_latent.T @ q)
    solution, *_ = np.linalg.lstsq(model.basis, q, rcond=None)
    return np.clip(solution, 0.0, None)


def rank_by_cosine(
    q: np.ndarray, model: LsaModel | NmfModel
) -> list[tuple[str, float]]:
    """Rank researchers by cosine similarity to the latent query vector.

    Descending similarity, ties broken by researcher id ascending; a
    researcher with a zero latent vector gets similarity 0.
    """
    q = np.asarray(q, dtype=float)
    q_norm = np.linalg.norm(q)
    if q_norm == 0.0:
        raise ValueError("cannot rank against a zero query vector")
    vectors = model.person_vectors()
    norms = np.linalg.norm(vectors, axis=0)
    dots = vectors.T @ q
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = np.where(norms > 0.0, dots / (norms * q_norm), 0.0)
    order = sorted(
        range(len(model.researchers)),
        key=lambda j: (-sims[j], model.researchers[j]),
    )
    return [(model.researchers[j], float(sims[j])) for j in order]


def assign_libfm_ids(index: PersonTermIndex) -> tuple[dict[str, int], dict[str, int]]:
    """Stable integer ids: researchers first, terms in the following range."""
    researchers = index.researchers()
    researcher_ids = {r: i for i, r in enumerate(researchers)}
    term_ids = {t: len(researchers) + i for i, t in enumerate(index.terms())}
    return researcher_ids, term_ids


def export_libfm(
    index: PersonTermIndex,
    path: str | Path,
    researcher_ids: Mapping[str, int] | None = None,
    term_ids: Mapping[str, int] | None = None,
) -> int:
    """Write one observation line per posting: "<score> <rid>:1 <tid>:1".

    Scores are rendered with up to 6 significant digits.  Returns the line
    count.  Supplied id maps must occupy disjoint ranges.
    """
    if researcher_ids is None or term_ids is None:
        auto_rids, auto_tids = assign_libfm_ids(index)
        researcher_ids = researcher_ids or auto_rids
        term_ids = term_ids or auto_tids
    if set(researcher_ids.values()) & set(term_ids.values()):
        raise ValueError("researcher and term id ranges overlap")

    lines = 0
    with Path(path).open("w", encoding="utf-8", newline="\n") as handle:
        for term in sorted(index.postings, key=lambda t: term_ids[t]):
            docs = index.postings[term]
            for researcher in sorted(docs, key=lambda r: researcher_ids[r]):
                score = docs[researcher]
                handle.write(
                    f"{score:.6g} {researcher_ids[researcher]}:1 {term_ids[term]}:1\n"
                )
                lines += 1
    return lines
