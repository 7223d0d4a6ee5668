"""Experiments on when generators-and-relations determine the C*-norm.

When condition (I) fails and every state is forced (``A`` is a permutation
matrix) the relations have honest finite-dimensional representations, and two
of them disagree on the norm of a cycle word minus its adjoint. When
condition (I) holds, norms are compared across two different truncated models.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConditionIFails, ConditionIHolds, InputError, TruncationTooSmall, UnsupportedShape
from .matrix_subshift import (
    ConditionIVerdict,
    ZeroOneMatrix,
    admissible_words,
    check_condition_I,
    forced_states,
)
from .path_rep import _csr, build_truncated_rep, norm_estimate, operator_norm, spectral_projection

GAP_ROOT_ORDER = 4
AGREEMENT_TOL = 0.05
CONTRACTIVITY_TOL = 1e-6


@dataclass(frozen=True)
class UniquenessReport:
    matrix: ZeroOneMatrix
    conditionI: ConditionIVerdict
    experiments: tuple
    conclusion: str

    def __post_init__(self):
        if self.conclusion not in ("gap-witness", "agreement", "inconclusive"):
            raise ValueError(f"unknown conclusion {self.conclusion!r}")
        if self.conclusion == "gap-witness" and self.conditionI.holds:
            raise ValueError("a gap witness requires condition (I) to fail")

    def to_dict(self) -> dict:
        return {
            "matrix": self.matrix.to_dict(),
            "conditionI": self.conditionI.to_dict(),
            "experiments": list(self.experiments),
            "conclusion": self.conclusion,
        }


# finite-dimensional witnesses

def permutation_cycles(A: ZeroOneMatrix) -> list:
    """Cycles of a permutation matrix, each starting at its smallest symbol."""
    seen, cycles = set(), []
    for s in range(1, A.n + 1):
        if s in seen:
            continue
        cycle = [s]
        seen.add(s)
        while (nxt := A.successors[cycle[-1]][0]) != s:
            cycle.append(nxt)
            seen.add(nxt)
        cycles.append(tuple(cycle))
    return cycles


def cycle_assignment(A: ZeroOneMatrix, twist=None) -> list:
    """Generators on C^n (tensored with C^m when ``twist`` is an m x m unitary).

    ``S_c |c_next> = |c>`` along each cycle; the first symbol of every cycle
    additionally carries ``twist`` in the tensor factor.
    """
    cycles = permutation_cycles(A)
    first = {c[0] for c in cycles}
    m = 1 if twist is None else twist.shape[0]
    gens = []
    for i in range(1, A.n + 1):
        base = np.zeros((A.n, A.n), dtype=complex)
        base[i - 1, A.successors[i][0] - 1] = 1.0
        factor = twist if (twist is not None and i in first) else np.eye(m)
        gens.append(np.kron(base, factor))
    return gens


def relation_defect(A: ZeroOneMatrix, gens) -> float:
    """Largest norm residual over all adopted Cuntz-Krieger relations."""
    P = [s @ s.conj().T for s in gens]
    dim = gens[0].shape[0]
    worst = np.linalg.norm(sum(P) - np.eye(dim), 2)
    for i in range(A.n):
        si = gens[i]
        worst = max(worst, np.linalg.norm(si.conj().T @ si - sum(A(i + 1, j + 1) * P[j] for j in range(A.n)), 2))
        for k in range(A.n):
            if k != i:
                worst = max(worst, np.linalg.norm(si.conj().T @ gens[k], 2))
    return float(worst)


def _word(gens, word):
    out = np.eye(gens[0].shape[0], dtype=complex)
    for s in word:
        out = out @ gens[s - 1]
    return out


def norm_gap_witness(A: ZeroOneMatrix) -> UniquenessReport:
    """Two exact representations that disagree on ``||S_cycle - S_cycle^*||``."""
    verdict = check_condition_I(A)
    if verdict.holds:
        raise ConditionIHolds("condition (I) holds; the relations have the uniqueness property")
    if len(forced_states(A)) != A.n:
        raise UnsupportedShape("gap witnesses are built only when every state is forced")
    roots = np.exp(2j * np.pi * np.arange(GAP_ROOT_ORDER) / GAP_ROOT_ORDER)
    rep1 = cycle_assignment(A)
    rep2 = cycle_assignment(A, np.diag(roots))
    i = verdict.witness.prefix[0]
    cycle = next(c for c in permutation_cycles(A) if i in c)
    start = cycle.index(i)
    word = cycle[start:] + cycle[:start]
    norms = []
    for gens in (rep1, rep2):
        w = _word(gens, word)
        norms.append(float(np.linalg.norm(w - w.conj().T, 2)))
    record = {
        "element": {"word": list(word), "description": f"S_{''.join(map(str, word))} - (S_{''.join(map(str, word))})^*"},
        "representations": [
            {"name": "cycle", "dimension": rep1[0].shape[0], "relation_defect": relation_defect(A, rep1), "norm": norms[0]},
            {
                "name": f"cycle x diag(exp(2 pi i k/{GAP_ROOT_ORDER}))",
                "dimension": rep2[0].shape[0],
                "relation_defect": relation_defect(A, rep2),
                "norm": norms[1],
            },
        ],
        "gap": abs(norms[1] - norms[0]),
        "tolerance": 1e-12,
    }
    return UniquenessReport(A, verdict, (record,), "gap-witness")


# truncated models for the agreement experiment

@dataclass(frozen=True, eq=False)
class TailModel:
    """Words of length exactly L; ``S_i`` prepends ``i`` and drops the last symbol.

    ``S_i |mu> = A(i, mu_1) d(mu_{L-1})^{-1/2} |i mu_1 ... mu_{L-1}>`` with ``d``
    the out-degree, which makes every ``P_j`` an exact projection summing to 1.
    """

    A: ZeroOneMatrix
    L: int
    basis: tuple
    index: dict = field(repr=False)
    S: tuple = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def word_operator(self, mu):
        op = _csr(sp.identity(self.dim, dtype=complex))
        for s in reversed(mu):
            op = self.S[s - 1] @ op
        return _csr(op)


def build_tail_model(A: ZeroOneMatrix, L: int) -> TailModel:
    if L < 3:
        raise TruncationTooSmall(f"truncation length must be >= 3, got {L}")
    basis = tuple(admissible_words(A, L))
    index = {w: t for t, w in enumerate(basis)}
    gens = []
    for i in range(1, A.n + 1):
        rows, cols, vals = [], [], []
        for w in basis:
            if A(i, w[0]):
                rows.append(index[(i,) + w[:-1]])
                cols.append(index[w])
                vals.append(1.0 / math.sqrt(A.out_degree(w[-2])))
        gens.append(_csr(sp.csr_matrix((vals, (rows, cols)), shape=(len(basis),) * 2)))
    return TailModel(A, L, basis, index, tuple(gens))


def element_operator(model, terms):
    """``sum c S_mu S_nu^*`` in either model; ``terms`` is a list of (mu, nu, c)."""
    op = sp.csr_matrix((model.dim, model.dim), dtype=complex)
    for mu, nu, c in terms:
        op = op + c * (model.word_operator(mu) @ model.word_operator(nu).conj().T)
    return _csr(op)


def _monomial_nonzero(A, mu, nu):
    return any(A(mu[-1], j) and A(nu[-1], j) for j in range(1, A.n + 1))


def random_gauge_polynomial(A: ZeroOneMatrix, max_level: int, rng, max_terms: int = 4) -> list:
    """Random ``sum c S_mu S_nu^*`` with degrees in [-2, 2] and nonempty words.

    The level of a monomial is ``min(|mu|, |nu|)`` and lies in [1, max_level];
    coefficients are complex Gaussian.
    """
    if max_level < 1:
        raise InputError("max_level must be >= 1")
    words = {k: admissible_words(A, k) for k in range(1, max_level + 3)}
    terms = []
    count = int(rng.integers(1, max_terms + 1))
    while len(terms) < count:
        level = int(rng.integers(1, max_level + 1))
        degree = int(rng.integers(-2, 3))
        lm, ln = level + max(degree, 0), level + max(-degree, 0)
        mu = words[lm][int(rng.integers(len(words[lm])))]
        nu = words[ln][int(rng.integers(len(words[ln])))]
        if not _monomial_nonzero(A, mu, nu):
            continue
        terms.append((mu, nu, complex(rng.normal(), rng.normal())))
    return terms


def describe_terms(terms) -> list:
    return [{"mu": list(mu), "nu": list(nu), "re": c.real, "im": c.imag} for mu, nu, c in terms]


def relative_gap(a: float, b: float) -> float:
    top = max(a, b)
    return 0.0 if top == 0 else abs(a - b) / top


def agreement_experiment(A: ZeroOneMatrix, L_values, samples: int, seed: int, elements=None) -> UniquenessReport:
    """Compare norms of sampled elements in the prepend model and the tail model.

    ``elements`` (lists of (mu, nu, c) terms) replace the random samples when given.
    The conclusion is "agreement" iff every relative gap at the largest L is at
    most 0.05; the full gap-versus-L table is always recorded.
    """
    verdict = check_condition_I(A)
    if not verdict.holds:
        raise ConditionIFails("condition (I) fails; use norm_gap_witness")
    L_values = [int(L) for L in L_values]
    if not L_values or any(L < 4 for L in L_values) or L_values != sorted(L_values):
        raise InputError(f"L_values must be ascending and >= 4, got {L_values}")
    rng = np.random.default_rng(seed)
    if elements is None:
        elements = [random_gauge_polynomial(A, L_values[0] - 3, rng) for _ in range(samples)]
    models = {L: (build_truncated_rep(A, L), build_tail_model(A, L)) for L in L_values}
    experiments = []
    for idx, terms in enumerate(elements):
        rows = []
        for L in L_values:
            prepend, tail = models[L]
            n1 = operator_norm(element_operator(prepend, terms))
            n2 = operator_norm(element_operator(tail, terms))
            rows.append({"L": L, "norms": {"prepend": n1, "tail": n2}, "relative_gap": relative_gap(n1, n2)})
        gaps = [r["relative_gap"] for r in rows]
        experiments.append({
            "sample": idx,
            "seed": seed,
            "element": describe_terms(terms),
            "by_L": rows,
            "final_gap": gaps[-1],
            "nonincreasing": all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:])),
            "tolerance": AGREEMENT_TOL,
        })
    ok = all(e["final_gap"] <= AGREEMENT_TOL for e in experiments)
    return UniquenessReport(A, verdict, tuple(experiments), "agreement" if ok else "inconclusive")


def gap_table(report: UniquenessReport) -> list:
    """Largest relative gap at each L over all samples."""
    table = {}
    for e in report.experiments:
        for row in e["by_L"]:
            table[row["L"]] = max(table.get(row["L"], 0.0), row["relative_gap"])
    return [{"L": L, "max_relative_gap": g} for L, g in sorted(table.items())]


def expectation_contractivity(A: ZeroOneMatrix, L: int, samples: int, seed: int, elements=None) -> float:
    """Max over samples of ``||E_0(b)|| - ||b||`` in the prepend model."""
    if L < 4:
        raise TruncationTooSmall(f"need L >= 4, got {L}")
    rng = np.random.default_rng(seed)
    if elements is None:
        elements = [random_gauge_polynomial(A, L - 3, rng) for _ in range(samples)]
    rep = build_truncated_rep(A, L)
    worst = -math.inf
    for terms in elements:
        b = element_operator(rep, terms)
        worst = max(worst, operator_norm(spectral_projection(b, 0, rep)) - operator_norm(b))
    return worst
