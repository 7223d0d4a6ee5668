"""Truncated path-space representation of the Cuntz-Krieger generators.

The Hilbert space has one basis vector per admissible word of length 1..L
and ``S_i |mu> = A(i, mu_1) |i mu>`` for ``|mu| < L`` (zero at the top length).
Operators are ``scipy.sparse`` CSR matrices with sorted indices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .af_core import LevelElement
from .errors import (
    DimensionMismatch,
    LevelExceedsTruncation,
    NoConvergence,
    NotPureDegree,
    TruncationTooSmall,
)
from .matrix_subshift import ZeroOneMatrix, admissible_words

RESIDUAL_TOL = 1e-12


def _csr(M):
    M = sp.csr_matrix(M, dtype=complex)
    M.eliminate_zeros()
    M.sort_indices()
    return M


@dataclass(frozen=True, eq=False)
class TruncatedRep:
    A: ZeroOneMatrix
    L: int
    basis: tuple
    index: dict = field(repr=False)
    lengths: np.ndarray = field(repr=False)
    S: tuple = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def S_adj(self) -> tuple:
        return tuple(_csr(s.conj().T) for s in self.S)

    @cached_property
    def P(self) -> tuple:
        """Range projections ``P_j = S_j S_j^*``."""
        return tuple(_csr(s @ t) for s, t in zip(self.S, self.S_adj))

    @cached_property
    def identity(self):
        return _csr(sp.identity(self.dim, dtype=complex, format="csr"))

    def generator(self, i: int):
        return self.S[i - 1]

    def mask(self, lo: int, hi: int) -> np.ndarray:
        """Boolean mask of basis words with ``lo <= |mu| <= hi``."""
        return (self.lengths >= lo) & (self.lengths <= hi)

    def word_operator(self, mu):
        """``S_mu = S_{mu_1} ... S_{mu_k}``; the identity for the empty word."""
        op = self.identity
        for s in reversed(mu):
            op = self.S[s - 1] @ op
        return _csr(op)

    def monomial(self, mu, nu):
        """``S_mu S_nu^*``."""
        return _csr(self.word_operator(mu) @ self.word_operator(nu).conj().T)

    def vector(self, word) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[tuple(word)]] = 1.0
        return v


def build_truncated_rep(A: ZeroOneMatrix, L: int) -> TruncatedRep:
    if L < 3:
        raise TruncationTooSmall(f"truncation length must be >= 3, got {L}")
    basis = tuple(w for k in range(1, L + 1) for w in admissible_words(A, k))
    index = {w: t for t, w in enumerate(basis)}
    lengths = np.array([len(w) for w in basis])
    lengths.setflags(write=False)
    gens = []
    for i in range(1, A.n + 1):
        rows, cols = [], []
        for w in basis:
            if len(w) < L and A(i, w[0]):
                rows.append(index[(i,) + w])
                cols.append(index[w])
        M = sp.csr_matrix((np.ones(len(rows), dtype=complex), (rows, cols)), shape=(len(basis),) * 2)
        gens.append(_csr(M))
    return TruncatedRep(A, L, basis, index, lengths, tuple(gens))


def restrict_columns(op, mask: np.ndarray):
    """``op`` composed with the coordinate projection onto ``mask``."""
    return _csr(op @ sp.diags(mask.astype(complex)))


def norm_estimate(b, tol: float = 1e-9, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value by power iteration on ``b^* b``.

    Deterministic given ``seed``. Raises :class:`NoConvergence` when the
    relative change of the estimate has not dropped below ``tol`` after
    ``max_iter`` steps.
    """
    b = sp.csr_matrix(b) if sp.issparse(b) else np.asarray(b)
    if b.shape[1] == 0:
        raise DimensionMismatch("operator has zero dimension")
    if sp.issparse(b) and b.count_nonzero() == 0:
        return 0.0
    if not sp.issparse(b) and not np.any(b):
        return 0.0
    bh = b.conj().T
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(b.shape[1]) + 1j * rng.standard_normal(b.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        bv = b @ v
        new_sigma = float(np.linalg.norm(bv))
        w = bh @ bv
        wn = np.linalg.norm(w)
        if wn == 0.0:
            return new_sigma
        v = w / wn
        if abs(new_sigma - sigma) <= tol * new_sigma:
            # one more half-step: ||b^* b v|| / ||b v|| is the sharper estimate
            return float(max(new_sigma, wn / new_sigma))
        sigma = new_sigma
    raise NoConvergence(f"power iteration did not reach tol={tol} in {max_iter} steps")


@dataclass(frozen=True)
class GaugeUnitary:
    """``|mu> -> lam^{|mu|} |mu>`` on the truncated space."""

    lam: complex
    rep: TruncatedRep = field(repr=False)

    def __post_init__(self):
        if abs(abs(self.lam) - 1.0) > 1e-12:
            raise ValueError(f"gauge parameter must have modulus 1, got {self.lam}")

    @cached_property
    def matrix(self):
        return _csr(sp.diags(self.lam ** self.rep.lengths.astype(float)))

    def conjugate(self, b):
        """``U b U^*``."""
        U = self.matrix
        return _csr(U @ b @ U.conj().T)


def gauge_roots(rep: TruncatedRep) -> np.ndarray:
    m = 2 * rep.L + 1
    return np.exp(2j * np.pi * np.arange(m) / m)


def spectral_projection(b, n: int, rep: TruncatedRep):
    """Degree-``n`` component of ``b`` by averaging gauge conjugates.

    ``E_n(b) = (1/m) sum_t lam_t^{-n} U(lam_t) b U(lam_t)^*`` over the
    m = 2L+1 roots of unity; exact since entry degrees lie in [-(L-1), L-1].
    """
    if b.shape != (rep.dim, rep.dim):
        raise DimensionMismatch(f"operator shape {b.shape} does not match dimension {rep.dim}")
    b = _csr(b)
    roots = gauge_roots(rep)
    acc = sp.csr_matrix(b.shape, dtype=complex)
    for lam in roots:
        acc = acc + lam ** (-n) * GaugeUnitary(lam, rep).conjugate(b)
    return _csr(acc / len(roots))


def operator_norm(b) -> float:
    b = _csr(b)
    if b.count_nonzero() == 0:
        return 0.0
    return norm_estimate(b)


def operator_distance(a, b) -> float:
    return operator_norm(a - b)


def pure_degree(b, rep: TruncatedRep, tol: float = RESIDUAL_TOL) -> Optional[int]:
    """The unique gauge degree of ``b``, 0 for the zero operator, else None."""
    b = _csr(b)
    if b.count_nonzero() == 0:
        return 0
    coo = b.tocoo()
    t = int(np.argmax(np.abs(coo.data)))
    d = int(rep.lengths[coo.row[t]] - rep.lengths[coo.col[t]])
    if operator_distance(spectral_projection(b, d, rep), b) <= tol:
        return d
    return None


def grading_check(rep: TruncatedRep, a, b, tol: float = RESIDUAL_TOL) -> bool:
    """``E_{n+m}(ab) = ab`` and ``E_{-n}(a^*) = a^*`` for pure degrees n, m."""
    n = pure_degree(a, rep, tol)
    m = pure_degree(b, rep, tol)
    if n is None or m is None:
        raise NotPureDegree("both operators must have a single gauge degree")
    ab = _csr(a @ b)
    a_star = _csr(a.conj().T)
    if abs(n + m) < rep.L:
        product_ok = operator_distance(spectral_projection(ab, n + m, rep), ab) <= tol
    else:
        product_ok = ab.count_nonzero() == 0
    adjoint_ok = operator_distance(spectral_projection(a_star, -n, rep), a_star) <= tol
    return product_ok and adjoint_ok


@dataclass(frozen=True)
class ResidualRecord:
    relation: str
    interior_residual: float
    boundary_residual: float
    interior_range: tuple

    def to_dict(self) -> dict:
        return {
            "relation": self.relation,
            "interior_residual": self.interior_residual,
            "boundary_residual": self.boundary_residual,
            "interior_range": list(self.interior_range),
        }


def split_residual(rep: TruncatedRep, R, lo: int, hi: int, name: str) -> ResidualRecord:
    mask = rep.mask(lo, hi)
    return ResidualRecord(
        name,
        operator_norm(restrict_columns(R, mask)),
        operator_norm(restrict_columns(R, ~mask)),
        (lo, hi),
    )


def relation_residuals(rep: TruncatedRep) -> list:
    """Residuals of the Cuntz-Krieger relations, split by word length.

    Interior ranges: ``S_i^* S_i = sum_j A(i,j) P_j`` on lengths 2..L-1 (length-1
    words lie outside every range of ``P_j``; the top length is killed by
    ``S_i``); ``S_i^* S_k = 0`` for i != k on every length; the adopted unit
    relation ``sum_j P_j = 1`` on lengths 2..L.
    """
    A, L = rep.A, rep.L
    out = []
    for i in range(1, A.n + 1):
        R = rep.S_adj[i - 1] @ rep.S[i - 1] - sum(A(i, j) * rep.P[j - 1] for j in range(1, A.n + 1))
        out.append(split_residual(rep, R, 2, L - 1, f"S{i}*S{i} = sum_j A({i},j) P_j"))
    for i in range(1, A.n + 1):
        for k in range(1, A.n + 1):
            if i != k:
                R = rep.S_adj[i - 1] @ rep.S[k - 1]
                out.append(split_residual(rep, R, 1, L, f"S{i}*S{k} = 0"))
    R = sum(rep.P) - rep.identity
    out.append(split_residual(rep, R, 2, L, "sum_j P_j = 1"))
    return out


def level_element_to_operator(a: LevelElement, rep: TruncatedRep):
    """Realize ``e[mu, nu]`` as ``S_mu S_nu^*``."""
    if a.level > rep.L - 1:
        raise LevelExceedsTruncation(f"level {a.level} needs L >= {a.level + 1}, have L={rep.L}")
    rows, cols, vals = [], [], []
    # S_mu S_nu^* sends |nu w> to |mu w> for nonempty w
    for (mu, nu), c in a.terms.items():
        k = len(nu)
        for w in rep.basis:
            if len(w) > k and w[:k] == nu:
                rows.append(rep.index[mu + w[k:]])
                cols.append(rep.index[w])
                vals.append(c)
    M = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(rep.dim, rep.dim))
    return _csr(M)
