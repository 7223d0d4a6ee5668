"""The crossed-product picture inside the truncated representation.

``S = sum_{i,j} n_j^{-1/2} S_i P_j`` turns the Cuntz-Krieger generators into a
single isometry; ``alpha = S(.)S^*`` is compared against the symbolic endomorphism
of :mod:`cklab.af_core`, and the generators are recovered from ``S``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .af_core import (
    LevelElement,
    alpha_level,
    identity_at_level,
    level_generators,
    n_vector,
)
from .errors import LevelExceedsTruncation
from .path_rep import (
    ResidualRecord,
    TruncatedRep,
    _csr,
    level_element_to_operator,
    operator_norm,
    restrict_columns,
    split_residual,
)

COVARIANCE_TOL = 1e-10
DIVERGENCE_FLAGS = ("unit_relation_adopted",)


def build_isometry_S(rep: TruncatedRep):
    """``S|mu> = n_{mu_1}^{-1/2} sum_i A(i, mu_1) |i mu>`` for ``|mu| < L``.

    On words of length >= 2 this is literally ``sum_{i,j} n_j^{-1/2} S_i P_j``.
    On length-1 words ``P_j`` vanishes in the truncation, so the first-symbol
    projection is used instead; this keeps ``S^*S = 1`` below the top length.
    """
    A = rep.A
    nv = n_vector(A)
    rows, cols, vals = [], [], []
    for w in rep.basis:
        if len(w) >= rep.L:
            continue
        c = 1.0 / math.sqrt(nv[w[0] - 1])
        for i in range(1, A.n + 1):
            if A(i, w[0]):
                rows.append(rep.index[(i,) + w])
                cols.append(rep.index[w])
                vals.append(c)
    M = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(rep.dim, rep.dim))
    return _csr(M)


def literal_isometry_S(rep: TruncatedRep):
    """``sum_{i,j} n_j^{-1/2} S_i P_j`` with the truncated ``P_j``."""
    nv = n_vector(rep.A)
    out = sp.csr_matrix((rep.dim, rep.dim), dtype=complex)
    for i in range(1, rep.A.n + 1):
        for j in range(1, rep.A.n + 1):
            out = out + (1.0 / math.sqrt(nv[j - 1])) * (rep.S[i - 1] @ rep.P[j - 1])
    return _csr(out)


@dataclass(frozen=True)
class CovarianceReport:
    element: LevelElement
    isometry: ResidualRecord
    covariance: ResidualRecord
    divergence_flags: tuple = DIVERGENCE_FLAGS

    @property
    def ok(self) -> bool:
        return max(self.isometry.interior_residual, self.covariance.interior_residual) <= COVARIANCE_TOL

    def to_dict(self) -> dict:
        return {
            "element": self.element.to_dict(),
            "residuals": [self.isometry.to_dict(), self.covariance.to_dict()],
            "divergence_flags": list(self.divergence_flags),
        }


def covariance_check(rep: TruncatedRep, a: LevelElement, S=None) -> CovarianceReport:
    """Residuals of ``S^*S = 1`` and ``S op(a) S^* = op(alpha(a))``."""
    k = a.level
    if k > rep.L - 2:
        raise LevelExceedsTruncation(f"level {k} needs L >= {k + 2}, have L={rep.L}")
    if S is None:
        S = build_isometry_S(rep)
    Sh = _csr(S.conj().T)
    iso = split_residual(rep, Sh @ S - rep.identity, 1, rep.L - 1, "S*S = 1")
    lhs = S @ level_element_to_operator(a, rep) @ Sh
    rhs = level_element_to_operator(alpha_level(rep.A, a), rep)
    cov = split_residual(rep, lhs - rhs, k + 2, rep.L - 1, "S a S* = alpha(a)")
    return CovarianceReport(a, iso, cov)


def distance_to_span(target, spanning, mask: np.ndarray) -> float:
    """Interior operator-norm distance from ``target`` to the span of ``spanning``.

    The best coefficients are fitted by least squares on the matrix entries of
    the column-restricted operators; the residual is then measured in operator
    norm.
    """
    target = restrict_columns(target, mask)
    if not spanning:
        return operator_norm(target)
    restricted = [restrict_columns(op, mask) for op in spanning]
    support = set(zip(*target.nonzero()))
    for op in restricted:
        support.update(zip(*op.nonzero()))
    if not support:
        return 0.0
    rows, cols = map(np.array, zip(*sorted(support)))
    M = np.column_stack([np.asarray(op[rows, cols]).ravel() for op in restricted])
    y = np.asarray(target[rows, cols]).ravel()
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    residual = target - sum(c * op for c, op in zip(coef, restricted))
    return operator_norm(residual)


def generator_images(rep: TruncatedRep, k: int) -> list:
    return [level_element_to_operator(LevelElement(k, {g: 1.0}), rep) for g in level_generators(rep.A, k)]


def star_compression_check(rep: TruncatedRep, a: LevelElement, S=None) -> float:
    """Distance from ``S^* op(a) S`` to the images of levels k-1..k+1.

    For a matrix unit ``e[r rho, t tau]`` the compression is
    ``(n_{rho_1} n_{tau_1})^{-1/2} e[rho, tau]``, one level down.
    """
    k = a.level
    if k < 2 or k > rep.L - 1:
        raise LevelExceedsTruncation(f"level must lie in [2, {rep.L - 1}], got {k}")
    if S is None:
        S = build_isometry_S(rep)
    target = _csr(S.conj().T @ level_element_to_operator(a, rep) @ S)
    spanning = []
    for level in range(k - 1, min(k + 1, rep.L - 1) + 1):
        spanning.extend(generator_images(rep, level))
    return distance_to_span(target, spanning, rep.mask(1, rep.L - 1))


def range_projection_residual(rep: TruncatedRep, S=None) -> float:
    """``|| (SS^*)^2 - SS^* || + || (SS^*)^* - SS^* ||``."""
    if S is None:
        S = build_isometry_S(rep)
    Q = _csr(S @ S.conj().T)
    return operator_norm(Q @ Q - Q) + operator_norm(Q.conj().T - Q)


def hereditary_compression_check(rep: TruncatedRep, b: LevelElement, S=None) -> float:
    """Distance from ``SS^* op(b) SS^*`` to ``op(alpha(level b.level - 1))``."""
    k = b.level
    if k < 2 or k > rep.L - 1:
        raise LevelExceedsTruncation(f"level must lie in [2, {rep.L - 1}], got {k}")
    if S is None:
        S = build_isometry_S(rep)
    Q = _csr(S @ S.conj().T)
    target = _csr(Q @ level_element_to_operator(b, rep) @ Q)
    spanning = [
        level_element_to_operator(alpha_level(rep.A, LevelElement(k - 1, {g: 1.0})), rep)
        for g in level_generators(rep.A, k - 1)
    ]
    return distance_to_span(target, spanning, rep.mask(1, rep.L))


def alpha_one_is_SSstar(rep: TruncatedRep, S=None) -> float:
    """Interior residual of ``op(alpha(1_1)) - SS^*`` on lengths 3..L.

    ``alpha(1_1)`` lives at level 2, whose image only acts on words of length >= 3.
    """
    if S is None:
        S = build_isometry_S(rep)
    Q = _csr(S @ S.conj().T)
    R = Q - level_element_to_operator(alpha_level(rep.A, identity_at_level(rep.A, 1)), rep)
    return operator_norm(restrict_columns(R, rep.mask(3, rep.L)))


def recover_generators(rep: TruncatedRep, S) -> list:
    """``S_i = sum_j A(i,j) n_j^{1/2} P_i S P_j`` for each i."""
    A = rep.A
    nv = n_vector(A)
    out = []
    for i in range(1, A.n + 1):
        acc = sp.csr_matrix((rep.dim, rep.dim), dtype=complex)
        for j in range(1, A.n + 1):
            if A(i, j):
                acc = acc + math.sqrt(nv[j - 1]) * (rep.P[i - 1] @ S @ rep.P[j - 1])
        out.append(_csr(acc))
    return out


def recovery_residuals(rep: TruncatedRep, recovered) -> list:
    """Per-generator residuals; interior lengths 2..L (``P_j`` kills length 1)."""
    return [
        split_residual(rep, Si - rep.S[i], 2, rep.L, f"recovered S{i + 1} = S{i + 1}")
        for i, Si in enumerate(recovered)
    ]


@dataclass(frozen=True)
class GradedGeneratorSet:
    """Generator labels with their gauge degrees."""

    degrees: dict = field(default_factory=dict)

    @classmethod
    def cuntz_krieger(cls, n: int) -> "GradedGeneratorSet":
        return cls({f"S{i}": 1 for i in range(1, n + 1)})

    @classmethod
    def crossed_product(cls, algebra_labels=("a",)) -> "GradedGeneratorSet":
        degrees = {label: 0 for label in algebra_labels}
        degrees["S"] = 1
        return cls(degrees)


@dataclass(frozen=True)
class SemiSaturationVerdict:
    semi_saturated: bool
    offenders: tuple

    def to_dict(self) -> dict:
        return {
            "semi_saturated": self.semi_saturated,
            "offenders": [{"label": k, "degree": d} for k, d in self.offenders],
        }


def semi_saturation_check(gens: GradedGeneratorSet) -> SemiSaturationVerdict:
    offenders = tuple(sorted((k, d) for k, d in gens.degrees.items() if d not in (0, 1)))
    return SemiSaturationVerdict(not offenders, offenders)

