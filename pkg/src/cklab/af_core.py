"""Finite levels of the AF-core.

The level-k algebra is spanned by matrix units ``e[mu, nu] = S_mu S_nu^*`` with
``|mu| = |nu| = k`` and equal last symbols, so it splits into one full matrix
block per last symbol. Elements are sparse coefficient maps over such pairs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import InadmissibleWord, LevelMismatch, PrefixTooShort
from .matrix_subshift import ZeroOneMatrix, admissible_words, is_admissible, make_word

COEFF_TOL = 1e-12


def _clean(terms):
    return {k: complex(v) for k, v in terms.items() if v != 0}


@dataclass(frozen=True)
class LevelElement:
    """Element of the level-``level`` algebra, keyed by pairs of words."""

    level: int
    terms: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", _clean(self.terms))
        for mu, nu in self.terms:
            if len(mu) != self.level or len(nu) != self.level:
                raise LevelMismatch(f"pair {(mu, nu)} does not live at level {self.level}")
            if mu[-1] != nu[-1]:
                raise InadmissibleWord(f"{mu} and {nu} end in different symbols")

    def _check(self, other):
        if not isinstance(other, LevelElement):
            return NotImplemented
        if other.level != self.level:
            raise LevelMismatch(f"levels {self.level} and {other.level} differ")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return LevelElement(self.level, out)

    def __neg__(self):
        return LevelElement(self.level, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rmul__(self, scalar):
        if isinstance(scalar, LevelElement):
            return NotImplemented
        return LevelElement(self.level, {k: scalar * v for k, v in self.terms.items()})

    def __matmul__(self, other):
        return level_multiply(self, other)

    def adjoint(self) -> "LevelElement":
        return LevelElement(self.level, {(nu, mu): v.conjugate() for (mu, nu), v in self.terms.items()})

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector."""
        return math.sqrt(sum(abs(v) ** 2 for v in self.terms.values()))

    def is_close(self, other, tol=COEFF_TOL) -> bool:
        return (self - other).norm() <= tol

    def to_dict(self) -> dict:
        terms = [
            {"mu": list(mu), "nu": list(nu), "re": v.real, "im": v.imag}
            for (mu, nu), v in sorted(self.terms.items())
        ]
        return {"level": self.level, "terms": terms}


def level_element_from_dict(A: ZeroOneMatrix, data: dict) -> LevelElement:
    terms = {}
    for t in data["terms"]:
        mu, nu = make_word(A, t["mu"]), make_word(A, t["nu"])
        terms[(mu, nu)] = terms.get((mu, nu), 0) + complex(t.get("re", 0.0), t.get("im", 0.0))
    return LevelElement(int(data["level"]), terms)


def matrix_unit(A: ZeroOneMatrix, mu, nu, coeff=1.0) -> LevelElement:
    mu, nu = make_word(A, mu), make_word(A, nu)
    if len(mu) != len(nu):
        raise LevelMismatch(f"{mu} and {nu} have different lengths")
    return LevelElement(len(mu), {(mu, nu): coeff})


def level_generators(A: ZeroOneMatrix, k: int) -> list:
    """All matrix-unit index pairs at level ``k``, block by block."""
    words = admissible_words(A, k)
    by_last = {}
    for w in words:
        by_last.setdefault(w[-1], []).append(w)
    return [(mu, nu) for i in sorted(by_last) for mu in by_last[i] for nu in by_last[i]]


def identity_at_level(A: ZeroOneMatrix, k: int) -> LevelElement:
    return LevelElement(k, {(w, w): 1.0 for w in admissible_words(A, k)})


def level_multiply(a: LevelElement, b: LevelElement) -> LevelElement:
    """Product in the level algebra: ``e[mu,nu] e[eta,zeta] = delta(nu,eta) e[mu,zeta]``."""
    if a.level != b.level:
        raise LevelMismatch(f"levels {a.level} and {b.level} differ")
    right = {}
    for (eta, zeta), v in b.terms.items():
        right.setdefault(eta, []).append((zeta, v))
    out = {}
    for (mu, nu), u in a.terms.items():
        for zeta, v in right.get(nu, ()):
            out[(mu, zeta)] = out.get((mu, zeta), 0) + u * v
    return LevelElement(a.level, out)


@dataclass(frozen=True)
class BratteliDims:
    """``levels[k-1][i-1]`` is the number of admissible words of length k ending at i."""

    levels: tuple

    def __getitem__(self, k):
        return self.levels[k - 1]

    def total_dimension(self, k: int) -> int:
        return sum(m * m for m in self[k])

    def to_dict(self) -> dict:
        return {
            "levels": [
                {"k": k, "m": list(m), "dimension": self.total_dimension(k)}
                for k, m in enumerate(self.levels, 1)
            ]
        }


def bratteli_dims(A: ZeroOneMatrix, K: int) -> BratteliDims:
    if K < 1:
        raise LevelMismatch(f"need at least one level, got K={K}")
    m = np.ones(A.n, dtype=np.int64)
    out = [tuple(int(v) for v in m)]
    for _ in range(K - 1):
        m = m @ A.array
        out.append(tuple(int(v) for v in m))
    return BratteliDims(tuple(out))


def n_vector(A: ZeroOneMatrix) -> tuple:
    """Column sums ``n_j = sum_i A(i, j)``."""
    return tuple(int(v) for v in A.array.sum(axis=0))


def embed_level(A: ZeroOneMatrix, a: LevelElement) -> LevelElement:
    """Inclusion of level k into level k+1: ``e[mu,nu] -> sum_j A(i,j) e[mu j, nu j]``."""
    out = {}
    for (mu, nu), v in a.terms.items():
        for j in A.successors[mu[-1]]:
            out[(mu + (j,), nu + (j,))] = v
    return LevelElement(a.level + 1, out)


def lift(A: ZeroOneMatrix, a: LevelElement, level: int) -> LevelElement:
    if level < a.level:
        raise LevelMismatch(f"cannot lower level {a.level} to {level}")
    while a.level < level:
        a = embed_level(A, a)
    return a


def alpha_level(A: ZeroOneMatrix, a: LevelElement) -> LevelElement:
    """The endomorphism on level k, landing in level k+1.

    ``e[i2 mu, j2 nu] -> (n_i2 n_j2)^(-1/2) sum_{i,j} e[i i2 mu, j j2 nu]``;
    terms whose extended word is inadmissible vanish.
    """
    nv = n_vector(A)
    preds = {j: tuple(i for i in range(1, A.n + 1) if A(i, j)) for j in range(1, A.n + 1)}
    out = {}
    for (mu, nu), v in a.terms.items():
        c = v / math.sqrt(nv[mu[0] - 1] * nv[nu[0] - 1])
        for i in preds[mu[0]]:
            for j in preds[nu[0]]:
                out[((i,) + mu, (j,) + nu)] = c
    return LevelElement(a.level + 1, out)


def _coefficient_matrix(elements, basis):
    index = {g: t for t, g in enumerate(basis)}
    M = np.zeros((len(basis), len(elements)), dtype=complex)
    for col, el in enumerate(elements):
        for key, v in el.terms.items():
            M[index[key], col] = v
    return M


def alpha_rank(A: ZeroOneMatrix, k: int) -> tuple:
    """(rank of alpha on level k, number of level-k generators); equal iff injective."""
    gens = level_generators(A, k)
    images = [alpha_level(A, LevelElement(k, {g: 1.0})) for g in gens]
    M = _coefficient_matrix(images, level_generators(A, k + 1))
    return int(np.linalg.matrix_rank(M)), len(gens)


def hereditary_range_check(A: ZeroOneMatrix, k: int) -> dict:
    """Compare span{alpha(1) x alpha(1) : x at level k+1} with alpha(level k)."""
    basis = level_generators(A, k + 1)
    p = alpha_level(A, identity_at_level(A, k))
    corner = [p @ LevelElement(k + 1, {g: 1.0}) @ p for g in basis]
    image = [alpha_level(A, LevelElement(k, {g: 1.0})) for g in level_generators(A, k)]
    C = _coefficient_matrix(corner, basis)
    R = _coefficient_matrix(image, basis)
    rank_c = int(np.linalg.matrix_rank(C))
    rank_r = int(np.linalg.matrix_rank(R))
    rank_joint = int(np.linalg.matrix_rank(np.hstack([C, R])))
    return {
        "level": k,
        "corner_dimension": rank_c,
        "image_dimension": rank_r,
        "equal": rank_c == rank_r == rank_joint,
    }


@dataclass(frozen=True)
class ProductStatePrefix:
    """Finite prefix standing in for an infinite admissible path."""

    A: ZeroOneMatrix
    x: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", make_word(self.A, self.x))

    def shifted(self) -> "ProductStatePrefix":
        if len(self.x) < 2:
            raise PrefixTooShort("cannot shift a prefix of length 1")
        return ProductStatePrefix(self.A, self.x[1:])


def product_state_eval(x: ProductStatePrefix, a: LevelElement) -> complex:
    """omega_x(a): the coefficient of ``e[x_1..x_k, x_1..x_k]`` in ``a``."""
    if len(x.x) < a.level:
        raise PrefixTooShort(f"prefix of length {len(x.x)} cannot evaluate level {a.level}")
    head = x.x[: a.level]
    return a.terms.get((head, head), 0j)


def state_pullback_check(x: ProductStatePrefix, a: LevelElement) -> float:
    """``|omega_x(alpha(a)) - omega_{shift x}(a) / n_{x_2}|``; zero in exact arithmetic."""
    if len(x.x) < a.level + 2:
        raise PrefixTooShort(f"need a prefix of length >= {a.level + 2}, got {len(x.x)}")
    nv = n_vector(x.A)
    lhs = product_state_eval(x, alpha_level(x.A, a))
    rhs = product_state_eval(x.shifted(), a) / nv[x.x[1] - 1]
    return abs(lhs - rhs)


def random_level_element(A: ZeroOneMatrix, k: int, rng, density: float = 0.5) -> LevelElement:
    """Gaussian coefficients on a random subset of the level-k matrix units."""
    terms = {}
    for g in level_generators(A, k):
        if rng.random() < density:
            terms[g] = complex(rng.normal(), rng.normal())
    return LevelElement(k, terms)


def is_generator_pair(A: ZeroOneMatrix, mu, nu) -> bool:
    return (
        len(mu) == len(nu) > 0
        and mu[-1] == nu[-1]
        and is_admissible(A, mu)
        and is_admissible(A, nu)
    )
