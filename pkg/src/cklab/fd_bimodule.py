"""Hilbert bimodules over finite-dimensional C*-algebras ``M_{d_1} + ... + M_{d_r}``.

A partial injection ``h`` on block indices defines the bimodule: block ``t`` in
the domain carries ``d_{h(t)} x d_t`` complex arrays, the left action goes
through block ``h(t)`` and the right action through block ``t``. The spectrum
of the base algebra is the discrete set of block indices (1-based).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import BlockOutOfRange, InputError, NotInjective


@dataclass(frozen=True)
class FDAlgebra:
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(int(d) for d in self.blocks)
        if not blocks or any(d < 1 for d in blocks):
            raise InputError(f"block sizes must be positive and nonempty, got {self.blocks}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def r(self) -> int:
        return len(self.blocks)

    def size(self, t: int) -> int:
        return self.blocks[t - 1]

    def unit(self, t: int) -> dict:
        """The minimal central projection of block ``t``."""
        return {s: (np.eye(d) if s == t else np.zeros((d, d))) for s, d in enumerate(self.blocks, 1)}


@dataclass(frozen=True)
class PartialMapOnSpectrum:
    mapping: Mapping

    @property
    def domain(self) -> frozenset:
        return frozenset(self.mapping)

    @property
    def range(self) -> frozenset:
        return frozenset(self.mapping.values())

    def __call__(self, x):
        return self.mapping.get(x)

    def to_dict(self) -> dict:
        return {
            "domain": sorted(self.domain),
            "range": sorted(self.range),
            "map": {str(k): v for k, v in sorted(self.mapping.items())},
        }


@dataclass(frozen=True)
class FDHilbertBimodule:
    """Multiplicity-one block bimodule. ``left_scale`` exists only for mutation tests."""

    base: FDAlgebra
    h: Mapping
    left_scale: float = 1.0

    def shape(self, t: int) -> tuple:
        return (self.base.size(self.h[t]), self.base.size(t))

    def random_element(self, rng) -> dict:
        return {
            t: rng.standard_normal(self.shape(t)) + 1j * rng.standard_normal(self.shape(t))
            for t in sorted(self.h)
        }

    def zero(self) -> dict:
        return {t: np.zeros(self.shape(t), dtype=complex) for t in sorted(self.h)}

    def left_act(self, x: dict, a: dict) -> dict:
        return {t: self.left_scale * x[self.h[t]] @ a[t] for t in a}

    def right_act(self, a: dict, y: dict) -> dict:
        return {t: a[t] @ y[t] for t in a}

    def right_inner(self, a: dict, b: dict) -> dict:
        """``<a, b>_R = a^* b``, supported on the domain blocks."""
        out = {s: np.zeros((d, d), dtype=complex) for s, d in enumerate(self.base.blocks, 1)}
        for t in a:
            out[t] = a[t].conj().T @ b[t]
        return out

    def left_inner(self, a: dict, b: dict) -> dict:
        """``_L<a, b> = a b^*``, supported on the range blocks."""
        out = {s: np.zeros((d, d), dtype=complex) for s, d in enumerate(self.base.blocks, 1)}
        for t in a:
            out[self.h[t]] = a[t] @ b[t].conj().T
        return out

    def corrupted(self, scale: float = 2.0) -> "FDHilbertBimodule":
        return FDHilbertBimodule(self.base, self.h, scale)


def build_bimodule(base: FDAlgebra, h: Mapping) -> FDHilbertBimodule:
    h = {int(k): int(v) for k, v in h.items()}
    for t, s in h.items():
        if not (1 <= t <= base.r and 1 <= s <= base.r):
            raise BlockOutOfRange(f"map entry {t}->{s} outside blocks 1..{base.r}")
    if len(set(h.values())) != len(h):
        raise NotInjective(f"partial map {h} is not injective")
    return FDHilbertBimodule(base, dict(sorted(h.items())))


def bimodule_from_dict(data: dict) -> FDHilbertBimodule:
    return build_bimodule(FDAlgebra(tuple(data["blocks"])), data.get("map", {}))


def _block_norm(x: dict) -> float:
    return float(np.sqrt(sum(np.linalg.norm(v) ** 2 for v in x.values()))) if x else 0.0


def imprimitivity_check(M: FDHilbertBimodule, trials: int, seed: int = 0) -> float:
    """Max over random triples of ``|| a <b,c>_R - _L<a,b> c ||``."""
    if trials < 1:
        raise InputError("need at least one trial")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        a, b, c = (M.random_element(rng) for _ in range(3))
        lhs = M.right_act(a, M.right_inner(b, c))
        rhs = M.left_act(M.left_inner(a, b), c)
        worst = max(worst, _block_norm({t: lhs[t] - rhs[t] for t in lhs}))
    return worst


def _matrix_units(M: FDHilbertBimodule):
    for t in M.h:
        rows, cols = M.shape(t)
        for p in range(rows):
            for q in range(cols):
                el = M.zero()
                el[t][p, q] = 1.0
                yield el


def ideal_supports(M: FDHilbertBimodule) -> tuple:
    """(blocks of span B1^* B1, blocks of span B1 B1^*, both-full flag)."""
    right, left = set(), set()
    # polarization: span{a^* b} = span{x^* x}, and each x^* x is a sum over units
    for a in _matrix_units(M):
        right.update(s for s, v in M.right_inner(a, a).items() if np.any(v))
        left.update(s for s, v in M.left_inner(a, a).items() if np.any(v))
    full = set(range(1, M.base.r + 1))
    return frozenset(right), frozenset(left), right == full and left == full


def dual_partial_map(M: FDHilbertBimodule) -> PartialMapOnSpectrum:
    """The induced-representation map on block spectra.

    For each block ``t`` of the source ideal, the induced module
    ``B1 (x) C^{d_t}`` is spanned by the columns of the ``t``-component; its
    image is the unique block whose unit acts on it nontrivially.
    """
    source, _, _ = ideal_supports(M)
    mapping = {}
    units = {s: M.base.unit(s) for s in range(1, M.base.r + 1)}
    for t in sorted(source):
        induced = np.eye(M.base.size(t))
        a = {t: np.ones(M.shape(t))}
        for s in range(1, M.base.r + 1):
            acted = M.left_act(units[s], a)[t] @ induced
            if np.any(acted):
                mapping[t] = s
    return PartialMapOnSpectrum(mapping)


@dataclass(frozen=True)
class FreenessVerdict:
    free: bool
    periodic: tuple = field(default_factory=tuple)  # (block, minimal period)

    def to_dict(self) -> dict:
        return {
            "free": self.free,
            "periodic_witnesses": [{"block": x, "period": p} for x, p in self.periodic],
        }


def topological_freeness_finite(h: PartialMapOnSpectrum, max_period: int) -> FreenessVerdict:
    """On a discrete spectrum empty interior means empty: free iff no periodic block."""
    if max_period < 1:
        raise InputError("max_period must be >= 1")
    periodic = []
    for x in sorted(h.domain):
        y = x
        for p in range(1, max_period + 1):
            y = h(y)
            if y is None:
                break
            if y == x:
                periodic.append((x, p))
                break
    return FreenessVerdict(not periodic, tuple(periodic))
