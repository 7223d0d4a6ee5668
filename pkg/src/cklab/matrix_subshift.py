"""0-1 transition matrices, admissible words and condition (I).

Symbols are 1-based everywhere in the public API. Words are plain tuples
of ints; :func:`make_word` validates one against a matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BadEntry,
    DepthTooLarge,
    InadmissibleWord,
    LengthZero,
    NonSquare,
    TooSmall,
    ZeroColumn,
    ZeroRow,
)

Word = tuple  # tuple[int, ...], 1-based symbols

MAX_ORACLE_DEPTH = 16


@dataclass(frozen=True)
class ZeroOneMatrix:
    """Validated transition matrix. Build through :func:`validate_matrix`."""

    rows: tuple

    @property
    def n(self) -> int:
        return len(self.rows)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.rows, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    def __call__(self, i: int, j: int) -> int:
        """Entry A(i, j) with 1-based indices."""
        return self.rows[i - 1][j - 1]

    @cached_property
    def successors(self) -> dict:
        return {
            i: tuple(j for j in range(1, self.n + 1) if self(i, j))
            for i in range(1, self.n + 1)
        }

    def out_degree(self, i: int) -> int:
        return len(self.successors[i])

    def to_dict(self) -> dict:
        return {"n": self.n, "rows": [list(r) for r in self.rows]}


def validate_matrix(raw) -> ZeroOneMatrix:
    """Check a raw square array and return a :class:`ZeroOneMatrix`.

    Raises NonSquare, BadEntry, TooSmall, ZeroRow(i) or ZeroColumn(j)
    (indices 1-based), in that order of precedence.
    """
    rows = [list(r) for r in raw]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise NonSquare(f"expected a square array, got row lengths {[len(r) for r in rows]}")
    for i, r in enumerate(rows, 1):
        for j, v in enumerate(r, 1):
            if isinstance(v, bool) or v not in (0, 1):
                raise BadEntry(f"entry ({i},{j}) = {v!r} is not 0 or 1")
    if n < 2:
        raise TooSmall(f"need n >= 2 symbols, got {n}")
    for i, r in enumerate(rows, 1):
        if not any(r):
            raise ZeroRow(i)
    for j in range(n):
        if not any(r[j] for r in rows):
            raise ZeroColumn(j + 1)
    return ZeroOneMatrix(tuple(tuple(int(v) for v in r) for r in rows))


def matrix_from_dict(data: dict) -> ZeroOneMatrix:
    A = validate_matrix(data["rows"])
    if "n" in data and data["n"] != A.n:
        raise NonSquare(f"field n={data['n']} disagrees with {A.n} rows")
    return A


def is_admissible(A: ZeroOneMatrix, word: Sequence[int]) -> bool:
    if any(not 1 <= s <= A.n for s in word):
        return False
    return all(A(word[t], word[t + 1]) for t in range(len(word) - 1))


def make_word(A: ZeroOneMatrix, symbols: Sequence[int], allow_empty: bool = False) -> Word:
    w = tuple(int(s) for s in symbols)
    if not w and not allow_empty:
        raise InadmissibleWord("empty word")
    if not is_admissible(A, w):
        raise InadmissibleWord(f"{w} is not admissible")
    return w


def shift(x: Word) -> Word:
    """The shift map: drop the first symbol."""
    return x[1:]


def admissible_words(A: ZeroOneMatrix, k: int) -> list:
    """All admissible words of length ``k`` in lexicographic order."""
    if k < 1:
        raise LengthZero(f"word length must be >= 1, got {k}")
    words = [(i,) for i in range(1, A.n + 1)]
    for _ in range(k - 1):
        words = [w + (j,) for w in words for j in A.successors[w[-1]]]
    return words


def word_counts(A: ZeroOneMatrix, k: int) -> list:
    """Number of admissible words of each length 1..k, via the path-count recursion."""
    ending = np.ones(A.n, dtype=object)
    counts = [int(ending.sum())]
    out = np.array([A.out_degree(i) for i in range(1, A.n + 1)], dtype=object)
    for _ in range(k - 1):
        counts.append(int((ending * out).sum()))
        ending = ending @ A.array.astype(object)
    return counts


def forced_states(A: ZeroOneMatrix) -> frozenset:
    """States from which exactly one infinite admissible path departs.

    Greatest fixed point of ``i in S iff out-degree(i) == 1 and succ(i) in S``.
    """
    S = {i for i in range(1, A.n + 1) if A.out_degree(i) == 1}
    changed = True
    while changed:
        changed = False
        for i in sorted(S):
            if A.successors[i][0] not in S:
                S.discard(i)
                changed = True
    return frozenset(S)


def _cycle_of_walk(walk: Sequence[int]) -> tuple:
    seen = {}
    for t, s in enumerate(walk):
        if s in seen:
            return tuple(walk[seen[s]:t])
        seen[s] = t
    return ()


@dataclass(frozen=True)
class Witness:
    prefix: Word
    cycle: Word

    def to_dict(self) -> dict:
        return {"prefix": list(self.prefix), "cycle": list(self.cycle)}


@dataclass(frozen=True)
class ConditionIVerdict:
    holds: bool
    witness: Optional[Witness] = None
    method: str = "forced-cycle"

    def __post_init__(self):
        if self.holds == (self.witness is not None):
            raise ValueError("witness must be present exactly when condition (I) fails")

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "method": self.method,
        }


def check_condition_I(A: ZeroOneMatrix) -> ConditionIVerdict:
    """Decide whether X_A has no isolated points.

    An isolated point exists iff some state is forced. The reported witness is
    the lexicographically smallest length-1 cylinder ``[i]`` with ``i`` forced
    (a cylinder of length 1 is always available once any state is forced),
    together with the cycle its unique path runs into.
    """
    forced = forced_states(A)
    if not forced:
        return ConditionIVerdict(True)
    i = min(forced)
    walk = [i]
    for _ in range(A.n):
        walk.append(A.successors[walk[-1]][0])
    return ConditionIVerdict(False, Witness((i,), _cycle_of_walk(walk)))


def brute_force_condition_I(A: ZeroOneMatrix, depth: int) -> ConditionIVerdict:
    """Cylinder-enumeration oracle for condition (I).

    Prefixes of length ``l <= depth - n - 1`` (at least 1) are enumerated in
    length-then-lexicographic order. A prefix whose cylinder admits exactly one
    extension to total length ``depth`` is declared isolating: that extension
    spans at least ``n + 1`` forced steps, so it has entered a cycle. The
    verdict is exact for ``depth >= n + 2`` (in particular ``2n + 1``).
    """
    if depth < 1:
        raise LengthZero(f"depth must be >= 1, got {depth}")
    if depth > MAX_ORACLE_DEPTH:
        raise DepthTooLarge(f"depth {depth} exceeds {MAX_ORACLE_DEPTH}")

    memo = {}

    def extensions(state, remaining):
        # number of continuations, capped at 2
        key = (state, remaining)
        if key not in memo:
            if remaining == 0:
                memo[key] = 1
            else:
                total = 0
                for j in A.successors[state]:
                    total += extensions(j, remaining - 1)
                    if total >= 2:
                        break
                memo[key] = min(total, 2)
        return memo[key]

    max_prefix = min(max(1, depth - A.n - 1), depth - 1)
    for length in range(1, max_prefix + 1):
        for prefix in admissible_words(A, length):
            if extensions(prefix[-1], depth - length) == 1:
                path = list(prefix)
                while len(path) < depth:
                    path.append(next(j for j in A.successors[path[-1]]
                                     if extensions(j, depth - len(path) - 1) == 1))
                cycle = _cycle_of_walk(path[length - 1:])
                return ConditionIVerdict(False, Witness(tuple(prefix), cycle), "brute-force")
    return ConditionIVerdict(True, None, "brute-force")


def periodic_interior_check(A: ZeroOneMatrix, period: int) -> bool:
    """True iff no cylinder of X_A consists solely of points of period ``period``.

    Such a cylinder is finite, hence contains an isolated periodic point, whose
    first symbol starts a deterministic walk that returns to it after ``c``
    steps with ``c`` dividing ``period``. Each state is probed directly.
    """
    if period < 1:
        raise LengthZero(f"period must be >= 1, got {period}")
    for s in range(1, A.n + 1):
        state, steps = s, 0
        while A.out_degree(state) == 1 and steps < A.n:
            state = A.successors[state][0]
            steps += 1
            if state == s:
                if period % steps == 0:
                    return False
                break
    return True
