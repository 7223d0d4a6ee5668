import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cklab import errors
from cklab.matrix_subshift import (
    ConditionIVerdict,
    Witness,
    admissible_words,
    brute_force_condition_I,
    check_condition_I,
    forced_states,
    is_admissible,
    make_word,
    matrix_from_dict,
    periodic_interior_check,
    validate_matrix,
    word_counts,
)


def all_valid_matrices(n):
    for bits in itertools.product((0, 1), repeat=n * n):
        rows = [list(bits[i * n:(i + 1) * n]) for i in range(n)]
        if all(any(r) for r in rows) and all(any(r[j] for r in rows) for j in range(n)):
            yield validate_matrix(rows)


@st.composite
def valid_matrices(draw, max_n=4):
    n = draw(st.integers(2, max_n))
    rows = draw(st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=n, max_size=n))
    for i in range(n):
        if not any(rows[i]):
            rows[i][draw(st.integers(0, n - 1))] = 1
    for j in range(n):
        if not any(r[j] for r in rows):
            rows[draw(st.integers(0, n - 1))][j] = 1
    return validate_matrix(rows)


def enumerate_words(A, k):
    """Oracle: filter all n^k tuples."""
    return [w for w in itertools.product(range(1, A.n + 1), repeat=k) if is_admissible(A, w)]


class TestValidate:
    def test_full(self):
        A = validate_matrix([[1, 1], [1, 1]])
        assert A.n == 2

    def test_zero_column(self):
        with pytest.raises(errors.ZeroColumn) as exc:
            validate_matrix([[1, 0], [1, 0]])
        assert exc.value.column == 2

    def test_zero_row(self):
        with pytest.raises(errors.ZeroRow) as exc:
            validate_matrix([[1, 1], [0, 0]])
        assert exc.value.row == 2

    def test_too_small(self):
        with pytest.raises(errors.TooSmall):
            validate_matrix([[1]])

    @pytest.mark.parametrize("raw", [[[1, 1], [1]], [[1, 1, 1], [1, 1, 1]]])
    def test_non_square(self, raw):
        with pytest.raises(errors.NonSquare):
            validate_matrix(raw)

    @pytest.mark.parametrize("bad", [2, -1, 0.5, True, "1"])
    def test_bad_entry(self, bad):
        with pytest.raises(errors.BadEntry):
            validate_matrix([[1, bad], [1, 1]])

    def test_dict_roundtrip(self, golden):
        assert matrix_from_dict(golden.to_dict()) == golden

    def test_dict_n_mismatch(self):
        with pytest.raises(errors.NonSquare):
            matrix_from_dict({"n": 3, "rows": [[1, 1], [1, 1]]})

    def test_make_word(self, golden):
        assert make_word(golden, [1, 2, 1]) == (1, 2, 1)
        with pytest.raises(errors.InadmissibleWord):
            make_word(golden, [2, 2])
        with pytest.raises(errors.InadmissibleWord):
            make_word(golden, [])


class TestAdmissibleWords:
    def test_golden_length2(self, golden):
        assert admissible_words(golden, 2) == [(1, 1), (1, 2), (2, 1)]

    def test_full_length3(self, full2):
        assert len(admissible_words(full2, 3)) == 8

    def test_identity_constant_words(self, ident2):
        assert admissible_words(ident2, 5) == [(1,) * 5, (2,) * 5]

    def test_length_zero(self, full2):
        with pytest.raises(errors.LengthZero):
            admissible_words(full2, 0)

    @settings(max_examples=40, deadline=None)
    @given(valid_matrices(), st.integers(1, 6))
    def test_matches_enumeration_in_lex_order(self, A, k):
        assert admissible_words(A, k) == enumerate_words(A, k)

    @settings(max_examples=40, deadline=None)
    @given(valid_matrices())
    def test_count_recursion(self, A):
        counts = word_counts(A, 10)
        assert counts == [len(admissible_words(A, k)) for k in range(1, 11)]


class TestForcedStates:
    def test_identity(self, ident2):
        assert forced_states(ident2) == {1, 2}

    def test_golden(self, golden):
        assert forced_states(golden) == frozenset()

    def test_flip(self, flip2):
        assert forced_states(flip2) == {1, 2}

    def test_forced_tail(self):
        A = validate_matrix([[1, 1, 0], [0, 0, 1], [0, 1, 0]])
        assert forced_states(A) == {2, 3}

    @settings(max_examples=60, deadline=None)
    @given(valid_matrices())
    def test_fixed_point(self, A):
        S = forced_states(A)
        for i in range(1, A.n + 1):
            assert (i in S) == (A.out_degree(i) == 1 and A.successors[i][0] in S)

    @settings(max_examples=60, deadline=None)
    @given(valid_matrices())
    def test_greatest_fixed_point(self, A):
        # a state is forced iff the walk of out-degree-one steps never branches
        for i in range(1, A.n + 1):
            state, deterministic = i, True
            for _ in range(A.n + 1):
                if A.out_degree(state) != 1:
                    deterministic = False
                    break
                state = A.successors[state][0]
            assert (i in forced_states(A)) == deterministic


class TestConditionI:
    def test_full_holds(self, full2):
        assert check_condition_I(full2).holds
        assert brute_force_condition_I(full2, 12).holds

    def test_identity_witness(self, ident2):
        v = check_condition_I(ident2)
        assert not v.holds
        assert v.witness == Witness((1,), (1,))
        assert v.method == "forced-cycle"

    def test_golden_holds(self, golden):
        assert check_condition_I(golden).holds
        assert brute_force_condition_I(golden, 5).holds

    def test_flip_witness_cycle(self, flip2):
        v = check_condition_I(flip2)
        assert v.witness == Witness((1,), (1, 2))

    def test_preperiodic_witness(self):
        A = validate_matrix([[1, 1, 0], [0, 0, 1], [0, 1, 0]])
        assert check_condition_I(A).witness == Witness((2,), (2, 3))

    def test_verdict_invariant(self):
        with pytest.raises(ValueError):
            ConditionIVerdict(True, Witness((1,), (1,)))
        with pytest.raises(ValueError):
            ConditionIVerdict(False, None)

    def test_to_dict(self, ident2):
        assert check_condition_I(ident2).to_dict() == {
            "holds": False,
            "witness": {"prefix": [1], "cycle": [1]},
            "method": "forced-cycle",
        }


class TestBruteForce:
    def test_identity(self, ident2):
        v = brute_force_condition_I(ident2, 5)
        assert not v.holds and v.method == "brute-force"
        assert v.witness.cycle == (1,)

    def test_full(self, full2):
        assert brute_force_condition_I(full2, 5).holds

    def test_flip(self, flip2):
        assert not brute_force_condition_I(flip2, 5).holds

    def test_depth_guard(self, full2):
        with pytest.raises(errors.DepthTooLarge):
            brute_force_condition_I(full2, 17)
        with pytest.raises(errors.LengthZero):
            brute_force_condition_I(full2, 0)

    def test_depth_one_has_no_evidence(self, ident2):
        assert brute_force_condition_I(ident2, 1).holds

    @settings(max_examples=60, deadline=None)
    @given(valid_matrices())
    def test_agrees_at_certified_depth(self, A):
        assert brute_force_condition_I(A, 2 * A.n + 1).holds == check_condition_I(A).holds

    def test_exhaustive_n2_n3(self):
        for n in (2, 3):
            for A in all_valid_matrices(n):
                assert brute_force_condition_I(A, 2 * n + 1).holds == check_condition_I(A).holds


class TestPeriodicInterior:
    def test_identity_period1(self, ident2):
        assert periodic_interior_check(ident2, 1) is False

    @pytest.mark.parametrize("p", range(1, 7))
    def test_full(self, full2, p):
        assert periodic_interior_check(full2, p) is True

    def test_flip(self, flip2):
        assert periodic_interior_check(flip2, 2) is False
        assert periodic_interior_check(flip2, 1) is True
        assert periodic_interior_check(flip2, 3) is True

    def test_bad_period(self, full2):
        with pytest.raises(errors.LengthZero):
            periodic_interior_check(full2, 0)

    @settings(max_examples=60, deadline=None)
    @given(valid_matrices())
    def test_equivalent_to_condition_I(self, A):
        free = all(periodic_interior_check(A, p) for p in range(1, 2 * A.n + 1))
        assert free == check_condition_I(A).holds

    @settings(max_examples=30, deadline=None)
    @given(valid_matrices(max_n=3), st.integers(1, 4))
    def test_against_cylinder_enumeration(self, A, p):
        # Oracle: a length-1 cylinder [i] is all p-periodic iff every admissible
        # word of length 3n from i is p-periodic and unique.
        depth = 3 * A.n
        words = admissible_words(A, depth)
        some_all_periodic = False
        for i in range(1, A.n + 1):
            ext = [w for w in words if w[0] == i]
            if len(ext) == 1 and all(ext[0][t] == ext[0][t + p] for t in range(depth - p)):
                some_all_periodic = True
        assert periodic_interior_check(A, p) == (not some_all_periodic)
