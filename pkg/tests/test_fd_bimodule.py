import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cklab import errors
from cklab.fd_bimodule import (
    FDAlgebra,
    PartialMapOnSpectrum,
    bimodule_from_dict,
    build_bimodule,
    dual_partial_map,
    ideal_supports,
    imprimitivity_check,
    topological_freeness_finite,
)


def partial_injections(r):
    blocks = range(1, r + 1)
    for k in range(r + 1):
        for dom in itertools.combinations(blocks, k):
            for img in itertools.permutations(blocks, k):
                yield dict(zip(dom, img))


def embed(M, el):
    """Oracle: place the t-component at block position (h(t), t) of one big matrix."""
    offsets = np.concatenate([[0], np.cumsum(M.base.blocks)])
    N = offsets[-1]
    X = np.zeros((N, N), dtype=complex)
    for t, v in el.items():
        s = M.h[t]
        X[offsets[s - 1]:offsets[s], offsets[t - 1]:offsets[t]] = v
    return X


def embed_base(M, x):
    offsets = np.concatenate([[0], np.cumsum(M.base.blocks)])
    X = np.zeros((offsets[-1],) * 2, dtype=complex)
    for s, v in x.items():
        X[offsets[s - 1]:offsets[s], offsets[s - 1]:offsets[s]] = v
    return X


class TestBuild:
    def test_square_block(self):
        M = build_bimodule(FDAlgebra((2, 2)), {1: 2})
        assert M.shape(1) == (2, 2)

    def test_rectangular(self):
        M = build_bimodule(FDAlgebra((2, 3)), {1: 2})
        assert M.zero()[1].shape == (3, 2)

    def test_self_morita(self):
        M = build_bimodule(FDAlgebra((1, 1)), {1: 1})
        assert M.shape(1) == (1, 1)

    def test_not_injective(self):
        with pytest.raises(errors.NotInjective):
            build_bimodule(FDAlgebra((1, 1, 1)), {1: 3, 2: 3})

    @pytest.mark.parametrize("h", [{1: 3}, {0: 1}, {2: -1}])
    def test_out_of_range(self, h):
        with pytest.raises(errors.BlockOutOfRange):
            build_bimodule(FDAlgebra((1, 1)), h)

    def test_bad_blocks(self):
        with pytest.raises(errors.InputError):
            FDAlgebra((2, 0))
        with pytest.raises(errors.InputError):
            FDAlgebra(())

    def test_from_dict(self):
        M = bimodule_from_dict({"blocks": [2, 2], "map": {"1": 2}})
        assert M.h == {1: 2} and M.base.blocks == (2, 2)


class TestInnerProducts:
    @pytest.fixture
    def M(self):
        return build_bimodule(FDAlgebra((2, 3, 1)), {1: 2, 2: 3, 3: 1})

    def test_against_dense_oracle(self, M):
        rng = np.random.default_rng(0)
        a, b, c = (M.random_element(rng) for _ in range(3))
        np.testing.assert_allclose(embed_base(M, M.right_inner(a, b)), embed(M, a).conj().T @ embed(M, b), atol=1e-12)
        np.testing.assert_allclose(embed_base(M, M.left_inner(a, b)), embed(M, a) @ embed(M, b).conj().T, atol=1e-12)
        abc = embed(M, a) @ embed(M, b).conj().T @ embed(M, c)
        np.testing.assert_allclose(embed(M, M.right_act(a, M.right_inner(b, c))), abc, atol=1e-12)
        np.testing.assert_allclose(embed(M, M.left_act(M.left_inner(a, b), c)), abc, atol=1e-12)

    def test_hermitian_symmetry(self, M):
        rng = np.random.default_rng(1)
        for _ in range(10):
            a, b = M.random_element(rng), M.random_element(rng)
            for inner in (M.right_inner, M.left_inner):
                ab, ba = inner(a, b), inner(b, a)
                for s in ab:
                    assert np.abs(ab[s].conj().T - ba[s]).max() <= 1e-12

    def test_positive(self, M):
        rng = np.random.default_rng(2)
        for _ in range(10):
            a = M.random_element(rng)
            for inner in (M.right_inner, M.left_inner):
                for v in inner(a, a).values():
                    assert np.linalg.eigvalsh(v).min() >= -1e-12

    def test_supports(self):
        M = build_bimodule(FDAlgebra((2, 2)), {1: 2})
        rng = np.random.default_rng(3)
        a, b = M.random_element(rng), M.random_element(rng)
        assert not np.any(M.right_inner(a, b)[2]) and np.any(M.right_inner(a, b)[1])
        assert not np.any(M.left_inner(a, b)[1]) and np.any(M.left_inner(a, b)[2])


class TestImprimitivity:
    def test_built_module(self):
        M = build_bimodule(FDAlgebra((2, 3, 4)), {1: 3, 3: 2})
        assert imprimitivity_check(M, 100) <= 1e-12

    def test_zero_module(self):
        assert imprimitivity_check(build_bimodule(FDAlgebra((2, 2)), {}), 10) == 0

    def test_mutation_detected(self):
        M = build_bimodule(FDAlgebra((2, 2)), {1: 2, 2: 1})
        assert imprimitivity_check(M.corrupted(2.0), 20) > 0.1

    def test_trials_guard(self):
        with pytest.raises(errors.InputError):
            imprimitivity_check(build_bimodule(FDAlgebra((1,)), {}), 0)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(1, 3), min_size=1, max_size=4), st.data())
    def test_random_modules(self, blocks, data):
        r = len(blocks)
        dom = data.draw(st.lists(st.integers(1, r), unique=True, max_size=r))
        img = data.draw(st.permutations(range(1, r + 1)))[: len(dom)]
        M = build_bimodule(FDAlgebra(tuple(blocks)), dict(zip(dom, img)))
        assert imprimitivity_check(M, 5) <= 1e-12


class TestSupportsAndDual:
    def test_one_way(self):
        right, left, full = ideal_supports(build_bimodule(FDAlgebra((2, 2)), {1: 2}))
        assert (right, left, full) == ({1}, {2}, False)

    def test_equivalence(self):
        right, left, full = ideal_supports(build_bimodule(FDAlgebra((2, 2)), {1: 2, 2: 1}))
        assert (right, left, full) == ({1, 2}, {1, 2}, True)

    def test_empty(self):
        right, left, full = ideal_supports(build_bimodule(FDAlgebra((2, 2)), {}))
        assert right == left == frozenset() and not full

    def test_dual_examples(self):
        assert dual_partial_map(build_bimodule(FDAlgebra((2, 2)), {1: 2})).mapping == {1: 2}
        assert dual_partial_map(build_bimodule(FDAlgebra((1, 2, 3)), {1: 1, 2: 2, 3: 3})).mapping == {1: 1, 2: 2, 3: 3}
        assert dual_partial_map(build_bimodule(FDAlgebra((1, 1, 1)), {1: 2, 2: 3})).mapping == {1: 2, 2: 3}

    def test_round_trip_all_injections_up_to_six_blocks(self):
        count = 0
        for r in range(1, 7):
            base = FDAlgebra((1,) * r)
            for h in partial_injections(r):
                M = build_bimodule(base, h)
                dual = dual_partial_map(M)
                assert dual.mapping == h
                right, left, _ = ideal_supports(M)
                assert right == dual.domain and left == dual.range
                count += 1
        # sum_k C(r,k)^2 k! for r = 1..6
        assert count == 2 + 7 + 34 + 209 + 1546 + 13327

    def test_round_trip_mixed_sizes(self):
        rng = np.random.default_rng(4)
        for r in range(1, 5):
            base = FDAlgebra(tuple(int(d) for d in rng.integers(1, 4, size=r)))
            for h in partial_injections(r):
                assert dual_partial_map(build_bimodule(base, h)).mapping == h


class TestFreeness:
    def test_chain_is_free(self):
        v = topological_freeness_finite(PartialMapOnSpectrum({1: 2, 2: 3}), 3)
        assert v.free and v.periodic == ()

    def test_swap(self):
        v = topological_freeness_finite(PartialMapOnSpectrum({1: 2, 2: 1}), 2)
        assert not v.free and v.periodic == ((1, 2), (2, 2))

    def test_identity(self):
        v = topological_freeness_finite(PartialMapOnSpectrum({1: 1, 2: 2}), 2)
        assert v.to_dict()["periodic_witnesses"][0] == {"block": 1, "period": 1}

    def test_single_block_nonempty_domain_never_free(self):
        assert not topological_freeness_finite(PartialMapOnSpectrum({1: 1}), 1).free

    def test_guard(self):
        with pytest.raises(errors.InputError):
            topological_freeness_finite(PartialMapOnSpectrum({}), 0)

    def test_against_orbit_oracle(self):
        for r in range(1, 5):
            for h in partial_injections(r):
                # oracle: x is periodic iff iterating from x returns before leaving the domain
                expected_free = True
                for x in h:
                    seen, y = set(), x
                    while y in h and y not in seen:
                        seen.add(y)
                        y = h[y]
                        if y == x:
                            expected_free = False
                assert topological_freeness_finite(PartialMapOnSpectrum(h), r).free == expected_free
