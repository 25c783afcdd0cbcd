from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ncbv.tensor import (GradedBasis, NCFunctional, CommFunctional,
                         perm_sign, eval_sign, cyclic_canonicalize,
                         word_degree, word_parity, sort_words)


BASIS = GradedBasis(["a", "b", "c", "d"], [0, 1, -1, 2])


def func(terms, p_max=2, l_max=8):
    F = NCFunctional(BASIS, p_max, l_max)
    for i, j, ws, c in terms:
        F.add_term(i, j, ws, c)
    return F


class TestSigns:
    def test_perm_identity(self):
        assert perm_sign([1, 1, 0], (0, 1, 2)) == 1

    def test_perm_odd_transposition(self):
        assert perm_sign([1, 1], (1, 0)) == -1

    def test_perm_mixed_transposition(self):
        assert perm_sign([1, 0], (1, 0)) == 1

    @given(st.lists(st.integers(0, 1), min_size=2, max_size=6),
           st.randoms(use_true_random=False))
    @settings(max_examples=60, deadline=None)
    def test_perm_sign_multiplicative(self, pars, rnd):
        n = len(pars)
        p1 = list(range(n))
        p2 = list(range(n))
        rnd.shuffle(p1)
        rnd.shuffle(p2)
        comp = tuple(p1[p2[i]] for i in range(n))
        pars2 = [pars[p1[i]] for i in range(n)]
        assert perm_sign(pars, comp) == \
            perm_sign(pars, tuple(p1)) * perm_sign(pars2, tuple(p2))

    def test_eval_sign_even(self):
        assert eval_sign([0, 0, 0]) == 1


class TestCyclicWords:
    def test_rotation_identified(self):
        # (a b d) and (b d a) are the same cyclic word, with the sign of
        # rotating letter a past the rest
        F = func([(0, 0, [(0, 1, 3)], 1)])
        G = func([(0, 0, [(1, 3, 0)], 1)])
        assert F == G

    def test_odd_rotation_sign(self):
        # rotating an odd letter past an odd letter flips the sign
        F = func([(0, 0, [(1, 2)], 1)])
        G = func([(0, 0, [(2, 1)], 1)])
        assert F == G.scale(-1)

    def test_vanishing_cyclic_word(self):
        # (b b): the nontrivial rotation acts by -1, so the word is zero
        assert cyclic_canonicalize(BASIS, (1, 1)) is None

    def test_word_degree_and_parity(self):
        assert word_degree(BASIS, (0, 1, 2)) == 0
        assert word_parity(BASIS, (1, 2, 2)) == 1

    def test_sorting_odd_words_anticommute(self):
        ws, s = sort_words(BASIS, [(1, 0, 0), (2, 3, 3)])
        ws2, s2 = sort_words(BASIS, [(2, 3, 3), (1, 0, 0)])
        assert ws == ws2 and s == -s2

    def test_repeated_odd_word_squares_to_zero(self):
        assert sort_words(BASIS, [(1, 0), (1, 0)])[0] is None


class TestNCFunctional:
    def test_truncation_drops_long_words(self):
        F = func([(0, 0, [(0, 1, 2, 0, 1, 2)], 1)], l_max=4)
        assert F.is_zero()

    def test_truncation_drops_high_level(self):
        F = func([(2, 1, [(0, 1, 2)], 1)], p_max=2)
        assert F.is_zero()

    def test_scalars_excluded(self):
        F = func([(0, 0, [], 5)])
        assert F.is_zero()

    def test_constants_have_positive_level(self):
        F = func([(1, 0, [], 5), (0, 1, [], 2)])
        assert len(F.terms) == 2 and F.modulo_constants().is_zero()

    def test_filtration_components_sum(self):
        F = func([(0, 0, [(0, 1, 2)], 1), (1, 0, [(0,)], 2),
                  (0, 1, [(0, 0)], 3), (0, 0, [(0, 1, 2), (0, 0)], 1)])
        total = NCFunctional(BASIS, 2, 8)
        for n in range(0, 6):
            total = total + F.filtration_component(n)
        assert total == F

    def test_multiply_adds_levels(self):
        F = func([(1, 0, [(0,)], 1)], p_max=4)
        G = func([(0, 1, [(0, 0)], 1)], p_max=4)
        assert F.multiply(G) == func([(1, 1, [(0,), (0, 0)], 1)], p_max=4)

    def test_multiply_distributes(self):
        F = func([(0, 0, [(0, 1, 2)], 2), (0, 0, [(0, 0)], 1)], p_max=4)
        G = func([(0, 0, [(3, 2)], 1)], p_max=4)
        H = func([(0, 0, [(0,)], 3)], p_max=4)
        assert F.multiply(G + H) == F.multiply(G) + F.multiply(H)

    def test_is_interaction(self):
        assert func([(0, 0, [(0, 1, 2)], 1)]).is_interaction()
        # a quadratic word sits below the stability cutoff
        assert not func([(0, 0, [(1, 2)], 1)]).is_interaction()
        # inhomogeneous terms are not interactions
        assert not func([(0, 0, [(0, 1, 2)], 1),
                         (0, 0, [(0, 0, 1)], 1)]).is_interaction()

    def test_shapes(self):
        F = func([(0, 0, [(0, 1, 2)], 1), (1, 0, [(0,), (0, 0)], 2)],
                 p_max=4)
        assert F.shapes() == {(0, 0, (3,)), (1, 0, (2, 1))}

    def test_json_round_trip(self):
        F = func([(0, 0, [(0, 1, 2)], Fraction(-3, 7)), (1, 1, [(0,)], 2)])
        G = NCFunctional.from_json(BASIS, F.to_json())
        assert F == G

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1),
                              st.lists(st.lists(st.integers(0, 3),
                                                min_size=1, max_size=3),
                                       min_size=1, max_size=2),
                              st.integers(-4, 4)),
                    min_size=0, max_size=4))
    @settings(max_examples=80, deadline=None)
    def test_addition_commutes(self, terms):
        F = func(terms)
        G = func(list(reversed(terms)))
        assert F == G


class TestCommFunctional:
    def test_monomials_sorted(self):
        F = CommFunctional(BASIS, 2, 8)
        F.add_term(0, [3, 0], 1)
        G = CommFunctional(BASIS, 2, 8)
        G.add_term(0, [0, 3], 1)
        assert F == G

    def test_odd_square_vanishes(self):
        F = CommFunctional(BASIS, 2, 8)
        F.add_term(0, [1, 1], 1)
        assert F.is_zero()

    def test_odd_swap_sign(self):
        F = CommFunctional(BASIS, 2, 8)
        F.add_term(0, [2, 1], 1)
        G = CommFunctional(BASIS, 2, 8)
        G.add_term(0, [1, 2], -1)
        assert F == G
