import random
from fractions import Fraction

import pytest

from ncbv.tensor import GradedBasis, NCFunctional
from ncbv.model import FreeBVModel
from ncbv.cli import reference_model, seeded_interaction, degree_zero_words


@pytest.fixture(scope="session")
def m4():
    return reference_model(4)


@pytest.fixture(scope="session")
def m2():
    return reference_model(2)


@pytest.fixture(scope="session")
def words4(m4):
    """Degree zero words on the dim-4 model by length."""
    return {L: degree_zero_words(m4, L, 2, 8) for L in (1, 2, 3, 4)}


def single_word(m, w, coeff=1, p_max=2, l_max=8):
    F = NCFunctional(m.basis, p_max, l_max)
    F.add_term(0, 0, [w], coeff)
    return F
