from fractions import Fraction

import pytest

from blowup.errors import InvariantError
from blowup.params import ParameterCascade


def test_default_chain_is_strict_below_delta():
    p = ParameterCascade.default(Fraction(1, 2), 2)
    assert p.eps2 < p.d3 < p.d2 < p.d1 < p.delta
    assert p.d1 == Fraction(1, 8)


def test_geometric_cascade_satisfies_the_full_chain():
    p = ParameterCascade.geometric(Fraction(1, 2))
    assert p.full_chain
    assert p.d1 == Fraction(1, 16)


def test_desk_defaults_are_off_the_full_chain():
    assert not ParameterCascade.default(Fraction(1, 2)).full_chain


def test_out_of_order_cascade_is_rejected():
    with pytest.raises(InvariantError):
        ParameterCascade.default(Fraction(1, 2), d2=Fraction(1, 4))
    with pytest.raises(InvariantError):
        ParameterCascade.default(Fraction(1, 2), eps=Fraction(1))


def test_round_trip_through_dict():
    p = ParameterCascade.default(Fraction(3, 5), 3, alpha=Fraction(1, 30))
    assert ParameterCascade.from_dict(p.to_dict()) == p


def test_floats_are_taken_exactly():
    p = ParameterCascade.default(0.5)
    assert p.delta == Fraction(1, 2)
