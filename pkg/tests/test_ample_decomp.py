import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from arakelov.ample_decomp import ample_test, decompose_ample
from arakelov.divisor_series import RDivisorP1
from arakelov.errors import NonIntegral, NonPositiveDegree

POINTS = ["inf", "t", "t-1", "t+1", "t-2", "t^2+1", "t^2-2", "t^3-3"]


def test_ample_test_examples():
    assert ample_test(RDivisorP1.inf(1))
    assert not ample_test(RDivisorP1.of({"t": 1, "inf": -1}))
    assert not ample_test(RDivisorP1.of({"t-1": 2, "inf": -3}))
    with pytest.raises(NonIntegral):
        ample_test(RDivisorP1.inf(F(1, 2)))


def test_effective_base_case():
    D = RDivisorP1.of({"t": 3})
    dec = decompose_ample(D)
    assert dec.parts == ((F(3), RDivisorP1.of({"t": 1})),)


def test_spec_example_two_points():
    D = RDivisorP1.of({"t": 3, "t-1": -1})
    dec = decompose_ample(D)
    assert dec.verify(D)["pass"]
    assert dec.parts == ((F(1), RDivisorP1.of({"t": 1})), (F(1), RDivisorP1.of({"t": 2, "t-1": -1})))


def test_three_step_example():
    D = RDivisorP1.of({"t": F(5, 2), "t-1": F(-1, 3), "t+1": F(-1, 3)})
    dec = decompose_ample(D)
    r = dec.verify(D)
    assert r["pass"] and r["parts"] == 3


def test_non_toric_points():
    D = RDivisorP1.of({"t^2+1": 1, "inf": -1})
    assert decompose_ample(D).verify(D)["pass"]


def test_non_positive_degree():
    with pytest.raises(NonPositiveDegree):
        decompose_ample(RDivisorP1.of({"t": 1, "inf": -1}))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(POINTS), st.fractions(-3, 4, max_denominator=6)),
                min_size=1, max_size=5, unique_by=lambda pc: pc[0]))
def test_reconstruction_property(terms):
    D = RDivisorP1.of(dict(terms))
    if D.degree() <= 0:
        with pytest.raises(NonPositiveDegree):
            decompose_ample(D)
        return
    dec = decompose_ample(D)
    r = dec.verify(D)
    assert r["pass"], r
    assert len(dec.parts) <= 2 ** len(D.terms)
