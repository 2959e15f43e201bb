import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from arakelov import linalg as la
from arakelov.adelic_curve import LogValue, PlaceFunction, lv_sum
from arakelov.bundles import (AdelicBundle, arakelov_degree, degree_of_vector, hn_filtration,
                              positive_degree_bracket, quotient_bundle, slope_sandwich,
                              sub_bundle, subspace_degree, successive_minima, twist_by_phi)
from arakelov.errors import CapExceeded, Unsupported, ZeroVector
from arakelov.norms import ArchNorm, NormFamily, delta_bound_check
from conftest import build_bundle
from oracles import hn_matches, oracle_degree, random_bundles

LN2 = math.log(2)


def test_degree_of_vector():
    E = AdelicBundle.standard(2)
    assert degree_of_vector(E, [1, 0]).is_exact_zero()
    assert degree_of_vector(AdelicBundle.diagonal({2: [1]}), [1]).identical(LogValue({2: 1}))
    # ||e1+e2||_2 = 2, ||e1+e2||_inf = sqrt 2
    E = AdelicBundle.diagonal({2: [1, -1]})
    assert degree_of_vector(E, [1, 1]).identical(LogValue({2: Fraction(-3, 2)}))
    with pytest.raises(ZeroVector):
        degree_of_vector(E, [0, 0])


def test_arakelov_degree_examples():
    for n in (1, 3, 5):
        assert arakelov_degree(AdelicBundle.standard(n)).is_exact_zero()
    assert arakelov_degree(AdelicBundle.diagonal({2: [0, 2]})).identical(LogValue({2: 2}))
    assert arakelov_degree(AdelicBundle.diagonal(gram_diag=[4, 1])).identical(LogValue({2: -1}))


def test_degree_matches_oracle():
    for G, fin in random_bundles(30, seed=7):
        E = build_bundle(G, fin)
        n = len(G)
        assert float(arakelov_degree(E)) == pytest.approx(
            oracle_degree(la.identity(n), G, fin), abs=1e-9)


def test_hn_examples():
    hn = hn_filtration(AdelicBundle.standard(3))
    assert hn.slopes == [0, 0, 0] and len(hn.breakpoints) == 1 and hn.breakpoints[0] == 0
    hn = hn_filtration(AdelicBundle.diagonal({2: [0, 2]}))
    assert hn.slopes[0].identical(LogValue({2: 2})) and hn.slopes[1].is_exact_zero()
    assert hn.step(LogValue({2: 1})) == [[0], [1]]
    hn = hn_filtration(AdelicBundle.diagonal(gram_diag=[Fraction(1, 4), 4]))
    assert hn.slopes[0].identical(LogValue({2: 1})) and hn.slopes[1].identical(LogValue({2: -1}))
    assert hn.subspaces[0] == [[1], [0]]


def test_hn_general_path_on_diagonal_input():
    E = AdelicBundle.diagonal({2: [0, 2], 3: [1, 0]}, gram_diag=[1, 9])
    a = hn_filtration(E)
    b = hn_filtration(E, force_general=True)
    assert [float(s) for s in a.slopes] == pytest.approx([float(s) for s in b.slopes], abs=1e-12)


def test_hn_oracle_sample():
    for G, fin in random_bundles(40, seed=11):
        hn = hn_filtration(build_bundle(G, fin))
        assert hn_matches(G, fin, [float(s) for s in hn.slopes], hn.subspaces)


def test_hn_cap():
    G = [[2 if i == j else 1 for j in range(5)] for i in range(5)]
    E = build_bundle(G, {})
    with pytest.raises(Unsupported):
        hn_filtration(E)
    assert len(hn_filtration(E, heuristic=True).slopes) == 5


def test_hn_rejects_max_norm():
    E = AdelicBundle(2, NormFamily(2, ArchNorm("max", [0, 0]), {}))
    with pytest.raises(Unsupported):
        hn_filtration(E)


def test_positive_degree_bracket():
    lo, hi = positive_degree_bracket(AdelicBundle.standard(2))
    assert lo.is_exact_zero() and hi.is_exact_zero()
    for w in ([0, 2], [-2, 2]):
        lo, hi = positive_degree_bracket(AdelicBundle.diagonal({2: w}))
        assert lo.identical(LogValue({2: 2})) and hi.identical(LogValue({2: 2}))


def test_positive_degree_equals_degree_when_semistable_nonnegative():
    E = AdelicBundle.diagonal({2: [1, 1], 3: [0, 1]})
    lo, hi = positive_degree_bracket(E)
    assert lo.identical(arakelov_degree(E))


def test_minima_examples():
    m = successive_minima(AdelicBundle.standard(2))
    assert all(v.is_exact_zero() for v in m)
    m = successive_minima(AdelicBundle.diagonal({2: [0, 2]}))
    assert m[0].identical(LogValue({2: 2})) and m[1].is_exact_zero()
    assert m.vectors[0] == [0, 1]
    m = successive_minima(AdelicBundle.diagonal(gram_diag=[Fraction(1, 4), 4]), force_general=True)
    assert m[0].identical(LogValue({2: 1})) and m[1].identical(LogValue({2: -1}))


def test_minima_below_slopes():
    for G, fin in random_bundles(25, seed=5):
        E = build_bundle(G, fin)
        m = successive_minima(E, check=False)
        hn = hn_filtration(E)
        assert all(float(a) <= float(b) + 1e-9 for a, b in zip(m, hn.slopes))


def test_minima_far_lift():
    # the best second vector sits far out along the first one: its class has
    # projected norm^2 ~ 1e7 against a lift distance ~ 0.08
    G = [[13, -4, -2, 6], [-4, 22, -3, 6], [-2, -3, 18, 12], [6, 6, 12, 27]]
    E = build_bundle(G, {2: [2, 1, 0, -1], 3: [3, -3, -3, -1]})
    m = successive_minima(E, force_general=True)
    expected = [3.3996565483934513, -3.385571113690257, -4.063764767465741, -4.30839048285381]
    assert [float(v) for v in m] == pytest.approx(expected, abs=1e-12)


def test_minima_wide_spread_diagonal():
    E = build_bundle([[1, 0, 0, 0], [0, 5, 0, 0], [0, 0, 2, 0], [0, 0, 0, 3]],
                     {2: [3, -3, 3, -3], 3: [3, -3, -3, 3]})
    m = successive_minima(E, force_general=True, check=False)
    assert all(a.identical(b) for a, b in zip(m, hn_filtration(E).slopes))


def test_minima_cap():
    E = build_bundle([[2 if i == j else 1 for j in range(7)] for i in range(7)], {})
    with pytest.raises(CapExceeded):
        successive_minima(E)


def test_twist_examples():
    E = AdelicBundle.diagonal({2: [0, 2]}, gram_diag=[2, 3])
    assert twist_by_phi(E, PlaceFunction()) == E
    for phi, shift in [(PlaceFunction.constant_arch(Fraction(5, 2)), Fraction(5, 2)),
                       (PlaceFunction({2: 1}), 1)]:
        a, b = hn_filtration(E), hn_filtration(twist_by_phi(E, phi))
        assert all(y.identical(x + LogValue.rational(shift)) for x, y in zip(a.slopes, b.slopes))
        assert a.subspaces == b.subspaces


def test_twist_keeps_general_filtration():
    G, fin = random_bundles(1, seed=99)[0]
    E = build_bundle(G, fin)
    phi = PlaceFunction({3: Fraction(1, 3)}, -1)
    a, b = hn_filtration(E), hn_filtration(twist_by_phi(E, phi))
    assert [la.rank(B) for B in a.subspaces] == [la.rank(B) for B in b.subspaces]
    assert all(abs(float(y) - float(x) + 2 / 3) < 1e-9 for x, y in zip(a.slopes, b.slopes))


def test_slope_sandwich_sample():
    for G, fin in random_bundles(30, seed=3):
        r = slope_sandwich(build_bundle(G, fin))
        assert r["lower_ok"] and r["upper_ok"]


def test_exact_sequence_on_random_flags():
    rng = random.Random(8)
    for G, fin in random_bundles(20, seed=13):
        n = len(G)
        if n < 2:
            continue
        E = build_bundle(G, fin)
        k = rng.randint(1, n - 1)
        while True:
            B = [[rng.randint(-2, 2) for _ in range(k)] for _ in range(n)]
            if la.rank(B) == k:
                break
        dF = subspace_degree(E, B)
        assert float(arakelov_degree(sub_bundle(E, B))) == pytest.approx(float(dF), abs=1e-9)
        dG = arakelov_degree(quotient_bundle(E, B))
        total = arakelov_degree(E)
        Delta = delta_bound_check(E.family)["Delta"]
        assert float(dF + dG) <= float(total) + 1e-9
        assert float(total) <= float(dF + dG + Delta) + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=2, max_size=3), st.integers(-3, 3))
def test_unimodular_change_outside_support(ws, c):
    # x -> x + c e1 on the second coordinate keeps the lattice at 5 and the slopes
    E = AdelicBundle.diagonal({5: ws})
    n = len(ws)
    U = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    U[0][1] = Fraction(c)
    G = la.matmul(la.transpose(U), U)
    F = AdelicBundle(n, NormFamily(n, ArchNorm.hermitian(G), {}))
    a = hn_filtration(E, force_general=True)
    b = hn_filtration(AdelicBundle(n, NormFamily(n, ArchNorm.standard(n), E.family.finite)))
    assert lv_sum(a.slopes).identical(lv_sum(b.slopes))
    assert float(lv_sum(hn_filtration(F).slopes)) == pytest.approx(0.0, abs=1e-12)
