import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from arakelov.adelic_curve import LogValue, Place
from arakelov.errors import DimensionMismatch, RankDeficient, Unsupported
from arakelov.norms import (ArchNorm, FiniteNorm, NormFamily, delta_bound_check, determinant_norm,
                            dual_norm, metric_distance, sub_quotient_norm, tensor_eps_pi)

LN2 = math.log(2)


def fam(n, gram=None, **fin):
    arch = ArchNorm.hermitian(gram) if gram is not None else ArchNorm.standard(n)
    return NormFamily(n, arch, {int(p[1:]): FiniteNorm.diagonal(int(p[1:]), w) for p, w in fin.items()})


def test_dual_examples():
    std = NormFamily.standard(2)
    assert dual_norm(std) == std
    d = dual_norm(fam(2, p2=[1, -1]))
    assert d.finite[2].weights == (-1, 1)
    d = dual_norm(fam(2, gram=[[2, 0], [0, Fraction(1, 2)]]))
    assert [list(r) for r in d.arch.gram] == [[Fraction(1, 2), 0], [0, 2]]


def test_dual_norm_by_sampling():
    # ||f||* = sup |f(s)| / ||s|| over a grid of s, gram [[2,0],[0,1/2]]
    G = np.array([[2.0, 0.0], [0.0, 0.5]])
    Gd = np.linalg.inv(G)
    rng = np.random.default_rng(3)
    grid = [np.array(s, float) for s in itertools.product(range(-12, 13), repeat=2) if any(s)]
    for _ in range(5):
        f = rng.normal(size=2)
        sup = max(abs(f @ s) / math.sqrt(s @ G @ s) for s in grid)
        assert sup == pytest.approx(math.sqrt(f @ Gd @ f), rel=2e-2)
        assert sup <= math.sqrt(f @ Gd @ f) + 1e-12


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=4))
def test_bidual(ws):
    n = len(ws)
    xi = NormFamily(n, ArchNorm.hermitian([[int(i == j) * (i + 1) for j in range(n)] for i in range(n)]),
                    {3: FiniteNorm.diagonal(3, ws)})
    assert dual_norm(dual_norm(xi)) == xi


def test_quotient_and_restrict_examples():
    q = sub_quotient_norm(fam(2, p2=[0, 2]), [[1], [0]], "quotient")
    assert q.finite[2].weights == (2,)
    r = sub_quotient_norm(NormFamily.standard(2), [[1], [1]], "restrict")
    assert [list(x) for x in r.arch.gram] == [[2]]
    q = sub_quotient_norm(NormFamily.standard(2), [[1], [0]], "quotient")
    assert [list(x) for x in q.arch.gram] == [[1]]


def test_quotient_weight_by_minimisation():
    # inf over lifts of max(|c|_2 2^0, 2^-2): attained at c = 0
    best = min(max(2.0 ** -v if c else 0.0, 2.0 ** -2) for c in range(-8, 9)
               for v in [0 if c == 0 else (c & -c).bit_length() - 1])
    assert best == 2.0 ** -2


def test_rank_deficient_subspace():
    with pytest.raises(RankDeficient):
        sub_quotient_norm(NormFamily.standard(2), [[1, 2], [1, 2]], "restrict")


@pytest.mark.parametrize("ws", [[0, 1, -2], [3, 0, 0, 1], [1, -1]])
def test_dual_of_restriction_is_quotient_of_dual(ws):
    n = len(ws)
    xi = fam(n, gram=[[int(i == j) * (j + 2) for j in range(n)] for i in range(n)], p2=ws)
    B = [[int(i == 0)] for i in range(n)]
    lhs = dual_norm(sub_quotient_norm(xi, B, "restrict"))
    # the annihilator of span(e1) is spanned by e2..en; its dual is the quotient by e1
    rhs = sub_quotient_norm(dual_norm(xi), [[int(i == j) for j in range(1, n)] for i in range(n)],
                            "restrict")
    q = sub_quotient_norm(dual_norm(xi), B, "quotient")
    assert lhs.finite[2].weights == (-Fraction(ws[0]),)
    for x in itertools.product(range(-3, 4), repeat=n - 1):
        if any(x):
            assert q.finite[2].exponent(list(x)) == rhs.finite[2].exponent(list(x))
    assert [list(r) for r in q.arch.gram] == [list(r) for r in rhs.arch.gram]


@given(st.lists(st.integers(-3, 3), min_size=2, max_size=3), st.data())
def test_strong_triangle_inequality(ws, data):
    n = len(ws)
    N = FiniteNorm(2, [[1 if i == j else (1 if j == i + 1 else 0) for j in range(n)] for i in range(n)], ws)
    vec = st.lists(st.integers(-20, 20), min_size=n, max_size=n).filter(any)
    x, y = data.draw(vec), data.draw(vec)
    s = [a + b for a, b in zip(x, y)]
    if any(s):
        assert N.exponent(s) <= max(N.exponent(x), N.exponent(y))


def test_determinant_examples():
    for n in (1, 2, 3):
        d = determinant_norm(NormFamily.standard(n))
        assert d.dim == 1 and d.finite == {} or all(w == 0 for f in d.finite.values() for w in f.weights)
    d = determinant_norm(fam(2, p2=[1, -1]))
    assert d.finite[2].weights == (0,)


def test_weighted_max_determinant_bracket():
    d = determinant_norm(NormFamily(2, ArchNorm("max", [0, 0]), {}))
    assert d.arch.kind == "bracket"
    # brute force inf ||x|| ||y|| with x ^ y = e1 ^ e2 over a grid of step 1/4
    grid = [Fraction(k, 4) for k in range(-8, 9)]
    best = min(max(abs(a), abs(b)) * max(abs(c), abs(e))
               for a, b, c, e in itertools.product(grid, repeat=4) if a * e - b * c == 1)
    assert best == Fraction(1, 2)
    assert d.arch.lo - 1e-12 <= math.log(best) <= d.arch.hi + 1e-12


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=4))
def test_determinant_of_diagonal_is_product(ws):
    d = determinant_norm(fam(len(ws), p3=ws))
    assert d.finite[3].weights == (sum(ws),)


def test_tensor_examples():
    one = lambda w: NormFamily(1, ArchNorm("sum", [0]), {2: FiniteNorm.diagonal(2, [w])})
    assert tensor_eps_pi(one(1), one(2)).finite[2].weights == (3,)
    a = NormFamily(2, ArchNorm("sum", [0, 0]), {2: FiniteNorm.diagonal(2, [0, 1])})
    t = tensor_eps_pi(a, a)
    assert t.finite[2].weights == (0, 1, 1, 2)
    triv = NormFamily(1, ArchNorm("sum", [0]), {})
    assert tensor_eps_pi(triv, triv).finite == {}


def test_tensor_rank_one_multiplicativity_on_grid():
    a = NormFamily(2, ArchNorm("sum", [0, 0]), {2: FiniteNorm.diagonal(2, [0, 1])})
    t = tensor_eps_pi(a, a).finite[2]
    f = a.finite[2]
    for x in itertools.product(range(-4, 5), repeat=2):
        for y in itertools.product(range(-4, 5), repeat=2):
            if any(x) and any(y):
                xy = [xi * yj for xi in x for yj in y]
                assert t.exponent(xy) == f.exponent(x) + f.exponent(y)


def test_tensor_rejects_general_input():
    g = NormFamily(2, ArchNorm.hermitian([[2, 1], [1, 2]]), {})
    with pytest.raises(Unsupported):
        tensor_eps_pi(g, g)


def test_metric_distance():
    xi = fam(2, p2=[0, 0])
    assert metric_distance(xi, xi, Place.finite(2)).is_exact_zero()
    assert metric_distance(xi, fam(2, p2=[1, -1]), Place.finite(2)).identical(LogValue({2: 1}))
    d = metric_distance(NormFamily.standard(2), fam(2, gram=[[4, 0], [0, 4]]), Place.arch())
    assert float(d) == pytest.approx(LN2, abs=1e-12)
    with pytest.raises(DimensionMismatch):
        metric_distance(NormFamily.standard(2), NormFamily.standard(3), Place.arch())


def test_delta_bounds():
    assert delta_bound_check(NormFamily.standard(1))["Delta"].is_exact_zero()
    assert delta_bound_check(fam(2, p2=[0, 2]))["Delta"].identical(LogValue({2: Fraction(5, 2)}))
    assert delta_bound_check(NormFamily.standard(3))["Delta"].identical(LogValue({3: Fraction(1, 2)}))


def test_json_roundtrip():
    xi = fam(3, gram=[[2, 1, 0], [1, 2, 0], [0, 0, 1]], p5=[1, 0, -1])
    assert NormFamily.from_json(xi.to_json()) == xi


def test_indefinite_gram_rejected():
    with pytest.raises(ValueError):
        ArchNorm.hermitian([[1, 2], [2, 1]])
