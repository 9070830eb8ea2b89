import random
from fractions import Fraction

import pytest

from config import settings
from core.errors import PolynomialError
from core.fields import QQ, PrimeField
from core.poly import (LinearMap3, MultiPoly, TernaryQuartic, XYZ, binary_root_count, evaluate, gcd_binary_forms,
                       interpolate, macaulay_resultant, random_unimodular, resultant_in_var, squarefree_part,
                       substitute_linear)


def random_quartic(rng, field=QQ, bound=4):
    x, y, z = MultiPoly.gens(XYZ, field)
    F = MultiPoly.zero(XYZ, field)
    for a in range(5):
        for b in range(5 - a):
            F = F + x ** a * y ** b * z ** (4 - a - b) * rng.randint(-bound, bound)
    if F.is_zero():
        F = x ** 4
    return TernaryQuartic(F)


def test_arithmetic_and_exact_division():
    x, y, z = MultiPoly.gens(XYZ)
    assert (x + y) ** 2 == x ** 2 + 2 * x * y + y ** 2
    assert ((x + y) * (x - y)).exact_div(x - y) == x + y
    with pytest.raises(PolynomialError):
        (x ** 2 + y).exact_div(x - z)
    assert (x * 3 - x * 3).is_zero()


def test_euler_identity():
    rng = random.Random(3)
    for _ in range(5):
        F = random_quartic(rng).poly
        x, y, z = MultiPoly.gens(XYZ)
        assert x * F.derive(0) + y * F.derive(1) + z * F.derive(2) == F * 4


def test_transform_composes():
    rng = random.Random(5)
    F = random_quartic(rng)
    A = random_unimodular(rng, 3)
    B = LinearMap3.from_rows([[1, 2, 0], [0, 1, Fraction(1, 2)], [3, 0, 1]])
    assert F.transform(A).transform(B) == F.transform(A @ B)
    assert F.transform(A).transform(A.inverse()) == F


def test_evaluate_and_linear_substitution():
    x, y, z = MultiPoly.gens(XYZ)
    F = x ** 4 + y ** 4 + z ** 4
    assert evaluate(F, [1, 2, 3]) == 98
    assert evaluate(F, [Fraction(1, 2), 0, 1]) == Fraction(17, 16)
    # x -> x + y
    G = substitute_linear(F, LinearMap3.from_rows([[1, 1, 0], [0, 1, 0], [0, 0, 1]]))
    assert G == (x + y) ** 4 + y ** 4 + z ** 4
    assert evaluate(G, [1, -1, 0]) == 1
    with pytest.raises(PolynomialError):
        evaluate(F, [1, 2])
    with pytest.raises(PolynomialError):
        substitute_linear(F, LinearMap3.from_rows([[1, 1, 0], [1, 1, 0], [0, 0, 1]]))


def test_random_unimodular_has_determinant_one():
    rng = random.Random(7)
    for _ in range(20):
        gamma = random_unimodular(rng, 5)
        assert gamma.det == 1
        assert all(-5 <= v <= 5 for row in gamma.rows for v in row)


def test_resultant_of_lines():
    x, y, z = MultiPoly.gens(XYZ)
    for method in ('bareiss', 'interpolate'):
        assert resultant_in_var(z - x, z - y, 2, method=method) == x - y


def test_resultant_methods_agree():
    rng = random.Random(13)
    x, y, z = MultiPoly.gens(XYZ)
    conic = z ** 2 + x * y * rng.randint(1, 5) - y ** 2 + x * z
    cubic = z ** 3 * 2 + x ** 2 * y - y ** 2 * z * rng.randint(1, 5) + x ** 3
    slow = resultant_in_var(conic, cubic, 2)
    fast = resultant_in_var(conic, cubic, 2, method='interpolate')
    assert slow == fast
    assert slow.degree() == 6


def test_macaulay_linear_forms_is_determinant():
    x, y, z = MultiPoly.gens(XYZ)
    assert macaulay_resultant([x + 2 * y, y + 3 * z, z + x]) == 7
    assert macaulay_resultant([x, y, x + y]) == 0


def test_macaulay_monomials_normalized():
    x, y, z = MultiPoly.gens(XYZ)
    assert macaulay_resultant([x ** 2, y ** 2, z ** 2]) == 1
    assert macaulay_resultant([x ** 3, y ** 3, z ** 3]) == 1


def test_macaulay_homogeneity():
    rng = random.Random(17)
    x, y, z = MultiPoly.gens(XYZ)
    monomials = [x ** 2, y ** 2, z ** 2, x * y, x * z, y * z]
    checked = 0
    while checked < 3:
        forms = [sum((m * rng.randint(-3, 3) for m in monomials), MultiPoly.zero(XYZ)) for _ in range(3)]
        if any(f.is_zero() for f in forms):
            continue
        try:
            res = macaulay_resultant(forms)
            scaled = macaulay_resultant([forms[0] * 2, forms[1], forms[2]])
        except PolynomialError:
            continue
        assert scaled == res * 2 ** 4
        checked += 1


def test_binary_forms():
    x, y = MultiPoly.gens(('x', 'y'))
    P = (x - y) ** 2 * (x + 2 * y)
    assert squarefree_part(P) == (x - y) * (x + 2 * y)
    assert gcd_binary_forms([P, P.derive(0), P.derive(1)]) == x - y
    assert binary_root_count(P) == 2
    assert binary_root_count(x * y ** 2) == 2
    assert binary_root_count(x ** 4) == 1


def test_interpolation():
    xs = [QQ(0), QQ(1), QQ(2)]
    ys = [QQ(1), QQ(3), QQ(7)]
    assert interpolate(xs, ys, QQ) == [1, 1, 1]


def test_prime_field_polynomials():
    F7 = PrimeField(7)
    x, y, z = MultiPoly.gens(XYZ, F7)
    assert (x + y) ** 7 == x ** 7 + y ** 7
    assert TernaryQuartic(x ** 4 + y ** 4 + z ** 4).field == F7


def test_ternary_quartic_rejects_bad_input():
    x, y, z = MultiPoly.gens(XYZ)
    with pytest.raises(PolynomialError):
        TernaryQuartic(x ** 3 + y ** 4)
    with pytest.raises(PolynomialError):
        TernaryQuartic(MultiPoly.zero(XYZ))
    assert TernaryQuartic(x ** 3 * y).coefficient(3, 1, 0) == 1


def random_sparse(rng, terms=5, degree=6):
    x, y, z = MultiPoly.gens(XYZ)
    P = MultiPoly.zero(XYZ)
    for _ in range(rng.randint(1, terms)):
        a, b, c = (rng.randint(0, degree) for _ in range(3))
        P = P + x ** a * y ** b * z ** c * Fraction(rng.randint(-9, 9), rng.randint(1, 4))
    return P


def test_partial_derivatives_commute():
    rng = random.Random(settings.SEED)
    for _ in range(200):
        P = random_sparse(rng)
        for i, j in ((0, 1), (0, 2), (1, 2)):
            assert P.derive(i).derive(j) == P.derive(j).derive(i)


def test_resultant_is_multiplicative():
    rng = random.Random(settings.SEED)
    x, y, z = MultiPoly.gens(XYZ)

    def monic_in_z(degree):
        return z ** degree + sum((z ** k * (x * rng.randint(-3, 3) + y * rng.randint(-3, 3))
                                  for k in range(degree)), MultiPoly.zero(XYZ))

    for _ in range(5):
        P, Q, S = monic_in_z(1), monic_in_z(2), monic_in_z(2)
        assert resultant_in_var(P * Q, S, 2) == resultant_in_var(P, S, 2) * resultant_in_var(Q, S, 2)


if __name__ == "__main__":
    tests = [v for k, v in list(globals().items()) if k.startswith('test_') and callable(v)]
    for test in tests:
        test()
        print(f"ok  {test.__name__}")
    print(f"\n{len(tests)} polynomial tests passed")
