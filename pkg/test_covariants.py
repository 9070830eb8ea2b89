import random
from fractions import Fraction

import pytest

from config import settings
from core.covariants import (CHAIN_SIGNATURE, CONTRAVARIANT, COVARIANT, Form, binary_discriminant,
                             binary_quartic_sigma_psi, covariant_chain, d_op, hessian, j_pairings,
                             quartic_form, sigma_psi_contravariants, transvectant)
from core.errors import CovariantError
from core.fields import QQ, PrimeField
from core.parser import parse_quartic
from core.poly import MultiPoly, UVW, XYZ, random_unimodular


FERMAT = parse_quartic("X^4+Y^4+Z^4", QQ)


def test_fermat_hessian():
    x, y, z = MultiPoly.gens(XYZ)
    H = hessian(FERMAT)
    assert H.payload == x ** 2 * y ** 2 * z ** 2 * 1728
    assert (H.space, H.degree, H.order) == (COVARIANT, 3, 6)


def test_fermat_sigma_psi():
    u, v, w = MultiPoly.gens(UVW)
    sigma, psi = sigma_psi_contravariants(FERMAT)
    assert sigma.payload == u ** 4 + v ** 4 + w ** 4
    assert psi.payload == u ** 2 * v ** 2 * w ** 2 * Fraction(1, 6912)
    assert (sigma.space, sigma.degree, sigma.order) == (CONTRAVARIANT, 2, 4)
    assert (psi.space, psi.degree, psi.order) == (CONTRAVARIANT, 3, 6)


def test_d_operation():
    sigma, _ = sigma_psi_contravariants(FERMAT)
    # each u^4 acts as d^4/dx^4 on x^4
    scalar = d_op(sigma, quartic_form(FERMAT))
    assert scalar.order == 0 and scalar.degree == 3
    assert scalar.payload.constant_value() == 72
    with pytest.raises(CovariantError):
        d_op(quartic_form(FERMAT), quartic_form(FERMAT))
    with pytest.raises(CovariantError):
        d_op(hessian(FERMAT), sigma)


def test_chain_signatures():
    F = parse_quartic("X^4 + 2*Y^4 - Z^4 + X*Y*Z^2 + 3*X^2*Y*Z", QQ)
    chain = covariant_chain(F)
    for name, signature in CHAIN_SIGNATURE.items():
        form = chain.forms()[name]
        assert (form.space, form.degree, form.order) == signature


def test_j_pairings_need_dual_quadratics():
    chain = covariant_chain(parse_quartic("X^4 + 2*Y^4 - Z^4 + X*Y*Z^2", QQ))
    pairing = j_pairings(chain.tau, chain.rho)
    assert pairing.J30 == chain.tau.matrix().det()
    with pytest.raises(CovariantError):
        j_pairings(chain.tau, chain.xi)
    with pytest.raises(CovariantError):
        j_pairings(chain.F, chain.rho)


def test_form_rejects_wrong_order():
    x, y, z = MultiPoly.gens(XYZ)
    with pytest.raises(CovariantError):
        Form(x ** 3, COVARIANT, 1, 4)
    with pytest.raises(CovariantError):
        Form(x ** 4, CONTRAVARIANT, 1, 4)


def test_binary_discriminant_detects_repeated_roots():
    for field in (QQ, PrimeField(101)):
        x, y = MultiPoly.gens(('x', 'y'), field)
        assert binary_discriminant((x - y) ** 2 * (x + y) * (x + 2 * y)) == 0
        assert binary_discriminant(x ** 4 + y ** 4) != 0
        assert binary_discriminant(x * y * (x - y) * (x - 3 * y)) != 0


def test_transvectants_agree_with_closed_forms():
    x, y = MultiPoly.gens(('x', 'y'))
    assert binary_quartic_sigma_psi(x ** 2 * y ** 2 * 6) == (3, -1)
    assert binary_quartic_sigma_psi(x ** 2 * y ** 2 * 6, method='transvectant') == (3, -1)
    rng = random.Random(19)
    for _ in range(5):
        F = sum((x ** i * y ** (4 - i) * rng.randint(-5, 5) for i in range(5)), MultiPoly.zero(('x', 'y')))
        if F.is_zero():
            continue
        assert binary_quartic_sigma_psi(F) == binary_quartic_sigma_psi(F, method='transvectant')
    with pytest.raises(CovariantError):
        transvectant(x ** 2, y ** 2, 3)


def test_covariance_under_unimodular_change():
    rng = random.Random(23)
    F = parse_quartic("X^4 - Y^4 + 2*Z^4 + X*Y^3 + 5*X*Y*Z^2", QQ)
    gamma = random_unimodular(rng, 2)
    G = F.transform(gamma)
    assert hessian(G).payload == hessian(F).transformed(gamma).payload
    sigma_F, psi_F = sigma_psi_contravariants(F)
    sigma_G, psi_G = sigma_psi_contravariants(G)
    assert sigma_G.payload == sigma_F.transformed(gamma).payload
    assert psi_G.payload == psi_F.transformed(gamma).payload


def test_chain_covariance_under_several_frames():
    rng = random.Random(settings.SEED)
    F = parse_quartic("X^4 - Y^4 + 2*Z^4 + X*Y^3 + 5*X*Y*Z^2", QQ)
    base = covariant_chain(F).forms()
    for _ in range(3):
        gamma = random_unimodular(rng, 2)
        moved = covariant_chain(F.transform(gamma)).forms()
        for name, form in base.items():
            assert moved[name].payload == form.transformed(gamma).payload, name


def random_linear_form(rng, x, y, bound=5):
    while True:
        a, b = rng.randint(-bound, bound), rng.randint(-bound, bound)
        if a or b:
            return a, b, x * a + y * b


def test_binary_discriminant_on_products_of_lines():
    rng = random.Random(settings.SEED)
    for field, modulus in ((QQ, None), (PrimeField(101), 101)):
        x, y = MultiPoly.gens(('x', 'y'), field)
        for case in range(100):
            lines = [random_linear_form(rng, x, y) for _ in range(3)]
            if case % 2 == 0:
                lines.append(lines[0])
            else:
                lines.append(random_linear_form(rng, x, y))
            product = lines[0][2] * lines[1][2] * lines[2][2] * lines[3][2]
            cross = [a1 * b2 - a2 * b1 for k, (a1, b1, _) in enumerate(lines) for (a2, b2, _) in lines[k + 1:]]
            squarefree = all((c % modulus if modulus else c) != 0 for c in cross)
            assert (binary_discriminant(product) != 0) == squarefree


if __name__ == "__main__":
    tests = [v for k, v in list(globals().items()) if k.startswith('test_') and callable(v)]
    for test in tests:
        test()
        print(f"ok  {test.__name__}")
    print(f"\n{len(tests)} covariant tests passed")
