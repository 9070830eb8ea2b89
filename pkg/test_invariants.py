import random
from fractions import Fraction
from itertools import product

import pytest

from config import settings
from core.errors import CalibrationError, InvariantError
from core.fields import QQ
from core.invariants import (NAMES, WEIGHTS, Anchor, Erratum, InvariantVector, absolute_invariants, builtin_anchors,
                             calibrate, default_calibration, discriminant_I27, dixmier_ohno, gl3_transform,
                             is_smooth, weighted_equal)
from core.parser import parse_quartic
from core.poly import LinearMap3, MultiPoly, TernaryQuartic, XYZ, random_unimodular
from core.strata import calibration_anchors
from core.strata_data import load_catalog


FERMAT = parse_quartic("X^4+Y^4+Z^4", QQ)
PSI = parse_quartic("X^4 + Y^4 + Z^4 + 3*(X^2*Z^2 + X^2*Y^2 + Y^2*Z^2)", QQ)
GENERIC = parse_quartic("X^4 - Y^4 + 2*Z^4 + X*Y^3 - X^2*Y*Z + 3*Y*Z^3", QQ)

# printed = scale * computed, as settled by the joint fit
PRINTED_ERRATA = {
    ('Z1', 'i1'): Fraction(-1),
    ('Psi', 'i3'): Fraction(-1),
    ('Psi', 'i4'): Fraction(-1),
    ('Psi', 'j1'): Fraction(-1),
    ('Psi', 'j2'): Fraction(-1),
    ('Psi', 'j5'): Fraction(1, 2),
    ('Psi', 'j6'): Fraction(-1),
}


def random_gl3(rng, bound=2) -> LinearMap3:
    while True:
        gamma = LinearMap3.from_rows([[rng.randint(-bound, bound) for _ in range(3)] for _ in range(3)])
        if gamma.det != 0:
            return gamma


def singular_at_origin(rng) -> TernaryQuartic:
    """Random quartic without the z^4, x z^3 and y z^3 terms: singular at (0:0:1)."""
    x, y, z = MultiPoly.gens(XYZ)
    F = MultiPoly.zero(XYZ)
    for a in range(5):
        for b in range(5 - a):
            if 4 - a - b >= 3:
                continue
            F = F + x ** a * y ** b * z ** (4 - a - b) * rng.randint(-3, 3)
    if F.is_zero():
        F = x ** 2 * z ** 2 + y ** 4
    return TernaryQuartic(F)


def test_weights_and_indices():
    v = dixmier_ohno(FERMAT)
    assert v.weights == WEIGHTS
    assert InvariantVector.index('I3') == 4
    assert InvariantVector.index('I27') == 36
    assert v.indices[NAMES.index('J21')] == 28
    with pytest.raises(InvariantError):
        InvariantVector((1, 2, 3), QQ)


def test_fermat_absolute_invariants():
    a = absolute_invariants(dixmier_ohno(FERMAT))
    assert a.i == (0, 0, 0, 0, 0, Fraction(-2 ** 4, 3 ** 18))
    assert all(x == 0 for x in a.j)


def test_psi_reproduces_its_tuples_up_to_errata():
    catalog = load_catalog()
    table = default_calibration()
    a = absolute_invariants(dixmier_ohno(PSI))
    printed = catalog.tuple_values('Psi', 'i') + catalog.tuple_values('Psi', 'j')
    for (name, value), expected in zip(a.as_dict().items(), printed):
        assert value * table.printed_scale('Psi', name) == expected
    assert a.i[0] == Fraction(9, 16)
    assert set(a.as_dict()) == {f"i{k}" for k in range(1, 7)} | {f"j{k}" for k in range(1, 7)}


def test_calibration_against_all_anchors():
    table = calibrate(calibration_anchors())
    assert table.c_sigma == 1
    assert table.c_psi == Fraction(1, 6912)
    assert table.scalar('I3') == 144
    assert table.correction('I3') == 1
    assert table == default_calibration()


def test_joint_fit_records_the_printed_errata():
    table = default_calibration()
    assert {(e.source, e.name): e.scale for e in table.errata} == PRINTED_ERRATA
    assert table.printed_scale('Phi', 'i6') == 1
    assert table.printed_scale('Omega', 'i1') == 1
    z1_sign = next(e for e in table.errata if e.source == 'Z1')
    assert set(z1_sign.fitted_on) == {'Psi', 'Omega'}
    assert "opposite sign" in z1_sign.describe()
    assert "1/2 times" in Erratum('Psi', 'j5', Fraction(1, 2)).describe()


def test_fit_on_pi_agrees_with_default_table():
    anchors = calibration_anchors(ideal_models=('Omega1', 'Pi1'))
    assert calibrate(anchors).scalars == default_calibration().scalars


def test_calibration_rejects_inconsistent_anchor():
    bad = Anchor('bad', FERMAT, i=(1, 0, 0, 0, 0, 0))
    with pytest.raises(CalibrationError):
        calibrate(builtin_anchors(('Psi',)) + [bad])
    with pytest.raises(CalibrationError):
        calibrate([Anchor('empty', FERMAT)])


def test_calibration_refuses_to_break_a_tie():
    psi = builtin_anchors(('Psi',))[0]
    flipped = Anchor('Psi-flipped', PSI, (-psi.i[0],) + psi.i[1:], psi.j)
    with pytest.raises(CalibrationError, match="tie"):
        calibrate([psi, flipped])
    # one source printing two different values for the same curve
    same_source = Anchor('Psi-again', PSI, flipped.i, psi.j, source='Psi')
    with pytest.raises(CalibrationError, match="inconsistently"):
        calibrate([psi, same_source])


def test_unimodular_invariance():
    rng = random.Random(settings.SEED)
    v = dixmier_ohno(GENERIC)
    for _ in range(100):
        gamma = random_unimodular(rng, 2)
        assert dixmier_ohno(GENERIC.transform(gamma)) == v


def test_general_linear_change_scales_by_determinant_power():
    gamma = LinearMap3.from_rows([[2, 0, 0], [1, 1, 0], [0, 1, 1]])
    v = dixmier_ohno(GENERIC)
    moved = dixmier_ohno(GENERIC.transform(gamma))
    assert moved == gl3_transform(v, gamma)
    assert moved['I3'] == 2 ** 4 * v['I3']
    assert moved['I27'] == 2 ** 36 * v['I27']
    assert weighted_equal(v, moved)


def test_general_linear_changes_and_scalings():
    rng = random.Random(settings.SEED)
    v = dixmier_ohno(GENERIC)
    for _ in range(100):
        gamma = random_gl3(rng)
        lam = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))
        moved = dixmier_ohno(GENERIC.transform(gamma).scale(lam))
        assert moved == gl3_transform(v, gamma).scaled(lam)
        assert weighted_equal(v, moved)
    with pytest.raises(InvariantError):
        gl3_transform(v, LinearMap3.from_rows([[1, 1, 0], [1, 1, 0], [0, 0, 1]]))


def test_homogeneity_in_the_coefficients():
    v = dixmier_ohno(GENERIC)
    assert dixmier_ohno(GENERIC.scale(3)) == v.scaled(3)


def test_weighted_equality():
    assert weighted_equal(dixmier_ohno(FERMAT), dixmier_ohno(FERMAT.scale(5)))
    assert not weighted_equal(dixmier_ohno(FERMAT), dixmier_ohno(PSI))
    zero_i3 = InvariantVector((0,) + (1,) * 12, QQ)
    assert not weighted_equal(zero_i3, InvariantVector((1,) * 13, QQ))
    assert weighted_equal(zero_i3, zero_i3.scaled(2))


def test_weighted_equality_is_an_equivalence():
    rng = random.Random(settings.SEED)
    bases = [dixmier_ohno(GENERIC), dixmier_ohno(PSI), dixmier_ohno(FERMAT),
             InvariantVector((0,) + (1,) * 12, QQ), InvariantVector(tuple(range(1, 14)), QQ)]
    sample = []
    for base in bases:
        for _ in range(3):
            sample.append(base.scaled(Fraction(rng.choice([-2, -1, 1, 3]), rng.randint(1, 4))))
    for v in sample:
        assert weighted_equal(v, v)
    for v, w in product(sample, repeat=2):
        assert weighted_equal(v, w) == weighted_equal(w, v)
    for u, v, w in product(sample, repeat=3):
        if weighted_equal(u, v) and weighted_equal(v, w):
            assert weighted_equal(u, w)
    # classes are exactly the bases
    for k, v in enumerate(sample):
        for m, w in enumerate(sample):
            assert weighted_equal(v, w) == (k // 3 == m // 3)


def test_absolutes_need_nonzero_I3():
    with pytest.raises(InvariantError):
        absolute_invariants(InvariantVector((0,) + (1,) * 12, QQ))


def test_discriminant_vanishes_on_singular_curves():
    nodal = parse_quartic("X^2*Z^2 + Y^2*Z^2 + X^4 + Y^4", QQ)
    cone = parse_quartic("X^4 + Y^4", QQ)
    assert dixmier_ohno(nodal)['I27'] == 0
    assert discriminant_I27(cone) == 0
    assert not is_smooth(nodal)
    assert is_smooth(FERMAT)
    assert discriminant_I27(FERMAT) == dixmier_ohno(FERMAT)['I27'] != 0


def test_discriminant_vanishes_on_moved_singular_curves():
    rng = random.Random(settings.SEED)
    for _ in range(20):
        F = singular_at_origin(rng).transform(random_unimodular(rng, 3))
        assert discriminant_I27(F) == 0
        assert not is_smooth(F)


if __name__ == "__main__":
    tests = [v for k, v in list(globals().items()) if k.startswith('test_') and callable(v)]
    for test in tests:
        test()
        print(f"ok  {test.__name__}")
    print(f"\n{len(tests)} invariant tests passed")
