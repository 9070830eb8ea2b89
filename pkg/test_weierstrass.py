import random
from fractions import Fraction

import pytest

from core.errors import FrameError, NotOnCurveError, SingularCurveError
from core.fields import QQ
from core.parser import parse_field, parse_quartic
from core.poly import LinearMap3, random_unimodular
from core.strata import z1_member, z4_member
from core.weierstrass import (FlexType, flex_resultant, hyperflex_count, hyperflex_form, point_flex_type,
                              tangent_contact_order)


FERMAT = parse_quartic("X^4+Y^4+Z^4", QQ)
PSI = parse_quartic("X^4 + Y^4 + Z^4 + 3*(X^2*Z^2 + X^2*Y^2 + Y^2*Z^2)", QQ)
KLEIN = parse_quartic("X^3*Y + Y^3*Z + Z^3*X", QQ)


def test_fermat_has_twelve_hyperflexes():
    report = hyperflex_form(FERMAT)
    assert report.hyperflex_count == 12
    assert report.R.degree() == 24
    assert report.G.degree() == 12
    assert report.flex_count_distinct == 12
    assert report.divisor_consistent()
    assert report.coordinate_change_used.det == 1
    assert report.frames_tried >= 2


def test_counts_on_special_strata():
    assert hyperflex_count(PSI) == 12
    assert hyperflex_count(z1_member(Fraction(3))) == 8
    # t = 2 lands on the Psi point
    assert hyperflex_count(z1_member(Fraction(2))) == 12
    report = hyperflex_form(z4_member(Fraction(2)))
    assert report.hyperflex_count == 7
    assert report.flex_count_distinct == 17
    assert report.multiplicity_profile == {'deg_R': 24, 'deg_G': 7, 'distinct_flexes': 17, 'hyperflexes': 7}


def test_flex_resultant_needs_an_admissible_frame():
    # the Fermat Hessian 1728 x^2 y^2 z^2 has no z^6 term
    with pytest.raises(FrameError):
        flex_resultant(FERMAT, LinearMap3.identity())
    rng = random.Random(4)
    R = None
    for _ in range(10):
        try:
            R = flex_resultant(KLEIN, random_unimodular(rng, 5))
            break
        except FrameError:
            continue
    assert R is not None
    assert R.variables == ('x', 'y')
    assert R.degree() == 24


def test_klein_quartic_has_no_hyperflex():
    report = hyperflex_form(KLEIN)
    assert report.hyperflex_count == 0
    assert report.flex_count_distinct == 24
    assert report.G.degree() == 0


def test_count_is_stable_under_coordinate_change():
    gamma = random_unimodular(random.Random(31), 2)
    assert hyperflex_count(FERMAT.transform(gamma), random.Random(1)) == 12


def test_singular_curves_are_rejected():
    nodal = parse_quartic("X^2*Z^2 + Y^2*Z^2 + X^4 + Y^4", QQ)
    with pytest.raises(SingularCurveError):
        hyperflex_form(nodal)


def test_point_types_on_z4_model():
    F = z4_member(Fraction(2))
    assert point_flex_type(F, [0, 0, 1]) == FlexType.HYPERFLEX
    assert point_flex_type(F, [1, 1, 1]) == FlexType.HYPERFLEX
    assert tangent_contact_order(F, [0, 0, 1]) == 4


def test_fermat_hyperflex_over_extension():
    L = parse_field("ext(Q; w; w^4 + 1)")
    w = L.gen
    assert point_flex_type(FERMAT, [L.one, w, L.zero]) == FlexType.HYPERFLEX


def test_ordinary_points_and_flexes():
    F = parse_quartic("X^4 + Y^4 - 2*Z^4", QQ)
    assert point_flex_type(F, [1, 1, 1]) == FlexType.ORDINARY
    # tangent Y = 0 at (0:0:1) meets X^3 Z + X^4 to order three
    G = parse_quartic("Y*Z^3 + X^3*Z + X^4 + Y^4", QQ)
    assert tangent_contact_order(G, [0, 0, 1]) == 3
    assert point_flex_type(G, [0, 0, 1]) == FlexType.FLEX


def test_points_off_the_curve():
    with pytest.raises(NotOnCurveError):
        point_flex_type(FERMAT, [1, 0, 0])
    with pytest.raises(NotOnCurveError):
        tangent_contact_order(FERMAT, [0, 0, 0])


if __name__ == "__main__":
    tests = [v for k, v in list(globals().items()) if k.startswith('test_') and callable(v)]
    for test in tests:
        test()
        print(f"ok  {test.__name__}")
    print(f"\n{len(tests)} weierstrass tests passed")
