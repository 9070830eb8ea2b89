from fractions import Fraction

import pytest

from core.errors import InvariantError, StrataError
from core.fields import QQ, ExtElement, PrimeField, gaussian_rationals
from core.invariants import (ABSOLUTE_OF, DIXMIER_ABSOLUTES, NAMES, OHNO_ABSOLUTES, InvariantVector,
                             absolute_invariants, default_calibration, dixmier_ohno, weighted_equal)
from core.parser import parse_quartic
from core.strata import (MODEL_LABELS, StratumLabel, builtin_model, classify, descend, reconstruct_z1,
                         reconstruct_z4, z1_closed_forms, z1_member, z1_test, z1_z_from_absolutes, z1_zmap,
                         z4_defining, z4_member, z4_test, z4_z_from_absolutes, z4_zmap, zero_dim_test)
from core.strata_data import load_catalog


GENERIC = parse_quartic("X^4 - Y^4 + 2*Z^4 + X*Y^3 - X^2*Y*Z + 3*Y*Z^3", QQ)


def test_catalog_rows():
    catalog = load_catalog()
    assert StratumLabel.of('Z1') == StratumLabel('Z1', 8, 1)
    assert StratumLabel.of('Omega') == StratumLabel('Omega', 9, 0)
    assert catalog.row('M3').s == 0
    assert set(catalog.closure('Z4')) >= {'Y1', 'Y3', 'Y4', 'M3'}
    assert 'Z4' not in catalog.closure('Z4')
    with pytest.raises(StrataError):
        catalog.row('Z10')


# --- Z1 ---

def test_z1_quotient_map():
    assert z1_zmap(Fraction(2)) == Fraction(18, 5)
    assert z1_zmap(Fraction(1, 2)) == Fraction(18, 5)
    assert z1_zmap(Fraction(3)) == Fraction(121, 30)
    forms = z1_closed_forms(Fraction(18, 5))
    assert forms['i1'] == Fraction(-9, 16)
    i = gaussian_rationals().gen
    with pytest.raises(StrataError):
        z1_zmap(i)
    with pytest.raises(StrataError):
        z1_zmap(Fraction(0))


def test_z1_member_satisfies_closed_forms():
    v = dixmier_ohno(z1_member(Fraction(3)))
    a = absolute_invariants(v)
    # the printed closed form for i1 carries the opposite sign
    assert a.i[0] == -z1_closed_forms(Fraction(121, 30))['i1']
    assert z1_z_from_absolutes(-a.i[0], a.i[1], QQ) == Fraction(121, 30)
    member, z = z1_test(v)
    assert member and z == Fraction(121, 30)


def test_every_z1_member_passes():
    for t in (Fraction(2), Fraction(3), Fraction(1, 2), Fraction(-5, 2), Fraction(7)):
        member, z = z1_test(dixmier_ohno(z1_member(t)))
        assert member and z == z1_zmap(t)


def test_z1_parameter_symmetry():
    K = gaussian_rationals()
    i = K.gen
    for t in (K(3), K(Fraction(-5, 2))):
        u = (1 + i * t) / (t + i)
        assert descend(z1_zmap(u)) == descend(z1_zmap(t))
        v = dixmier_ohno(z1_member(descend(t)))
        lifted = InvariantVector(tuple(K(x) for x in v.values), K)
        assert weighted_equal(dixmier_ohno(z1_member(u)), lifted)


def test_z1_at_two_is_the_psi_point():
    v = dixmier_ohno(z1_member(Fraction(2)))
    assert weighted_equal(v, dixmier_ohno(builtin_model('Psi')))
    assert absolute_invariants(v).i[0] == Fraction(9, 16)


def test_z1_reconstruction_round_trip():
    rec = reconstruct_z1(Fraction(18, 5))
    assert rec.t in (2, Fraction(1, 2))
    assert rec.field == QQ
    assert rec.param_poly.to_univariate()[0] == 2
    assert weighted_equal(dixmier_ohno(rec.model), dixmier_ohno(z1_member(Fraction(2))))
    for t in (Fraction(3), Fraction(-5, 2)):
        z = z1_zmap(t)
        member, found = z1_test(dixmier_ohno(reconstruct_z1(z).model))
        assert member and found == z


def test_generic_curve_is_not_on_z1():
    member, _ = z1_test(dixmier_ohno(GENERIC))
    assert not member


# --- Z4 ---

def test_z4_defining_polynomial():
    assert z4_defining(InvariantVector((1, -1, 1) + (0,) * 10, QQ)) == 0
    assert z4_defining(InvariantVector((1, 0, 0) + (0,) * 10, QQ)) == 515889


def test_z4_quotient_map():
    assert z4_zmap(Fraction(1)) == 1
    assert z4_z_from_absolutes(Fraction(-1), Fraction(1), QQ) == 1


def test_z4_reconstruction_at_one():
    rec = reconstruct_z4(Fraction(1))
    assert rec.t == 1
    assert rec.model.field.generators()['i'] ** 2 == -1


def test_z4_member_round_trip():
    K = gaussian_rationals()
    i = K.gen
    for t in (K(2), 1 + i, 3 * i):
        z = z4_zmap(t)
        result = z4_test(dixmier_ohno(z4_member(t)))
        assert result.member
        assert result.z == z
        assert [d.test for d in result.diagnostics] == ['defining', 'closed_forms', 'oracle']


def test_z4_parameter_symmetry():
    K = gaussian_rationals()
    i = K.gen
    for t in (K(2), 1 + i):
        u = i * (t - 1) / (t + 1)
        assert z4_zmap(u) == z4_zmap(t)
        assert weighted_equal(dixmier_ohno(z4_member(u)), dixmier_ohno(z4_member(t)))
        # order three
        w = i * (u - 1) / (u + 1)
        assert i * (w - 1) / (w + 1) == t


def test_z4_test_rejects_generic_curve():
    result = z4_test(dixmier_ohno(GENERIC))
    assert not result.member
    assert result.diagnostics[0].passed is False
    with pytest.raises(InvariantError):
        z4_test(InvariantVector((0,) * 13, QQ))


# --- Zero-dimensional strata and classification ---

def tuple_vector(label: str) -> InvariantVector:
    """Integral vector with I3 = 1 whose absolute invariants are the printed tuple of `label`."""
    catalog = load_catalog()
    i, j = catalog.tuple_values(label, 'i'), catalog.tuple_values(label, 'j')
    by_name = dict(zip(DIXMIER_ABSOLUTES + OHNO_ABSOLUTES, i + j), I3=Fraction(1))
    return InvariantVector(tuple(by_name[name] for name in NAMES), QQ)


def test_zero_dimensional_models_over_small_fields():
    for label, expected in (('Phi', 'Phi'), ('Psi', 'Psi'), ('Omega1', 'Omega'), ('Omega2', 'Omega')):
        found = zero_dim_test(dixmier_ohno(builtin_model(label)))
        assert found is not None and found.name == expected
    assert zero_dim_test(dixmier_ohno(GENERIC)) is None


def test_zero_dimensional_model_over_a_tower():
    found = zero_dim_test(dixmier_ohno(builtin_model('Pi1')))
    assert found is not None and found.name == 'Pi'


def test_printed_tuples_are_recognised():
    for label in ('Theta', 'Sigma', 'Phi'):
        found = zero_dim_test(tuple_vector(label))
        assert found is not None and found.name == label
    assert zero_dim_test(tuple_vector('Sigma').scaled(3)).name == 'Sigma'


def test_psi_tuple_is_recognised_through_its_errata():
    table = default_calibration()
    v = tuple_vector('Psi')
    corrected = {name: v[name] / table.printed_scale('Psi', ABSOLUTE_OF[name])
                 for name in DIXMIER_ABSOLUTES + OHNO_ABSOLUTES}
    corrected['I3'] = Fraction(1)
    fixed = InvariantVector(tuple(corrected[name] for name in NAMES), QQ)
    assert zero_dim_test(fixed).name == 'Psi'
    assert zero_dim_test(v) is None


def test_sigma_model_is_not_defined_over_its_field_of_moduli():
    # the printed model has an irrational i1 while the printed point is rational
    i1 = absolute_invariants(dixmier_ohno(builtin_model('Sigma'))).i[0]
    assert isinstance(descend(i1), ExtElement)


def test_builtin_models():
    assert builtin_model('Pi') == builtin_model('Pi1')
    assert 'Omega1' in MODEL_LABELS
    with pytest.raises(StrataError):
        builtin_model('Z1')


def test_classify_fermat():
    report = classify(dixmier_ohno(builtin_model('Phi')), hyperflex_count=12)
    assert report.stratum == 'Phi'
    assert (report.s, report.dim) == (12, 0)
    # the Fermat point also satisfies the Z1 closed forms at z = -9/2
    assert report.secondary == ['Z1']
    assert report.z is None
    assert not report.hyperflex_mismatch


def test_classify_z1_member():
    F = z1_member(Fraction(3))
    report = classify(dixmier_ohno(F), hyperflex_count=8)
    assert report.stratum == 'Z1'
    assert report.z == Fraction(121, 30)
    assert report.secondary == []
    assert {'Y1', 'Y2', 'M1', 'M3'} <= set(report.closure)
    assert not report.hyperflex_mismatch
    assert classify(dixmier_ohno(F), hyperflex_count=3).hyperflex_mismatch


def test_classify_psi_point_of_z1():
    report = classify(dixmier_ohno(z1_member(Fraction(2))), hyperflex_count=12)
    assert report.stratum == 'Psi'
    assert 'Z1' in report.secondary
    assert report.z is None
    assert not report.hyperflex_mismatch


def test_classify_generic_curve():
    report = classify(dixmier_ohno(GENERIC), hyperflex_count=0)
    assert report.stratum is None
    assert report.note
    assert 'M3' in report.candidates
    assert {d.label for d in report.diagnostics} >= {'Theta', 'Pi', 'Omega', 'Z1', 'Z4'}


def test_classify_with_vanishing_I3():
    report = classify(InvariantVector((0,) + (1,) * 12, QQ))
    assert report.stratum is None
    assert 'I3' in report.note


def test_classify_needs_characteristic_zero():
    with pytest.raises(StrataError):
        classify(InvariantVector((1,) * 13, PrimeField(101)))


if __name__ == "__main__":
    tests = [v for k, v in list(globals().items()) if k.startswith('test_') and callable(v)]
    for test in tests:
        test()
        print(f"ok  {test.__name__}")
    print(f"\n{len(tests)} strata tests passed")
