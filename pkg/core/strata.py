import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import FieldError, InvariantError, StrataError
from core.fields import ExtElement, Field, FieldDescriptor, QQ, make_field, upoly_divmod, upoly_trim
from core.invariants import (DIXMIER_ABSOLUTES, Anchor, CalibrationTable, InvariantVector, absolute_invariants,
                             default_calibration, dixmier_ohno, weighted_equal)
from core.poly import MultiPoly, TernaryQuartic
from core.strata_data import I_VARS, load_catalog

logger = logging.getLogger(__name__)

ZERO_DIMENSIONAL = ('Theta', 'Pi', 'Sigma', 'Omega', 'Phi', 'Psi')
TUPLE_STRATA = ('Theta', 'Sigma', 'Phi', 'Psi')
IDEAL_STRATA = ('Pi', 'Omega')
MODEL_LABELS = ('Theta', 'Pi1', 'Pi2', 'Sigma', 'Omega1', 'Omega2', 'Phi', 'Psi')
Z1_CLOSED = ('i1', 'i2', 'i3', 'i4', 'i5', 'i6', 'j1', 'j2', 'j3', 'j4', 'j5', 'j6')

# rational-root search over Q or Q(i) from floating point roots
_DENOMINATOR_BOUND = 10 ** 6
_IMAG_TOLERANCE = 1e-9


@dataclass(frozen=True)
class StratumLabel:
    name: str
    s: int
    dim: int

    @staticmethod
    def of(name: str) -> "StratumLabel":
        row = load_catalog().row(name)
        return StratumLabel(name, row.s, row.dim)


@dataclass
class Diagnostic:
    """Outcome of one printed test; passed is None when it could not be decided."""
    label: str
    test: str
    passed: Optional[bool]
    residuals: Dict[str, object] = dc_field(default_factory=dict)
    z: object = None
    note: str = ''


@dataclass
class MembershipResult:
    member: bool
    z: object = None
    diagnostics: List[Diagnostic] = dc_field(default_factory=list)
    indeterminate: bool = False

    def __iter__(self):
        return iter((self.member, self.z))


@dataclass
class StratumReport:
    stratum: Optional[str]
    s: Optional[int] = None
    dim: Optional[int] = None
    z: object = None
    secondary: List[str] = dc_field(default_factory=list)
    closure: List[str] = dc_field(default_factory=list)
    diagnostics: List[Diagnostic] = dc_field(default_factory=list)
    hyperflex_count: Optional[int] = None
    hyperflex_mismatch: bool = False
    candidates: List[str] = dc_field(default_factory=list)
    note: str = ''


@dataclass
class Reconstruction:
    """A representative curve of a one-dimensional stratum at a given z."""
    stratum: str
    z: object
    param_poly: MultiPoly
    template: MultiPoly
    t: object
    field: Field
    model: TernaryQuartic


# ==============================================================================
# Field helpers
# ==============================================================================

def _field_of(value, default: Field = QQ) -> Field:
    return getattr(value, 'field', None) or default


def descend(value):
    """Strips constant extension layers: 3 in Q(i) comes back as Fraction(3)."""
    while isinstance(value, ExtElement) and value.is_constant():
        value = value.coeffs[0]
    return value


def with_i(field: Field) -> Field:
    """field itself when it already has i with i^2 = -1, else field(i)."""
    gens = field.generators()
    if 'i' in gens and gens['i'] ** 2 == -1:
        return field
    return make_field(FieldDescriptor.extension(field.descriptor, 'i', (1, 0, 1), relation="i^2 = -1"))


def _lift(v: InvariantVector, field: Field) -> InvariantVector:
    if v.field == field:
        return v
    return InvariantVector(tuple(field(x) for x in v.values), field)


def _evaluate_closed(label: str, name: str, point: Sequence, field: Field):
    """Printed closed form at a point; None when its denominator vanishes there."""
    num, den = load_catalog().closed(label, name, field)
    d = den.evaluate(point)
    if d == 0:
        return None
    return num.evaluate(point) / d


def _specialize(poly: MultiPoly, z, field: Field) -> list:
    """Coefficients in T (constant first) of a polynomial in (T, z) at the given z."""
    T = MultiPoly.variable(0, ('T',), field)
    return upoly_trim(poly.substitute([T, MultiPoly.constant(z, ('T',), field)]).to_univariate())


def _uvalue(coeffs, x):
    acc = x * 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _rationalize(r: complex, field: Field) -> List[object]:
    re_part = Fraction(r.real).limit_denominator(_DENOMINATOR_BOUND)
    im_part = Fraction(r.imag).limit_denominator(_DENOMINATOR_BOUND)
    candidates = []
    if abs(r.imag) < _IMAG_TOLERANCE:
        candidates.append(field(re_part))
    gens = field.generators()
    if 'i' in gens:
        candidates.append(field(re_part) + field(im_part) * gens['i'])
    return candidates


def _roots_in_field(coeffs, field: Field) -> List[object]:
    """Roots of a univariate polynomial lying in Q or Q(i) inside `field`, found numerically and verified exactly."""
    try:
        approx = [complex(field.approx(c)) for c in coeffs]
    except (NotImplementedError, FieldError):
        return []
    found = []
    for r in np.roots(approx[::-1]):
        for cand in _rationalize(complex(r), field):
            if _uvalue(coeffs, cand) == 0 and cand not in found:
                found.append(cand)
    return found


def _quadratic_factor(coeffs, field: Field) -> Optional[list]:
    """A monic quadratic factor over Q or Q(i) assembled from pairs of numeric roots."""
    try:
        approx = [complex(field.approx(c)) for c in coeffs]
    except (NotImplementedError, FieldError):
        return None
    roots = np.roots(approx[::-1])
    for a in range(len(roots)):
        for b in range(a + 1, len(roots)):
            s, p = complex(roots[a] + roots[b]), complex(roots[a] * roots[b])
            for cs in _rationalize(s, field):
                for cp in _rationalize(p, field):
                    quad = [cp, -cs, field.one]
                    _, rem = upoly_divmod(list(coeffs), quad, field.zero)
                    if not rem:
                        return quad
    return None


def _adjoin_root(coeffs, field: Field, name: str = 't') -> Tuple[object, Field]:
    """Generator of field[t]/(m) for an irreducible factor m of the polynomial."""
    minpoly = list(coeffs)
    if len(minpoly) - 1 >= 4:
        quad = _quadratic_factor(minpoly, field)
        if quad is not None:
            minpoly = quad
    if name in field.generators():
        name = name + '_'
    relation = ' + '.join(f"({field.format(c)})*{name}^{k}" for k, c in enumerate(minpoly) if c != 0)
    extension = make_field(FieldDescriptor.extension(field.descriptor, name, tuple(minpoly), relation=relation))
    if not getattr(extension, 'verified', False):
        logger.warning(f"Adjoining a root of {relation} over {field} without an irreducibility certificate")
    return extension.gen, extension


def _instantiate(label: str, t, field: Field) -> TernaryQuartic:
    catalog = load_catalog()
    template = catalog.template(label).with_field(field)
    x, y, z = MultiPoly.gens(('x', 'y', 'z'), field)
    return TernaryQuartic(template.substitute([x, y, z, MultiPoly.constant(t, ('x', 'y', 'z'), field)]))


# ==============================================================================
# Stratum Z4
# ==============================================================================

def z4_zmap(t):
    """z = (-(i+1)t^3 + 3t^2 - i) / (t^2 + (1-i)t - i), computed over a field containing i."""
    field = with_i(_field_of(t))
    value = _evaluate_closed('Z4', 'zmap', [field(t)], field)
    if value is None:
        raise StrataError("the Z4 quotient map has a pole at this parameter")
    return descend(value) if _field_of(t) != field else value


def z4_defining(v: InvariantVector):
    num, _ = load_catalog().closed('Z4', 'defining', v.field)
    return num.evaluate([v['I3'], v['I6'], v['I9']])


def z4_z_from_absolutes(i1, i2, field: Field):
    return _evaluate_closed('Z4', 'z', [i1, i2], field)


def reconstruct_z4(z) -> Reconstruction:
    """
    Model of Z4 at z: a root t of the cubic factor N(t) - z D(t) of the
    degree-six parameter polynomial over a field containing i, with
    t(t + i) != 0, substituted into the model template.
    """
    catalog = load_catalog()
    base = _field_of(z)
    param = _specialize(catalog.param('Z4', base), base(z), base)

    field = with_i(base)
    zv = field(z)
    num, den = catalog.closed('Z4', 'zmap', field)
    cubic = upoly_trim([a - zv * b for a, b in zip(_coeffs_t(num, 3, field), _coeffs_t(den, 3, field))])

    def admissible(t):
        return t * (t + field.generators()['i']) != 0

    roots = [t for t in _roots_in_field(cubic, field) if admissible(t)]
    if roots:
        t, target = roots[0], field
    else:
        if all(c == 0 for c in cubic[1:]):
            raise StrataError(f"degenerate Z4 parameter polynomial at z = {base.format(z)}")
        linear_only = _roots_in_field(cubic, field)
        if len(linear_only) == len(cubic) - 1:
            raise StrataError(f"every root of the Z4 parameter polynomial at z = {base.format(z)} is degenerate")
        reduced = cubic
        for r in linear_only:
            reduced, _ = upoly_divmod(reduced, [-r, field.one], field.zero)
        t, target = _adjoin_root(reduced, field)
    model = _instantiate('Z4', t, target)
    logger.info(f"Reconstructed Z4 model at z = {base.format(z)} over {target}")
    return Reconstruction('Z4', z, MultiPoly.from_univariate(param, 'T', base), catalog.template('Z4'),
                          t, target, model)


def _coeffs_t(poly: MultiPoly, length: int, field: Field) -> list:
    coeffs = poly.to_univariate()
    return list(coeffs) + [field.zero] * (length + 1 - len(coeffs))


def z4_test(v: InvariantVector, full: bool = True) -> MembershipResult:
    if v['I3'] == 0:
        raise InvariantError("the Z4 test needs I3 != 0")
    field = v.field
    absolutes = absolute_invariants(v)
    i1, i2 = absolutes.i[0], absolutes.i[1]
    defining = z4_defining(v)
    diagnostics = [Diagnostic('Z4', 'defining', defining == 0, {'defining': defining})]
    if defining != 0:
        return MembershipResult(False, None, diagnostics)

    z = z4_z_from_absolutes(i1, i2, field)
    if z is None:
        diagnostics.append(Diagnostic('Z4', 'z', None, note="denominator of the z expression vanishes"))
        return MembershipResult(False, None, diagnostics, indeterminate=True)

    residuals = {}
    for name, actual in (('i1', i1), ('i2', i2)):
        expected = _evaluate_closed('Z4', name, [z], field)
        residuals[name] = None if expected is None else actual - expected
    closed_ok = all(r is not None and r == 0 for r in residuals.values())
    diagnostics.append(Diagnostic('Z4', 'closed_forms', closed_ok, residuals, z))
    if not closed_ok:
        return MembershipResult(False, z, diagnostics)
    if not full:
        return MembershipResult(True, z, diagnostics)

    try:
        model = reconstruct_z4(z)
    except StrataError as e:
        diagnostics.append(Diagnostic('Z4', 'oracle', None, z=z, note=str(e)))
        return MembershipResult(False, z, diagnostics, indeterminate=True)
    oracle = dixmier_ohno(model.model)
    same = weighted_equal(_lift(v, model.field), oracle)
    diagnostics.append(Diagnostic('Z4', 'oracle', same, z=z, note=f"model over {model.field}"))
    return MembershipResult(same, z, diagnostics)


# ==============================================================================
# Stratum Z1
# ==============================================================================

def z1_zmap(t):
    """z = t + 1/t + u + 1/u - 1/2 with u = (1 + it)/(t + i)."""
    source = _field_of(t)
    field = with_i(source)
    t = field(t)
    i = field.generators()['i']
    if t == 0 or t + i == 0:
        raise StrataError("the Z1 quotient map has a pole at this parameter")
    u = (1 + i * t) / (t + i)
    if u == 0:
        raise StrataError("the Z1 quotient map has a pole at this parameter")
    value = t + 1 / t + u + 1 / u - field(Fraction(1, 2))
    return descend(value) if source != field else value


def z1_z_from_absolutes(i1, i2, field: Field):
    return _evaluate_closed('Z1', 'z', [i1, i2], field)


def z1_closed_forms(z, field: Optional[Field] = None) -> Dict[str, object]:
    """The twelve printed absolute invariants at z (None where a denominator vanishes)."""
    field = field or _field_of(z)
    return {name: _evaluate_closed('Z1', name, [z], field) for name in Z1_CLOSED}


def reconstruct_z1(z) -> Reconstruction:
    """Z1 model at z from a root t of (2T^4 - T^3 + 12T^2 - T + 2) - 2z(T^3 + T), t^2 + 1 != 0."""
    catalog = load_catalog()
    base = _field_of(z)
    param = _specialize(catalog.param('Z1', base), base(z), base)
    if len(param) < 2:
        raise StrataError(f"degenerate Z1 parameter polynomial at z = {base.format(z)}")

    def admissible(t):
        return t * t + 1 != 0

    roots = [t for t in _roots_in_field(param, base) if admissible(t)]
    target = base
    if not roots:
        # roots over Q are permuted by t -> (1 + it)/(t + i) over Q(i)
        widened = with_i(base)
        roots = [t for t in _roots_in_field([widened(c) for c in param], widened) if admissible(t)]
        target = widened
    if roots:
        t = roots[0]
    else:
        t, target = _adjoin_root(param, base)
    model = _instantiate('Z1', t, target)
    logger.info(f"Reconstructed Z1 model at z = {base.format(z)} over {target}")
    return Reconstruction('Z1', z, MultiPoly.from_univariate(param, 'T', base), catalog.template('Z1'),
                          t, target, model)


def _printed(label: str, values: Sequence, field: Field, table: Optional[CalibrationTable]) -> List[object]:
    """Computed absolute invariants as `label` prints them, errata applied."""
    table = table or default_calibration()
    return [x * field(table.printed_scale(label, name)) for name, x in zip(Z1_CLOSED, values)]


def z1_test(v: InvariantVector, table: Optional[CalibrationTable] = None) -> MembershipResult:
    if v['I3'] == 0:
        raise InvariantError("the Z1 test needs I3 != 0")
    field = v.field
    printed = _printed('Z1', absolute_invariants(v).values(), field, table)
    z = z1_z_from_absolutes(printed[0], printed[1], field)
    if z is None:
        diag = Diagnostic('Z1', 'z', None, note="denominator of the z expression vanishes")
        return MembershipResult(False, None, [diag], indeterminate=True)

    actual = dict(zip(Z1_CLOSED, printed))
    expected = z1_closed_forms(z, field)
    residuals = {name: None if expected[name] is None else actual[name] - expected[name] for name in Z1_CLOSED}
    member = all(r is not None and r == 0 for r in residuals.values())
    return MembershipResult(member, z, [Diagnostic('Z1', 'closed_forms', member, residuals, z)])


# ==============================================================================
# Zero-dimensional strata
# ==============================================================================

def _zero_dim_diagnostics(v: InvariantVector, table: Optional[CalibrationTable] = None) -> List[Diagnostic]:
    catalog = load_catalog()
    values = absolute_invariants(v).values()
    out = []
    for label in TUPLE_STRATA:
        expected = catalog.tuple_values(label, 'i') + catalog.tuple_values(label, 'j')
        printed = _printed(label, values, v.field, table)
        residuals = {name: a - e for name, a, e in zip(Z1_CLOSED, printed, expected)}
        out.append(Diagnostic(label, 'tuple', all(r == 0 for r in residuals.values()), residuals))
    for label in IDEAL_STRATA:
        point = _printed(label, values, v.field, table)[:len(DIXMIER_ABSOLUTES)]
        residuals = {f"g{k + 1}": g.evaluate(point) for k, g in enumerate(catalog.ideal(label, v.field))}
        out.append(Diagnostic(label, 'ideal', all(r == 0 for r in residuals.values()), residuals))
    return out


def zero_dim_test(v: InvariantVector, table: Optional[CalibrationTable] = None) -> Optional[StratumLabel]:
    if v['I3'] == 0:
        raise InvariantError("the zero-dimensional tests need I3 != 0")
    for diag in _zero_dim_diagnostics(v, table):
        if diag.passed:
            return StratumLabel.of(diag.label)
    return None


def builtin_model(label: str) -> TernaryQuartic:
    catalog = load_catalog()
    if label in catalog.members:
        label = catalog.members[label][0]
    if label not in MODEL_LABELS:
        raise StrataError(f"no builtin model for '{label}' (known: {', '.join(MODEL_LABELS)})")
    return catalog.model(label)


# ==============================================================================
# Classification
# ==============================================================================

def classify(v: InvariantVector, hyperflex_count: Optional[int] = None) -> StratumReport:
    """
    Zero-dimensional tests first, then Z1 and Z4. The first hit is the
    primary stratum; later hits are reported as secondary labels since a
    special point also lies on the one-dimensional strata through it.
    """
    if v.field.characteristic:
        raise StrataError(f"strata data hold in characteristic 0, not over {v.field}")
    catalog = load_catalog()
    if v['I3'] == 0:
        report = StratumReport(None, note="I3 = 0: outside the printed diagnostics")
        return _with_hyperflex(report, hyperflex_count, catalog)

    diagnostics = _zero_dim_diagnostics(v)
    hits = [d.label for d in diagnostics if d.passed]
    z = None
    z1 = z1_test(v)
    diagnostics.extend(z1.diagnostics)
    if z1.member:
        hits.append('Z1')
        z = z1.z
    z4 = z4_test(v, full=not hits)
    diagnostics.extend(z4.diagnostics)
    if z4.member:
        hits.append('Z4')
        z = z if z is not None else z4.z

    report = StratumReport(None, diagnostics=diagnostics)
    if hits:
        primary = hits[0]
        row = catalog.row(primary)
        report.stratum, report.s, report.dim = primary, row.s, row.dim
        report.secondary = hits[1:]
        report.closure = catalog.closure(primary)
        report.z = z if primary in ('Z1', 'Z4') else None
        logger.info(f"Classified as {primary} (s={row.s}, dim={row.dim})")
    else:
        report.note = "no printed stratum matches"
    return _with_hyperflex(report, hyperflex_count, catalog)


def _with_hyperflex(report: StratumReport, count: Optional[int], catalog) -> StratumReport:
    if count is None:
        return report
    report.hyperflex_count = count
    if report.stratum is not None:
        report.hyperflex_mismatch = report.s != count
        if report.hyperflex_mismatch:
            logger.warning(f"Hyperflex count {count} contradicts {report.stratum} (s={report.s})")
    else:
        report.candidates = [row.label for row in catalog.rows.values() if row.s == count]
    return report


# ==============================================================================
# Calibration anchors
# ==============================================================================

def z1_member(t) -> TernaryQuartic:
    """The Z1 model at parameter t over t's field."""
    return _instantiate('Z1', t, _field_of(t))


def z4_member(t) -> TernaryQuartic:
    field = with_i(_field_of(t))
    return _instantiate('Z4', field(t), field)


def calibration_anchors(z1_parameters: Sequence = (Fraction(2), Fraction(3), Fraction(1, 2)),
                        ideal_models: Sequence[str] = ('Omega1',)) -> List[Anchor]:
    """
    Psi and Phi with their printed tuples, Z1 members with the closed forms
    at their z, and models of the ideal strata. The Z1 closed forms break
    ties against the other printed sources.
    """
    catalog = load_catalog()
    anchors = [Anchor(label, catalog.model(label), catalog.tuple_values(label, 'i'), catalog.tuple_values(label, 'j'))
               for label in ('Psi', 'Phi')]
    for t in z1_parameters:
        z = z1_zmap(t)
        forms = z1_closed_forms(z, QQ)
        values = tuple(forms[name] for name in Z1_CLOSED)
        anchors.append(Anchor(f"Z1(t={t})", z1_member(t), values[:6], values[6:], source='Z1', priority=1))
    for label in ideal_models:
        model = catalog.model(label)
        anchors.append(Anchor(label, model, ideal=catalog.ideal(label, model.field), source=catalog.union_of(label)))
    return anchors
