import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from config import settings
from core.covariants import (CovariantChain, PSI_SCALE, SIGMA_SCALE, covariant_chain, d_op,
                             hessian, j03, j11, j22, j30, quartic_form, sigma_psi_contravariants)
from core.errors import CalibrationError, InvariantError, PolynomialError
from core.fields import ExtElement, Field
from core.poly import LinearMap3, TernaryQuartic, macaulay_resultant, random_unimodular

logger = logging.getLogger(__name__)

NAMES = ('I3', 'I6', 'I9', 'I12', 'I15', 'I18', 'I27', 'J9', 'J12', 'J15', 'J18', 'I21', 'J21')
WEIGHTS = (3, 6, 9, 12, 15, 18, 27, 9, 12, 15, 18, 21, 21)
WEIGHT = dict(zip(NAMES, WEIGHTS))

# Integral normalization of each invariant on forms sum a_ijk x^i y^j z^k
NORMALIZATION = {
    'I3': 2**4 * 3**2,
    'I6': 2**12 * 3**6,
    'I9': 2**12 * 3**8,
    'I12': 2**16 * 3**12,
    'I15': 2**23 * 3**15,
    'I18': 2**27 * 3**17,
    'I27': 2**40,
    'J9': 2**12 * 3**7,
    'J12': 2**17 * 3**10,
    'J15': 2**23 * 3**12,
    'J18': 2**27 * 3**15,
    'I21': 2**31 * 3**18,
    'J21': 2**33 * 3**16,
}

# numerators of the absolute invariants, each divided by I3^(weight / 3)
DIXMIER_ABSOLUTES = ('I6', 'I9', 'I12', 'I15', 'I18', 'I27')
OHNO_ABSOLUTES = ('J9', 'J12', 'J15', 'J18', 'I21', 'J21')
ABSOLUTE_NAMES = ('i1', 'i2', 'i3', 'i4', 'i5', 'i6', 'j1', 'j2', 'j3', 'j4', 'j5', 'j6')
ABSOLUTE_OF = dict(zip(DIXMIER_ABSOLUTES + OHNO_ABSOLUTES, ABSOLUTE_NAMES))

# I6 comes first: ideal generators beyond the first also involve i1
FIT_ORDER = DIXMIER_ABSOLUTES + OHNO_ABSOLUTES


# ==============================================================================
# Value types
# ==============================================================================

@dataclass(frozen=True)
class InvariantVector:
    """The thirteen integral Dixmier-Ohno invariants of a quartic, in NAMES order."""
    values: Tuple
    field: Field

    def __post_init__(self):
        if len(self.values) != len(NAMES):
            raise InvariantError(f"expected {len(NAMES)} invariants, got {len(self.values)}")

    weights = WEIGHTS

    @property
    def indices(self) -> Tuple[int, ...]:
        """GL3 index k of each entry: I(F^g) = det(g)^k I(F), with 3k = 4 * weight."""
        return tuple(4 * w // 3 for w in WEIGHTS)

    @staticmethod
    def index(name: str) -> int:
        return 4 * WEIGHT[name] // 3

    def __getitem__(self, name: str):
        return self.values[NAMES.index(name)]

    def as_dict(self) -> Dict[str, object]:
        return dict(zip(NAMES, self.values))

    def scaled(self, lam) -> "InvariantVector":
        """The vector of lambda F: each entry times lambda^weight."""
        return InvariantVector(tuple(v * lam ** w for v, w in zip(self.values, WEIGHTS)), self.field)

    def transformed(self, det) -> "InvariantVector":
        """The vector of F^gamma for det(gamma) = det: each entry times det^index."""
        return InvariantVector(tuple(v * det ** k for v, k in zip(self.values, self.indices)), self.field)

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)


@dataclass(frozen=True)
class AbsoluteInvariants:
    i: Tuple
    j: Tuple

    def as_dict(self) -> Dict[str, object]:
        out = {f"i{k + 1}": v for k, v in enumerate(self.i)}
        out.update({f"j{k + 1}": v for k, v in enumerate(self.j)})
        return out

    def values(self) -> Tuple:
        return tuple(self.i) + tuple(self.j)


@dataclass(frozen=True)
class Erratum:
    """
    A printed value the fitted table reproduces only after rescaling:
    printed = scale * computed. For an ideal, its generators vanish at
    the computed value times scale.
    """
    source: str
    name: str
    scale: Fraction
    fitted_on: Tuple[str, ...] = ()

    def describe(self) -> str:
        if self.scale == -1:
            change = "has the opposite sign"
        else:
            change = f"is {self.scale} times the computed one"
        return f"{self.source} {self.name}: printed value {change} (fit agreed by {', '.join(self.fitted_on)})"


@dataclass(frozen=True)
class CalibrationTable:
    """
    c_sigma and c_psi scale the binary-quartic contravariants; `scalars`
    maps each invariant to the total factor applied to its raw value (the
    integral normalization times a correction fixed by the anchors).
    `errata` lists the printed values outvoted by the other anchors.
    """
    c_sigma: Fraction
    c_psi: Fraction
    scalars: Tuple[Tuple[str, Fraction], ...]
    errata: Tuple[Erratum, ...] = ()

    def scalar(self, name: str) -> Fraction:
        return dict(self.scalars)[name]

    def correction(self, name: str) -> Fraction:
        return self.scalar(name) / NORMALIZATION[name]

    def printed_scale(self, source: str, name: str) -> Fraction:
        """Factor turning a computed absolute invariant into the value `source` prints."""
        for erratum in self.errata:
            if erratum.source == source and erratum.name == name:
                return erratum.scale
        return Fraction(1)

    def as_dict(self) -> Dict[str, Fraction]:
        out = {'c_sigma': self.c_sigma, 'c_psi': self.c_psi}
        out.update(dict(self.scalars))
        return out


@dataclass
class Anchor:
    """
    A curve with the printed data it must reproduce: absolute invariants
    (None where unknown) or generators in i1..i6 vanishing on it. Anchors
    of one source share its printing conventions; priority breaks ties.
    """
    name: str
    quartic: TernaryQuartic
    i: Optional[Tuple] = None
    j: Optional[Tuple] = None
    ideal: Optional[Sequence] = None
    source: Optional[str] = None
    priority: int = 0

    def __post_init__(self):
        if self.source is None:
            self.source = self.name

    def expected(self, absolute: str):
        values = self.i if absolute[0] == 'i' else self.j
        return None if values is None else values[int(absolute[1:]) - 1]


# ==============================================================================
# Raw invariants
# ==============================================================================

def raw_invariants(F: TernaryQuartic, c_sigma=SIGMA_SCALE, c_psi=PSI_SCALE,
                   chain: Optional[CovariantChain] = None, with_discriminant: bool = True) -> Dict[str, object]:
    """Invariants as built from the covariant chain, before any normalization."""
    field = F.field
    if chain is None:
        sigma, psi = sigma_psi_contravariants(F, c_sigma, c_psi)
        chain = covariant_chain(F, sigma, psi)

    def inv(n):
        return field(Fraction(1, n))

    f = quartic_form(F)
    I3 = d_op(chain.sigma, f).payload.constant_value() * inv(144)
    I6 = (d_op(chain.psi, chain.H).payload.constant_value() - I3 * I3 * 8) * inv(4608)
    tau, rho, xi, eta, nu = chain.tau, chain.rho, chain.xi, chain.eta, chain.nu
    raw = {
        'I3': I3,
        'I6': I6,
        'I9': j11(tau, rho),
        'I12': j03(rho),
        'I15': j30(tau),
        'I18': j22(tau, rho),
        'J9': j11(xi, rho),
        'J12': j11(tau, eta),
        'J15': j30(xi),
        'J18': j22(xi, rho),
        'I21': j03(eta),
        'J21': j11(nu, eta),
    }
    if with_discriminant:
        raw['I27'] = raw_discriminant(F)
    return raw


def raw_discriminant(F: TernaryQuartic, rng: Optional[random.Random] = None):
    """
    Res(F_x, F_y, F_z) through the Macaulay quotient. When the extraneous
    minor vanishes, F is moved by random determinant-one frames, which leave
    the resultant unchanged.
    """
    partials = [F.poly.derive(k) for k in range(3)]
    if any(p.is_zero() for p in partials):
        # a partial vanishing identically: the curve is a cone over a binary form
        return F.field.zero
    try:
        return macaulay_resultant(partials)
    except PolynomialError:
        pass
    rng = rng or random.Random(settings.SEED)
    for attempt in range(settings.MAX_FRAME_ATTEMPTS):
        gamma = random_unimodular(rng, settings.FRAME_BOUND, F.field)
        moved = F.transform(gamma)
        try:
            return macaulay_resultant([moved.poly.derive(k) for k in range(3)])
        except PolynomialError:
            logger.warning(f"Macaulay minor vanished in frame {attempt + 1}, retrying")
    raise InvariantError("no coordinate frame with a nonvanishing Macaulay minor")


# ==============================================================================
# Calibration
# ==============================================================================

def _psi_scale_from_fermat() -> Fraction:
    """c_psi making I6 vanish on x^4 + y^4 + z^4 with c_sigma = 1."""
    from core.poly import MultiPoly, XYZ
    fermat = TernaryQuartic(sum((v ** 4 for v in MultiPoly.gens(XYZ)), MultiPoly.zero(XYZ)))
    sigma, psi = sigma_psi_contravariants(fermat, SIGMA_SCALE, 1)
    I3 = d_op(sigma, quartic_form(fermat)).payload.constant_value() / 144
    P = d_op(psi, hessian(fermat)).payload.constant_value()
    if P == 0:
        raise CalibrationError("D_psi(H) vanishes on the Fermat quartic")
    return Fraction(I3 * I3 * 8 / P)


def _rational(value, what: str) -> Fraction:
    while isinstance(value, ExtElement) and value.is_constant():
        value = value.coeffs[0]
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    raise CalibrationError(f"scalar for {what} is not rational: {value!r}")


@dataclass
class _Measured:
    """Raw invariants of an anchor and the normalized I3 its absolutes divide by."""
    anchor: Anchor
    raw: Dict[str, object]
    base: object

    def absolute(self, name: str, scalar):
        if name not in self.raw:
            return None
        field = self.anchor.quartic.field
        return self.raw[name] * field(scalar) / self.base ** (WEIGHT[name] // 3)

    def ideal_residual(self, k: int, scalars: Dict[str, Fraction], scales: Optional[Dict[str, Fraction]] = None):
        """Generator k at the absolutes given by `scalars`; None when one it needs is unavailable."""
        g = self.anchor.ideal[k]
        field = self.anchor.quartic.field
        used = {idx for e in g.terms for idx, p in enumerate(e) if p}
        point = [field.zero] * len(DIXMIER_ABSOLUTES)
        for idx in used:
            name = DIXMIER_ABSOLUTES[idx]
            value = self.absolute(name, scalars[name]) if name in scalars else None
            if value is None:
                return None
            if scales:
                value = value * field(scales.get(name, 1))
            point[idx] = value
        return g.evaluate(point)


def _fit(name: str, measured: List[_Measured], scalars: Dict[str, Fraction]) -> Tuple[Fraction, List[Erratum]]:
    """
    Scalar of one invariant by vote. Each tuple source proposes the scalar
    reproducing its printed value; an ideal source backs every proposal
    that makes its generator for this invariant vanish.
    """
    absolute = ABSOLUTE_OF[name]
    w3 = WEIGHT[name] // 3
    proposals: Dict[str, set] = {}
    priority: Dict[str, int] = {}
    for m in measured:
        a = m.anchor
        priority[a.source] = max(priority.get(a.source, 0), a.priority)
        expected = a.expected(absolute)
        if expected is None or expected == 0 or name not in m.raw or m.raw[name] == 0:
            continue
        value = _rational(expected * m.base ** w3 / m.raw[name], f"{name} on {a.name}")
        proposals.setdefault(a.source, set()).add(value)
    for source, values in proposals.items():
        if len(values) > 1:
            raise CalibrationError(f"{source} fixes {absolute} inconsistently across its curves: "
                                   f"{', '.join(str(v) for v in sorted(values))}")
    candidates = sorted({v for values in proposals.values() for v in values})
    if not candidates:
        raise CalibrationError(f"no anchor fixes the scalar of {name}")

    k = DIXMIER_ABSOLUTES.index(name) if name in DIXMIER_ABSOLUTES else None
    ideal_sources = sorted({m.anchor.source for m in measured if m.anchor.ideal})

    def ideal_vote(source: str, candidate: Fraction) -> Optional[bool]:
        if k is None:
            return None
        votes = []
        for m in measured:
            if m.anchor.source != source or not m.anchor.ideal or k >= len(m.anchor.ideal):
                continue
            residual = m.ideal_residual(k, {**scalars, name: candidate})
            if residual is not None:
                votes.append(residual == 0)
        return all(votes) if votes else None

    support = {c: [s for s, values in proposals.items() if values == {c}]
                  + [s for s in ideal_sources if ideal_vote(s, c)] for c in candidates}

    def rank(c):
        return len(support[c]), max((priority.get(s, 0) for s in support[c]), default=0)

    ordered = sorted(candidates, key=rank, reverse=True)
    best = ordered[0]
    if len(ordered) > 1 and rank(ordered[1]) == rank(best):
        tied = '; '.join(f"{', '.join(support[c]) or 'nobody'} for {c}" for c in ordered if rank(c) == rank(best))
        raise CalibrationError(f"anchors tie on {absolute}: {tied}")

    fitted_on = tuple(sorted(support[best]))
    errata = []
    for source, values in proposals.items():
        value = next(iter(values))
        if value != best:
            errata.append(Erratum(source, absolute, value / best, fitted_on))
    for source in ideal_sources:
        if source in support[best] or ideal_vote(source, best) is None:
            continue
        for c in candidates:
            if ideal_vote(source, c):
                errata.append(Erratum(source, absolute, c / best, fitted_on))
                break
    return best, errata


def _verify(measured: List[_Measured], table: CalibrationTable) -> List[str]:
    scalars = dict(table.scalars)
    mismatches = []
    for m in measured:
        a = m.anchor
        field = a.quartic.field
        for name in FIT_ORDER:
            absolute = ABSOLUTE_OF[name]
            expected = a.expected(absolute)
            got = m.absolute(name, scalars[name])
            if expected is None or got is None:
                continue
            if got * field(table.printed_scale(a.source, absolute)) != expected:
                mismatches.append(f"{a.name} {absolute}: expected {expected}, got {got!r}")
        scales = {n: table.printed_scale(a.source, ABSOLUTE_OF[n]) for n in DIXMIER_ABSOLUTES}
        for k in range(len(a.ideal or ())):
            residual = m.ideal_residual(k, scalars, scales)
            if residual is not None and residual != 0:
                mismatches.append(f"{a.name} g{k + 1}: residual {residual!r}")
    return mismatches


def calibrate(anchors: Sequence[Anchor], verify: bool = True) -> CalibrationTable:
    """
    Fits the calibration table jointly on the anchors. I3 keeps its integral
    normalization and every other scalar is voted on by the anchor sources.
    Printed values that lose a vote come back as errata; with `verify` every
    anchor must then reproduce its data up to them.
    """
    logger.info(f"Calibrating invariants against {len(anchors)} anchors")
    c_sigma = SIGMA_SCALE
    c_psi = _psi_scale_from_fermat()
    if c_psi != PSI_SCALE:
        raise CalibrationError(f"c_psi from the Fermat anchor is {c_psi}, source constant is {PSI_SCALE}")
    if not any(a.i or a.j for a in anchors):
        raise CalibrationError("no anchor carries an invariant tuple")

    measured = []
    for anchor in anchors:
        # ideal anchors over towers skip the discriminant; their last generator is then not checked
        raw = raw_invariants(anchor.quartic, c_sigma, c_psi, with_discriminant=anchor.i is not None)
        base = raw['I3'] * NORMALIZATION['I3']
        if base == 0:
            raise CalibrationError(f"I3 vanishes on the anchor {anchor.name}")
        measured.append(_Measured(anchor, raw, base))

    scalars = {'I3': Fraction(NORMALIZATION['I3'])}
    errata: List[Erratum] = []
    for name in FIT_ORDER:
        scalars[name], found = _fit(name, measured, scalars)
        errata.extend(found)

    table = CalibrationTable(c_sigma, c_psi, tuple((n, scalars[n]) for n in NAMES), tuple(errata))
    for name in NAMES:
        logger.debug(f"{name}: scalar {table.scalar(name)} (correction {table.correction(name)})")
    for erratum in table.errata:
        logger.warning(f"Printed anchor data disagree: {erratum.describe()}")

    if verify:
        mismatches = _verify(measured, table)
        if mismatches:
            for line in mismatches:
                logger.error(f"Calibration mismatch: {line}")
            raise CalibrationError(f"anchors are inconsistent: {len(mismatches)} mismatching absolute invariants")
    return table


def builtin_anchors(labels: Sequence[str] = ('Psi', 'Phi')) -> List[Anchor]:
    from core.strata_data import load_catalog
    catalog = load_catalog()
    return [Anchor(label, catalog.model(label), catalog.tuple_values(label, 'i'), catalog.tuple_values(label, 'j'))
            for label in labels]


@lru_cache(maxsize=1)
def default_calibration() -> CalibrationTable:
    from core.strata import calibration_anchors
    return calibrate(calibration_anchors())


# ==============================================================================
# Public operations
# ==============================================================================

def dixmier_ohno(F: TernaryQuartic, table: Optional[CalibrationTable] = None,
                 chain: Optional[CovariantChain] = None) -> InvariantVector:
    table = table or default_calibration()
    raw = raw_invariants(F, table.c_sigma, table.c_psi, chain)
    field = F.field
    values = tuple(raw[name] * field(table.scalar(name)) for name in NAMES)
    return InvariantVector(values, field)


def discriminant_I27(F: TernaryQuartic, table: Optional[CalibrationTable] = None):
    table = table or default_calibration()
    return raw_discriminant(F) * F.field(table.scalar('I27'))


def is_smooth(F: TernaryQuartic) -> bool:
    return raw_discriminant(F) != 0


def absolute_invariants(v: InvariantVector) -> AbsoluteInvariants:
    I3 = v['I3']
    if I3 == 0:
        raise InvariantError("I3 vanishes: absolute invariants are undefined, use weighted equality")
    inv = 1 / I3
    i = tuple(v[name] * inv ** (WEIGHT[name] // 3) for name in DIXMIER_ABSOLUTES)
    j = tuple(v[name] * inv ** (WEIGHT[name] // 3) for name in OHNO_ABSOLUTES)
    return AbsoluteInvariants(i, j)


def weighted_equal(v1: InvariantVector, v2: InvariantVector) -> bool:
    """
    Same point of weighted projective space: equal zero patterns and
    v1[a]^(wb/g) v2[b]^(wa/g) = v2[a]^(wb/g) v1[b]^(wa/g) for every pair,
    g = gcd(wa, wb).
    """
    a_vals, b_vals = v1.values, v2.values
    if [x == 0 for x in a_vals] != [y == 0 for y in b_vals]:
        return False
    support = [k for k, x in enumerate(a_vals) if x != 0]
    for p, a in enumerate(support):
        for b in support[p + 1:]:
            wa, wb = WEIGHTS[a], WEIGHTS[b]
            g = gcd(wa, wb)
            ea, eb = wb // g, wa // g
            if a_vals[a] ** ea * b_vals[b] ** eb != b_vals[a] ** ea * a_vals[b] ** eb:
                return False
    return True


def gl3_transform(v: InvariantVector, gamma: LinearMap3) -> InvariantVector:
    """v(F^gamma) from v(F) for any invertible gamma."""
    if gamma.det == 0:
        raise InvariantError("singular linear substitution")
    return v.transformed(gamma.det)
