import logging
import random
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import List, Optional, Sequence

from config import settings
from core.covariants import hessian
from core.errors import FrameError, NotOnCurveError, PolynomialError, SingularCurveError
from core.invariants import is_smooth
from core.poly import (LinearMap3, MultiPoly, TernaryQuartic, gcd_binary_forms, random_unimodular,
                       resultant_in_var, squarefree_part)

logger = logging.getLogger(__name__)

BINARY = ('x', 'y')


class FlexType(str, Enum):
    ORDINARY = 'ordinary'
    FLEX = 'flex'
    HYPERFLEX = 'hyperflex'


@dataclass
class FlexReport:
    """
    Flex data of a smooth quartic in one admissible frame. R = Res_z(H, F)
    is the degree-24 flex form, G = gcd(R, R_x, R_y) carries each hyperflex
    as a simple root.
    """
    R: MultiPoly
    G: MultiPoly
    hyperflex_count: int
    coordinate_change_used: LinearMap3
    flex_count_distinct: int = 0
    frames_tried: int = 0
    warnings: List[str] = dc_field(default_factory=list)

    @property
    def multiplicity_profile(self) -> dict:
        return {
            'deg_R': self.R.degree(),
            'deg_G': self.G.degree(),
            'distinct_flexes': self.flex_count_distinct,
            'hyperflexes': self.hyperflex_count,
        }

    def divisor_consistent(self) -> bool:
        """Every root of R of multiplicity m adds m - 1 to deg G: distinct roots + deg G = 24."""
        return self.flex_count_distinct + self.G.degree() == self.R.degree()


def _to_binary(P: MultiPoly) -> MultiPoly:
    """Drops the eliminated z from a form in (x, y, z) with no z terms."""
    if any(e[2] for e in P.terms):
        raise PolynomialError("form still depends on z")
    return MultiPoly(BINARY, {(e[0], e[1]): c for e, c in P.terms.items()}, P.field)


def flex_resultant(F: TernaryQuartic, gamma: LinearMap3, H: Optional[MultiPoly] = None) -> MultiPoly:
    """
    R(x, y) = Res_z(H, F) after the substitution gamma. Both forms must keep
    their top power of z, otherwise the projection from (0:0:1) loses points.
    """
    moved = F.transform(gamma)
    hess = hessian(moved).payload if H is None else H.substitute_linear(gamma)
    if moved.coefficient(0, 0, 4) == 0:
        raise FrameError("the quartic has no z^4 term in this frame")
    if hess.coefficient((0, 0, 6)) == 0:
        raise FrameError("the Hessian has no z^6 term in this frame")
    # interpolation needs more than 24 nodes in the prime field
    p = F.field.characteristic
    method = 'bareiss' if p and p <= 24 else 'interpolate'
    R = _to_binary(resultant_in_var(hess, moved.poly, 2, method=method))
    if R.is_zero() or R.degree() != 24:
        raise FrameError("flex resultant is not a binary form of degree 24")
    return R


def _frame_report(F: TernaryQuartic, gamma: LinearMap3) -> FlexReport:
    R = flex_resultant(F, gamma)
    G = gcd_binary_forms([R, R.derive(0), R.derive(1)])
    distinct = squarefree_part(R).degree()
    count = squarefree_part(G).degree() if G.degree() > 0 else 0
    report = FlexReport(R, G, count, gamma, flex_count_distinct=distinct)
    if G.degree() != count:
        report.warnings.append(f"G has repeated roots: degree {G.degree()} against {count} distinct")
    return report


def hyperflex_form(F: TernaryQuartic, rng: Optional[random.Random] = None,
                   check_smooth: bool = True) -> FlexReport:
    """
    Hyperflex locus through random unimodular frames. A frame whose centre of
    projection lies on a line through two flexes merges their roots and lowers
    the number of distinct roots of R, so only frames reaching the largest
    distinct count seen are trusted, and two of them must agree.
    """
    if check_smooth and not is_smooth(F):
        raise SingularCurveError("hyperflex counting needs a smooth quartic (I27 = 0)")
    rng = rng or random.Random(settings.SEED)
    field = F.field
    best: List[FlexReport] = []
    tried = 0
    for attempt in range(settings.MAX_FRAME_ATTEMPTS):
        tried += 1
        gamma = random_unimodular(rng, settings.FRAME_BOUND, field)
        try:
            report = _frame_report(F, gamma)
        except FrameError as e:
            logger.debug(f"Frame {attempt + 1} inadmissible: {e}")
            continue
        if not best or report.flex_count_distinct > best[0].flex_count_distinct:
            best = [report]
        elif report.flex_count_distinct == best[0].flex_count_distinct:
            best.append(report)
        if len(best) >= 2:
            break
    if len(best) < 2:
        raise FrameError(f"no two admissible frames in {tried} attempts")

    first, second = best[0], best[1]
    if first.hyperflex_count != second.hyperflex_count:
        raise FrameError(f"independent frames disagree: {first.hyperflex_count} vs {second.hyperflex_count} hyperflexes")
    first.frames_tried = tried
    for message in first.warnings:
        logger.warning(message)
    if not first.divisor_consistent():
        first.warnings.append("flex divisor does not add up to 24")
        logger.warning(f"Flex divisor inconsistent: {first.multiplicity_profile}")
    logger.info(f"Hyperflex count {first.hyperflex_count} ({first.flex_count_distinct} distinct flexes, {tried} frames)")
    return first


def hyperflex_count(F: TernaryQuartic, rng: Optional[random.Random] = None) -> int:
    return hyperflex_form(F, rng).hyperflex_count


# ==============================================================================
# Flex type of a single point
# ==============================================================================

def _point_field(F: TernaryQuartic, point: Sequence):
    """Lifts F to the field of the point coordinates when they live higher up a tower."""
    for c in point:
        field = getattr(c, 'field', None)
        if field is not None and field != F.field and F.field in field.tower():
            F = F.with_field(field)
    return F, [F.field(c) for c in point]


def _cross(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def tangent_contact_order(F: TernaryQuartic, point: Sequence) -> int:
    """Vanishing order at the point of F restricted to its tangent line."""
    F, P = _point_field(F, point)
    field = F.field
    if all(c == 0 for c in P):
        raise NotOnCurveError("(0:0:0) is not a projective point")
    if F.poly.evaluate(P) != 0:
        raise NotOnCurveError(f"point ({':'.join(field.format(c) for c in P)}) is not on the curve")
    grad = [F.poly.derive(k).evaluate(P) for k in range(3)]
    if all(g == 0 for g in grad):
        raise SingularCurveError("the curve is singular at the point")

    # a second point on the tangent line, independent of P
    Q = None
    for k in range(3):
        e = [field.zero] * 3
        e[k] = field.one
        candidate = _cross(grad, e)
        if any(c != 0 for c in _cross(candidate, P)):
            Q = candidate
            break
    r, s = MultiPoly.gens(('r', 's'), field)
    restricted = F.poly.substitute([r * P[k] + s * Q[k] for k in range(3)])
    if restricted.is_zero():
        raise SingularCurveError("the tangent line is a component of the curve")
    return min(e[1] for e in restricted.terms)


def point_flex_type(F: TernaryQuartic, point: Sequence) -> FlexType:
    order = tangent_contact_order(F, point)
    F, P = _point_field(F, point)
    H = hessian(F).payload
    on_hessian = H.evaluate(P) == 0
    grad_f = [F.poly.derive(k).evaluate(P) for k in range(3)]
    grad_h = [H.derive(k).evaluate(P) for k in range(3)]
    minors_vanish = all(m == 0 for m in _cross(grad_f, grad_h))

    if order == 2:
        kind = FlexType.ORDINARY
    elif order == 3:
        kind = FlexType.FLEX
    else:
        kind = FlexType.HYPERFLEX
    # Hessian criterion: flex iff H(P) = 0; hyperflex iff in addition F and H are tangent at P
    expected = FlexType.ORDINARY if not on_hessian else (FlexType.HYPERFLEX if minors_vanish else FlexType.FLEX)
    if expected != kind:
        raise FrameError(f"tangent contact order {order} disagrees with the Hessian criterion ({expected.value})")
    return kind
