import logging
from dataclasses import dataclass
from functools import cached_property
from math import factorial
from typing import Dict, List, Sequence, Tuple

from core.errors import PolynomialError
from core.fields import Field, QQ, upoly_divmod, upoly_derivative, upoly_trim, upoly_xgcd

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]

XYZ = ('x', 'y', 'z')
UVW = ('u', 'v', 'w')


class MultiPoly:
    """
    Sparse multivariate polynomial with exact coefficients.

    `terms` maps exponent vectors to nonzero field elements. Instances are
    treated as immutable; every operation returns a new polynomial.
    """
    __slots__ = ('variables', 'terms', 'field')

    def __init__(self, variables: Sequence[str], terms: Dict[Exponent, object], field: Field = QQ):
        self.variables = tuple(variables)
        self.field = field
        n = len(self.variables)
        clean = {}
        for e, c in terms.items():
            if len(e) != n:
                raise PolynomialError(f"exponent {e} does not match variables {self.variables}")
            if c != 0:
                clean[tuple(e)] = c
        self.terms = clean

    # --- Constructors ---

    @staticmethod
    def constant(value, variables=XYZ, field: Field = QQ) -> "MultiPoly":
        return MultiPoly(variables, {(0,) * len(variables): field(value)}, field)

    @staticmethod
    def zero(variables=XYZ, field: Field = QQ) -> "MultiPoly":
        return MultiPoly(variables, {}, field)

    @staticmethod
    def variable(index: int, variables=XYZ, field: Field = QQ) -> "MultiPoly":
        e = [0] * len(variables)
        e[index] = 1
        return MultiPoly(variables, {tuple(e): field.one}, field)

    @staticmethod
    def gens(variables=XYZ, field: Field = QQ) -> List["MultiPoly"]:
        return [MultiPoly.variable(k, variables, field) for k in range(len(variables))]

    # --- Structure ---

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self):
        return self.terms.get((0,) * len(self.variables), self.field.zero)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, var: int) -> int:
        return max((e[var] for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def leading_exponent(self) -> Exponent:
        # graded lexicographic
        return max(self.terms, key=lambda e: (sum(e), e))

    def coefficient(self, exponent: Exponent):
        return self.terms.get(tuple(exponent), self.field.zero)

    def with_field(self, field: Field) -> "MultiPoly":
        return MultiPoly(self.variables, {e: field(c) for e, c in self.terms.items()}, field)

    def rename(self, variables: Sequence[str]) -> "MultiPoly":
        if len(variables) != len(self.variables):
            raise PolynomialError("renaming must preserve the number of variables")
        return MultiPoly(variables, self.terms, self.field)

    def _like(self, terms) -> "MultiPoly":
        return MultiPoly(self.variables, terms, self.field)

    def _check(self, other: "MultiPoly"):
        if other.variables != self.variables:
            raise PolynomialError(f"variable mismatch: {self.variables} vs {other.variables}")

    # --- Arithmetic ---

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(other, self.variables, self.field)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return self._like(out)

    __radd__ = __add__

    def __neg__(self):
        return self._like({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(other, self.variables, self.field)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = self.field(other)
            if c == 0:
                return self._like({})
            return self._like({e: v * c for e, v in self.terms.items()})
        self._check(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = c1 * c2
                out[e] = out[e] + v if e in out else v
        return self._like(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, MultiPoly):
            return self.exact_div(other)
        return self * (1 / self.field(other))

    def __pow__(self, n: int):
        if n < 0:
            raise PolynomialError("negative powers of polynomials are not defined")
        result = MultiPoly.constant(1, self.variables, self.field)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            try:
                other = MultiPoly.constant(other, self.variables, self.field)
            except Exception:
                return False
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def exact_div(self, other: "MultiPoly") -> "MultiPoly":
        """Division that must leave no remainder (graded lex leading terms)."""
        self._check(other)
        if other.is_zero():
            raise PolynomialError("division by the zero polynomial")
        if other.is_constant():
            return self * (1 / other.constant_value())
        lead = other.leading_exponent()
        lead_c = other.terms[lead]
        quotient = {}
        rem = self
        while not rem.is_zero():
            e = rem.leading_exponent()
            diff = tuple(a - b for a, b in zip(e, lead))
            if min(diff) < 0:
                raise PolynomialError("polynomial is not divisible")
            c = rem.terms[e] / lead_c
            quotient[diff] = c
            rem = rem - other.monomial_shift(diff, c)
        return self._like(quotient)

    def monomial_shift(self, exponent: Exponent, c) -> "MultiPoly":
        return self._like({tuple(a + b for a, b in zip(e, exponent)): v * c
                           for e, v in self.terms.items()})

    # --- Calculus and substitution ---

    def derive(self, var: int) -> "MultiPoly":
        if not 0 <= var < len(self.variables):
            raise PolynomialError(f"no variable with index {var}")
        out = {}
        for e, c in self.terms.items():
            k = e[var]
            if k == 0:
                continue
            ne = list(e)
            ne[var] = k - 1
            out[tuple(ne)] = c * k
        return self._like(out)

    def evaluate(self, point) -> object:
        if len(point) != len(self.variables):
            raise PolynomialError(f"point of length {len(point)} for {len(self.variables)} variables")
        point = [self.field(p) for p in point]
        total = self.field.zero
        for e, c in self.terms.items():
            v = c
            for p, k in zip(point, e):
                if k:
                    v = v * p ** k
            total = total + v
        return total

    def substitute(self, images: Sequence["MultiPoly"]) -> "MultiPoly":
        """Replaces variable k by images[k]; the images share one variable list."""
        if len(images) != len(self.variables):
            raise PolynomialError("one image per variable is required")
        target = images[0]
        powers = [dict() for _ in images]
        result = MultiPoly.zero(target.variables, self.field)
        for e, c in self.terms.items():
            term = MultiPoly.constant(c, target.variables, self.field)
            for k, n in enumerate(e):
                if n:
                    if n not in powers[k]:
                        powers[k][n] = images[k] ** n
                    term = term * powers[k][n]
            result = result + term
        return result

    def substitute_linear(self, gamma: "LinearMap3") -> "MultiPoly":
        """F^gamma(x) = F(gamma x)."""
        if len(self.variables) != 3:
            raise PolynomialError("linear substitution needs a ternary form")
        if gamma.det == 0:
            raise PolynomialError("singular linear substitution")
        gens = MultiPoly.gens(self.variables, self.field)
        images = [sum((gens[j] * self.field(gamma.rows[i][j]) for j in range(3)),
                      MultiPoly.zero(self.variables, self.field)) for i in range(3)]
        return self.substitute(images)

    def homogenize(self, var: int, degree: int) -> "MultiPoly":
        """Pads every term with powers of `var` up to total degree `degree`."""
        out = {}
        for e, c in self.terms.items():
            d = sum(e)
            if d > degree:
                raise PolynomialError(f"term of degree {d} exceeds {degree}")
            ne = list(e)
            ne[var] += degree - d
            out[tuple(ne)] = c
        return self._like(out)

    def coefficients_in(self, var: int) -> Dict[int, "MultiPoly"]:
        """Coefficients with respect to one variable (that variable set to exponent 0)."""
        out: Dict[int, dict] = {}
        for e, c in self.terms.items():
            ne = list(e)
            k = ne[var]
            ne[var] = 0
            out.setdefault(k, {})[tuple(ne)] = c
        return {k: self._like(t) for k, t in out.items()}

    def to_univariate(self) -> list:
        """Coefficient list (constant first) of a polynomial in one variable."""
        if len(self.variables) != 1:
            raise PolynomialError("not a univariate polynomial")
        n = self.degree()
        coeffs = [self.field.zero] * (n + 1)
        for e, c in self.terms.items():
            coeffs[e[0]] = c
        return coeffs

    @staticmethod
    def from_univariate(coeffs, variable: str = 'T', field: Field = QQ) -> "MultiPoly":
        return MultiPoly((variable,), {(k,): field(c) for k, c in enumerate(coeffs)}, field)

    # --- Printing ---

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=lambda e: (sum(e), e), reverse=True):
            c = self.terms[e]
            mono = "*".join(v if k == 1 else f"{v}^{k}"
                            for v, k in zip(self.variables, e) if k)
            coeff = self.field.format(c)
            if not mono:
                parts.append(f"({coeff})")
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"({coeff})*{mono}")
        return " + ".join(parts)

    def __repr__(self):
        return f"MultiPoly({self})"


@dataclass(frozen=True)
class LinearMap3:
    """3x3 matrix acting by x -> gamma x."""
    rows: Tuple[Tuple[object, ...], ...]

    @staticmethod
    def from_rows(rows, field: Field = QQ) -> "LinearMap3":
        rows = tuple(tuple(field(v) for v in r) for r in rows)
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise PolynomialError("a 3x3 matrix is required")
        return LinearMap3(rows)

    @staticmethod
    def identity(field: Field = QQ) -> "LinearMap3":
        return LinearMap3.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]], field)

    @cached_property
    def det(self):
        m = self.rows
        return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))

    def __matmul__(self, other: "LinearMap3") -> "LinearMap3":
        a, b = self.rows, other.rows
        return LinearMap3(tuple(tuple(sum((a[i][k] * b[k][j] for k in range(3)), a[i][0] * 0)
                                      for j in range(3)) for i in range(3)))

    def transpose(self) -> "LinearMap3":
        return LinearMap3(tuple(tuple(self.rows[j][i] for j in range(3)) for i in range(3)))

    def adjugate(self) -> "LinearMap3":
        return LinearMap3(adjugate3(self.rows))

    def inverse(self) -> "LinearMap3":
        d = self.det
        if d == 0:
            raise PolynomialError("singular matrix has no inverse")
        adj = adjugate3(self.rows)
        return LinearMap3(tuple(tuple(v / d for v in r) for r in adj))

    def inverse_transpose(self) -> "LinearMap3":
        """The contragredient action gamma_* on dual variables."""
        return self.inverse().transpose()

    def apply(self, point):
        return tuple(sum((self.rows[i][j] * point[j] for j in range(3)), self.rows[i][0] * 0)
                     for i in range(3))


def adjugate3(m):
    """Classical adjoint of a 3x3 matrix given as nested sequences."""
    def minor(r0, r1, c0, c1):
        return m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
    return (
        (minor(1, 2, 1, 2), -minor(0, 2, 1, 2), minor(0, 1, 1, 2)),
        (-minor(1, 2, 0, 2), minor(0, 2, 0, 2), -minor(0, 1, 0, 2)),
        (minor(1, 2, 0, 1), -minor(0, 2, 0, 1), minor(0, 1, 0, 1)),
    )


# ==============================================================================
# Determinants and resultants
# ==============================================================================

def determinant(matrix, field: Field):
    """Gaussian elimination over a field."""
    m = [[field(v) for v in row] for row in matrix]
    n = len(m)
    det = field.one
    for k in range(n):
        pivot = next((r for r in range(k, n) if m[r][k] != 0), None)
        if pivot is None:
            return field.zero
        if pivot != k:
            m[k], m[pivot] = m[pivot], m[k]
            det = -det
        det = det * m[k][k]
        inv = 1 / m[k][k]
        for r in range(k + 1, n):
            factor = m[r][k] * inv
            if factor == 0:
                continue
            row_k = m[k]
            row_r = m[r]
            for c in range(k + 1, n):
                if row_k[c] != 0:
                    row_r[c] = row_r[c] - factor * row_k[c]
    return det


def bareiss_determinant(matrix: List[List[MultiPoly]]) -> MultiPoly:
    """Fraction-free elimination for matrices with polynomial entries."""
    m = [list(row) for row in matrix]
    n = len(m)
    if n == 0:
        raise PolynomialError("empty matrix")
    variables, field = m[0][0].variables, m[0][0].field
    sign = 1
    prev = MultiPoly.constant(1, variables, field)
    for k in range(n - 1):
        if m[k][k].is_zero():
            swap = next((r for r in range(k + 1, n) if not m[r][k].is_zero()), None)
            if swap is None:
                return MultiPoly.zero(variables, field)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]).exact_div(prev)
        prev = m[k][k]
    return m[n - 1][n - 1] * sign


def sylvester_matrix(p: list, q: list, zero):
    """Sylvester matrix of two coefficient lists given highest degree first."""
    m, n = len(p) - 1, len(q) - 1
    size = m + n
    rows = []
    for k in range(n):
        rows.append([zero] * k + list(p) + [zero] * (size - k - m - 1))
    for k in range(m):
        rows.append([zero] * k + list(q) + [zero] * (size - k - n - 1))
    return rows


def resultant_in_var(P: MultiPoly, Q: MultiPoly, var: int, method: str = 'bareiss') -> MultiPoly:
    """
    Resultant of P and Q regarded as univariate in `var`, with coefficients
    in the remaining variables (the result keeps the full variable list,
    with `var` absent).

    method='interpolate' evaluates and interpolates; it needs two homogeneous
    ternary forms whose leading coefficients in `var` are nonzero constants.
    """
    P._check(Q)
    if P.is_zero() and Q.is_zero():
        raise PolynomialError("resultant of two zero polynomials")
    if P.is_zero() or Q.is_zero():
        return MultiPoly.zero(P.variables, P.field)
    if method == 'interpolate':
        return _resultant_by_interpolation(P, Q, var)
    if method != 'bareiss':
        raise PolynomialError(f"unknown resultant method '{method}'")

    pc, qc = P.coefficients_in(var), Q.coefficients_in(var)
    m, n = P.degree_in(var), Q.degree_in(var)
    zero = MultiPoly.zero(P.variables, P.field)
    p_list = [pc.get(k, zero) for k in range(m, -1, -1)]
    q_list = [qc.get(k, zero) for k in range(n, -1, -1)]
    if m + n == 0:
        return MultiPoly.constant(1, P.variables, P.field)
    return bareiss_determinant(sylvester_matrix(p_list, q_list, zero))


def _resultant_by_interpolation(P: MultiPoly, Q: MultiPoly, var: int) -> MultiPoly:
    if len(P.variables) != 3 or not (P.is_homogeneous() and Q.is_homogeneous()):
        raise PolynomialError("interpolated resultants need homogeneous ternary forms")
    field = P.field
    d, e = P.degree(), Q.degree()
    lead_exp_p = tuple(d if k == var else 0 for k in range(3))
    lead_exp_q = tuple(e if k == var else 0 for k in range(3))
    if P.coefficient(lead_exp_p) == 0 or Q.coefficient(lead_exp_q) == 0:
        raise PolynomialError(f"vanishing leading coefficient in {P.variables[var]}")
    a, b = [k for k in range(3) if k != var]
    total = d * e
    if field.characteristic and field.characteristic <= total:
        raise PolynomialError(f"too few interpolation nodes in characteristic {field.characteristic}")

    def univariate_at(F: MultiPoly, deg: int, point) -> list:
        coeffs = [field.zero] * (deg + 1)
        for ex, c in F.terms.items():
            coeffs[deg - ex[var]] = coeffs[deg - ex[var]] + c * point ** ex[a]
        return coeffs

    xs = [field(k) for k in range(total + 1)]
    ys = []
    for x in xs:
        rows = sylvester_matrix(univariate_at(P, d, x), univariate_at(Q, e, x), field.zero)
        ys.append(determinant(rows, field))
    coeffs = interpolate(xs, ys, field)

    out = {}
    for k, c in enumerate(coeffs):
        ex = [0, 0, 0]
        ex[a] = k
        ex[b] = total - k
        out[tuple(ex)] = c
    return MultiPoly(P.variables, out, field)


def interpolate(xs, ys, field: Field) -> list:
    """Newton interpolation; returns coefficients, constant term first."""
    n = len(xs)
    div = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            div[i] = (div[i] - div[i - 1]) / (xs[i] - xs[i - j])
    coeffs = [field.zero] * n
    # Horner expansion of the Newton form
    for k in range(n - 1, -1, -1):
        shifted = [field.zero] + coeffs[:-1]
        coeffs = [s - xs[k] * c for s, c in zip(shifted, coeffs)]
        coeffs[0] = coeffs[0] + div[k]
    return coeffs


# ==============================================================================
# Binary forms
# ==============================================================================

def _binary_parts(P: MultiPoly):
    """(dehomogenized coefficient list in the first variable, power of the second variable)."""
    if len(P.variables) != 2 or not P.is_homogeneous():
        raise PolynomialError("a binary form is required")
    d = P.degree()
    coeffs = [P.field.zero] * (d + 1)
    for e, c in P.terms.items():
        coeffs[e[0]] = c
    coeffs = upoly_trim(coeffs)
    return coeffs, d - (len(coeffs) - 1)


def _binary_from_parts(coeffs, second_power: int, like: MultiPoly) -> MultiPoly:
    coeffs = upoly_trim(coeffs)
    lead = coeffs[-1]
    deg = len(coeffs) - 1
    terms = {(k, deg - k + second_power): c / lead for k, c in enumerate(coeffs)}
    return MultiPoly(like.variables, terms, like.field)


def gcd_univariate(a: list, b: list, field: Field) -> list:
    g, _, _ = upoly_xgcd(a, b, field.zero, field.one)
    if g:
        lead = g[-1]
        g = [c / lead for c in g]
    return g


def gcd_binary_forms(forms: Sequence[MultiPoly]) -> MultiPoly:
    """Monic GCD of binary forms (leading coefficient in the first variable is 1)."""
    if not forms:
        raise PolynomialError("gcd of an empty list")
    nonzero = [f for f in forms if not f.is_zero()]
    if not nonzero:
        raise PolynomialError("gcd of zero forms")
    field = nonzero[0].field
    g, power = None, None
    for f in nonzero:
        coeffs, k = _binary_parts(f)
        g = coeffs if g is None else gcd_univariate(g, coeffs, field)
        power = k if power is None else min(power, k)
    return _binary_from_parts(g, power, nonzero[0])


def squarefree_part(P: MultiPoly) -> MultiPoly:
    """Product of the distinct linear factors of a binary form over the algebraic closure."""
    if P.is_zero():
        raise PolynomialError("squarefree part of zero")
    field = P.field
    coeffs, power = _binary_parts(P)
    g = gcd_univariate(coeffs, upoly_derivative(coeffs), field)
    quotient, rem = upoly_divmod(coeffs, g, field.zero)
    if rem:
        raise PolynomialError("squarefree division left a remainder")
    return _binary_from_parts(quotient, 1 if power > 0 else 0, P)


def binary_root_count(P: MultiPoly) -> int:
    """Number of distinct projective roots of a binary form."""
    return squarefree_part(P).degree()


def derive(P: MultiPoly, var: int) -> MultiPoly:
    return P.derive(var)


def evaluate(P: MultiPoly, point) -> object:
    return P.evaluate(point)


def substitute_linear(P: MultiPoly, gamma: LinearMap3) -> MultiPoly:
    return P.substitute_linear(gamma)


def multinomial(exponent: Exponent) -> int:
    out = factorial(sum(exponent))
    for k in exponent:
        out //= factorial(k)
    return out


class TernaryQuartic:
    """A nonzero homogeneous quartic in (x, y, z) over an exact field."""
    __slots__ = ('poly',)

    def __init__(self, poly: MultiPoly):
        if len(poly.variables) != 3:
            raise PolynomialError("a ternary form is required")
        if poly.is_zero():
            raise PolynomialError("the zero polynomial is not a quartic")
        if not poly.is_homogeneous() or poly.degree() != 4:
            raise PolynomialError(f"not a homogeneous quartic: {poly}")
        self.poly = poly.rename(XYZ)

    @property
    def field(self) -> Field:
        return self.poly.field

    @property
    def descriptor(self):
        return self.poly.field.descriptor

    @staticmethod
    def from_coefficients(coefficients: Dict[Exponent, object], field: Field = QQ) -> "TernaryQuartic":
        """Integral convention: F = sum a_ijk x^i y^j z^k, no multinomial factors."""
        return TernaryQuartic(MultiPoly(XYZ, {tuple(e): field(c) for e, c in coefficients.items()}, field))

    def transform(self, gamma: LinearMap3) -> "TernaryQuartic":
        return TernaryQuartic(self.poly.substitute_linear(gamma))

    def scale(self, lam) -> "TernaryQuartic":
        return TernaryQuartic(self.poly * lam)

    def with_field(self, field: Field) -> "TernaryQuartic":
        return TernaryQuartic(self.poly.with_field(field))

    def coefficient(self, i: int, j: int, k: int):
        return self.poly.coefficient((i, j, k))

    def is_smooth(self) -> bool:
        from core.invariants import is_smooth
        return is_smooth(self)

    def __eq__(self, other):
        return isinstance(other, TernaryQuartic) and self.poly == other.poly

    def __hash__(self):
        return hash(self.poly)

    def __str__(self):
        return str(self.poly)

    def __repr__(self):
        return f"TernaryQuartic({self.poly} over {self.field})"


def macaulay_matrix(forms: Sequence[MultiPoly]):
    """
    Macaulay matrix of three ternary forms in degree D = d0 + d1 + d2 - 2,
    together with the monomial list and the indices of the non-reduced
    monomials (those divisible by x_i^d_i for more than one i).
    """
    if len(forms) != 3 or any(len(f.variables) != 3 or not f.is_homogeneous() or f.is_zero() for f in forms):
        raise PolynomialError("Macaulay resultants need three nonzero ternary forms")
    degrees = [f.degree() for f in forms]
    D = sum(degrees) - 2
    monomials = [(a, b, D - a - b) for a in range(D, -1, -1) for b in range(D - a, -1, -1)]
    column = {m: k for k, m in enumerate(monomials)}
    field = forms[0].field
    rows = []
    non_reduced = []
    for idx, m in enumerate(monomials):
        divisible = [i for i in range(3) if m[i] >= degrees[i]]
        if len(divisible) > 1:
            non_reduced.append(idx)
        i = divisible[0]
        shift = list(m)
        shift[i] -= degrees[i]
        row = [field.zero] * len(monomials)
        for e, c in forms[i].terms.items():
            row[column[tuple(a + b for a, b in zip(e, shift))]] = c
        rows.append(row)
    return rows, monomials, non_reduced


def macaulay_resultant(forms: Sequence[MultiPoly]):
    """
    Res(f0, f1, f2) as det(M) / det(M'), M' the submatrix on the non-reduced
    monomials. Raises PolynomialError when det(M') vanishes for this presentation.
    """
    rows, monomials, non_reduced = macaulay_matrix(forms)
    field = forms[0].field
    logger.debug(f"Macaulay matrix of size {len(monomials)} (minor {len(non_reduced)})")
    minor = [[rows[r][c] for c in non_reduced] for r in non_reduced]
    minor_det = determinant(minor, field) if minor else field.one
    if minor_det == 0:
        raise PolynomialError("extraneous Macaulay minor vanishes in this coordinate frame")
    return determinant(rows, field) / minor_det


def random_unimodular(rng, bound: int, field: Field = QQ, max_draws: int = 100000) -> LinearMap3:
    """Integer matrix with entries in [-bound, bound] and determinant 1."""
    for _ in range(max_draws):
        m = [[rng.randint(-bound, bound) for _ in range(3)] for _ in range(3)]
        d = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
             - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
             + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
        if d == -1:
            m[0] = [-v for v in m[0]]
            d = 1
        if d == 1:
            return LinearMap3.from_rows(m, field)
    raise PolynomialError(f"no unimodular matrix found with entries bounded by {bound}")
