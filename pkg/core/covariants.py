import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import comb, factorial
from typing import Optional, Tuple

from core.errors import CovariantError
from core.poly import LinearMap3, MultiPoly, TernaryQuartic, UVW, XYZ, adjugate3

logger = logging.getLogger(__name__)

COVARIANT = 'covariant'
CONTRAVARIANT = 'contravariant'

# Scalars applied to the binary-quartic sigma and psi after rehomogenization.
# Their ratio is pinned by the Fermat quartic, whose I6 must vanish:
# I3 = c_sigma / 2 and D_psi(H) = 13824 c_psi there, so c_psi = c_sigma^2 / 6912.
SIGMA_SCALE = Fraction(1)
PSI_SCALE = Fraction(1, 6912)


def _falling(n: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= n - j
    return out


@dataclass(frozen=True)
class Form:
    """
    A covariant (in x, y, z) or contravariant (in u, v, w) of a ternary
    quartic, with its degree in the coefficients and its order.
    """
    payload: MultiPoly
    space: str
    degree: int
    order: int
    name: str = dc_field(default='', compare=False)

    def __post_init__(self):
        if self.space not in (COVARIANT, CONTRAVARIANT):
            raise CovariantError(f"unknown space '{self.space}'")
        expected = XYZ if self.space == COVARIANT else UVW
        if self.payload.variables != expected:
            raise CovariantError(f"{self.space} payload must be in {expected}, got {self.payload.variables}")
        if not self.payload.is_zero() and (not self.payload.is_homogeneous() or self.payload.degree() != self.order):
            raise CovariantError(f"payload of {self.name or 'form'} is not homogeneous of order {self.order}")

    @property
    def field(self):
        return self.payload.field

    @property
    def scaling_exponent(self) -> int:
        """C(lambda F) = lambda^e C(F); the coefficients enter polynomially."""
        return self.degree

    def dual_space(self) -> str:
        return CONTRAVARIANT if self.space == COVARIANT else COVARIANT

    def scaled(self, c, name: str = None) -> "Form":
        return Form(self.payload * c, self.space, self.degree, self.order, name or self.name)

    def __mul__(self, other: "Form") -> "Form":
        if other.space != self.space:
            raise CovariantError("forms in different spaces cannot be multiplied")
        return Form(self.payload * other.payload, self.space,
                    self.degree + other.degree, self.order + other.order)

    def transformed(self, gamma: LinearMap3) -> "Form":
        """Action of gamma: substitution by gamma for covariants, by its inverse transpose otherwise."""
        action = gamma if self.space == COVARIANT else gamma.inverse_transpose()
        return Form(self.payload.substitute_linear(action), self.space, self.degree, self.order, self.name)

    def matrix(self) -> "SymMat3":
        return SymMat3.from_quadratic(self)

    def __str__(self):
        return str(self.payload)


class SymMat3:
    """Symmetric 3x3 matrix; D(phi) of a quadratic form is one half of its Hessian."""

    def __init__(self, rows):
        rows = tuple(tuple(r) for r in rows)
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise CovariantError("a 3x3 matrix is required")
        for i in range(3):
            for j in range(i + 1, 3):
                if rows[i][j] != rows[j][i]:
                    raise CovariantError("matrix is not symmetric")
        self.rows = rows

    @staticmethod
    def from_quadratic(form: Form) -> "SymMat3":
        if form.order != 2:
            raise CovariantError(f"D() needs an order-2 form, {form.name or 'form'} has order {form.order}")
        p = form.payload
        half = form.field(Fraction(1, 2))
        rows = []
        for i in range(3):
            row = []
            for j in range(3):
                row.append(p.derive(i).derive(j).constant_value() * half)
            rows.append(row)
        return SymMat3(rows)

    def adjugate(self) -> "SymMat3":
        return SymMat3(adjugate3(self.rows))

    def det(self):
        m = self.rows
        return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))

    def dot(self, other: "SymMat3"):
        total = self.rows[0][0] * 0
        for i in range(3):
            for j in range(3):
                total = total + self.rows[i][j] * other.rows[i][j]
        return total

    def __matmul__(self, other: "SymMat3"):
        a, b = self.rows, other.rows
        return tuple(tuple(sum((a[i][k] * b[k][j] for k in range(3)), a[0][0] * 0)
                           for j in range(3)) for i in range(3))


# ==============================================================================
# Basic covariants
# ==============================================================================

def hessian(F: TernaryQuartic) -> Form:
    """Determinant of the matrix of second partials: order 6, degree 3."""
    p = F.poly
    d = [[p.derive(i).derive(j) for j in range(3)] for i in range(3)]
    det = (d[0][0] * (d[1][1] * d[2][2] - d[1][2] * d[2][1])
           - d[0][1] * (d[1][0] * d[2][2] - d[1][2] * d[2][0])
           + d[0][2] * (d[1][0] * d[2][1] - d[1][1] * d[2][0]))
    return Form(det, COVARIANT, 3, 6, 'H')


def quartic_form(F: TernaryQuartic) -> Form:
    return Form(F.poly, COVARIANT, 1, 4, 'F')


def d_op(operator: Form, target: Form, name: str = '') -> Form:
    """
    D_operator(target): every monomial u^a v^b w^c of the operator acts as
    d^(a+b+c) / dx^a dy^b dz^c on the target (and symmetrically for x, y, z
    acting on a contravariant). No factorial normalization is applied.
    """
    if operator.space == target.space:
        raise CovariantError("D-operation needs forms in dual spaces")
    if operator.order > target.order:
        raise CovariantError(f"order underflow: operator order {operator.order} > target order {target.order}")
    if operator.field != target.field:
        raise CovariantError(f"field mismatch: {operator.field} vs {target.field}")

    out = {}
    for a, c in operator.payload.terms.items():
        for e, d in target.payload.terms.items():
            if any(ek < ak for ek, ak in zip(e, a)):
                continue
            k = 1
            for ek, ak in zip(e, a):
                k *= _falling(ek, ak)
            ne = tuple(ek - ak for ek, ak in zip(e, a))
            v = c * d * k
            out[ne] = out[ne] + v if ne in out else v
    payload = MultiPoly(target.payload.variables, out, target.field)
    return Form(payload, target.space, operator.degree + target.degree,
                target.order - operator.order, name)


# ==============================================================================
# Binary forms
# ==============================================================================

def _binary_partial(P: MultiPoly, kx: int, ky: int) -> MultiPoly:
    for _ in range(kx):
        P = P.derive(0)
    for _ in range(ky):
        P = P.derive(1)
    return P


def transvectant(F: MultiPoly, G: MultiPoly, k: int) -> MultiPoly:
    """
    k-th transvectant of two binary forms, normalized by (r-k)!(s-k)!/(r!s!).
    """
    if len(F.variables) != 2 or F.variables != G.variables:
        raise CovariantError("transvectants need two binary forms in the same variables")
    r, s = max(F.degree(), 0), max(G.degree(), 0)
    if k < 0 or k > min(r, s):
        raise CovariantError(f"transvectant index {k} outside [0, {min(r, s)}]")
    field = F.field
    total = MultiPoly.zero(F.variables, field)
    for j in range(k + 1):
        term = _binary_partial(F, k - j, j) * _binary_partial(G, j, k - j)
        if j % 2:
            term = -term
        total = total + term * comb(k, j)
    scale = Fraction(factorial(r - k) * factorial(s - k), factorial(r) * factorial(s))
    return total * field(scale)


def classical_coefficients(F: MultiPoly):
    """(a40, a31, a22, a13, a04) with F = a40 x^4 + 4 a31 x^3 y + 6 a22 x^2 y^2 + 4 a13 x y^3 + a04 y^4."""
    if len(F.variables) != 2:
        raise CovariantError("a binary form is required")
    out = []
    for i in range(4, -1, -1):
        out.append(F.coefficient((i, 4 - i)) / comb(4, i))
    return tuple(out)


def sigma_psi_from_coefficients(a40, a31, a22, a13, a04):
    sigma = a40 * a04 - a31 * a13 * 4 + a22 * a22 * 3
    psi = (a40 * a22 * a04 - a40 * a13 * a13 - a31 * a31 * a04
           + a31 * a22 * a13 * 2 - a22 * a22 * a22)
    return sigma, psi


def binary_quartic_sigma_psi(F: MultiPoly, method: str = 'closed') -> Tuple[object, object]:
    """
    The invariants sigma and psi of a binary quartic, either from the closed
    forms in its classical coefficients or as 1/2 (F,F)^4 and 1/6 (F,(F,F)^2)^4.
    """
    if len(F.variables) != 2 or not F.is_homogeneous() or (not F.is_zero() and F.degree() != 4):
        raise CovariantError("a binary quartic is required")
    field = F.field
    if method == 'transvectant':
        if F.is_zero():
            return field.zero, field.zero
        G = transvectant(F, F, 2)
        sigma = transvectant(F, F, 4).constant_value() * field(Fraction(1, 2))
        psi = transvectant(F, G, 4).constant_value() * field(Fraction(1, 6)) if not G.is_zero() else field.zero
        return sigma, psi
    if method != 'closed':
        raise CovariantError(f"unknown method '{method}'")
    return sigma_psi_from_coefficients(*classical_coefficients(F))


def binary_discriminant(F: MultiPoly):
    """sigma^3 - 27 psi^2, which vanishes exactly on quartics with a repeated root."""
    sigma, psi = binary_quartic_sigma_psi(F)
    return sigma ** 3 - psi * psi * 27


# ==============================================================================
# Ternary contravariants and the chain
# ==============================================================================

def sigma_psi_contravariants(F: TernaryQuartic, sigma_scale=SIGMA_SCALE, psi_scale=PSI_SCALE) -> Tuple[Form, Form]:
    """
    Restricts F to the line ux + vy + wz = 0 with w = 1, i.e. R(x, y) =
    F(x, y, -ux - vy), applies the binary sigma and psi to R with u, v as
    indeterminates and rehomogenizes in w to orders 4 and 6.
    """
    field = F.field
    ring = ('x', 'y', 'u', 'v')
    x, y, u, v = MultiPoly.gens(ring, field)
    R = F.poly.substitute([x, y, -(u * x) - (v * y)])

    coeffs = {}
    for e, c in R.terms.items():
        key = (e[0], e[1])
        coeffs.setdefault(key, {})[(e[2], e[3])] = c
    uv = ('u', 'v')
    a = []
    for i in range(4, -1, -1):
        poly = MultiPoly(uv, coeffs.get((i, 4 - i), {}), field)
        a.append(poly * field(Fraction(1, comb(4, i))))
    sigma_uv, psi_uv = sigma_psi_from_coefficients(*a)

    def rehomogenize(p: MultiPoly, order: int) -> MultiPoly:
        lifted = MultiPoly(UVW, {(e[0], e[1], 0): c for e, c in p.terms.items()}, field)
        return lifted.homogenize(2, order)

    try:
        sigma = rehomogenize(sigma_uv, 4) * field(sigma_scale)
        psi = rehomogenize(psi_uv, 6) * field(psi_scale)
    except Exception as e:
        raise CovariantError(f"sigma/psi rehomogenization failed: {e}")
    return Form(sigma, CONTRAVARIANT, 2, 4, 'sigma'), Form(psi, CONTRAVARIANT, 3, 6, 'psi')


@dataclass
class CovariantChain:
    F: Form
    H: Form
    sigma: Form
    psi: Form
    rho: Form
    tau: Form
    xi: Form
    eta: Form
    nu: Form
    chi: Form

    def forms(self):
        return {name: getattr(self, name) for name in
                ('F', 'H', 'sigma', 'psi', 'rho', 'tau', 'xi', 'eta', 'nu', 'chi')}


CHAIN_SIGNATURE = {
    'rho': (CONTRAVARIANT, 4, 2),
    'tau': (COVARIANT, 5, 2),
    'xi': (COVARIANT, 5, 2),
    'eta': (CONTRAVARIANT, 7, 2),
    'nu': (COVARIANT, 14, 2),
    'chi': (CONTRAVARIANT, 13, 2),
}


def covariant_chain(F: TernaryQuartic, sigma: Optional[Form] = None, psi: Optional[Form] = None,
                    H: Optional[Form] = None) -> CovariantChain:
    field = F.field
    f = quartic_form(F)
    H = H or hessian(F)
    if sigma is None or psi is None:
        sigma, psi = sigma_psi_contravariants(F)

    def inv(n):
        return field(Fraction(1, n))

    rho = d_op(f, psi).scaled(inv(144), 'rho')
    tau = d_op(rho, f).scaled(inv(12), 'tau')
    xi = d_op(sigma, H).scaled(inv(72), 'xi')
    eta = d_op(xi, sigma).scaled(inv(12), 'eta')
    nu = d_op(eta, d_op(rho, H)).scaled(inv(8), 'nu')
    chi = d_op(tau * tau, psi).scaled(inv(8), 'chi')

    chain = CovariantChain(f, H, sigma, psi, rho, tau, xi, eta, nu, chi)
    for name, signature in CHAIN_SIGNATURE.items():
        form = getattr(chain, name)
        if (form.space, form.degree, form.order) != signature:
            raise CovariantError(f"{name} has signature {(form.space, form.degree, form.order)}, expected {signature}")
    return chain


# ==============================================================================
# Invariants of pairs of quadratic forms
# ==============================================================================

@dataclass(frozen=True)
class JPairing:
    J11: object
    J22: object
    J30: object
    J03: object


def j_pairings(phi: Form, psi: Form) -> JPairing:
    """J11 = <D(phi), D(psi)>, J22 = <D(phi)*, D(psi)*>, J30 = det D(phi), J03 = det D(psi)."""
    if phi.order != 2 or psi.order != 2:
        raise CovariantError("J-pairings need two order-2 forms")
    if phi.space == psi.space:
        raise CovariantError("J-pairings need forms in dual spaces")
    A, B = phi.matrix(), psi.matrix()
    return JPairing(A.dot(B), A.adjugate().dot(B.adjugate()), A.det(), B.det())


def j11(phi: Form, psi: Form):
    return phi.matrix().dot(psi.matrix())


def j22(phi: Form, psi: Form):
    return phi.matrix().adjugate().dot(psi.matrix().adjugate())


def j30(phi: Form):
    return phi.matrix().det()


def j03(psi: Form):
    return psi.matrix().det()
