import logging
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional, Tuple, Union

import numpy as np

from config import settings
from core.errors import FieldError, FieldMismatchError, FieldDivisionByZero

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FieldDescriptor:
    """
    Describes an exact coefficient field.

    kind is one of 'rationals', 'prime' or 'extension'. For an extension,
    `minpoly` lists the coefficients (constant term first) of the defining
    relation over `base`, exactly as given; the field itself works with the
    monic normalization. `trusted` skips the irreducibility check.
    """
    kind: str
    p: Optional[int] = None
    base: Optional["FieldDescriptor"] = None
    name: Optional[str] = None
    minpoly: Tuple = ()
    relation: Optional[str] = dc_field(default=None, compare=False)
    trusted: bool = False

    @staticmethod
    def rationals() -> "FieldDescriptor":
        return FieldDescriptor(kind='rationals')

    @staticmethod
    def prime(p: int) -> "FieldDescriptor":
        return FieldDescriptor(kind='prime', p=p)

    @staticmethod
    def extension(base: "FieldDescriptor", name: str, minpoly, relation: str = None,
                  trusted: bool = False) -> "FieldDescriptor":
        return FieldDescriptor(kind='extension', base=base, name=name, minpoly=tuple(minpoly),
                               relation=relation, trusted=trusted)

    def __str__(self):
        if self.kind == 'rationals':
            return "Q"
        if self.kind == 'prime':
            return f"Fp({self.p})"
        return f"ext({self.base}; {self.name}; {self.relation or 'minpoly'})"


# ==============================================================================
# Univariate helpers on coefficient lists (constant term first)
# ==============================================================================

def upoly_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def upoly_mul(a, b, zero):
    if not a or not b:
        return []
    out = [zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return upoly_trim(out)


def upoly_sub(a, b, zero):
    n = max(len(a), len(b))
    a = list(a) + [zero] * (n - len(a))
    b = list(b) + [zero] * (n - len(b))
    return upoly_trim([x - y for x, y in zip(a, b)])


def upoly_divmod(a, b, zero):
    a = upoly_trim(a)
    b = upoly_trim(b)
    if not b:
        raise FieldDivisionByZero("polynomial division by zero")
    if len(a) < len(b):
        return [], a
    inv_lead = 1 / b[-1]
    q = [zero] * (len(a) - len(b) + 1)
    r = list(a)
    for k in range(len(a) - len(b), -1, -1):
        c = r[k + len(b) - 1] * inv_lead
        q[k] = c
        if c == 0:
            continue
        for j, y in enumerate(b):
            r[k + j] = r[k + j] - c * y
    return upoly_trim(q), upoly_trim(r[:len(b) - 1])


def upoly_xgcd(a, b, zero, one):
    """Returns (g, s, t) with s*a + t*b = g."""
    r0, r1 = upoly_trim(a), upoly_trim(b)
    s0, s1 = [one], []
    t0, t1 = [], [one]
    while r1:
        q, r = upoly_divmod(r0, r1, zero)
        r0, r1 = r1, r
        s0, s1 = s1, upoly_sub(s0, upoly_mul(q, s1, zero), zero)
        t0, t1 = t1, upoly_sub(t0, upoly_mul(q, t1, zero), zero)
    return r0, s0, t0


def upoly_powmod(base, e, mod, zero, one):
    result = [one]
    base = upoly_divmod(base, mod, zero)[1]
    while e > 0:
        if e & 1:
            result = upoly_divmod(upoly_mul(result, base, zero), mod, zero)[1]
        base = upoly_divmod(upoly_mul(base, base, zero), mod, zero)[1]
        e >>= 1
    return result


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    small = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def _divisors(n: int):
    n = abs(n)
    out = set()
    k = 1
    while k * k <= n:
        if n % k == 0:
            out.add(k)
            out.add(n // k)
        k += 1
    return sorted(out)


# ==============================================================================
# Fields
# ==============================================================================

class Field:
    """Common interface of the coefficient fields."""
    descriptor: FieldDescriptor
    characteristic: int = 0

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def __call__(self, value):
        return self.coerce(value)

    def coerce(self, value):
        raise NotImplementedError

    def contains(self, value) -> bool:
        try:
            self.coerce(value)
            return True
        except FieldMismatchError:
            return False

    def generators(self) -> dict:
        """Generator symbols declared along the tower, name -> element of this field."""
        return {}

    def tower(self):
        return [self]

    def random_element(self, rng: random.Random, bound: int = 5):
        raise NotImplementedError

    def serialize(self, value):
        raise NotImplementedError

    def format(self, value) -> str:
        raise NotImplementedError

    def approx(self, value) -> complex:
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Field) and self.descriptor == other.descriptor

    def __hash__(self):
        return hash(self.descriptor)

    def __repr__(self):
        return str(self.descriptor)


class RationalField(Field):
    descriptor = FieldDescriptor.rationals()
    characteristic = 0

    def coerce(self, value):
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int) and not isinstance(value, bool):
            return Fraction(value)
        if isinstance(value, ExtElement) and value.is_constant():
            return self.coerce(value.coeffs[0])
        raise FieldMismatchError(f"cannot coerce {value!r} into Q")

    def random_element(self, rng, bound=5):
        return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))

    def serialize(self, value):
        value = self.coerce(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"

    def approx(self, value):
        return complex(float(self.coerce(value)))

    def format(self, value) -> str:
        return self.serialize(value)


QQ = RationalField()


class PrimeElement:
    """Residue modulo p, always stored in [0, p)."""
    __slots__ = ('value', 'field')

    def __init__(self, value: int, field: "PrimeField"):
        self.value = value % field.p
        self.field = field

    def _other(self, other):
        return self.field.coerce(other).value

    def __add__(self, other):
        return PrimeElement(self.value + self._other(other), self.field)

    __radd__ = __add__

    def __sub__(self, other):
        return PrimeElement(self.value - self._other(other), self.field)

    def __rsub__(self, other):
        return PrimeElement(self._other(other) - self.value, self.field)

    def __mul__(self, other):
        return PrimeElement(self.value * self._other(other), self.field)

    __rmul__ = __mul__

    def __neg__(self):
        return PrimeElement(-self.value, self.field)

    def inverse(self):
        if self.value == 0:
            raise FieldDivisionByZero(f"division by zero in {self.field}")
        return PrimeElement(pow(self.value, -1, self.field.p), self.field)

    def __truediv__(self, other):
        return self * self.field.coerce(other).inverse()

    def __rtruediv__(self, other):
        return self.field.coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return PrimeElement(pow(self.value, e, self.field.p), self.field)

    def __eq__(self, other):
        try:
            return self.value == self._other(other)
        except FieldMismatchError:
            return False

    def __hash__(self):
        return hash((self.value, self.field.p))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} mod {self.field.p}"


class PrimeField(Field):
    def __init__(self, p: int):
        if p <= 3:
            raise FieldError(f"prime fields require p > 3, got {p}")
        if not _is_probable_prime(p):
            raise FieldError(f"{p} is not prime")
        self.p = p
        self.characteristic = p
        self.descriptor = FieldDescriptor.prime(p)

    def coerce(self, value):
        if isinstance(value, PrimeElement):
            if value.field.p != self.p:
                raise FieldMismatchError(f"element of F_{value.field.p} used in F_{self.p}")
            return value
        if isinstance(value, int) and not isinstance(value, bool):
            return PrimeElement(value, self)
        if isinstance(value, Fraction):
            if value.denominator % self.p == 0:
                raise FieldDivisionByZero(f"{value} has no image in F_{self.p}")
            return PrimeElement(value.numerator * pow(value.denominator, -1, self.p), self)
        raise FieldMismatchError(f"cannot coerce {value!r} into F_{self.p}")

    def random_element(self, rng, bound=None):
        return PrimeElement(rng.randrange(self.p), self)

    def serialize(self, value):
        return str(self.coerce(value).value)

    def approx(self, value):
        return complex(self.coerce(value).value)

    def format(self, value) -> str:
        return self.serialize(value)


class ExtElement:
    """
    Element of base[T]/(m(T)), stored as the coefficient tuple of its
    reduced representative on the power basis 1, T, ..., T^(n-1).
    """
    __slots__ = ('coeffs', 'field')

    def __init__(self, coeffs, field: "ExtensionField"):
        self.coeffs = tuple(coeffs)
        self.field = field

    def is_constant(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def _other(self, other):
        return self.field.coerce(other)

    def _defers_to(self, other) -> bool:
        # other lives higher up a tower built on this field
        return (isinstance(other, ExtElement) and other.field != self.field
                and self.field in other.field.tower())

    def _lifted(self, other) -> "ExtElement":
        return other.field.coerce(self)

    def __add__(self, other):
        if self._defers_to(other):
            return self._lifted(other) + other
        o = self._other(other)
        return ExtElement([a + b for a, b in zip(self.coeffs, o.coeffs)], self.field)

    __radd__ = __add__

    def __sub__(self, other):
        if self._defers_to(other):
            return self._lifted(other) - other
        o = self._other(other)
        return ExtElement([a - b for a, b in zip(self.coeffs, o.coeffs)], self.field)

    def __rsub__(self, other):
        return self._other(other) - self

    def __neg__(self):
        return ExtElement([-a for a in self.coeffs], self.field)

    def __mul__(self, other):
        if self._defers_to(other):
            return self._lifted(other) * other
        f = self.field
        if not isinstance(other, ExtElement) or other.field != f:
            try:
                c = f.base.coerce(other)
            except FieldMismatchError:
                c = None
            if c is not None:
                return ExtElement([a * c for a in self.coeffs], f)
        o = self._other(other)
        zero = f.base.zero
        n = f.degree
        prod = [zero] * (2 * n - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                if b == 0:
                    continue
                prod[i + j] = prod[i + j] + a * b
        return ExtElement(f.reduce(prod), f)

    __rmul__ = __mul__

    def inverse(self):
        f = self.field
        a = upoly_trim(self.coeffs)
        if not a:
            raise FieldDivisionByZero(f"division by zero in {f}")
        g, s, _ = upoly_xgcd(a, list(f.monic), f.base.zero, f.base.one)
        if len(g) != 1:
            raise FieldDivisionByZero(
                f"{self!r} shares a factor with the minimal polynomial of {f.descriptor.name}")
        inv_g = 1 / g[0]
        return ExtElement(f.reduce([c * inv_g for c in s]), f)

    def __truediv__(self, other):
        if self._defers_to(other):
            return self._lifted(other) / other
        return self * self._other(other).inverse()

    def __rtruediv__(self, other):
        return self._other(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.field.one
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if self._defers_to(other):
            return self._lifted(other) == other
        try:
            o = self._other(other)
        except FieldMismatchError:
            return False
        return self.coeffs == o.coeffs

    def __hash__(self):
        if self.is_constant():
            return hash(self.coeffs[0])
        return hash(self.coeffs)

    def __bool__(self):
        return any(c != 0 for c in self.coeffs)

    def __repr__(self):
        name = self.field.descriptor.name
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if k == 0 else (name if k == 1 else f"{name}^{k}")
            parts.append(f"({c!r})*{mono}" if mono else f"({c!r})")
        return " + ".join(parts) or "0"


class ExtensionField(Field):
    """
    base[T]/(m(T)). The minimal polynomial is stored monic; the relation
    originally supplied is kept on the descriptor for display.
    """

    def __init__(self, descriptor: FieldDescriptor, base: Field):
        self.descriptor = descriptor
        self.base = base
        self.characteristic = base.characteristic
        coeffs = upoly_trim([base.coerce(c) for c in descriptor.minpoly])
        if len(coeffs) < 3:
            raise FieldError(f"minimal polynomial of {descriptor.name} must have degree >= 2")
        lead = coeffs[-1]
        self.monic = tuple(c / lead for c in coeffs)
        self.degree = len(self.monic) - 1
        self.verified = False

    def reduce(self, prod):
        zero = self.base.zero
        n = self.degree
        prod = list(prod) + [zero] * max(0, n - len(prod))
        for k in range(len(prod) - 1, n - 1, -1):
            c = prod[k]
            if c == 0:
                continue
            for j in range(n):
                prod[k - n + j] = prod[k - n + j] - c * self.monic[j]
            prod[k] = zero
        return tuple(prod[:n])

    def coerce(self, value):
        if isinstance(value, ExtElement):
            if value.field is self or value.field == self:
                return value
            # element of a field further down the tower
            try:
                c = self.base.coerce(value)
            except FieldMismatchError:
                raise FieldMismatchError(f"element of {value.field} used in {self}")
            return self._embed(c)
        return self._embed(self.base.coerce(value))

    def _embed(self, c):
        zero = self.base.zero
        return ExtElement((c,) + (zero,) * (self.degree - 1), self)

    @property
    def gen(self) -> ExtElement:
        zero, one = self.base.zero, self.base.one
        return ExtElement((zero, one) + (zero,) * (self.degree - 2), self)

    def generators(self):
        gens = {k: self.coerce(v) for k, v in self.base.generators().items()}
        gens[self.descriptor.name] = self.gen
        return gens

    def tower(self):
        return self.base.tower() + [self]

    def element(self, coeffs) -> ExtElement:
        coeffs = [self.base.coerce(c) for c in coeffs]
        return ExtElement(self.reduce(coeffs), self)

    def random_element(self, rng, bound=5):
        return ExtElement(tuple(self.base.random_element(rng, bound) for _ in range(self.degree)), self)

    def serialize(self, value):
        value = self.coerce(value)
        return [self.base.serialize(c) for c in value.coeffs]

    def approx(self, value):
        value = self.coerce(value)
        root = self.approx_generator()
        return sum(self.base.approx(c) * root ** k for k, c in enumerate(value.coeffs))

    def format(self, value) -> str:
        """Renders an element in the expression grammar, e.g. '(3) + (-1/2)*i'."""
        value = self.coerce(value)
        name = self.descriptor.name
        parts = []
        for k, c in enumerate(value.coeffs):
            if c == 0:
                continue
            mono = "" if k == 0 else (name if k == 1 else f"{name}^{k}")
            coeff = self.base.format(c)
            if not mono:
                parts.append(f"({coeff})")
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"({coeff})*{mono}")
        return " + ".join(parts) if parts else "0"

    def approx_generator(self) -> complex:
        """Deterministic complex embedding of the generator (largest imaginary, then real part)."""
        coeffs = [self.base.approx(c) for c in self.monic]
        roots = np.roots(coeffs[::-1])
        roots = sorted(roots, key=lambda r: (-round(r.imag, 9), -round(r.real, 9)))
        return complex(roots[0])


Element = Union[Fraction, PrimeElement, ExtElement]


# ==============================================================================
# Construction
# ==============================================================================

def make_field(desc: FieldDescriptor, check_irreducible: Optional[bool] = None) -> Field:
    """Builds the field handle for a descriptor."""
    if desc.kind == 'rationals':
        return QQ
    if desc.kind == 'prime':
        return PrimeField(desc.p)
    if desc.kind != 'extension':
        raise FieldError(f"unknown field kind '{desc.kind}'")

    base = make_field(desc.base, check_irreducible)
    field = ExtensionField(desc, base)

    check = settings.CHECK_IRREDUCIBLE if check_irreducible is None else check_irreducible
    if desc.trusted or not check:
        logger.debug(f"Trusting minimal polynomial of {desc.name} over {desc.base}")
        return field

    verdict = _irreducibility(field)
    if verdict is False:
        raise FieldError(f"minimal polynomial of {desc.name} is reducible over {desc.base}")
    if verdict is None:
        logger.warning(f"Irreducibility of the minimal polynomial of {desc.name} over {desc.base} "
                       f"could not be certified; continuing as trusted")
    field.verified = bool(verdict)
    return field


def _irreducibility(field: ExtensionField) -> Optional[bool]:
    """True / False when decided, None when no test applies to this base."""
    base = field.base
    m = list(field.monic)
    if isinstance(base, PrimeField):
        return _rabin_test(m, base)
    if isinstance(base, RationalField):
        if _has_rational_root(m):
            return False
        if field.degree <= 3:
            return True
        return _certify_mod_p(m)
    return None


def _has_rational_root(m) -> bool:
    den = 1
    for c in m:
        den = den * c.denominator // _gcd(den, c.denominator)
    ints = [int(c * den) for c in m]
    if ints[0] == 0:
        return True
    for p in _divisors(ints[0]):
        for q in _divisors(ints[-1]):
            for cand in (Fraction(p, q), Fraction(-p, q)):
                acc = Fraction(0)
                for c in reversed(ints):
                    acc = acc * cand + c
                if acc == 0:
                    return True
    return False


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def _rabin_test(m, fp: PrimeField) -> bool:
    zero, one = fp.zero, fp.one
    n = len(m) - 1
    x = [zero, one]
    power = x
    for _ in range(1, n // 2 + 1):
        power = upoly_powmod(power, fp.p, m, zero, one)
        g, _, _ = upoly_xgcd(upoly_sub(power, x, zero), m, zero, one)
        if len(g) > 1:
            return False
    return True


def _certify_mod_p(m, max_prime: int = 200) -> Optional[bool]:
    den = 1
    for c in m:
        den = den * c.denominator // _gcd(den, c.denominator)
    ints = [int(c * den) for c in m]
    for p in range(5, max_prime):
        if not _is_probable_prime(p) or ints[-1] % p == 0:
            continue
        fp = PrimeField(p)
        reduced = [fp(c) for c in ints]
        # a repeated factor mod p carries no information
        g, _, _ = upoly_xgcd(reduced, upoly_derivative(reduced), fp.zero, fp.one)
        if len(g) > 1:
            continue
        if _rabin_test([c / reduced[-1] for c in reduced], fp):
            return True
    return None


def upoly_derivative(a):
    return upoly_trim([c * k for k, c in enumerate(a)][1:])


# --- Convenience constructors used by the strata models and the tests ---

def quadratic_field(d: int, name: str, base: FieldDescriptor = None) -> Field:
    """base(sqrt(d)) presented by T^2 - d."""
    base = base or FieldDescriptor.rationals()
    return make_field(FieldDescriptor.extension(base, name, (-d, 0, 1), relation=f"{name}^2 = {d}"))


def gaussian_rationals() -> Field:
    return make_field(FieldDescriptor.extension(FieldDescriptor.rationals(), "i", (1, 0, 1),
                                                relation="i^2 = -1"))


def field_arith(a, b, op: str):
    """Dispatches one exact field operation by name (add, sub, mul, div, inv, neg, eq)."""
    if op == 'inv':
        return 1 / a
    if op == 'neg':
        return -a
    if b is not None and isinstance(a, (ExtElement, PrimeElement)) and isinstance(b, (ExtElement, PrimeElement)):
        if a.field != b.field:
            raise FieldMismatchError(f"{a.field} vs {b.field}")
    if op == 'add':
        return a + b
    if op == 'sub':
        return a - b
    if op == 'mul':
        return a * b
    if op == 'div':
        if b == 0:
            raise FieldDivisionByZero("division by zero")
        return a / b
    if op == 'eq':
        return a == b
    raise FieldError(f"unknown field operation '{op}'")
