import json
import logging
import re
from typing import Dict, List, Optional, Sequence, Tuple

from core.errors import ParseError, PolynomialError, QuartixError
from core.fields import Field, FieldDescriptor, make_field
from core.poly import LinearMap3, MultiPoly, TernaryQuartic, XYZ

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")

QUARTIC_ALIASES = {'X': 'x', 'Y': 'y', 'Z': 'z'}


class _ExpressionParser:
    """
    Recursive-descent parser for polynomial expressions with exact
    coefficients:

        expr   := term (('+' | '-') term)*
        term   := unary (('*' | '/')? unary)*
        unary  := ('+' | '-') unary | power
        power  := atom ('^' integer)?
        atom   := integer | symbol | '(' expr ')'

    Symbols are either polynomial variables or generator names declared by
    the coefficient field. Division is only allowed by constants.
    """

    def __init__(self, text: str, field: Field, variables: Sequence[str],
                 aliases: Optional[Dict[str, str]] = None):
        self.text = text
        self.field = field
        self.variables = tuple(variables)
        self.aliases = aliases or {}
        self.generators = field.generators()
        self.tokens = self._tokenize(text)
        self.pos = 0
        # (position, value) of each top-level summand, for degree diagnostics
        self.summands: List[Tuple[int, MultiPoly]] = []

    def _tokenize(self, text):
        tokens = []
        idx = 0
        while idx < len(text):
            m = _TOKEN.match(text, idx)
            if m is None or m.end() == idx:
                break
            start = m.start(m.lastindex) if m.lastindex else m.start()
            number, name, other = m.groups()
            if number is not None:
                tokens.append(('num', number, start))
            elif name is not None:
                tokens.extend(self._split_symbol(name, start))
            elif other is not None and not other.isspace():
                tokens.append(('op', other, start))
            idx = m.end()
        tokens.append(('end', None, len(text)))
        return tokens

    def _known(self, name: str) -> bool:
        name = self.aliases.get(name, name)
        return name in self.variables or name in self.generators

    def _split_symbol(self, name, start):
        if self._known(name):
            return [('sym', name, start)]
        # juxtaposed single-letter symbols such as "XY" or "it"
        if all(self._known(ch) for ch in name):
            return [('sym', ch, start + k) for k, ch in enumerate(name)]
        raise ParseError(f"undeclared symbol '{name}'", start)

    # --- Token helpers ---

    def _peek(self):
        return self.tokens[self.pos]

    def _next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def _expect(self, op):
        kind, value, where = self._next()
        if kind != 'op' or value != op:
            raise ParseError(f"expected '{op}'", where)

    # --- Grammar ---

    def parse(self) -> MultiPoly:
        if self._peek()[0] == 'end':
            raise ParseError("empty expression", 0)
        value = self._expr(top_level=True)
        kind, tok, where = self._peek()
        if kind != 'end':
            raise ParseError(f"unexpected '{tok}'", where)
        return value

    def _expr(self, top_level=False) -> MultiPoly:
        start = self._peek()[2]
        value = self._term()
        if top_level:
            self.summands.append((start, value))
        while True:
            kind, op, where = self._peek()
            if kind == 'op' and op in '+-':
                self._next()
                start = self._peek()[2]
                rhs = self._term()
                if top_level:
                    self.summands.append((start, rhs))
                value = value + rhs if op == '+' else value - rhs
            else:
                return value

    def _starts_factor(self, tok) -> bool:
        kind, value, _ = tok
        return kind in ('num', 'sym') or (kind == 'op' and value == '(')

    def _term(self) -> MultiPoly:
        value = self._unary()
        while True:
            tok = self._peek()
            kind, op, where = tok
            if kind == 'op' and op == '*':
                self._next()
                value = value * self._unary()
            elif kind == 'op' and op == '/':
                self._next()
                divisor = self._unary()
                if not divisor.is_constant():
                    raise ParseError("division by a non-constant expression", where)
                if divisor.is_zero():
                    raise ParseError("division by zero", where)
                value = value * (1 / divisor.constant_value())
            elif self._starts_factor(tok):
                value = value * self._unary()
            else:
                return value

    def _unary(self) -> MultiPoly:
        kind, op, _ = self._peek()
        if kind == 'op' and op in '+-':
            self._next()
            inner = self._unary()
            return -inner if op == '-' else inner
        return self._power()

    def _power(self) -> MultiPoly:
        base = self._atom()
        kind, op, where = self._peek()
        if kind == 'op' and op == '^':
            self._next()
            kind, exp, where = self._next()
            if kind == 'op' and exp == '(':
                kind, exp, where = self._next()
                self._expect(')')
            if kind != 'num':
                raise ParseError("exponent must be a nonnegative integer", where)
            return base ** int(exp)
        return base

    def _atom(self) -> MultiPoly:
        kind, value, where = self._next()
        if kind == 'num':
            return MultiPoly.constant(int(value), self.variables, self.field)
        if kind == 'sym':
            name = self.aliases.get(value, value)
            if name in self.variables:
                return MultiPoly.variable(self.variables.index(name), self.variables, self.field)
            return MultiPoly.constant(self.generators[name], self.variables, self.field)
        if kind == 'op' and value == '(':
            inner = self._expr()
            self._expect(')')
            return inner
        if kind == 'end':
            raise ParseError("unexpected end of input", where)
        raise ParseError(f"unexpected '{value}'", where)


def parse_polynomial(text: str, field: Field, variables: Sequence[str],
                     aliases: Optional[Dict[str, str]] = None) -> MultiPoly:
    return _ExpressionParser(text, field, variables, aliases).parse()


def parse_constant(text: str, field: Field):
    """A field literal such as '18/5', '1+i' or '(3+s7)/2'."""
    poly = parse_polynomial(text, field, ())
    return poly.constant_value()


def parse_quartic(text: str, field: Field) -> TernaryQuartic:
    """Parses a quartic in X, Y, Z (either case) over the given field."""
    parser = _ExpressionParser(text, field, XYZ, QUARTIC_ALIASES)
    poly = parser.parse()
    for where, summand in parser.summands:
        if summand.is_zero():
            continue
        if not summand.is_homogeneous():
            raise ParseError("inhomogeneous term", where)
        if summand.degree() != 4:
            raise ParseError(f"term of degree {summand.degree()}, expected 4", where)
    if poly.is_zero():
        raise ParseError("the quartic is the zero polynomial", 0)
    try:
        return TernaryQuartic(poly)
    except PolynomialError as e:
        raise ParseError(str(e), 0)


def parse_coefficient_map(mapping, field: Field) -> TernaryQuartic:
    """
    Coefficient map keyed by "i,j,k" in the integral convention
    F = sum a_ijk X^i Y^j Z^k; values are field literals. Accepts a dict or
    its JSON text.
    """
    if isinstance(mapping, str):
        try:
            mapping = json.loads(mapping)
        except json.JSONDecodeError as e:
            raise ParseError(f"coefficient map is not valid JSON: {e.msg}", e.pos)
    coefficients = {}
    for key, value in mapping.items():
        try:
            exponent = tuple(int(part) for part in key.split(','))
        except ValueError:
            raise ParseError(f"bad exponent key '{key}'")
        if len(exponent) != 3 or sum(exponent) != 4 or min(exponent) < 0:
            raise ParseError(f"exponent key '{key}' is not a degree-4 monomial")
        coefficients[exponent] = parse_constant(str(value), field)
    try:
        return TernaryQuartic.from_coefficients(coefficients, field)
    except PolynomialError as e:
        raise ParseError(str(e))


def parse_transform(text: str, field: Field) -> LinearMap3:
    """'a,b,c;d,e,f;g,h,k' -> LinearMap3 (rows separated by ';')."""
    rows = [r for r in text.split(';')]
    if len(rows) != 3:
        raise ParseError("a transform needs three rows separated by ';'")
    entries = []
    for row in rows:
        cells = row.split(',')
        if len(cells) != 3:
            raise ParseError(f"row '{row}' needs three entries")
        entries.append([parse_constant(c, field) for c in cells])
    gamma = LinearMap3.from_rows(entries, field)
    if gamma.det == 0:
        raise ParseError("the transform is singular")
    return gamma


# ==============================================================================
# Field descriptors
# ==============================================================================

def _split_top_level(text: str, sep: str = ';') -> List[str]:
    parts, depth, current = [], 0, []
    for ch in text:
        if ch == '(':
            depth += 1
        elif ch == ')':
            depth -= 1
        if ch == sep and depth == 0:
            parts.append(''.join(current).strip())
            current = []
        else:
            current.append(ch)
    parts.append(''.join(current).strip())
    return parts


def parse_field_descriptor(text: str) -> FieldDescriptor:
    """
    Field syntax: Q, Fp(p), Q(i), Q(sqrt(d)) or Q(sqrt(d); name), and
    ext(<base>; <name>; <minimal polynomial or relation in name>[; trusted]).
    The default name for Q(sqrt(d)) is s<d>, with 'm' for a minus sign (s7, sm7).
    """
    t = text.strip()
    if t == 'Q':
        return FieldDescriptor.rationals()

    m = re.fullmatch(r"Fp\(\s*(\d+)\s*\)", t)
    if m:
        return FieldDescriptor.prime(int(m.group(1)))

    if t.replace(' ', '') == 'Q(i)':
        return FieldDescriptor.extension(FieldDescriptor.rationals(), 'i', (1, 0, 1), relation="i^2 = -1")

    m = re.fullmatch(r"Q\(\s*sqrt\(\s*(-?\d+)\s*\)\s*(?:;\s*([A-Za-z_]\w*)\s*)?\)", t)
    if m:
        d = int(m.group(1))
        name = m.group(2) or ("s" + str(d).replace('-', 'm'))
        return FieldDescriptor.extension(FieldDescriptor.rationals(), name, (-d, 0, 1),
                                         relation=f"{name}^2 = {d}")

    if t.startswith('ext(') and t.endswith(')'):
        parts = _split_top_level(t[4:-1])
        if len(parts) not in (3, 4):
            raise ParseError(f"ext() takes base; name; minimal polynomial[; trusted]: '{text}'")
        trusted = len(parts) == 4 and parts[3] == 'trusted'
        if len(parts) == 4 and not trusted:
            raise ParseError(f"unknown ext() flag '{parts[3]}'")
        base_desc = parse_field_descriptor(parts[0])
        name = parts[1]
        if not re.fullmatch(r"[A-Za-z_]\w*", name):
            raise ParseError(f"bad generator name '{name}'")
        base = make_field(base_desc)
        relation = parts[2]
        if '=' in relation:
            lhs, rhs = relation.split('=', 1)
            poly = parse_polynomial(lhs, base, (name,)) - parse_polynomial(rhs, base, (name,))
        else:
            poly = parse_polynomial(relation, base, (name,))
        return FieldDescriptor.extension(base_desc, name, tuple(poly.to_univariate()),
                                         relation=relation, trusted=trusted)

    raise ParseError(f"unrecognized field descriptor '{text}'")


def parse_field(text: str) -> Field:
    try:
        return make_field(parse_field_descriptor(text))
    except ParseError:
        raise
    except QuartixError as e:
        logger.error(f"Field construction failed for '{text}': {e}")
        raise
