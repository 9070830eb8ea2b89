import logging
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from core.errors import ParseError, StrataError
from core.fields import Field, QQ
from core.parser import parse_constant, parse_field, parse_polynomial, parse_quartic
from core.poly import MultiPoly, TernaryQuartic

logger = logging.getLogger(__name__)

DATA_FILE = Path(__file__).parent / 'data' / 'strata.txt'

I_VARS = ('i1', 'i2', 'i3', 'i4', 'i5', 'i6')


@dataclass(frozen=True)
class StratumRow:
    label: str
    s: int
    dim: int
    substrata: Tuple[str, ...]


@dataclass
class StrataCatalog:
    """In-memory view of the strata data file; expressions are parsed on demand."""
    rows: Dict[str, StratumRow] = dc_field(default_factory=dict)
    members: Dict[str, Tuple[str, ...]] = dc_field(default_factory=dict)
    models: Dict[str, Tuple[str, str]] = dc_field(default_factory=dict)
    tuples: Dict[Tuple[str, str], Tuple[str, ...]] = dc_field(default_factory=dict)
    ideals: Dict[str, List[str]] = dc_field(default_factory=dict)
    closed_forms: Dict[Tuple[str, str], Tuple[Tuple[str, ...], str, str]] = dc_field(default_factory=dict)
    params: Dict[str, Tuple[Tuple[str, ...], str]] = dc_field(default_factory=dict)
    templates: Dict[str, Tuple[str, str]] = dc_field(default_factory=dict)
    jcubics: Dict[str, str] = dc_field(default_factory=dict)

    # --- Labels ---

    def row(self, label: str) -> StratumRow:
        """Table row of a label; component labels (Pi1, Omega2) resolve to their union."""
        union = self.union_of(label)
        if union not in self.rows:
            raise StrataError(f"unknown stratum '{label}'")
        return self.rows[union]

    def union_of(self, label: str) -> str:
        for union, parts in self.members.items():
            if label in parts:
                return union
        return label

    def closure(self, label: str) -> List[str]:
        """Every stratum whose closure contains `label`, nearest first."""
        target = self.union_of(label)
        found: List[str] = []
        frontier = [target]
        while frontier:
            nxt = []
            for current in frontier:
                for row in self.rows.values():
                    if current in row.substrata and row.label not in found:
                        found.append(row.label)
                        nxt.append(row.label)
            frontier = nxt
        return found

    # --- Parsed data ---

    def tuple_values(self, label: str, kind: str) -> Optional[Tuple]:
        texts = self.tuples.get((label, kind))
        if texts is None:
            return None
        return tuple(parse_constant(t, QQ) for t in texts)

    def ideal(self, label: str, field: Field = QQ) -> List[MultiPoly]:
        return [parse_polynomial(t, field, I_VARS) for t in self.ideals.get(self.union_of(label), [])]

    def closed(self, label: str, name: str, field: Field = QQ) -> Tuple[MultiPoly, MultiPoly]:
        try:
            variables, num, den = self.closed_forms[(label, name)]
        except KeyError:
            raise StrataError(f"no closed form '{name}' for {label}")
        return parse_polynomial(num, field, variables), parse_polynomial(den, field, variables)

    def param(self, label: str, field: Field = QQ) -> MultiPoly:
        try:
            variables, text = self.params[label]
        except KeyError:
            raise StrataError(f"no parameter polynomial for {label}")
        return parse_polynomial(text, field, variables)

    def template(self, label: str, field: Optional[Field] = None) -> MultiPoly:
        """Model template as a polynomial in (x, y, z, t)."""
        try:
            field_text, text = self.templates[label]
        except KeyError:
            raise StrataError(f"no model template for {label}")
        field = field or parse_field(field_text)
        return parse_polynomial(text, field, ('x', 'y', 'z', 't'), {'X': 'x', 'Y': 'y', 'Z': 'z'})

    def template_field(self, label: str) -> Field:
        return parse_field(self.templates[label][0])

    def model(self, label: str) -> TernaryQuartic:
        try:
            field_text, text = self.models[label]
        except KeyError:
            raise StrataError(f"no builtin model for '{label}'")
        return parse_quartic(text, parse_field(field_text))

    def jcubic(self, label: str) -> Optional[MultiPoly]:
        text = self.jcubics.get(self.union_of(label))
        return parse_polynomial(text, QQ, ('j',)) if text else None


def _split(line: str) -> List[str]:
    return [part.strip() for part in line.split('|')]


def _names(text: str) -> Tuple[str, ...]:
    if text == '-':
        return ()
    return tuple(n.strip() for n in text.split(',') if n.strip())


def parse_catalog(text: str) -> StrataCatalog:
    catalog = StrataCatalog()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        parts = _split(line)
        kind, args = parts[0], parts[1:]
        try:
            if kind == 'stratum':
                label, s, dim, subs = args
                catalog.rows[label] = StratumRow(label, int(s), int(dim), _names(subs))
            elif kind == 'member':
                union, parts_text = args
                catalog.members[union] = _names(parts_text)
            elif kind == 'model':
                label, field_text, expr = args
                catalog.models[label] = (field_text, expr)
            elif kind == 'tuple':
                label, which, values = args
                entries = tuple(v.strip() for v in values.split(';'))
                if which not in ('i', 'j') or len(entries) != 6:
                    raise StrataError("tuple needs kind i or j and six values")
                catalog.tuples[(label, which)] = entries
            elif kind == 'ideal':
                label, expr = args
                catalog.ideals.setdefault(label, []).append(expr)
            elif kind == 'closed':
                label, name, variables, num, den = args
                catalog.closed_forms[(label, name)] = (_names(variables), num, den)
            elif kind == 'param':
                label, variables, expr = args
                catalog.params[label] = (_names(variables), expr)
            elif kind == 'template':
                label, field_text, expr = args
                catalog.templates[label] = (field_text, expr)
            elif kind == 'jcubic':
                label, expr = args
                catalog.jcubics[label] = expr
            else:
                raise StrataError(f"unknown record kind '{kind}'")
        except ValueError:
            raise StrataError(f"strata data line {lineno}: wrong number of fields for '{kind}'")
        except StrataError as e:
            raise StrataError(f"strata data line {lineno}: {e}")
    return catalog


@lru_cache(maxsize=None)
def load_catalog(path: Optional[str] = None) -> StrataCatalog:
    source = Path(path) if path else DATA_FILE
    logger.debug(f"Loading strata data from {source}")
    try:
        catalog = parse_catalog(source.read_text())
    except OSError as e:
        raise StrataError(f"cannot read strata data {source}: {e}")
    # parse every constant once so a malformed file fails at load time
    for (label, kind) in catalog.tuples:
        try:
            catalog.tuple_values(label, kind)
        except ParseError as e:
            raise StrataError(f"bad {kind}-tuple for {label}: {e}")
    return catalog
