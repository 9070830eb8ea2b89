from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from core.fields import Field as CoefficientField, QQ

# Exact values serialize to strings ("num/den"), prime-field residues, or
# nested lists of coefficients on the power basis of an extension.
Exact = Any


def exact(value, field: CoefficientField = None) -> Exact:
    if value is None:
        return None
    field = field or getattr(value, 'field', None) or QQ
    return field.serialize(value)


def approx(value, field: CoefficientField = None) -> Optional[str]:
    """Display-only decimal rendering."""
    if value is None:
        return None
    field = field or getattr(value, 'field', None) or QQ
    try:
        z = complex(field.approx(value))
    except (NotImplementedError, ValueError):
        return None
    if abs(z.imag) < 1e-12 * max(1.0, abs(z.real)):
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}i"


class InvariantsReport(BaseModel):
    command: str = 'invariants'
    field: str
    curve: str
    invariants: Dict[str, Exact]
    smooth: bool
    approx: Optional[Dict[str, Optional[str]]] = None


class AbsolutesReport(BaseModel):
    command: str = 'absolutes'
    field: str
    curve: str
    i: Dict[str, Exact]
    j: Dict[str, Exact]
    approx: Optional[Dict[str, Optional[str]]] = None


class FlexReportModel(BaseModel):
    command: str = 'hyperflex'
    field: str
    curve: str
    hyperflex_count: int
    flex_count_distinct: int
    deg_R: int
    deg_G: int
    G: str
    coordinate_change: List[List[Exact]]
    frames_tried: int
    divisor_consistent: bool
    warnings: List[str] = Field(default_factory=list)


class DiagnosticModel(BaseModel):
    label: str
    test: str
    passed: Optional[bool]
    residuals: Dict[str, Exact] = Field(default_factory=dict)
    note: str = ''


class StratumReportModel(BaseModel):
    command: str = 'classify'
    field: str
    curve: str
    stratum: Optional[str]
    s: Optional[int] = None
    dim: Optional[int] = None
    z: Exact = None
    secondary: List[str] = Field(default_factory=list)
    closure: List[str] = Field(default_factory=list)
    hyperflex_count: Optional[int] = None
    hyperflex_mismatch: bool = False
    candidates: List[str] = Field(default_factory=list)
    note: str = ''
    diagnostics: List[DiagnosticModel] = Field(default_factory=list)
    approx: Optional[Dict[str, Optional[str]]] = None


class CompareReport(BaseModel):
    command: str = 'compare'
    field: str
    curves: List[str]
    equal: bool


class ReconstructReport(BaseModel):
    command: str = 'reconstruct'
    stratum: str
    z: Exact
    param_poly: str
    template: str
    t: Exact
    field: str
    model: str


class ModelReport(BaseModel):
    command: str = 'model'
    label: str
    field: str
    model: str
    s: int
    dim: int
    jcubic: Optional[str] = None


class CalibrationReport(BaseModel):
    command: str = 'calibrate'
    c_sigma: Exact
    c_psi: Exact
    scalars: Dict[str, Exact]
    corrections: Dict[str, Exact]
    anchors: List[str]
    errata: List[str] = []
    verified: bool


REPORTS = {
    'invariants': InvariantsReport,
    'absolutes': AbsolutesReport,
    'hyperflex': FlexReportModel,
    'classify': StratumReportModel,
    'compare': CompareReport,
    'reconstruct': ReconstructReport,
    'model': ModelReport,
    'calibrate': CalibrationReport,
}
