import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd
from pydantic import BaseModel, model_validator

from config import settings
from core.database import ResultStore
from core.errors import ParseError, QuartixError, StrataError
from core.invariants import (NAMES, CalibrationTable, absolute_invariants, calibrate,
                             dixmier_ohno, weighted_equal)
from core.parser import parse_coefficient_map, parse_constant, parse_field, parse_quartic, parse_transform
from core.poly import TernaryQuartic
from core.reports import (AbsolutesReport, CalibrationReport, CompareReport, DiagnosticModel, FlexReportModel,
                          InvariantsReport, ModelReport, ReconstructReport, StratumReportModel, approx, exact)
from core.strata import (StratumLabel, builtin_model, calibration_anchors, classify, reconstruct_z1,
                         reconstruct_z4)
from core.strata_data import load_catalog
from core.weierstrass import hyperflex_form

logger = logging.getLogger(__name__)


class CurveInput(BaseModel):
    """A field descriptor plus either an expression in X, Y, Z or a coefficient map keyed by "i,j,k"."""
    field: str = 'Q'
    curve: Optional[str] = None
    coeffs: Optional[Union[str, Dict[str, Union[str, int]]]] = None
    transform: Optional[str] = None
    curve_id: Optional[str] = None

    @model_validator(mode='after')
    def one_source(self):
        if (self.curve is None) == (self.coeffs is None):
            raise ValueError("give exactly one of curve or coeffs")
        return self

    def label(self) -> str:
        if self.curve is not None:
            return self.curve
        return self.coeffs if isinstance(self.coeffs, str) else json.dumps(self.coeffs, sort_keys=True)

    def load(self) -> TernaryQuartic:
        field = parse_field(self.field)
        if self.curve is not None:
            F = parse_quartic(self.curve, field)
        else:
            F = parse_coefficient_map(self.coeffs, field)
        if self.transform:
            F = F.transform(parse_transform(self.transform, field))
        return F


class QuartixService:
    """Runs the engines for the CLI and turns their results into reports."""

    def __init__(self, show_approx: bool = False):
        self.show_approx = show_approx

    # --- Single curves ---

    def invariants(self, source: CurveInput) -> InvariantsReport:
        F = source.load()
        v = dixmier_ohno(F)
        values = v.as_dict()
        return InvariantsReport(
            field=source.field, curve=str(F),
            invariants={k: exact(x, v.field) for k, x in values.items()},
            smooth=v['I27'] != 0,
            approx={k: approx(x, v.field) for k, x in values.items()} if self.show_approx else None,
        )

    def absolutes(self, source: CurveInput) -> AbsolutesReport:
        F = source.load()
        v = dixmier_ohno(F)
        a = absolute_invariants(v)
        i = {f"i{k + 1}": x for k, x in enumerate(a.i)}
        j = {f"j{k + 1}": x for k, x in enumerate(a.j)}
        shown = None
        if self.show_approx:
            shown = {k: approx(x, v.field) for k, x in {**i, **j}.items()}
        return AbsolutesReport(
            field=source.field, curve=str(F),
            i={k: exact(x, v.field) for k, x in i.items()},
            j={k: exact(x, v.field) for k, x in j.items()},
            approx=shown,
        )

    def hyperflex(self, source: CurveInput) -> FlexReportModel:
        F = source.load()
        report = hyperflex_form(F)
        gamma = report.coordinate_change_used
        return FlexReportModel(
            field=source.field, curve=str(F),
            hyperflex_count=report.hyperflex_count,
            flex_count_distinct=report.flex_count_distinct,
            deg_R=report.R.degree(), deg_G=report.G.degree(), G=str(report.G),
            coordinate_change=[[exact(c, F.field) for c in row] for row in gamma.rows],
            frames_tried=report.frames_tried,
            divisor_consistent=report.divisor_consistent(),
            warnings=report.warnings,
        )

    def classify(self, source: CurveInput, with_hyperflex: bool = True) -> StratumReportModel:
        F = source.load()
        v = dixmier_ohno(F)
        count = None
        if with_hyperflex and v['I27'] != 0:
            count = hyperflex_form(F, check_smooth=False).hyperflex_count
        report = classify(v, count)
        diagnostics = [
            DiagnosticModel(label=d.label, test=d.test, passed=d.passed, note=d.note,
                            residuals={k: exact(r, v.field) for k, r in d.residuals.items()})
            for d in report.diagnostics
        ]
        return StratumReportModel(
            field=source.field, curve=str(F),
            stratum=report.stratum, s=report.s, dim=report.dim,
            z=exact(report.z, v.field) if report.z is not None else None,
            secondary=report.secondary, closure=report.closure,
            hyperflex_count=report.hyperflex_count, hyperflex_mismatch=report.hyperflex_mismatch,
            candidates=report.candidates, note=report.note, diagnostics=diagnostics,
            approx={'z': approx(report.z, v.field)} if self.show_approx and report.z is not None else None,
        )

    def compare(self, first: CurveInput, second: CurveInput) -> CompareReport:
        F, G = first.load(), second.load()
        if F.field != G.field:
            raise QuartixError(f"curves over different fields: {F.field} vs {G.field}")
        equal = weighted_equal(dixmier_ohno(F), dixmier_ohno(G))
        return CompareReport(field=first.field, curves=[str(F), str(G)], equal=equal)

    def reconstruct(self, stratum: str, z_text: str, field_text: str = 'Q') -> ReconstructReport:
        field = parse_field(field_text)
        z = parse_constant(z_text, field)
        if stratum == 'Z1':
            rec = reconstruct_z1(z)
        elif stratum == 'Z4':
            rec = reconstruct_z4(z)
        else:
            raise StrataError(f"reconstruction is available for Z1 and Z4, not '{stratum}'")
        return ReconstructReport(
            stratum=stratum, z=exact(z, field), param_poly=str(rec.param_poly), template=str(rec.template),
            t=exact(rec.t, rec.field), field=str(rec.field.descriptor), model=str(rec.model),
        )

    def model(self, label: str) -> ModelReport:
        F = builtin_model(label)
        catalog = load_catalog()
        stratum = StratumLabel.of(label)
        cubic = catalog.jcubic(label)
        return ModelReport(label=label, field=str(F.field.descriptor), model=str(F),
                           s=stratum.s, dim=stratum.dim, jcubic=str(cubic) if cubic is not None else None)

    def calibration(self, verify: bool = True) -> CalibrationReport:
        anchors = calibration_anchors()
        table: CalibrationTable = calibrate(anchors, verify=verify)
        return CalibrationReport(
            c_sigma=exact(table.c_sigma), c_psi=exact(table.c_psi),
            scalars={n: exact(table.scalar(n)) for n in NAMES},
            corrections={n: exact(table.correction(n)) for n in NAMES},
            anchors=[a.name for a in anchors], errata=[e.describe() for e in table.errata], verified=verify,
        )

    # --- Batch ---

    @staticmethod
    def read_batch(path: str) -> List[CurveInput]:
        """
        One curve per line: `field | quartic` or `id | field | quartic`; the
        quartic may be a JSON coefficient map. Blank lines and '#' comments
        are skipped.
        """
        entries = []
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            parts = [p.strip() for p in line.split('|')]
            if len(parts) == 2:
                curve_id, (field, text) = str(lineno), parts
            elif len(parts) == 3:
                curve_id, field, text = parts
            else:
                raise ParseError(f"batch line {lineno}: expected 'field | quartic'")
            if text.startswith('{'):
                entries.append(CurveInput(field=field, coeffs=text, curve_id=curve_id))
            else:
                entries.append(CurveInput(field=field, curve=text, curve_id=curve_id))
        logger.info(f"Read {len(entries)} curves from {path}")
        return entries

    def run_batch(self, entries: List[CurveInput], workers: int = None) -> pd.DataFrame:
        workers = workers or settings.WORKERS
        logger.info(f"Processing {len(entries)} curves with {workers} worker(s)")
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(process_entry, entries))
        else:
            rows = [process_entry(e) for e in entries]
        return pd.DataFrame(rows)

    @staticmethod
    def store(df: pd.DataFrame, run_id: str = None) -> int:
        db = ResultStore()
        try:
            return db.save_dataframe(df, run_id)
        finally:
            db.close()

    @staticmethod
    def summarize(df: pd.DataFrame) -> pd.DataFrame:
        """Curve counts per stratum and status."""
        if df.empty:
            return pd.DataFrame(columns=['stratum', 'status', 'curves', 'mean_hyperflexes'])
        frame = df.copy()
        frame['stratum'] = frame['stratum'].fillna('-')
        frame['hyperflex_count'] = pd.to_numeric(frame['hyperflex_count'], errors='coerce')
        summary = frame.groupby(['stratum', 'status'], dropna=False).agg(
            curves=('curve_id', 'count'),
            mean_hyperflexes=('hyperflex_count', 'mean'),
        ).reset_index()
        return summary.sort_values(['curves', 'stratum'], ascending=[False, True]).reset_index(drop=True)


def process_entry(entry: CurveInput) -> dict:
    """One batch row; failures are recorded, not raised."""
    row = {'curve_id': entry.curve_id, 'field': entry.field, 'curve': entry.label(), 'status': 'ok',
           'stratum': None, 's': None, 'dim': None, 'hyperflex_count': None, 'I3': None,
           'invariants': None, 'message': ''}
    try:
        F = entry.load()
        v = dixmier_ohno(F)
        row['I3'] = json.dumps(exact(v['I3'], v.field))
        row['invariants'] = json.dumps({k: exact(x, v.field) for k, x in v.as_dict().items()})
        if v['I27'] == 0:
            row['status'] = 'singular'
            return row
        count = hyperflex_form(F, check_smooth=False).hyperflex_count
        row['hyperflex_count'] = count
        report = classify(v, count)
        row.update(stratum=report.stratum, s=report.s, dim=report.dim, message=report.note)
        if report.hyperflex_mismatch:
            row['status'] = 'mismatch'
    except QuartixError as e:
        logger.error(f"Curve {entry.curve_id} failed: {e}")
        row['status'] = 'error'
        row['message'] = str(e)
    return row
