import argparse
import json
import logging
import sys

from pydantic import ValidationError

from config import settings
from core.data_service import CurveInput, QuartixService
from core.errors import QuartixError

# Configure Logging (stderr: stdout carries only the JSON report)
logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[logging.StreamHandler(sys.stderr)]
)
logger = logging.getLogger(__name__)

EXIT_OK, EXIT_DIFFERENT, EXIT_ERROR = 0, 1, 2

COEFFS_HELP = ("coefficient map as JSON keyed by \"i,j,k\" in the integral convention "
               "F = sum a_ijk X^i Y^j Z^k (no multinomial factors)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='quartix',
        description="Exact Dixmier-Ohno invariants, hyperflexes and strata of plane quartics.",
    )
    sub = parser.add_subparsers(dest='command', required=True)

    def curve_args(p, multiple=False):
        p.add_argument('--field', default='Q',
                       help="Q, Fp(p), Q(i), Q(sqrt(d)), Q(sqrt(d); name) or ext(base; name; relation)")
        if multiple:
            p.add_argument('--curve', action='append', help="quartic in X, Y, Z (give twice to compare two curves)")
            p.add_argument('--coeffs', action='append', help=COEFFS_HELP)
            p.add_argument('--transform', help="a,b,c;d,e,f;g,h,k applied to the second curve "
                                               "(or to the only curve, giving the second)")
        else:
            p.add_argument('--curve', help="quartic in X, Y, Z, e.g. 'X^4+Y^4+Z^4'")
            p.add_argument('--coeffs', help=COEFFS_HELP)
            p.add_argument('--transform', help="substitute (X,Y,Z) -> gamma (X,Y,Z), rows 'a,b,c;d,e,f;g,h,k'")
        p.add_argument('--approx', action='store_true', help="add display-only decimal renderings")

    def batch_args(p):
        p.add_argument('--batch', help="file with one curve per line: '[id |] field | quartic'")
        p.add_argument('--store', action='store_true', help="append batch rows to the DuckDB result store")
        p.add_argument('--summary', action='store_true', help="print a per-stratum summary table to stderr")

    for name, text in (('invariants', "the thirteen integral Dixmier-Ohno invariants"),
                       ('absolutes', "the twelve absolute invariants (needs I3 != 0)"),
                       ('hyperflex', "hyperflex count through the flex resultant"),
                       ('classify', "stratum of the curve from its invariants")):
        p = sub.add_parser(name, help=text)
        curve_args(p)
        if name in ('invariants', 'classify'):
            batch_args(p)
        if name == 'classify':
            p.add_argument('--no-hyperflex', action='store_true', help="skip the hyperflex cross-check")

    p = sub.add_parser('compare', help="isomorphism over the algebraic closure (exit 0 equal, 1 different)")
    curve_args(p, multiple=True)

    p = sub.add_parser('reconstruct', help="representative curve of Z1 or Z4 at a given z")
    p.add_argument('--stratum', required=True, choices=['Z1', 'Z4'])
    p.add_argument('--z', required=True, help="value of z as a field literal")
    p.add_argument('--field', default='Q')

    p = sub.add_parser('model', help="builtin model of a zero-dimensional stratum")
    p.add_argument('--stratum', required=True)

    p = sub.add_parser('calibrate', help="recompute the invariant calibration table from the anchors")
    p.add_argument('--no-verify', action='store_true', help="skip the anchor regression")
    return parser


def _single_input(args) -> CurveInput:
    return CurveInput(field=args.field, curve=args.curve, coeffs=args.coeffs, transform=args.transform)


def _compare_inputs(args):
    sources = [CurveInput(field=args.field, curve=c) for c in (args.curve or [])]
    sources += [CurveInput(field=args.field, coeffs=c) for c in (args.coeffs or [])]
    if len(sources) == 1 and args.transform:
        sources.append(sources[0].model_copy(update={'transform': args.transform}))
    elif len(sources) == 2 and args.transform:
        sources[1] = sources[1].model_copy(update={'transform': args.transform})
    if len(sources) != 2:
        raise QuartixError("compare needs two curves, or one curve and --transform")
    return sources


def _emit(payload) -> None:
    print(json.dumps(payload, indent=2))


def _run_batch(service: QuartixService, args) -> int:
    entries = service.read_batch(args.batch)
    df = service.run_batch(entries)
    if args.store:
        stored = service.store(df)
        logger.info(f"Stored {stored} rows in {settings.DATABASE_URL}")
    if args.summary:
        print("\n--- BATCH SUMMARY ---", file=sys.stderr)
        print(service.summarize(df).to_string(index=False), file=sys.stderr)
    _emit(json.loads(df.to_json(orient='records')))
    return EXIT_OK if (df.empty or (df['status'] != 'error').all()) else EXIT_ERROR


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    service = QuartixService(show_approx=getattr(args, 'approx', False))
    try:
        if getattr(args, 'batch', None):
            return _run_batch(service, args)
        if args.command == 'invariants':
            report = service.invariants(_single_input(args))
        elif args.command == 'absolutes':
            report = service.absolutes(_single_input(args))
        elif args.command == 'hyperflex':
            report = service.hyperflex(_single_input(args))
        elif args.command == 'classify':
            report = service.classify(_single_input(args), with_hyperflex=not args.no_hyperflex)
        elif args.command == 'compare':
            report = service.compare(*_compare_inputs(args))
            _emit(report.model_dump())
            return EXIT_OK if report.equal else EXIT_DIFFERENT
        elif args.command == 'reconstruct':
            report = service.reconstruct(args.stratum, args.z, args.field)
        elif args.command == 'model':
            report = service.model(args.stratum)
        else:
            report = service.calibration(verify=not args.no_verify)
    except (QuartixError, ZeroDivisionError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR
    except ValidationError as e:
        logger.error(f"{args.command}: invalid input: {e.errors()[0]['msg']}")
        return EXIT_ERROR
    _emit(report.model_dump())
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
