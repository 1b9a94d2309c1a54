"""
Łukasiewicz PWL Engine - Main Entry Point

Batch front end: every verb compiles its inputs, runs one analysis and
writes a deterministic JSON or CSV report to stdout.
"""

import argparse
import sys
from typing import List, Optional

from src.cli.service import RichUserInterface, setup_logging
from src.core.abstractions import ExitCode, JobSpec, OutputFormat, ValidationError, Verb
from src.core.orchestrator import AVAILABLE_SUITES, EngineOrchestrator


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    """Flags shared by every verb; None means the config value applies."""
    source = parser.add_mutually_exclusive_group()
    source.add_argument('-e', '--expression', help='Inline formula')
    source.add_argument('-f', '--file', dest='input_path', help='Input file (formula, JSON spec or polyhedron)')
    parser.add_argument('--precision', type=int, help='Precision index k for real scalars')
    parser.add_argument('--cap', type=int, help='Cell-count cap')
    parser.add_argument('--format', choices=['json', 'csv'], help='Report format')
    parser.add_argument('--seed', type=int, help='Seed recorded in the report and used by self-test suites')
    parser.add_argument('--dump-pwl', metavar='PATH', help='Write the compiled PWL function to PATH')
    parser.add_argument('--output', metavar='PATH', help='Write the report to PATH instead of stdout')
    parser.add_argument('--config', default='config.yaml', help='Configuration file path')
    parser.add_argument('--scalars', metavar='PATH', help='Scalar registry (name = expr per line)')
    parser.add_argument('--verbose', action='store_true', help='Debug logging on stderr')


def create_parser() -> argparse.ArgumentParser:
    """Create and configure argument parser."""
    parser = argparse.ArgumentParser(
        description="Exact piecewise-linear engine for Łukasiewicz logic and its scalar extensions",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Truth degree of an L formula
  python main.py truth-degree -e "v1 \\/ ~v1"

  # Integral state
  python main.py integral -e "v1 + v1"

  # Consequence with inline premises
  python main.py consequence --premise "v1" -e "v1 + v1"

  # Limit check at rate r_n
  python main.py limit-check --sequence ramp.json -e "v1" --rate --upto 30

  # Self-test suite
  python main.py selftest --suite axioms --seed 7
        """
    )
    verbs = parser.add_subparsers(dest='verb', required=True, metavar='VERB')

    def verb(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = verbs.add_parser(name, help=help_text)
        _add_common_arguments(sub)
        return sub

    verb('eval', 'Evaluate a formula at a point').add_argument(
        '--point', help='Comma-separated rationals, e.g. 1/3,1/2')
    verb('truth-degree', 'Minimum of the term function')
    verb('provability-degree', 'Largest r with ⊢ η_r → φ')
    verb('unit-norm', 'Maximum of the term function')
    verb('integral', 'Integral state of the term function')

    for name, help_text in (('consequence', 'Does the conclusion follow from the premises'),
                            ('consistent', 'Do the premises have a common model')):
        verb(name, help_text).add_argument(
            '--premise', action='append', dest='premises', default=[], help='Premise formula (repeatable)')

    limit = verb('limit-check', 'Check φ_n → φ at a rate or a threshold')
    limit.add_argument('--sequence', metavar='PATH', help='Sequence spec file')
    mode = limit.add_mutually_exclusive_group()
    mode.add_argument('--rate', action='store_true', help='Compare δ_n against the sequence rate (default)')
    mode.add_argument('--threshold', help='Rational threshold r: δ_n <= r from some index on')
    limit.add_argument('--upto', type=int, help='Last index checked')

    verb('sandwich', 'Lower and upper envelopes at index k')
    verb('approx', 'Rational PWL approximation of sampled data')
    verb('zeroset', 'Zero set of a presentation')
    verb('present', 'Presentation of a rational polyhedron').add_argument(
        '--class', dest='algebra', choices=['MV', 'DMV', 'RMV'], help='Algebra class')
    mvgen = verb('mvgen', 'Is the presented ideal MV-generated')
    mvgen.add_argument('--class', dest='algebra', choices=['MV', 'DMV', 'RMV'], help='Algebra class')
    extend = verb('extend', 'Extend a presentation to a larger scalar class')
    extend.add_argument('--class', dest='algebra', choices=['MV', 'DMV', 'RMV'], help='Source class')
    extend.add_argument('--to', dest='target', choices=['DMV', 'RMV'], help='Target class')
    verb('subst-check', 'Is a substitution MV-preserving')
    verb('selftest', 'Run self-test suites').add_argument(
        '--suite', default='all', choices=AVAILABLE_SUITES, help='Suite name or all')

    return parser


OPTION_NAMES = ('point', 'premises', 'sequence', 'threshold', 'upto', 'algebra', 'target', 'suite', 'scalars')


def build_job(args: argparse.Namespace, orchestrator: EngineOrchestrator) -> JobSpec:
    """Merge command-line flags over the loaded configuration."""
    config = orchestrator.config
    options = {name: getattr(args, name) for name in OPTION_NAMES if getattr(args, name, None) is not None}
    return JobSpec(
        verb=Verb(args.verb),
        expression=args.expression,
        input_path=args.input_path,
        precision=args.precision if args.precision is not None else config.precision.default_index,
        output_format=OutputFormat(args.format or config.output.format),
        cell_cap=args.cap if args.cap is not None else config.complex.cell_cap,
        seed=args.seed if args.seed is not None else config.selftest.seed,
        dump_pwl=args.dump_pwl,
        output_path=args.output,
        options=options
    )


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point for the engine.

    Returns:
        Process exit code
    """
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2, which is reserved for the cell cap
        return ExitCode.OK if not e.code else ExitCode.VALIDATION
    setup_logging(args.verbose)

    ui = RichUserInterface(quiet=not args.verbose)
    app = EngineOrchestrator(config_path=args.config, ui=ui)
    if not app.initialize():
        return ExitCode.VALIDATION
    if app.config.verbose_logging and not args.verbose:
        setup_logging(True)

    try:
        job = build_job(args, app)
    except ValidationError as e:
        ui.display_error(str(e))
        return ExitCode.VALIDATION

    result = app.run(job)
    return result.exit_code


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\nOperation cancelled by user", file=sys.stderr)
        sys.exit(ExitCode.VALIDATION)
