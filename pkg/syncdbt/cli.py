"""Command line interface

Exit status is 0 only when every check of the command passed: equality with
the expected or reference state, the sync accounting identity and interrupt
liveness.
"""

import argparse
import logging
import sys

from .errors import DbtError
from .fuzz import diff_test
from .machine import load_workload
from .metrics import ABLATION_MATRIX, emit_report, run_experiment, run_suite
from .metrics.report import FORMATS, ROWS, TABLE
from .optimize import OptLevel
from .runtime import BASELINE, RULES

logger = logging.getLogger(__name__)


def _level(text):
    try:
        return OptLevel.parse(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err))


def build_parser():
    parser = argparse.ArgumentParser(prog='syncdbt', description='Rule-based binary translator with coordination '
                                                                 'passes')
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    def report_options(sub):
        sub.add_argument('--report', help='Write the report here instead of printing a table')
        sub.add_argument('--format', choices=FORMATS, default=None,
                         help='rows (JSON) or table, default rows with --report and table without')

    run = commands.add_parser('run', help='Run one workload under one configuration')
    run.add_argument('--workload', required=True, help='Workload TOML file')
    run.add_argument('--pipeline', choices=(BASELINE, RULES), default=RULES)
    run.add_argument('--opt', type=_level, default=OptLevel.SCHEDULING, help='base, reduction, elimination or '
                                                                              'scheduling')
    run.add_argument('--fuel', type=int, help='Guest instruction limit, the workload\'s by default')
    run.add_argument('--no-chain', action='store_true', help='Never patch direct edges between blocks')
    run.add_argument('--no-tlb', action='store_true', help='Walk the page table on every access')
    run.add_argument('--check-regmap', action='store_true',
                     help='Compare host registers with a lockstep reference at every block exit')
    report_options(run)

    ablate = commands.add_parser('ablate', help='Run one workload under Baseline and every optimisation level')
    ablate.add_argument('--workload', required=True, help='Workload TOML file')
    ablate.add_argument('--fuel', type=int)
    report_options(ablate)

    diff = commands.add_parser('diff-test', help='Differential test random programs against the reference')
    diff.add_argument('--seed', type=int, default=0)
    diff.add_argument('--count', type=int, default=100)
    diff.add_argument('--fuel', type=int, default=10000)

    suite = commands.add_parser('suite', help='Run every bundled workload against its expected state')
    report_options(suite)
    return parser


def _emit(reports, args):
    fmt = args.format or (ROWS if args.report else TABLE)
    text = emit_report(reports, args.report, fmt)
    if args.report is None:
        sys.stdout.write(text)


def _verdict(reports):
    failed = [(report.workload, cell.label) for report in reports for cell in report if not cell.passed]
    for workload, label in failed:
        logger.error('%s %s did not pass its checks', workload, label)
    return 0 if not failed else 1


def cmd_run(args):
    workload = load_workload(args.workload)
    report = run_experiment(workload, [(args.pipeline, args.opt)], fuel=args.fuel, chain=not args.no_chain,
                            use_tlb=not args.no_tlb, check_regmap=args.check_regmap)
    _emit([report], args)
    return _verdict([report])


def cmd_ablate(args):
    report = run_experiment(load_workload(args.workload), ABLATION_MATRIX, fuel=args.fuel)
    _emit([report], args)
    return _verdict([report])


def cmd_diff_test(args):
    report = diff_test(args.seed, args.count, args.fuel, verbose=args.verbose)
    sys.stdout.write('%s\n' % report)
    for mismatch in report.mismatches:
        sys.stdout.write('program %d under %s: %s\n%s\n' % (mismatch.index, mismatch.config, mismatch.reason,
                                                           mismatch.text))
    return 0 if report.passed else 1


def cmd_suite(args):
    reports = run_suite()
    _emit(reports, args)
    return _verdict(reports)


COMMANDS = {
    'run': cmd_run,
    'ablate': cmd_ablate,
    'diff-test': cmd_diff_test,
    'suite': cmd_suite,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        return COMMANDS[args.command](args)
    except DbtError as err:
        logger.error('%s', err)
        return 2
