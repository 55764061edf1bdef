"""Differential testing against the reference interpreter"""

import logging
from collections import namedtuple

import numpy as np

from ..errors import DbtError, FuelExhausted
from ..machine.config import parse_workload
from ..machine.state import quiescent_equal
from ..metrics.metrics import compute_metrics
from ..optimize.pipeline import OptLevel
from ..reference.interpreter import run
from ..runtime.cache import BASELINE, RULES
from ..runtime.loop import RunConfig, run_program
from .generator import GeneratorConfig, ProgramGenerator

logger = logging.getLogger(__name__)

Mismatch = namedtuple('Mismatch', ['index', 'config', 'reason', 'text'])

DEFAULT_CONFIGS = [RunConfig(pipeline=BASELINE)] + [RunConfig(pipeline=RULES, level=level) for level in OptLevel]

# campaigns exercise system calls and interrupt delivery unless told otherwise
DEFAULT_GENERATOR = GeneratorConfig(svc=True, interrupts=2)


class DiffReport(object):
    """ Outcome of a differential campaign

    Attributes
    ----------
    programs : int
        Programs generated
    runs : int
        Translated runs compared
    mismatches : list of Mismatch
        Includes programs the reference could not finish within the fuel
    """

    def __init__(self):
        self.programs = 0
        self.runs = 0
        self.mismatches = []

    @property
    def passed(self):
        return not self.mismatches

    def __str__(self):
        return '%d programs, %d runs, %d mismatches' % (self.programs, self.runs, len(self.mismatches))


def compare_run(program, workload, trace, expected, config):
    """ Run one configuration and compare it with a reference run

    Returns
    -------
    reason : str or None
        Why the runs differ, None when they agree
    """
    try:
        result = run_program(program, workload, config)
    except DbtError as err:
        return 'raised %s' % err
    if result.stop != trace.stop:
        return 'stopped with %r, reference %r' % (result.stop, trace.stop)
    if not quiescent_equal(result.final, expected):
        return 'final state differs: %s vs %s' % (result.final, expected)
    if not np.array_equal(result.machine.mem.bytes, trace.machine.mem.bytes):
        first = int(np.flatnonzero(result.machine.mem.bytes != trace.machine.mem.bytes)[0])
        return 'memory differs from 0x%x' % first
    counters = result.counters
    if counters.guest_num != trace.retired:
        return 'retired %d, reference %d' % (counters.guest_num, trace.retired)
    if len(result.interrupts) != len(trace.interrupts):
        return 'delivered %d interrupts, reference %d' % (len(result.interrupts), len(trace.interrupts))
    if counters.guest_num and not compute_metrics(counters).formula_holds():
        return 'sync formula disagrees with the counted Sync instructions'
    return None


def diff_test(seed=0, count=100, fuel=10000, configs=None, generator=None, verbose=False, print_interval=100):
    """ Compare random programs under every configuration with the reference

    Parameters
    ----------
    seed : int
    count : int
        Programs to generate
    fuel : int
    configs : list of RunConfig
        Baseline and every rules level when None
    generator : GeneratorConfig or None
        DEFAULT_GENERATOR when None
    verbose : bool
        Log progress every ``print_interval`` programs

    Returns
    -------
    report : DiffReport
    """
    configs = DEFAULT_CONFIGS if configs is None else configs
    programs = ProgramGenerator(seed, generator if generator is not None else DEFAULT_GENERATOR)
    report = DiffReport()
    for index in range(count):
        program, text, mapping = programs.program()
        workload = parse_workload(dict(mapping, fuel=fuel))
        report.programs += 1
        try:
            trace, expected = run(program, fuel=fuel, config=workload)
        except FuelExhausted as err:
            reason = 'reference ran out of fuel after %d instructions' % err.retired
            logger.warning('program %d: %s', index, reason)
            report.mismatches.append(Mismatch(index, 'reference', reason, text))
            continue
        for config in configs:
            config = RunConfig(pipeline=config.pipeline, level=config.level, chain=config.chain,
                               use_tlb=config.use_tlb, check_regmap=config.check_regmap, fuel=fuel)
            reason = compare_run(program, workload, trace, expected, config)
            report.runs += 1
            if reason is not None:
                logger.warning('program %d under %s: %s', index, config.label, reason)
                report.mismatches.append(Mismatch(index, config.label, reason, text))
        if verbose and (index + 1) % print_interval == 0:
            logger.info('%d/%d programs, %d mismatches', index + 1, count, len(report.mismatches))
    logger.info('differential test seed %d: %s', seed, report)
    return report
