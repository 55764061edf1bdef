"""Experiment matrices

Runs one workload under several (pipeline, OptLevel) configurations, each
on a fresh machine, and collects their metrics. Cells run in a thread pool;
the report is assembled in matrix order once every cell is done.
"""

import concurrent.futures
import logging
import os
from dataclasses import dataclass

from ..errors import DbtError
from ..machine.config import load_expected, load_program, load_workload
from ..machine.state import quiescent_view
from ..optimize.pipeline import OptLevel
from ..runtime.cache import BASELINE, RULES
from ..runtime.loop import RunConfig, run_program
from .metrics import compute_metrics

logger = logging.getLogger(__name__)

OK = 'ok'
FAILED = 'failed'

ABLATION_MATRIX = [(BASELINE, OptLevel.BASE)] + [(RULES, level) for level in OptLevel]

WORKLOAD_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'data', 'workloads')


@dataclass
class CellResult(object):
    """ One configuration of an experiment

    ``metrics`` is None and ``error`` set when the cell failed. ``expected``
    is None when the workload commits no expected final state.
    """
    workload: str
    config: RunConfig
    status: str = OK
    metrics: object = None
    error: str = None
    stop: str = None
    expected: bool = None
    interrupts_lost: int = 0
    counters: object = None

    @property
    def label(self):
        return self.config.label

    @property
    def passed(self):
        return self.status == OK and self.expected is not False and self.interrupts_lost == 0 and \
            self.metrics.formula_holds()


class ExperimentReport(object):
    """ Cells of one experiment, in matrix order

    Parameters
    ----------
    workload : str
    cells : list of CellResult
    """

    def __init__(self, workload, cells):
        self.workload = workload
        self.cells = list(cells)

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    @property
    def passed(self):
        return all(cell.passed for cell in self.cells)

    def cell(self, label):
        for cell in self.cells:
            if cell.label == label:
                return cell
        raise KeyError(label)

    def sync_reduction(self):
        """ Relative sync_per_guest reduction of every rules cell against rules@Base

        Returns
        -------
        reduction : dict
            label -> percentage, empty when the Base cell is missing or has
            no coordination
        """
        try:
            base = self.cell('rules@%s' % OptLevel.BASE.label)
        except KeyError:
            return {}
        if base.metrics is None or base.metrics.sync_per_guest == 0:
            return {}
        reference = base.metrics.sync_per_guest
        return dict((cell.label, 100 * (reference - cell.metrics.sync_per_guest) / reference)
                    for cell in self.cells if cell.metrics is not None and cell.config.pipeline == RULES)


def _matches(final, expected):
    if expected is None:
        return None
    return quiescent_view(final) == expected


def run_cell(program, workload, config, ruleset=None, expected=None):
    """ Run one configuration and check it

    Errors raised by the run mark the cell failed instead of propagating.

    Returns
    -------
    cell : CellResult
    """
    name = workload.name if workload is not None else ''
    cell = CellResult(name, config)
    try:
        result = run_program(program, workload, config, ruleset)
    except DbtError as err:
        logger.warning('%s %s failed: %s', name, config.label, err)
        cell.status = FAILED
        cell.error = str(err)
        return cell
    cell.stop = result.stop
    cell.counters = result.counters
    cell.expected = _matches(result.final, expected) if workload is not None else None
    cell.interrupts_lost = len(result.machine.controller) - len(result.interrupts)
    if cell.expected is False:
        logger.warning('%s %s: final state differs from the expected one', name, config.label)
    if cell.interrupts_lost:
        logger.warning('%s %s: %d interrupts never delivered', name, config.label, cell.interrupts_lost)
    return cell


def run_experiment(workload, matrix=None, ruleset=None, fuel=None, chain=True, use_tlb=True, check_regmap=False,
                   program=None, workers=None):
    """ Run a workload under every (pipeline, level) of a matrix

    Parameters
    ----------
    workload : WorkloadConfig
    matrix : list of (str, OptLevel)
        Defaults to Baseline followed by every rules level
    ruleset : RuleSet or None
    fuel : int or None
        Overrides the workload's fuel
    chain, use_tlb, check_regmap : bool
    program : GuestProgram or None
        Read from the workload's program file when None
    workers : int or None
        Thread pool size

    Returns
    -------
    report : ExperimentReport
        Metrics carry a speedup proxy against the first baseline cell that
        succeeded
    """
    matrix = ABLATION_MATRIX if matrix is None else matrix
    if program is None:
        program = load_program(workload)
    expected = load_expected(workload)
    configs = [RunConfig(pipeline=pipeline, level=OptLevel(level), chain=chain, use_tlb=use_tlb,
                         check_regmap=check_regmap, fuel=fuel)
               for pipeline, level in matrix]

    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_cell, program, workload, config, ruleset, expected) for config in configs]
        cells = [future.result() for future in futures]

    baseline = next((c.counters for c in cells if c.status == OK and c.config.pipeline == BASELINE), None)
    for cell in cells:
        if cell.status != OK:
            continue
        try:
            cell.metrics = compute_metrics(cell.counters, baseline)
        except DbtError as err:
            logger.warning('%s %s failed: %s', cell.workload, cell.label, err)
            cell.status = FAILED
            cell.error = str(err)
            continue
        logger.info('%s %s: %.3f host/guest, %.3f sync/guest', cell.workload, cell.label,
                    cell.metrics.host_per_guest, cell.metrics.sync_per_guest)
    return ExperimentReport(workload.name, cells)


def bundled_workloads(directory=None):
    """Paths of the workload files shipped with the package, sorted by name"""
    directory = directory or WORKLOAD_DIR
    return sorted(os.path.join(directory, name) for name in os.listdir(directory) if name.endswith('.toml'))


def run_suite(matrix=None, directory=None, **kwargs):
    """ Run every bundled workload under a matrix

    Returns
    -------
    reports : list of ExperimentReport
    """
    reports = []
    for path in bundled_workloads(directory):
        workload = load_workload(path)
        logger.info('workload %s', workload.name)
        reports.append(run_experiment(workload, matrix, **kwargs))
    return reports
