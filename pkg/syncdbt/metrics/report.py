"""Experiment reports

Two formats: ``rows`` is a JSON document with one object per cell and a
schema version, ``table`` an aligned text table for reading. The speedup
column is an instruction-count proxy, not a time measurement.
"""

import json
import logging

import pandas as pd

from ..errors import ReportError
from ..utils.encoders import ReportEncoder

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ROWS = 'rows'
TABLE = 'table'
FORMATS = (ROWS, TABLE)

TABLE_COLUMNS = ['workload', 'config', 'status', 'host_per_guest', 'sync_per_guest', 'sync_overhead',
                 'sync_reduction_pct', 'coordinated_pct', 'rule_coverage_pct', 'system_pct', 'memory_pct',
                 'irq_check_pct', 'speedup_proxy']


def cell_row(cell, reduction=None):
    """ One report row

    Parameters
    ----------
    cell : CellResult
    reduction : dict or None
        label -> sync reduction percentage
    """
    row = {
        'workload': cell.workload,
        'config': cell.label,
        'pipeline': cell.config.pipeline,
        'level': cell.config.level.label,
        'status': cell.status,
        'stop': cell.stop,
        'expected_match': cell.expected,
        'interrupts_lost': cell.interrupts_lost,
        'error': cell.error,
    }
    if cell.metrics is not None:
        row['formula_identity'] = cell.metrics.formula_holds()
        row.update(cell.metrics.as_row())
    if reduction is not None and cell.label in reduction:
        row['sync_reduction_pct'] = float(reduction[cell.label])
    return row


def report_rows(reports):
    """Rows of one or more ExperimentReports, in order"""
    rows = []
    for report in reports:
        reduction = report.sync_reduction()
        rows.extend(cell_row(cell, reduction) for cell in report)
    return rows


def report_frame(reports):
    """Report rows as a DataFrame"""
    return pd.DataFrame(report_rows(reports))


def format_table(frame):
    columns = [c for c in TABLE_COLUMNS if c in frame.columns]
    body = frame[columns].to_string(index=False, float_format=lambda v: '%.3f' % v, na_rep='-')
    return 'schema %d (speedup_proxy counts host instructions)\n%s\n' % (SCHEMA_VERSION, body)


def emit_report(reports, path=None, fmt=ROWS):
    """ Write experiment reports

    Parameters
    ----------
    reports : list of ExperimentReport
    path : str or None
        Only rendered when None
    fmt : str
        'rows' or 'table'

    Returns
    -------
    text : str
        What was written

    Raises
    ------
    ReportError
        Empty report, unknown format or a failed write
    """
    if fmt not in FORMATS:
        raise ReportError('unknown report format %r' % (fmt,))
    rows = report_rows(reports)
    if not rows:
        raise ReportError('nothing to report')
    if fmt == ROWS:
        text = json.dumps({'schema': SCHEMA_VERSION, 'rows': rows}, cls=ReportEncoder, indent=2) + '\n'
    else:
        text = format_table(pd.DataFrame(rows))
    if path is not None:
        try:
            with open(path, 'w') as f:
                f.write(text)
        except OSError as err:
            raise ReportError('cannot write %s: %s' % (path, err))
        logger.info('wrote %d report rows to %s', len(rows), path)
    return text


def read_rows(source):
    """ Parse a rows report

    Parameters
    ----------
    source : str
        Path to the report, or the report text itself

    Returns
    -------
    frame : pandas.DataFrame

    Raises
    ------
    ReportError
        Unreadable file or a schema other than SCHEMA_VERSION
    """
    text = source
    if not source.lstrip().startswith('{'):
        try:
            with open(source) as f:
                text = f.read()
        except OSError as err:
            raise ReportError('cannot read %s: %s' % (source, err))
    try:
        data = json.loads(text)
    except ValueError as err:
        raise ReportError('malformed report: %s' % err)
    if data.get('schema') != SCHEMA_VERSION:
        raise ReportError('report schema %r, expected %d' % (data.get('schema'), SCHEMA_VERSION))
    return pd.DataFrame(data['rows'])
