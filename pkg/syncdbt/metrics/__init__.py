from .metrics import Metrics, compute_metrics
from .experiment import (CellResult, ExperimentReport, ABLATION_MATRIX, WORKLOAD_DIR, run_cell, run_experiment,
                         bundled_workloads, run_suite)
from .report import SCHEMA_VERSION, emit_report, read_rows, report_rows, report_frame

__all__ = ['Metrics', 'compute_metrics', 'CellResult', 'ExperimentReport', 'ABLATION_MATRIX', 'WORKLOAD_DIR',
           'run_cell', 'run_experiment', 'bundled_workloads', 'run_suite', 'SCHEMA_VERSION', 'emit_report',
           'read_rows', 'report_rows', 'report_frame']
