from .passes import (pass_reduce, pass_eliminate_restores, pass_merge_memory, pass_schedule_dbu,
                     pass_schedule_irq)
from .pipeline import OptLevel, Pipeline, pipeline_steps, run_pipeline
from .chain import ChainGraph, ChainLink, block_summary, pass_inter_tb, DEF, USE

__all__ = ['pass_reduce', 'pass_eliminate_restores', 'pass_merge_memory', 'pass_schedule_dbu', 'pass_schedule_irq',
           'OptLevel', 'Pipeline', 'pipeline_steps', 'run_pipeline', 'ChainGraph', 'ChainLink', 'block_summary',
           'pass_inter_tb', 'DEF', 'USE']
