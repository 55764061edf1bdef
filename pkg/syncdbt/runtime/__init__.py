from .counters import ExecCounters
from .host import HostCPU, exec_block, context_switch_save, context_switch_restore, deferred_unpack
from .cache import CodeCache, TbDescriptor, lookup_or_translate, BASELINE, RULES
from .loop import Runtime, RunConfig, RunResult, run_program, exec_loop

__all__ = ['ExecCounters', 'HostCPU', 'exec_block', 'context_switch_save', 'context_switch_restore',
           'deferred_unpack', 'CodeCache', 'TbDescriptor', 'lookup_or_translate', 'BASELINE', 'RULES', 'Runtime',
           'RunConfig', 'RunResult', 'run_program', 'exec_loop']
