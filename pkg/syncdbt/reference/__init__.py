from .interpreter import ReferenceInterpreter, Trace, TraceEntry, step, run, deliver_fault

__all__ = ['ReferenceInterpreter', 'Trace', 'TraceEntry', 'step', 'run', 'deliver_fault']
