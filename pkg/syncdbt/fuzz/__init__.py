from .generator import GeneratorConfig, ProgramGenerator, random_program
from .differential import DiffReport, Mismatch, DEFAULT_CONFIGS, DEFAULT_GENERATOR, compare_run, diff_test

__all__ = ['GeneratorConfig', 'ProgramGenerator', 'random_program', 'DiffReport', 'Mismatch', 'DEFAULT_CONFIGS',
           'DEFAULT_GENERATOR', 'compare_run', 'diff_test']
