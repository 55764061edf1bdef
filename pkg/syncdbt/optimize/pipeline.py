"""Optimization pipeline"""

import logging
from enum import IntEnum

from .passes import pass_reduce, pass_eliminate_restores, pass_merge_memory, pass_schedule_dbu, pass_schedule_irq

logger = logging.getLogger(__name__)


class OptLevel(IntEnum):
    """Cumulative optimization levels, each enabling the passes of the ones below"""
    BASE = 0
    REDUCTION = 1
    ELIMINATION = 2
    SCHEDULING = 3

    @property
    def label(self):
        return self.name.capitalize()

    @classmethod
    def parse(cls, text):
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError('unknown optimization level %r (expected one of %s)'
                             % (text, ', '.join(level.label for level in cls)))


class Pipeline(object):
    """ Block passes run in order

    Parameters
    ----------
    steps : list of (str, callable)
        A step is either a function HostBlock -> HostBlock or an object with
        a ``transform`` method doing the same.
    """

    def __init__(self, steps):
        self.steps = steps

    def transform(self, block):
        """Apply every step to a block"""
        for name, step in self.steps:
            try:
                block = step.transform(block)
            except AttributeError:
                block = step(block)
        return block

    def names(self):
        return [name for name, _ in self.steps]

    def __len__(self):
        return len(self.steps)


def pipeline_steps(level):
    """ Passes enabled at an optimization level

    The inter-TB pass is not listed: it runs when blocks are chained.
    """
    level = OptLevel(level)
    if level >= OptLevel.ELIMINATION:
        steps = [('eliminate', pass_eliminate_restores), ('merge', pass_merge_memory), ('reduce', pass_reduce)]
    elif level >= OptLevel.REDUCTION:
        steps = [('reduce', pass_reduce)]
    else:
        steps = []
    if level >= OptLevel.SCHEDULING:
        steps += [('dbu', pass_schedule_dbu), ('irq', pass_schedule_irq)]
    return steps


def run_pipeline(block, level):
    """ Optimize a rules-pipeline block

    Baseline blocks carry no sync operations and are returned unchanged.
    Running the pipeline twice gives the same block as running it once.

    Parameters
    ----------
    block : HostBlock
    level : OptLevel

    Returns
    -------
    block : HostBlock
    """
    if block.pipeline != 'rules':
        return block
    pipeline = Pipeline(pipeline_steps(level))
    optimized = pipeline.transform(block)
    if pipeline.names():
        logger.debug('TB 0x%x at %s: %d -> %d sync operations', block.entry, OptLevel(level).label,
                     len(block.sync_ops()), len(optimized.sync_ops()))
    return optimized
