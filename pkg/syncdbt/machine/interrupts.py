"""Interrupt controller and exception entry"""

import logging

import numpy as np

from ..errors import UnconfiguredVector
from ..guest.isa import WORD_MASK
from .state import Mode

logger = logging.getLogger(__name__)


def deliver_interrupt(state, vector, handlers, return_pc=None):
    """ Enter the handler for ``vector``

    The current status word is banked in ``spsr`` and the return address in
    ``elr``; the handler runs privileged with interrupts masked.

    Parameters
    ----------
    state : GuestState
        Updated in place
    vector : str
        Vector name (an interrupt source or a fault kind)
    handlers : dict
        Vector name -> handler entry address
    return_pc : int or None
        Address the handler returns to, defaults to state.pc

    Returns
    -------
    state : GuestState
    """
    if vector not in handlers:
        raise UnconfiguredVector(vector)
    state.sysregs['spsr'] = state.cpsr
    state.sysregs['elr'] = state.pc if return_pc is None else return_pc
    state.mode = Mode.PRIVILEGED
    state.irq_masked = True
    state.pc = handlers[vector]
    logger.debug('entered %s handler at 0x%x, return 0x%x', vector, state.pc, state.sysregs['elr'])
    return state


def exception_return(state):
    """ Leave a handler: reload the status word from spsr

    Flags, mode and interrupt mask come back in one step, so the handler
    never runs unmasked on the interrupted context's registers.

    Returns
    -------
    pc : int
        The banked return address
    """
    state.set_cpsr(state.sysregs['spsr'])
    state.pc = state.sysregs['elr'] & ~3 & WORD_MASK
    return state.pc


class InterruptController(object):
    """ Deterministic interrupt source driven by the retired-instruction count

    Parameters
    ----------
    schedule : list of (int, str)
        (trigger count, vector) pairs
    """

    def __init__(self, schedule=()):
        ordered = sorted(schedule, key=lambda entry: entry[0])
        self.triggers = np.array([count for count, _ in ordered], dtype=np.int64)
        self.vectors = [vector for _, vector in ordered]
        self.serviced = np.zeros(len(ordered), dtype=bool)

    def __len__(self):
        return len(self.vectors)

    def pending(self, retired):
        """ Earliest unserviced trigger reached by ``retired``

        Returns
        -------
        index : int or None
        """
        ready = np.flatnonzero(~self.serviced & (self.triggers <= retired))
        if len(ready) == 0:
            return None
        return int(ready[0])

    def service(self, index):
        self.serviced[index] = True
        return self.vectors[index]

    def deliver_pending(self, state, handlers, retired):
        """ Deliver the pending interrupt, if any and not masked

        Returns
        -------
        index : int or None
            Schedule index that was serviced
        """
        if state.irq_masked:
            return None
        index = self.pending(retired)
        if index is None:
            return None
        deliver_interrupt(state, self.vectors[index], handlers)
        self.service(index)
        return index

    @property
    def all_serviced(self):
        return bool(self.serviced.all())
