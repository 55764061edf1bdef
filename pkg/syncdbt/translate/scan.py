"""TB scan

Forms a translation block from a guest entry address and works out where
guest CPU state has to be coordinated between host registers and the
EmuStateArea: around every helper call and at the block exit.
"""

import logging
from dataclasses import dataclass

from ..errors import DecodeError
from ..guest.isa import Category, Condition, WORD_MASK, ends_block, regs_read, regs_written
from .ops import (CCR, PC, ExitKind, ExitSite, HelperSite, SyncCause, gprs, save, restore)

logger = logging.getLogger(__name__)

MAX_TB_LENGTH = 32

HELPER_KINDS = {Category.MEMORY_ACCESS: 'memory', Category.SYSTEM_LEVEL: 'system'}
HELPER_CAUSES = {'memory': SyncCause.MEMORY_ACCESS, 'system': SyncCause.SYSTEM_LEVEL}


@dataclass(frozen=True)
class PlanEntry(object):
    """ Coordination owed by one helper-executed instruction

    ``save`` uploads what the helper reads, ``restore`` downloads what it may
    define. CCR is in both: helpers clobber the host flags.
    """
    instr: object
    kind: str
    save: object
    restore: object

    @property
    def site(self):
        return HelperSite(self.instr, self.kind)


@dataclass(frozen=True)
class CoordinationPlan(object):
    """ Per-TB coordination plan

    Attributes
    ----------
    helpers : dict
        Guest address -> PlanEntry for every memory and system instruction
    exit_items : tuple
        Items that end the block (boundary save, svc helper, ExitSite)
    """
    helpers: dict
    exit_items: tuple

    def __len__(self):
        return len(self.helpers)


def scan_helper(instr):
    kind = HELPER_KINDS[instr.category]
    cause = HELPER_CAUSES[kind]
    return PlanEntry(instr, kind,
                     save([CCR] + list(gprs(regs_read(instr))), cause),
                     restore([CCR] + list(gprs(regs_written(instr))), cause))


def exit_items(last, next_addr, coordinated=True):
    """ Items ending a TB whose last instruction is ``last``

    Parameters
    ----------
    last : GuestInstr or None
        The terminator, or None when the block stopped at the length limit or
        before an address with no instruction
    next_addr : int
        Address after the block
    coordinated : bool
        False for the baseline pipeline, whose guest state is always in the
        EmuStateArea

    Returns
    -------
    items : tuple
    """
    def boundary(components, pc=0):
        return save(components, SyncCause.TB_BOUNDARY, pc=pc) if coordinated else None

    if last is None or not ends_block(last):
        return (ExitSite(None, ExitKind.FALL_THROUGH, (next_addr,), edge_save=boundary([CCR])),)

    m = last.mnemonic
    items = []
    if m == 'halt':
        if coordinated:
            items.append(boundary([CCR, PC] + list(gprs(range(12))), pc=last.addr))
        items.append(ExitSite(last, ExitKind.TO_RUNTIME, reason='halt'))
    elif m in ('svc', 'eret'):
        if coordinated:
            items.append(save([CCR], SyncCause.SYSTEM_LEVEL))
        items.append(HelperSite(last, 'system'))
        items.append(ExitSite(last, ExitKind.TO_RUNTIME, reason=m))
    elif m == 'bx':
        if coordinated:
            items.append(boundary([CCR] + list(gprs(regs_read(last)))))
        items.append(ExitSite(last, ExitKind.TO_RUNTIME, reason='indirect'))
    elif m == 'bl':
        items.append(ExitSite(last, ExitKind.FALL_THROUGH, (last.operands[0].addr,), edge_save=boundary([CCR]),
                              link=next_addr))
    elif last.cond is Condition.AL:
        items.append(ExitSite(last, ExitKind.FALL_THROUGH, (last.operands[0].addr,), edge_save=boundary([CCR])))
    else:
        items.append(ExitSite(last, ExitKind.BRANCH, (last.operands[0].addr, next_addr), cond=last.cond,
                              edge_save=boundary([CCR])))
    return tuple(items)


def scan_tb(program, entry, coordinated=True):
    """ Form the TB at ``entry`` and plan its state coordination

    Parameters
    ----------
    program : GuestProgram
    entry : int
    coordinated : bool
        Plan sync operations (rule pipeline) or not (baseline)

    Returns
    -------
    tb : tuple of GuestInstr
        Straight-line run ending at the first branch, halt or svc, at
        MAX_TB_LENGTH instructions, or before an address with no instruction
    plan : CoordinationPlan

    Raises
    ------
    DecodeError
        No instruction at ``entry``
    """
    if program.fetch(entry) is None:
        raise DecodeError(entry)
    tb = []
    addr = entry
    while len(tb) < MAX_TB_LENGTH:
        instr = program.fetch(addr)
        if instr is None:
            break
        tb.append(instr)
        addr = (addr + 4) & WORD_MASK
        if ends_block(instr):
            break
    last = tb[-1] if ends_block(tb[-1]) else None
    body = tb[:-1] if last is not None else tb
    helpers = dict((i.addr, scan_helper(i)) for i in body if i.category in HELPER_KINDS)
    plan = CoordinationPlan(helpers, exit_items(last, addr, coordinated))
    logger.debug('scanned TB 0x%x: %d instructions, %d helper sites', entry, len(tb), len(helpers))
    return tuple(tb), plan
