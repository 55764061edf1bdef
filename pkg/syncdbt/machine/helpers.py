"""Emulator helpers

Routines translated code calls for what it cannot express inline. They see
guest state only through the EmuStateArea and the machine, never through host
registers. Each returns the host-instruction cost it is charged and the guest
fault it raised, if any.
"""

import logging

from ..errors import GuestFault, PrivilegeFault
from ..guest.isa import PRIVILEGED_OPS
from .interrupts import deliver_interrupt, exception_return
from .memory import READ, WRITE
from .area import PC
from .state import Mode, cpsr_word

logger = logging.getLogger(__name__)

SYSTEM_HELPER_COST = 10
MEMORY_HIT_COST = 16
PAGE_WALK_COST = 24


def helper_system(instr, machine, area):
    """ Execute a system-level instruction against the state area

    Parameters
    ----------
    instr : GuestInstr
        vmsr, vmrs, setcpsr, getcpsr, tlbi, svc or eret
    machine : MachineState
        Owner of the system registers, mode and TLB
    area : EmuStateArea
        Must hold the current guest state of every component the instruction
        reads; individual flag slots must be current for getcpsr and svc

    Returns
    -------
    cost : int
    fault : GuestFault or None
    """
    state = machine.state
    m = instr.mnemonic
    ops = instr.operands
    if m in PRIVILEGED_OPS and state.mode is Mode.USER:
        return SYSTEM_HELPER_COST, PrivilegeFault(instr.addr, m)

    if m == 'vmsr':
        state.sysregs[ops[0].name] = area.reg(ops[1].n)
    elif m == 'vmrs':
        area.set_reg(ops[0].n, state.sysregs[ops[1].name])
    elif m == 'setcpsr':
        state.set_cpsr(area.reg(ops[0].n))
        area.write_flags(state.nzcv)
    elif m == 'getcpsr':
        area.set_reg(ops[0].n, cpsr_word(area.per_flag(), state.mode, state.irq_masked))
    elif m == 'tlbi':
        machine.tlb.flush()
    elif m == 'svc':
        state.nzcv = area.per_flag()
        deliver_interrupt(state, 'svc', machine.handlers, return_pc=instr.addr + 4)
        area[PC] = state.pc
    elif m == 'eret':
        area[PC] = exception_return(state)
        area.write_flags(state.nzcv)
    else:
        raise ValueError('%s is not a system-level instruction' % m)
    return SYSTEM_HELPER_COST, None


def helper_memory(instr, machine, area):
    """ Execute ldr/str through the software MMU

    Returns
    -------
    cost : int
        Fixed cost on a TLB hit plus a walk on a miss
    fault : PageFault or None
    """
    ops = instr.operands
    gva = machine.word_address(area.reg(ops[1].base), ops[1].offset)
    access = READ if instr.mnemonic == 'ldr' else WRITE
    try:
        gpa, hit = machine.translate(gva, access)
    except GuestFault as fault:
        return MEMORY_HIT_COST + PAGE_WALK_COST, fault
    cost = MEMORY_HIT_COST if hit else MEMORY_HIT_COST + PAGE_WALK_COST
    if access == READ:
        area.set_reg(ops[0].n, machine.mem.read_word(gpa))
    else:
        machine.mem.write_word(gpa, area.reg(ops[0].n))
    return cost, None
