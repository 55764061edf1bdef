"""Reference interpreter

Sequential, instruction-at-a-time execution of a guest program. Interrupts
are checked before every instruction. This is the ground truth every
translated configuration is compared against.
"""

import logging
from collections import namedtuple

from ..errors import GuestFault, FuelExhausted, PageFault, UndefinedInstruction, PrivilegeFault
from ..guest.alu import evaluate
from ..guest.isa import ALU_OPS, MOVE_OPS, PRIVILEGED_OPS, Category, Imm, LINK_REG, WORD_MASK
from ..machine.interrupts import deliver_interrupt, exception_return
from ..machine.machine import build_machine
from ..machine.memory import READ, WRITE, page_walk
from ..machine.state import Mode

logger = logging.getLogger(__name__)

TraceEntry = namedtuple('TraceEntry', ['pc', 'instr', 'nzcv'])

HALTED = 'halt'
UNDEFINED = 'undefined'


class Trace(object):
    """ Retired instructions of one run

    Attributes
    ----------
    entries : list of TraceEntry
    final : GuestState
    stop : str
        'halt', or 'undefined' when execution reached an address with no
        instruction and no handler
    interrupts : list of (int, str)
        (retired count, vector) of every delivered interrupt
    faults : list of GuestFault
    """

    def __init__(self):
        self.entries = []
        self.final = None
        self.stop = None
        self.interrupts = []
        self.faults = []
        self.machine = None

    def __len__(self):
        return len(self.entries)

    @property
    def retired(self):
        return len(self.entries)

    def category_counts(self):
        counts = dict((c, 0) for c in Category)
        for entry in self.entries:
            counts[entry.instr.category] += 1
        return counts


def _operand(state, op):
    return op.value if isinstance(op, Imm) else state.regs[op.n]


def step(machine):
    """ Execute the instruction at machine.state.pc

    Parameters
    ----------
    machine : MachineState
        Updated in place

    Returns
    -------
    instr : GuestInstr
        The retired instruction

    Raises
    ------
    GuestFault
        The instruction did not retire. The caller delivers it.
    """
    state = machine.state
    pc = state.pc
    instr = machine.program.fetch(pc)
    if instr is None:
        raise UndefinedInstruction(pc)
    m = instr.mnemonic
    ops = instr.operands
    next_pc = (pc + 4) & WORD_MASK

    if m in PRIVILEGED_OPS and state.mode is Mode.USER:
        raise PrivilegeFault(pc, m)

    if not instr.cond.holds(state.nzcv):
        pass
    elif m in ALU_OPS:
        result, state.nzcv = evaluate(m, state.regs[ops[1].n], _operand(state, ops[2]), instr.sets_flags,
                                      state.nzcv)
        state.regs[ops[0].n] = result
    elif m in MOVE_OPS:
        result, state.nzcv = evaluate(m, 0, _operand(state, ops[1]), instr.sets_flags, state.nzcv)
        state.regs[ops[0].n] = result
    elif m == 'cmp':
        _, state.nzcv = evaluate('sub', state.regs[ops[0].n], _operand(state, ops[1]), True)
    elif m == 'ldr' or m == 'str':
        gva = machine.word_address(state.regs[ops[1].base], ops[1].offset)
        gpa = page_walk(gva, READ if m == 'ldr' else WRITE, machine.root, machine.mem)
        if m == 'ldr':
            state.regs[ops[0].n] = machine.mem.read_word(gpa)
        else:
            machine.mem.write_word(gpa, state.regs[ops[0].n])
    elif m == 'b':
        next_pc = ops[0].addr
    elif m == 'bl':
        state.regs[LINK_REG] = next_pc
        next_pc = ops[0].addr
    elif m == 'bx':
        next_pc = state.regs[ops[0].n] & ~3 & WORD_MASK
    elif m == 'vmsr':
        state.sysregs[ops[0].name] = state.regs[ops[1].n]
    elif m == 'vmrs':
        state.regs[ops[0].n] = state.sysregs[ops[1].name]
    elif m == 'setcpsr':
        state.set_cpsr(state.regs[ops[0].n])
    elif m == 'getcpsr':
        state.regs[ops[0].n] = state.cpsr
    elif m == 'tlbi':
        pass
    elif m == 'svc':
        deliver_interrupt(state, 'svc', machine.handlers, return_pc=next_pc)
        next_pc = state.pc
    elif m == 'eret':
        next_pc = exception_return(state)

    state.pc = next_pc
    machine.retired += 1
    return instr


def deliver_fault(machine, fault):
    """ Enter the vector for a guest fault

    Page faults return to the faulting instruction so the handler can map the
    page and retry; the others return past it.
    """
    state = machine.state
    if isinstance(fault, PageFault):
        return_pc = state.pc
    else:
        return_pc = (state.pc + 4) & WORD_MASK
    deliver_interrupt(state, fault.vector_name, machine.handlers, return_pc=return_pc)


class ReferenceInterpreter(object):
    """ Runs a machine to completion

    Parameters
    ----------
    machine : MachineState
    """

    def __init__(self, machine):
        self.machine = machine
        self.trace = Trace()
        self.trace.machine = machine

    def _check_interrupts(self):
        machine = self.machine
        index = machine.controller.deliver_pending(machine.state, machine.handlers, machine.retired)
        if index is not None:
            self.trace.interrupts.append((machine.retired, machine.controller.vectors[index]))

    def run(self, fuel):
        """ Step until halt or fuel exhaustion

        Returns
        -------
        trace : Trace
        state : GuestState

        Raises
        ------
        FuelExhausted
            Carrying the partial trace
        """
        machine = self.machine
        trace = self.trace
        if fuel <= 0:
            raise FuelExhausted(0, trace)
        while True:
            self._check_interrupts()
            if self._at_halt():
                trace.stop = HALTED
                break
            if machine.retired >= fuel:
                trace.final = machine.state.copy()
                raise FuelExhausted(machine.retired, trace)
            if not self._advance():
                break
        trace.final = machine.state.copy()
        return trace, trace.final

    def _at_halt(self):
        instr = self.machine.program.fetch(self.machine.state.pc)
        return instr is not None and instr.mnemonic == 'halt'

    def _advance(self):
        """Retire one instruction or deliver its fault. False once execution has stopped."""
        machine = self.machine
        trace = self.trace
        try:
            retired = step(machine)
        except GuestFault as fault:
            trace.faults.append(fault)
            if isinstance(fault, UndefinedInstruction) and 'undefined' not in machine.handlers:
                logger.error('%s, stopping', fault)
                trace.stop = UNDEFINED
                return False
            deliver_fault(machine, fault)
            return True
        trace.entries.append(TraceEntry(retired.addr, retired, machine.state.nzcv))
        return True

    def run_until(self, retired):
        """ Step without interrupts until ``retired`` instructions have retired

        Used as a lockstep shadow of a translated run.

        Returns
        -------
        state : GuestState
        """
        machine = self.machine
        while machine.retired < retired and self.trace.stop is None:
            if self._at_halt():
                self.trace.stop = HALTED
                break
            self._advance()
        return machine.state


def run(program, state=None, fuel=100000, config=None):
    """ Interpret a program from a fresh machine

    Parameters
    ----------
    program : GuestProgram
    state : GuestState or None
        Initial state, defaults to the one the config describes
    fuel : int
        Maximum number of retired instructions
    config : WorkloadConfig or None

    Returns
    -------
    trace : Trace
    state : GuestState
    """
    machine = build_machine(program, config)
    if state is not None:
        machine.state = state.copy()
    return ReferenceInterpreter(machine).run(fuel)
