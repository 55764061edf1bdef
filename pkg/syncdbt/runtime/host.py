"""Host machine

Interprets lowered host code over sixteen 32-bit registers, a packed NZCV
flags register and the EmuStateArea. Every executed instruction is counted
under its tag; sync operations are counted once per operation.
"""

import logging

from ..errors import HostFault
from ..guest.alu import evaluate
from ..guest.isa import Condition, FLAG_BITS
from ..machine.helpers import helper_memory, helper_system
from ..translate.lowering import deferred_unpack_code, lower_sync
from ..translate.ops import HOST_ALU, NUM_HOST_REGS, SCRATCH, HImm, HReg, Slot, SyncCause, SyncMode, Tag, save, \
    restore

logger = logging.getLogger(__name__)

HELPERS = {
    'memory': helper_memory,
    'system': helper_system,
}

# left in the scratch registers by a helper call
CLOBBER = 0xDEADBEEF


class HostCPU(object):
    """ Host registers, flags and the code they run

    Parameters
    ----------
    machine : MachineState
        Passed to helpers
    area : EmuStateArea
    counters : ExecCounters
    follow : callable or None
        ``follow(block, slot, exit_index)`` returns ``(block, offset)`` for a
        patched chain slot or None to fall through. No chaining when None.
    """

    def __init__(self, machine, area, counters, follow=None):
        self.machine = machine
        self.area = area
        self.counters = counters
        self.follow = follow
        self.regs = [0] * NUM_HOST_REGS
        self.flags = 0
        self.fault = None

    def _value(self, arg, index, instr):
        if isinstance(arg, HReg):
            return self.regs[arg.n]
        if isinstance(arg, HImm):
            return arg.value
        raise HostFault(index, instr, 'expected a register or immediate, got %r' % (arg,))

    def _dest(self, arg, index, instr):
        if not isinstance(arg, HReg) or not 0 <= arg.n < NUM_HOST_REGS:
            raise HostFault(index, instr, 'bad destination %r' % (arg,))
        return arg.n

    def _slot(self, arg, index, instr):
        if not isinstance(arg, Slot):
            raise HostFault(index, instr, 'expected an area slot, got %r' % (arg,))
        return arg.index

    def _call(self, instr, index):
        kind, guest, stub = instr.args
        try:
            helper = HELPERS[kind]
        except KeyError:
            raise HostFault(index, instr, 'no helper %r' % (kind,))
        cost, fault = helper(guest, self.machine, self.area)
        self.counters.tags[Tag.HELPER] += cost
        if kind == 'memory':
            self.counters.mmu += cost
        self.flags ^= 0xF
        for n in SCRATCH:
            self.regs[n] = CLOBBER
        if fault is None:
            return index + 1
        if stub is None:
            raise HostFault(index, instr, '%s faulted with no stub to leave through' % guest)
        self.fault = fault
        self.counters.faults += 1
        return stub

    def run(self, block, pc=0):
        """ Execute a lowered block from ``pc`` until it exits

        Follows patched chain slots into other blocks.

        Parameters
        ----------
        block : LoweredBlock
        pc : int

        Returns
        -------
        block : LoweredBlock
            The block whose hexit was reached
        info : ExitInfo
        """
        self.fault = None
        self.counters.tb_executions += 1
        return self._run(block, block.code, pc)

    def execute(self, code):
        """Run a bare code sequence (no exits, no chaining) to its end"""
        self._run(None, tuple(code), 0)

    def _run(self, block, code, pc):
        counters = self.counters
        regs = self.regs
        area = self.area
        while True:
            if not 0 <= pc < len(code):
                if block is None and pc == len(code):
                    return None, None
                raise HostFault(pc, None, 'fell off the end of the code')
            instr = code[pc]
            op = instr.op
            args = instr.args
            if op != 'hcall':
                counters.tags[instr.tag] += 1
            if instr.sync is not None:
                counters.count_sync(instr.sync)
            try:
                base = op[:-2] if op.endswith('.f') else op
                if base in HOST_ALU:
                    result, self.flags = evaluate(HOST_ALU[base], self._value(args[1], pc, instr),
                                                  self._value(args[2], pc, instr), op.endswith('.f'), self.flags)
                    regs[self._dest(args[0], pc, instr)] = result
                elif base == 'hmov':
                    result, self.flags = evaluate('mov', 0, self._value(args[1], pc, instr), op.endswith('.f'),
                                                  self.flags)
                    regs[self._dest(args[0], pc, instr)] = result
                elif op == 'hcmp':
                    _, self.flags = evaluate('sub', self._value(args[0], pc, instr), self._value(args[1], pc, instr),
                                             True)
                elif op == 'hjcc':
                    cond, target = args
                    if not isinstance(cond, Condition):
                        raise HostFault(pc, instr, 'bad condition %r' % (cond,))
                    if cond.holds(self.flags):
                        pc = target
                        continue
                elif op == 'hjmp':
                    pc = args[0]
                    continue
                elif op == 'hld':
                    if instr.tag is Tag.CHECK:
                        counters.checks += 1
                    regs[self._dest(args[0], pc, instr)] = area[self._slot(args[1], pc, instr)]
                elif op == 'hst':
                    area[self._slot(args[0], pc, instr)] = self._value(args[1], pc, instr)
                elif op == 'hflags2reg':
                    regs[self._dest(args[0], pc, instr)] = self.flags
                elif op == 'hreg2flags':
                    self.flags = self._value(args[0], pc, instr) & 0xF
                elif op == 'hflagext':
                    src = self._value(args[1], pc, instr)
                    regs[self._dest(args[0], pc, instr)] = 1 if src & FLAG_BITS[args[2]] else 0
                elif op == 'hcall':
                    pc = self._call(instr, pc)
                    continue
                elif op == 'hexit':
                    if block is None:
                        raise HostFault(pc, instr, 'hexit outside a block')
                    return block, block.exits[args[0]]
                elif op == 'hchain':
                    link = self.follow(block, pc, args[0]) if (self.follow and block is not None) else None
                    if link is not None:
                        block, pc = link
                        code = block.code
                        counters.tb_executions += 1
                        counters.chain_links += 1
                        continue
                else:
                    raise HostFault(pc, instr, 'unknown host instruction')
            except (IndexError, KeyError, TypeError, ValueError) as err:
                raise HostFault(pc, instr, str(err))
            pc += 1


def exec_block(block, cpu):
    """ Run one lowered block from its entry

    Returns
    -------
    info : ExitInfo
    delta : ExecCounters
        What this execution added to ``cpu.counters``
    """
    before = cpu.counters.copy()
    _, info = cpu.run(block)
    return info, cpu.counters - before


def context_switch_save(cpu, components, mode=SyncMode.FULL, cause=SyncCause.TB_BOUNDARY):
    """Upload guest state components from host registers to the EmuStateArea"""
    cpu.execute(lower_sync(save(components, cause, mode)))


def context_switch_restore(cpu, components, mode=SyncMode.FULL, cause=SyncCause.TB_BOUNDARY):
    """Download guest state components from the EmuStateArea to host registers"""
    cpu.execute(lower_sync(restore(components, cause, mode)))


def deferred_unpack(cpu):
    """Rebuild stale per-flag slots from the packed slot, if they are stale"""
    if not cpu.area.dirty:
        return False
    cpu.execute(deferred_unpack_code())
    cpu.counters.deferred_unpacks += 1
    logger.debug('deferred CCR unpack')
    return True
