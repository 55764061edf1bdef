"""Emulator-side guest state area

The memory-resident copy of the guest CPU state that helpers and the runtime
work on. Each flag has its own slot; ``ccr_packed`` holds all four at once.
Every writer keeps the packed slot current, and ``ccr_dirty`` marks the
per-flag slots as stale after a packed-only save.
"""

import numpy as np

from ..guest.alu import pack_flags, unpack_flags
from ..guest.isa import NUM_REGS, WORD_MASK

R0 = 0
PC = 15
FLAG_N = 16
FLAG_Z = 17
FLAG_C = 18
FLAG_V = 19
CCR_PACKED = 20
CCR_DIRTY = 21
IRQ_PENDING = 22
NUM_SLOTS = 23

FLAG_SLOTS = {'N': FLAG_N, 'Z': FLAG_Z, 'C': FLAG_C, 'V': FLAG_V}

SLOT_NAMES = dict([(i, 'r%d' % i) for i in range(NUM_REGS)] + [
    (PC, 'pc'), (FLAG_N, 'flag_n'), (FLAG_Z, 'flag_z'), (FLAG_C, 'flag_c'), (FLAG_V, 'flag_v'),
    (CCR_PACKED, 'ccr_packed'), (CCR_DIRTY, 'ccr_dirty'), (IRQ_PENDING, 'irq_pending')])


def reg_slot(n):
    if not 0 <= n < NUM_REGS:
        raise ValueError('no slot for r%d' % n)
    return R0 + n


class EmuStateArea(object):
    """One 32-bit slot per guest register, flag, pc and the packed CCR"""

    def __init__(self):
        self.slots = np.zeros(NUM_SLOTS, dtype=np.uint32)

    def __getitem__(self, slot):
        return int(self.slots[slot])

    def __setitem__(self, slot, value):
        self.slots[slot] = value & WORD_MASK

    def reg(self, n):
        return self[reg_slot(n)]

    def set_reg(self, n, value):
        self[reg_slot(n)] = value

    @property
    def dirty(self):
        return bool(self.slots[CCR_DIRTY])

    def per_flag(self):
        """NZCV rebuilt from the individual flag slots"""
        return pack_flags(*(self[FLAG_SLOTS[f]] for f in 'NZCV'))

    def read_flags(self):
        """Current NZCV: the packed slot when per-flag slots are stale"""
        if self.dirty:
            return self[CCR_PACKED] & 0xF
        return self.per_flag()

    def write_flags(self, nzcv):
        """Write both the per-flag slots and the packed slot"""
        for name, bit in unpack_flags(nzcv).items():
            self[FLAG_SLOTS[name]] = bit
        self[CCR_PACKED] = nzcv & 0xF
        self[CCR_DIRTY] = 0

    def load_state(self, state):
        for n, value in enumerate(state.regs):
            self.set_reg(n, value)
        self[PC] = state.pc
        self.write_flags(state.nzcv)

    def snapshot(self):
        return dict((SLOT_NAMES[i], int(v)) for i, v in enumerate(self.slots))
