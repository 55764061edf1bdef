"""Architectural guest state"""

from dataclasses import dataclass, field
from enum import Enum

from ..guest.isa import NUM_REGS, SYSREGS, BANKED_SYSREGS

CPSR_FLAGS_SHIFT = 28
CPSR_IRQ_MASK = 1 << 7
CPSR_PRIVILEGED = 1


class Mode(Enum):
    USER = 'User'
    PRIVILEGED = 'Privileged'


def _default_sysregs():
    return dict((name, 0) for name in SYSREGS)


@dataclass
class GuestState(object):
    """Guest CPU state: r0-r14, pc, packed NZCV, mode, IRQ mask and system registers"""
    regs: list = field(default_factory=lambda: [0] * NUM_REGS)
    pc: int = 0
    nzcv: int = 0
    mode: Mode = Mode.PRIVILEGED
    irq_masked: bool = False
    sysregs: dict = field(default_factory=_default_sysregs)

    def __post_init__(self):
        if len(self.regs) != NUM_REGS:
            raise ValueError('expected %d registers, got %d' % (NUM_REGS, len(self.regs)))
        if self.pc % 4:
            raise ValueError('pc 0x%x is not word aligned' % self.pc)
        if not 0 <= self.nzcv <= 0xF:
            raise ValueError('nzcv must fit in 4 bits, got %r' % self.nzcv)

    def copy(self):
        return GuestState(list(self.regs), self.pc, self.nzcv, self.mode, self.irq_masked, dict(self.sysregs))

    @property
    def cpsr(self):
        """Packed status word: NZCV in bits 31-28, IRQ mask bit 7, privileged bit 0"""
        word = self.nzcv << CPSR_FLAGS_SHIFT
        if self.irq_masked:
            word |= CPSR_IRQ_MASK
        if self.mode is Mode.PRIVILEGED:
            word |= CPSR_PRIVILEGED
        return word

    def set_cpsr(self, word):
        self.nzcv = (word >> CPSR_FLAGS_SHIFT) & 0xF
        self.irq_masked = bool(word & CPSR_IRQ_MASK)
        self.mode = Mode.PRIVILEGED if word & CPSR_PRIVILEGED else Mode.USER


def cpsr_word(nzcv, mode, irq_masked):
    return GuestState(nzcv=nzcv, mode=mode, irq_masked=irq_masked).cpsr


def quiescent_view(state):
    """ The part of a guest state compared at quiescent points

    The banked exception registers hold return information whose exact value
    depends on where an interrupt was taken, so they are left out.

    Returns
    -------
    view : dict
    """
    return {
        'regs': list(state.regs),
        'pc': state.pc,
        'nzcv': state.nzcv,
        'mode': state.mode.value,
        'irq_masked': state.irq_masked,
        'sysregs': dict((k, v) for k, v in state.sysregs.items() if k not in BANKED_SYSREGS),
    }


def quiescent_equal(a, b):
    return quiescent_view(a) == quiescent_view(b)
