"""Random guest programs

Programs are a bounded loop around a random body so that every one of them
halts: r11 counts the iterations down and r10 points at the data page, the
body never writes either. Forward conditional branches skip parts of the
body. Interrupt and system-call handlers only touch r12 and r13, bump one
shared counter word and leave through eret, so both registers end the run
with values that do not depend on when an interrupt was taken.
"""

from dataclasses import dataclass

import numpy as np

from ..guest.asm import parse_guest_asm

BODY_REGS = 10
BASE_REG = 10
COUNTER_REG = 11
DATA_BASE = 0x4000
DATA_WORDS = 16
SVC_HANDLER = 0x600
TIMER_HANDLER = 0x800
IRQ_COUNTER = 0x3000

ALU = ('add', 'sub', 'and', 'orr', 'eor', 'lsl', 'lsr')
CONDITIONS = ('eq', 'ne', 'ge', 'lt')

HANDLERS = """
        .org 0x600
sys:    mov r12, #0x3000
        ldr r13, [r12]
        add r13, r13, #1
        str r13, [r12]
        eret
        .org 0x800
timer:  mov r12, #0x3000
        ldr r13, [r12]
        add r13, r13, #1
        str r13, [r12]
        eret
"""


@dataclass
class GeneratorConfig(object):
    """ Shape of generated programs

    Parameters
    ----------
    length : int
        Body instructions
    iterations : int
        Largest loop trip count
    memory, system, conditional, flags, branch : float
        Probabilities of a memory access, a system instruction, a condition
        suffix, an S suffix and a forward branch
    svc : bool
        Allow system calls
    interrupts : int
        Timer interrupts scheduled over the run
    """
    length: int = 12
    iterations: int = 4
    memory: float = 0.2
    system: float = 0.1
    conditional: float = 0.3
    flags: float = 0.4
    branch: float = 0.1
    svc: bool = False
    interrupts: int = 0


class ProgramGenerator(object):
    """ Random programs from one seed

    Parameters
    ----------
    seed : int
    config : GeneratorConfig or None
    """

    def __init__(self, seed=0, config=None):
        self.rng = np.random.RandomState(seed)
        self.config = config if config is not None else GeneratorConfig()

    def _reg(self):
        return 'r%d' % self.rng.randint(BODY_REGS)

    def _cond(self):
        if self.rng.rand() < self.config.conditional:
            return CONDITIONS[self.rng.randint(len(CONDITIONS))]
        return ''

    def _s(self):
        return 's' if self.rng.rand() < self.config.flags else ''

    def _imm(self, op):
        if op in ('lsl', 'lsr'):
            return '#%d' % self.rng.randint(32)
        return '#%d' % self.rng.randint(256)

    def _memory(self):
        op = 'ldr' if self.rng.rand() < 0.5 else 'str'
        return '%s %s, [r%d, #%d]' % (op, self._reg(), BASE_REG, 4 * self.rng.randint(DATA_WORDS))

    def _system(self):
        rng = self.rng
        choice = rng.randint(5 if self.config.svc else 4)
        if choice == 0:
            return 'vmsr fpscr, %s' % self._reg()
        if choice == 1:
            return 'vmrs %s, fpscr' % self._reg()
        if choice == 2:
            return 'vmrs %s, fpexc' % self._reg()
        if choice == 3:
            return 'getcpsr %s' % self._reg()
        return 'svc #%d' % rng.randint(16)

    def _alu(self):
        rng = self.rng
        kind = rng.randint(4)
        if kind == 0:
            return 'cmp%s %s, %s' % (self._cond(), self._reg(), self._imm('cmp') if rng.rand() < 0.5 else self._reg())
        if kind == 1:
            op = 'mov' if rng.rand() < 0.7 else 'mvn'
            src = self._imm(op) if rng.rand() < 0.6 else self._reg()
            return '%s%s%s %s, %s' % (op, self._cond(), self._s(), self._reg(), src)
        op = ALU[rng.randint(len(ALU))]
        src = self._imm(op) if rng.rand() < 0.5 else self._reg()
        return '%s%s%s %s, %s, %s' % (op, self._cond(), self._s(), self._reg(), self._reg(), src)

    def body(self):
        """Body lines, forward branch labels included"""
        lines = []
        labels = []
        config = self.config
        for i in range(config.length):
            pending = [label for label, at in labels if at == i]
            lines.extend('skip%d:' % label for label in pending)
            draw = self.rng.rand()
            if draw < config.memory:
                lines.append(self._memory())
            elif draw < config.memory + config.system:
                lines.append(self._system())
            elif draw < config.memory + config.system + config.branch and i + 1 < config.length:
                label = len(labels)
                labels.append((label, self.rng.randint(i + 1, config.length + 1)))
                lines.append('b%s skip%d' % (self._cond(), label))
            else:
                lines.append(self._alu())
        lines.extend('skip%d:' % label for label, at in labels if at == config.length)
        return lines

    def text(self):
        """ Assembly source of one program

        Returns
        -------
        text : str
        """
        rng = self.rng
        lines = ['start:  mov r%d, #0x%x' % (BASE_REG, DATA_BASE),
                 '        mov r%d, #%d' % (COUNTER_REG, rng.randint(1, self.config.iterations + 1))]
        lines += ['        mov r%d, #%d' % (n, rng.randint(256)) for n in range(BODY_REGS) if rng.rand() < 0.5]
        lines.append('loop:')
        lines += ['        ' + line if not line.endswith(':') else line for line in self.body()]
        lines += ['        sub r%d, r%d, #1' % (COUNTER_REG, COUNTER_REG),
                  '        cmp r%d, #0' % COUNTER_REG,
                  '        bne loop',
                  '        halt']
        return '\n'.join(lines) + '\n' + HANDLERS

    def workload(self, retired_estimate=64):
        """ Workload mapping for the next program

        Parameters
        ----------
        retired_estimate : int
            Rough run length interrupts are spread over
        """
        data = {'name': 'random', 'program': 'random.s', 'handlers': {'timer': TIMER_HANDLER}}
        if self.config.svc:
            data['handlers']['svc'] = SVC_HANDLER
        if self.config.interrupts:
            counts = sorted(int(c) for c in self.rng.randint(1, retired_estimate, size=self.config.interrupts))
            data['interrupts'] = [{'count': c} for c in counts]
        return data

    def program(self):
        """ Next random program and its workload mapping

        Returns
        -------
        program : GuestProgram
        text : str
        workload : dict
        """
        text = self.text()
        return parse_guest_asm(text), text, self.workload()


def random_program(seed, config=None):
    """One random program, its source and workload mapping from a seed"""
    return ProgramGenerator(seed, config).program()
