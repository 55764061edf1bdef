"""Guest Instruction Set

An ARM-v7 flavoured subset. Every instruction occupies 4 address units in
an instruction store that is separate from data memory.
"""

from collections import namedtuple
from dataclasses import dataclass, field
from enum import Enum

WORD_MASK = 0xFFFFFFFF
NUM_REGS = 15
LINK_REG = 14

# Bit positions inside the packed 4-bit condition-code register
FLAG_BITS = {'N': 8, 'Z': 4, 'C': 2, 'V': 1}
ALL_FLAGS = frozenset(FLAG_BITS)
NO_FLAGS = frozenset()


class Condition(Enum):
    EQ = 'eq'
    NE = 'ne'
    GE = 'ge'
    LT = 'lt'
    AL = 'al'

    def holds(self, nzcv):
        """ Evaluate the condition against a packed NZCV value

        Parameters
        ----------
        nzcv : int
            Packed condition codes (N=8, Z=4, C=2, V=1)

        Returns
        -------
        satisfied : bool
        """
        n = bool(nzcv & 8)
        z = bool(nzcv & 4)
        v = bool(nzcv & 1)
        if self is Condition.EQ:
            return z
        if self is Condition.NE:
            return not z
        if self is Condition.GE:
            return n == v
        if self is Condition.LT:
            return n != v
        return True

    @property
    def flags_read(self):
        if self in (Condition.EQ, Condition.NE):
            return frozenset('Z')
        if self in (Condition.GE, Condition.LT):
            return frozenset('NV')
        return NO_FLAGS

    @property
    def suffix(self):
        return '' if self is Condition.AL else self.value

    def inverse(self):
        return _INVERSE[self]


_INVERSE = {
    Condition.EQ: Condition.NE,
    Condition.NE: Condition.EQ,
    Condition.GE: Condition.LT,
    Condition.LT: Condition.GE,
}


class Category(Enum):
    RULE_ELIGIBLE = 'RuleEligible'
    MEMORY_ACCESS = 'MemoryAccess'
    SYSTEM_LEVEL = 'SystemLevel'
    BRANCH = 'Branch'
    HALT = 'Halt'


ALU_OPS = ('add', 'sub', 'and', 'orr', 'eor', 'lsl', 'lsr')
MOVE_OPS = ('mov', 'mvn')
MEMORY_OPS = ('ldr', 'str')
BRANCH_OPS = ('b', 'bl', 'bx')
SYSTEM_OPS = ('vmsr', 'vmrs', 'setcpsr', 'getcpsr', 'tlbi', 'svc', 'eret')
PRIVILEGED_OPS = frozenset(('vmsr', 'vmrs', 'setcpsr', 'getcpsr', 'tlbi', 'eret'))
MNEMONICS = ALU_OPS + MOVE_OPS + ('cmp',) + MEMORY_OPS + BRANCH_OPS + SYSTEM_OPS + ('halt',)

# Which mnemonics accept a condition suffix and which accept the S suffix
CONDITIONAL_OPS = frozenset(ALU_OPS + MOVE_OPS + ('cmp', 'b'))
FLAG_SETTING_OPS = frozenset(ALU_OPS + MOVE_OPS)

SYSREGS = ('fpscr', 'fpexc', 'fpsid', 'elr', 'spsr')
BANKED_SYSREGS = frozenset(('elr', 'spsr'))

_CATEGORY = {}
_CATEGORY.update((m, Category.RULE_ELIGIBLE) for m in ALU_OPS + MOVE_OPS + ('cmp',))
_CATEGORY.update((m, Category.MEMORY_ACCESS) for m in MEMORY_OPS)
_CATEGORY.update((m, Category.BRANCH) for m in BRANCH_OPS)
_CATEGORY.update((m, Category.SYSTEM_LEVEL) for m in SYSTEM_OPS)
_CATEGORY['halt'] = Category.HALT


Reg = namedtuple('Reg', ['n'])
Imm = namedtuple('Imm', ['value'])
Mem = namedtuple('Mem', ['base', 'offset'])
Target = namedtuple('Target', ['addr'])
SysReg = namedtuple('SysReg', ['name'])


@dataclass(frozen=True)
class GuestInstr(object):
    """A decoded guest instruction"""
    addr: int
    mnemonic: str
    cond: Condition = Condition.AL
    sets_flags: bool = False
    operands: tuple = field(default_factory=tuple)

    @property
    def category(self):
        return classify(self)

    def __str__(self):
        return format_instr(self)


def classify(instr):
    """ Coordination category of an instruction

    Parameters
    ----------
    instr : GuestInstr

    Returns
    -------
    category : Category
    """
    return _CATEGORY[instr.mnemonic]


def flag_def_use(instr):
    """ Condition flags defined and used by an instruction

    Returns
    -------
    defines : frozenset of str
    uses : frozenset of str
    """
    defines = ALL_FLAGS if (instr.sets_flags or instr.mnemonic == 'cmp') else NO_FLAGS
    return defines, instr.cond.flags_read


def helper_flag_access(instr):
    """ Flags an emulator helper reads or writes individually

    Only system-level instructions run in a helper. setcpsr and eret (which
    reloads the CPSR from spsr) overwrite every flag slot, getcpsr and svc
    (which banks the CPSR) read them.

    Returns
    -------
    reads : bool
    writes : bool
    """
    if instr.mnemonic == 'getcpsr' or instr.mnemonic == 'svc':
        return True, False
    if instr.mnemonic in ('setcpsr', 'eret'):
        return False, True
    return False, False


def regs_read(instr):
    """Guest general registers read by the instruction (conditional writes count as reads)"""
    ops = instr.operands
    m = instr.mnemonic
    regs = set()
    if m in ALU_OPS:
        regs.add(ops[1].n)
        if isinstance(ops[2], Reg):
            regs.add(ops[2].n)
    elif m in MOVE_OPS:
        if isinstance(ops[1], Reg):
            regs.add(ops[1].n)
    elif m == 'cmp':
        regs.add(ops[0].n)
        if isinstance(ops[1], Reg):
            regs.add(ops[1].n)
    elif m == 'ldr':
        regs.add(ops[1].base)
    elif m == 'str':
        regs.add(ops[0].n)
        regs.add(ops[1].base)
    elif m == 'bx':
        regs.add(ops[0].n)
    elif m in ('vmsr',):
        regs.add(ops[1].n)
    elif m == 'setcpsr':
        regs.add(ops[0].n)
    if instr.cond is not Condition.AL:
        regs |= regs_written(instr)
    return frozenset(regs)


def regs_written(instr):
    """Guest general registers the instruction may write"""
    ops = instr.operands
    m = instr.mnemonic
    if m in ALU_OPS or m in MOVE_OPS or m in ('ldr', 'vmrs', 'getcpsr'):
        return frozenset((ops[0].n,))
    if m == 'bl':
        return frozenset((LINK_REG,))
    return frozenset()


def may_fault(instr):
    """True if executing the instruction can raise a guest fault"""
    return instr.mnemonic in MEMORY_OPS or instr.mnemonic in PRIVILEGED_OPS


def ends_block(instr):
    return instr.category in (Category.BRANCH, Category.HALT) or instr.mnemonic in ('svc', 'eret')


def format_operand(op):
    if isinstance(op, Reg):
        return 'r%d' % op.n
    if isinstance(op, Imm):
        return '#0x%x' % op.value
    if isinstance(op, Mem):
        return '[r%d, #%d]' % (op.base, op.offset)
    if isinstance(op, Target):
        return '0x%x' % op.addr
    if isinstance(op, SysReg):
        return op.name
    raise TypeError('not an operand: %r' % (op,))


def format_instr(instr):
    """Canonical text of an instruction (mnemonic + condition + s)"""
    text = instr.mnemonic + instr.cond.suffix
    if instr.sets_flags and instr.mnemonic in FLAG_SETTING_OPS:
        text += 's'
    if instr.operands:
        text += ' ' + ', '.join(format_operand(op) for op in instr.operands)
    return text
