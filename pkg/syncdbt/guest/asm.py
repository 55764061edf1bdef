"""Guest Assembler

Text format: one statement per line, ``;`` starts a comment, ``label:``
prefixes, ``.org <hex>`` moves the location counter and ``.word <hex>``
places a little-endian data word. Mnemonics are written
mnemonic + condition + ``s`` (``addeqs``).
"""

import logging
import re
from collections import namedtuple
from dataclasses import dataclass, field

from ..errors import AsmSyntaxError, UnknownMnemonic, UnresolvedLabel
from .isa import (Condition, GuestInstr, Reg, Imm, Mem, Target, SysReg, ALU_OPS, MOVE_OPS, MNEMONICS,
                  CONDITIONAL_OPS, FLAG_SETTING_OPS, SYSREGS, NUM_REGS, WORD_MASK, format_instr)

logger = logging.getLogger(__name__)

ENTRY_LABEL = 'start'

_BY_LENGTH = sorted(MNEMONICS, key=len, reverse=True)
_CONDITIONS = dict((c.value, c) for c in Condition)
_LABEL = re.compile(r'^([A-Za-z_.][\w.]*)\s*:')
_MEM = re.compile(r'^\[\s*(\w+)\s*(?:,\s*#\s*([-+]?\w+))?\s*\]$')
_OPERAND_SPLIT = re.compile(r',(?![^\[]*\])')

_LabelRef = namedtuple('_LabelRef', ['name'])


@dataclass
class GuestProgram(object):
    """Decoded guest program

    Instructions live in a Harvard-style store keyed by guest virtual address;
    ``data`` is the initial physical memory image (address -> byte).
    """
    entry: int = 0
    instrs: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict, compare=False)

    def __contains__(self, addr):
        return addr in self.instrs

    def __len__(self):
        return len(self.instrs)

    def fetch(self, addr):
        return self.instrs.get(addr)

    def addresses(self):
        return sorted(self.instrs)


def split_mnemonic(word):
    """ Split ``addeqs`` into (``add``, Condition.EQ, True)

    Every base mnemonic is tried as a prefix, longest first, and the first
    parse whose suffix is legal for that mnemonic wins (``blt`` is b + lt).

    Returns
    -------
    parsed : tuple or None
        (mnemonic, cond, sets_flags), None when nothing parses
    """
    word = word.lower()
    for base in _BY_LENGTH:
        if not word.startswith(base):
            continue
        rest = word[len(base):]
        sets_flags = False
        if rest.endswith('s') and rest[:-1] in _CONDITIONS or rest == 's':
            rest = rest[:-1]
            sets_flags = True
            if base not in FLAG_SETTING_OPS:
                continue
        if rest == '':
            return base, Condition.AL, sets_flags
        if rest in _CONDITIONS and (base in CONDITIONAL_OPS or rest == 'al'):
            return base, _CONDITIONS[rest], sets_flags
    return None


def _number(text, line, base=0):
    try:
        return int(text, base)
    except ValueError:
        raise AsmSyntaxError('bad number %r' % text, line)


def _hex(text, line):
    text = text.strip()
    if text.lower().startswith('0x'):
        return _number(text, line)
    return _number(text, line, 16)


class _Assembler(object):

    def __init__(self):
        self.loc = 0
        self.labels = {}
        self.pending = []
        self.data = {}
        self.instrs = {}

    def register(self, text, line):
        text = text.strip().lower()
        if not re.match(r'^r\d+$', text):
            raise AsmSyntaxError('expected a register, got %r' % text, line)
        n = int(text[1:])
        if n >= NUM_REGS:
            raise AsmSyntaxError('no such register %r' % text, line)
        return Reg(n)

    def immediate(self, text, line):
        text = text.strip()
        if not text.startswith('#'):
            raise AsmSyntaxError('expected an immediate, got %r' % text, line)
        body = text[1:].strip()
        if re.match(r'^[-+]?(0x[0-9a-fA-F]+|\d+)$', body):
            return Imm(_number(body, line) & WORD_MASK)
        return _LabelRef(body)

    def reg_or_imm(self, text, line):
        if text.strip().startswith('#'):
            return self.immediate(text, line)
        return self.register(text, line)

    def memory(self, text, line):
        match = _MEM.match(text.strip())
        if not match:
            raise AsmSyntaxError('bad memory operand %r' % text, line)
        base = self.register(match.group(1), line).n
        offset = _number(match.group(2), line) if match.group(2) else 0
        return Mem(base, offset)

    def target(self, text, line):
        text = text.strip()
        if re.match(r'^(0x[0-9a-fA-F]+|\d+)$', text):
            return Target(_number(text, line))
        if not re.match(r'^[A-Za-z_.][\w.]*$', text):
            raise AsmSyntaxError('bad branch target %r' % text, line)
        return _LabelRef(text)

    def sysreg(self, text, line):
        name = text.strip().lower()
        if name not in SYSREGS:
            raise AsmSyntaxError('unknown system register %r' % name, line)
        return SysReg(name)

    def operands(self, mnemonic, args, line):
        def expect(count):
            if len(args) != count:
                raise AsmSyntaxError('%s takes %d operands, got %d' % (mnemonic, count, len(args)), line)

        if mnemonic in ALU_OPS:
            expect(3)
            return (self.register(args[0], line), self.register(args[1], line), self.reg_or_imm(args[2], line))
        if mnemonic in MOVE_OPS:
            expect(2)
            return self.register(args[0], line), self.reg_or_imm(args[1], line)
        if mnemonic == 'cmp':
            expect(2)
            return self.register(args[0], line), self.reg_or_imm(args[1], line)
        if mnemonic in ('ldr', 'str'):
            expect(2)
            return self.register(args[0], line), self.memory(args[1], line)
        if mnemonic in ('b', 'bl'):
            expect(1)
            return (self.target(args[0], line),)
        if mnemonic in ('bx', 'setcpsr', 'getcpsr'):
            expect(1)
            return (self.register(args[0], line),)
        if mnemonic == 'vmsr':
            expect(2)
            return self.sysreg(args[0], line), self.register(args[1], line)
        if mnemonic == 'vmrs':
            expect(2)
            return self.register(args[0], line), self.sysreg(args[1], line)
        if mnemonic == 'svc':
            if not args:
                return (Imm(0),)
            expect(1)
            return (self.immediate(args[0], line),)
        expect(0)
        return ()

    def statement(self, text, line):
        while True:
            match = _LABEL.match(text)
            if not match:
                break
            name = match.group(1)
            if name in self.labels:
                raise AsmSyntaxError('duplicate label %r' % name, line)
            self.labels[name] = self.loc
            text = text[match.end():].strip()
        if not text:
            return

        head, _, tail = text.partition(' ')
        tail = tail.strip()
        directive = head.lower()
        if directive == '.org':
            self.loc = _hex(tail, line)
            if self.loc % 4:
                raise AsmSyntaxError('.org 0x%x is not word aligned' % self.loc, line)
            return
        if directive == '.word':
            value = _hex(tail, line) & WORD_MASK
            for i in range(4):
                self.data[self.loc + i] = (value >> (8 * i)) & 0xFF
            self.loc += 4
            return

        parsed = split_mnemonic(head)
        if parsed is None:
            raise UnknownMnemonic(head, line)
        mnemonic, cond, sets_flags = parsed
        args = [a.strip() for a in _OPERAND_SPLIT.split(tail)] if tail else []
        ops = self.operands(mnemonic, args, line)
        if self.loc in self.instrs:
            raise AsmSyntaxError('two instructions at 0x%x' % self.loc, line)
        self.instrs[self.loc] = (mnemonic, cond, sets_flags or mnemonic == 'cmp', ops)
        self.pending.append((self.loc, line))
        self.loc += 4

    def resolve(self, mnemonic, op, line):
        if not isinstance(op, _LabelRef):
            return op
        if op.name not in self.labels:
            raise UnresolvedLabel(op.name, line)
        value = self.labels[op.name]
        return Target(value) if mnemonic in ('b', 'bl') else Imm(value)

    def finish(self):
        instrs = {}
        for addr, line in self.pending:
            mnemonic, cond, sets_flags, ops = self.instrs[addr]
            resolved = [self.resolve(mnemonic, op, line) for op in ops]
            instrs[addr] = GuestInstr(addr, mnemonic, cond, sets_flags, tuple(resolved))
        if ENTRY_LABEL in self.labels:
            entry = self.labels[ENTRY_LABEL]
        else:
            entry = min(instrs) if instrs else 0
        return GuestProgram(entry, instrs, self.data, dict(self.labels))


def parse_guest_asm(text):
    """ Assemble guest source text

    Parameters
    ----------
    text : str
        Assembly source

    Returns
    -------
    program : GuestProgram
    """
    asm = _Assembler()
    for number, raw in enumerate(text.splitlines(), start=1):
        statement = raw.split(';', 1)[0].strip()
        if statement:
            asm.statement(statement, number)
    program = asm.finish()
    logger.debug('assembled %d instructions, %d data bytes, entry 0x%x',
                 len(program.instrs), len(program.data), program.entry)
    return program


def format_program(program):
    """Print a program in a form parse_guest_asm reads back to an equal program"""
    lines = []
    expected = None
    for addr in program.addresses():
        if addr != expected:
            lines.append('.org 0x%x' % addr)
        if addr == program.entry:
            lines.append('%s:' % ENTRY_LABEL)
        lines.append('    ' + format_instr(program.instrs[addr]))
        expected = addr + 4
    if program.entry not in program.instrs:
        lines.append('.org 0x%x' % program.entry)
        lines.append('%s:' % ENTRY_LABEL)

    words = sorted(set(addr - addr % 4 for addr in program.data))
    expected = None
    for base in words:
        if base != expected:
            lines.append('.org 0x%x' % base)
        value = 0
        for i in range(4):
            value |= program.data.get(base + i, 0) << (8 * i)
        lines.append('    .word 0x%08x' % value)
        expected = base + 4
    return '\n'.join(lines) + '\n'
