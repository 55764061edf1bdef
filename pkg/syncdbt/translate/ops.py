"""Host instructions, coordination markers and translated-block structure"""

import re
from collections import namedtuple
from dataclasses import dataclass, field, replace
from enum import Enum

from ..errors import UnknownComponent
from ..guest.isa import Condition

NUM_HOST_REGS = 16
MAPPED_REGS = 12          # guest r0-r11 live in host h0-h11 inside rule-translated code
SCRATCH = (12, 13, 14, 15)  # clobbered by helpers and the runtime

HOST_ALU = {
    'hadd': 'add', 'hsub': 'sub', 'hand': 'and', 'hor': 'orr', 'hxor': 'eor', 'hshl': 'lsl', 'hshr': 'lsr',
}
GUEST_TO_HOST_ALU = dict((v, k) for k, v in HOST_ALU.items())

HOST_MNEMONICS = frozenset(list(HOST_ALU) + ['%s.f' % op for op in HOST_ALU] + [
    'hmov', 'hmov.f', 'hcmp', 'hjcc', 'hjmp', 'hld', 'hst', 'hflags2reg', 'hreg2flags', 'hflagext', 'hcall', 'hexit',
    'hchain'])


class Tag(Enum):
    TRANSLATED = 'Translated'
    SYNC = 'Sync'
    HELPER = 'Helper'
    CHECK = 'Check'
    CHAIN = 'Chain'


HReg = namedtuple('HReg', ['n'])
HImm = namedtuple('HImm', ['value'])
Slot = namedtuple('Slot', ['index'])
Rel = namedtuple('Rel', ['skip'])


@dataclass(frozen=True)
class HostInstr(object):
    """ One host instruction

    ``sync`` is set on the first instruction of a lowered SyncOp and names its
    cause, so executed coordination operations can be counted.
    """
    op: str
    args: tuple = ()
    tag: Tag = Tag.TRANSLATED
    sync: object = None

    def __str__(self):
        def fmt(arg):
            if isinstance(arg, HReg):
                return 'h%d' % arg.n
            if isinstance(arg, HImm):
                return '#0x%x' % arg.value
            if isinstance(arg, Slot):
                return '[area+%d]' % arg.index
            if isinstance(arg, Rel):
                return '+%d' % arg.skip
            if isinstance(arg, Condition):
                return arg.value
            return str(arg)
        return '%s %s' % (self.op, ', '.join(fmt(a) for a in self.args))

    def retag(self, tag):
        return replace(self, tag=tag)


def h(n):
    return HReg(n)


def imm(value):
    return HImm(value & 0xFFFFFFFF)


_HOST_OPERAND = re.compile(r'^(h\d+|#[-+]?(0x[0-9a-fA-F]+|\d+)|[A-Za-z]+|\d+)$')


def parse_host_line(text):
    """ Parse one concrete host instruction written as text

    Used for rule templates after placeholder substitution. Jump targets in
    templates are relative (``hjcc ne, 1`` skips one instruction).

    Returns
    -------
    instr : HostInstr
    """
    text = text.strip()
    op, _, rest = text.partition(' ')
    op = op.lower()
    if op not in HOST_MNEMONICS:
        raise ValueError('unknown host instruction %r' % op)
    args = []
    for raw in [a.strip() for a in rest.split(',')] if rest.strip() else []:
        if not _HOST_OPERAND.match(raw):
            raise ValueError('bad host operand %r in %r' % (raw, text))
        if raw.startswith('h') and raw[1:].isdigit():
            n = int(raw[1:])
            if n >= NUM_HOST_REGS:
                raise ValueError('no host register %r' % raw)
            args.append(HReg(n))
        elif raw.startswith('#'):
            args.append(imm(int(raw[1:], 0)))
        elif raw.isdigit():
            args.append(Rel(int(raw)))
        elif raw in ('eq', 'ne', 'ge', 'lt', 'al'):
            args.append(Condition(raw))
        elif raw.upper() in 'NZCV' and len(raw) == 1:
            args.append(raw.upper())
        else:
            raise ValueError('bad host operand %r in %r' % (raw, text))
    return HostInstr(op, tuple(args))


# Coordination markers

class SyncKind(Enum):
    SAVE = 'Save'
    RESTORE = 'Restore'


class SyncMode(Enum):
    FULL = 'Full'
    PACKED = 'Packed'


class SyncCause(Enum):
    SYSTEM_LEVEL = 'SystemLevel'
    MEMORY_ACCESS = 'MemoryAccess'
    INTERRUPT_CHECK = 'InterruptCheck'
    TB_BOUNDARY = 'TbBoundary'
    CONSTRAINED_RULE = 'ConstrainedRule'
    FALLBACK = 'Fallback'
    DEFERRED_UNPACK = 'DeferredUnpack'


CCR = 'CCR'
PC = 'PC'
GPR = namedtuple('GPR', ['n'])


def check_component(component):
    if component == CCR or component == PC:
        return component
    if isinstance(component, GPR) and 0 <= component.n < MAPPED_REGS:
        return component
    raise UnknownComponent(component)


def component_order(component):
    if isinstance(component, GPR):
        return (0, component.n)
    return (1, 0) if component == PC else (2, 0)


def gprs(regs):
    """Components for the host-resident guest registers among ``regs``"""
    return frozenset(GPR(n) for n in regs if n < MAPPED_REGS)


@dataclass(frozen=True)
class SyncOp(object):
    """ Sync-save or sync-restore of a set of guest state components

    Parameters
    ----------
    kind : SyncKind
    components : frozenset
        Over GPR(i), CCR and PC
    mode : SyncMode
        Packed is only meaningful for the CCR component
    cause : SyncCause
    """
    kind: SyncKind
    components: frozenset
    mode: SyncMode = SyncMode.FULL
    cause: SyncCause = SyncCause.TB_BOUNDARY
    pc: int = field(default=0, compare=True)

    def __post_init__(self):
        object.__setattr__(self, 'components', frozenset(check_component(c) for c in self.components))
        if not self.components:
            raise ValueError('a sync operation needs at least one component')
        if self.mode is SyncMode.PACKED and CCR not in self.components:
            raise ValueError('packed mode applies only when CCR is synced')

    @property
    def is_save(self):
        return self.kind is SyncKind.SAVE

    def with_mode(self, mode):
        return replace(self, mode=mode)

    def without(self, components):
        """Copy without ``components``, or None when nothing is left"""
        left = self.components - frozenset(components)
        if not left:
            return None
        mode = self.mode if CCR in left else SyncMode.FULL
        return replace(self, components=left, mode=mode)

    def ordered(self):
        return sorted(self.components, key=component_order)

    def __str__(self):
        names = ['r%d' % c.n if isinstance(c, GPR) else c for c in self.ordered()]
        return '%s{%s} %s %s' % (self.kind.value, ','.join(names), self.mode.value, self.cause.value)


def save(components, cause, mode=SyncMode.FULL, pc=0):
    return SyncOp(SyncKind.SAVE, frozenset(components), mode, cause, pc)


def restore(components, cause, mode=SyncMode.FULL):
    return SyncOp(SyncKind.RESTORE, frozenset(components), mode, cause)


# Block items

@dataclass(frozen=True)
class RuleSite(object):
    """Guest instructions covered by a translation rule"""
    instrs: tuple
    rule: str
    prelude: tuple
    body: tuple
    constrained: bool = False

    @property
    def cond(self):
        return self.instrs[-1].cond

    @property
    def code(self):
        return self.prelude + self.body


@dataclass(frozen=True)
class HelperSite(object):
    """A memory access or system-level instruction run by an emulator helper"""
    instr: object
    kind: str

    @property
    def instrs(self):
        return (self.instr,)


@dataclass(frozen=True)
class FallbackSite(object):
    """An instruction no rule covers, emitted through the baseline lowering"""
    instr: object

    @property
    def instrs(self):
        return (self.instr,)


@dataclass(frozen=True)
class CheckSite(object):
    """Interrupt check: load the pending slot, leave the block if set"""

    @property
    def instrs(self):
        return ()


class ExitKind(Enum):
    FALL_THROUGH = 'FallThrough'
    BRANCH = 'Branch'
    TO_RUNTIME = 'ToRuntime'


@dataclass(frozen=True)
class ExitSite(object):
    """ Block terminator

    ``targets`` is (next,) for FallThrough and (taken, not_taken) for Branch.
    ``edge_save`` is the TbBoundary save run on every direct edge before
    leaving; ``reason`` names the ToRuntime cause (halt, svc, indirect).
    """
    instr: object
    kind: ExitKind
    targets: tuple = ()
    cond: Condition = Condition.AL
    edge_save: object = None
    reason: str = ''
    link: int = None

    @property
    def instrs(self):
        return (self.instr,) if self.instr is not None else ()


def is_sync(item):
    return isinstance(item, SyncOp)


@dataclass(frozen=True)
class HostBlock(object):
    """ A translated block before lowering

    ``items`` interleaves sites with SyncOp markers in execution order and ends
    with an ExitSite. ``instrs`` is the guest TB in address order.
    """
    entry: int
    instrs: tuple
    items: tuple
    pipeline: str = 'rules'

    @property
    def exit(self):
        return self.items[-1]

    @property
    def span(self):
        return self.entry, len(self.instrs)

    def sync_ops(self):
        ops = [item for item in self.items if is_sync(item)]
        if isinstance(self.exit, ExitSite) and self.exit.edge_save is not None:
            ops.append(self.exit.edge_save)
        return ops

    def with_items(self, items):
        return replace(self, items=tuple(items))
