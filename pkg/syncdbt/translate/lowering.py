"""Lowering

Turns a HostBlock's sites and SyncOp markers into concrete host code the host
machine can run. Sync operations expand to fixed sequences; each helper call
gets a fault stub and each interrupt check an exit stub that name the guest
address execution resumes at.
"""

import logging
from collections import namedtuple
from dataclasses import dataclass, replace

from ..errors import UnknownComponent
from ..guest.isa import Category, Condition, may_fault, regs_written
from ..machine.area import CCR_DIRTY, CCR_PACKED, FLAG_SLOTS, IRQ_PENDING, PC as PC_SLOT, reg_slot
from .baseline import condition_test, lower_baseline
from .ops import (CCR, GPR, PC, CheckSite, ExitKind, ExitSite, FallbackSite, HelperSite, HostInstr, Rel, RuleSite,
                  Slot, SyncCause, SyncMode, Tag, h, imm, is_sync, restore, MAPPED_REGS)

logger = logging.getLogger(__name__)

EDGE = 'edge'
HALT = 'halt'
SVC = 'svc'
ERET = 'eret'
INDIRECT = 'indirect'
INTERRUPT = 'interrupt'
FAULT = 'fault'

FULL_CCR_LENGTH = 14
PACKED_CCR_LENGTH = 3

StubRef = namedtuple('StubRef', ['index'])


@dataclass(frozen=True)
class RetireProfile(object):
    """Counts of guest instructions retired along one exit of a block"""
    retired: int = 0
    system: int = 0
    memory: int = 0
    rule_covered: int = 0
    rule_eligible: int = 0
    coordinated: int = 0

    def __add__(self, other):
        return RetireProfile(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def astuple(self):
        return (self.retired, self.system, self.memory, self.rule_covered, self.rule_eligible, self.coordinated)


@dataclass(frozen=True)
class ExitInfo(object):
    """ Where a block hands control back

    ``target`` is the next guest pc for edges, the resume pc for interrupt
    and fault exits, and the halt address for halt. svc and eret read the pc
    from the EmuStateArea, bx from the register in ``reg``.
    """
    reason: str
    profile: RetireProfile
    target: int = None
    edge: int = None
    reg: int = None


Edge = namedtuple('Edge', ['index', 'target', 'exit', 'slot', 'eslot'])


@dataclass(frozen=True)
class LoweredBlock(object):
    """ Executable host code for one TB

    Attributes
    ----------
    code : tuple of HostInstr
    entry_skip : int
        First instruction after the entry Restore, the target of chain links
        that carry the live flags across
    exits : tuple of ExitInfo
        Indexed by hexit and hchain operands
    edges : tuple of Edge
        Direct successors with their chain slot positions
    source : HostBlock
    """
    entry: int
    code: tuple
    entry_skip: int
    exits: tuple
    edges: tuple
    source: object
    full_profile: RetireProfile

    @property
    def pipeline(self):
        return self.source.pipeline

    def static_counts(self):
        counts = dict((tag, 0) for tag in Tag)
        for instr in self.code:
            counts[instr.tag] += 1
        return counts

    def listing(self):
        return '\n'.join('%4d  %-10s %s' % (i, instr.tag.value, instr) for i, instr in enumerate(self.code))


# Sync lowering

def _save_ccr_full():
    t0, t1 = h(15), h(14)
    code = [HostInstr('hflags2reg', (t0,)), HostInstr('hst', (Slot(CCR_PACKED), t0))]
    for name in 'NZCV':
        code.append(HostInstr('hflagext', (t1, t0, name)))
        code.append(HostInstr('hst', (Slot(FLAG_SLOTS[name]), t1)))
    code += [HostInstr('hmov', (h(13), imm(0))),
             HostInstr('hst', (Slot(CCR_DIRTY), h(13))),
             HostInstr('hreg2flags', (t0,)),
             HostInstr('hmov', (t0, imm(0)))]
    return code


def _restore_ccr_full():
    t0, t1 = h(15), h(14)
    code = [HostInstr('hld', (t0, Slot(FLAG_SLOTS['N']))),
            HostInstr('hshl', (t0, t0, imm(3)))]
    for name, shift in (('Z', 2), ('C', 1)):
        code += [HostInstr('hld', (t1, Slot(FLAG_SLOTS[name]))),
                 HostInstr('hshl', (t1, t1, imm(shift))),
                 HostInstr('hor', (t0, t0, t1))]
    code += [HostInstr('hld', (t1, Slot(FLAG_SLOTS['V']))),
             HostInstr('hor', (t0, t0, t1)),
             HostInstr('hreg2flags', (t0,)),
             HostInstr('hst', (Slot(CCR_PACKED), t0)),
             HostInstr('hmov', (t1, imm(0))),
             HostInstr('hmov', (t0, imm(0)))]
    return code


def _save_ccr_packed():
    return [HostInstr('hflags2reg', (h(15),)),
            HostInstr('hst', (Slot(CCR_PACKED), h(15))),
            HostInstr('hst', (Slot(CCR_DIRTY), imm(1)))]


def _restore_ccr_packed():
    return [HostInstr('hld', (h(15), Slot(CCR_PACKED))),
            HostInstr('hreg2flags', (h(15),)),
            HostInstr('hmov', (h(15), imm(0)))]


def lower_sync(op):
    """ Host code for one sync operation

    CCR costs 14 instructions in Full mode (every flag extracted to its own
    slot, or rebuilt from them) and 3 in Packed mode. Each GPR and the PC
    cost one load or store.

    Parameters
    ----------
    op : SyncOp

    Returns
    -------
    code : tuple of HostInstr
        Tagged Sync; the first instruction carries the op's cause
    """
    code = []
    for component in op.ordered():
        if isinstance(component, GPR):
            if component.n >= MAPPED_REGS:
                raise UnknownComponent(component)
            if op.is_save:
                code.append(HostInstr('hst', (Slot(reg_slot(component.n)), h(component.n))))
            else:
                code.append(HostInstr('hld', (h(component.n), Slot(reg_slot(component.n)))))
        elif component == PC:
            if op.is_save:
                code.append(HostInstr('hst', (Slot(PC_SLOT), imm(op.pc))))
            else:
                code.append(HostInstr('hld', (h(15), Slot(PC_SLOT))))
        elif component == CCR:
            packed = op.mode is SyncMode.PACKED
            if op.is_save:
                code += _save_ccr_packed() if packed else _save_ccr_full()
            else:
                code += _restore_ccr_packed() if packed else _restore_ccr_full()
        else:
            raise UnknownComponent(component)
    code = [instr.retag(Tag.SYNC) for instr in code]
    code[0] = replace(code[0], sync=op.cause)
    return tuple(code)


def deferred_unpack_code():
    """ Rebuild the per-flag slots from the packed slot (10 instructions)

    Run by the runtime before it reads the flags when a packed save left the
    per-flag slots stale.
    """
    code = [HostInstr('hld', (h(15), Slot(CCR_PACKED)), Tag.SYNC, SyncCause.DEFERRED_UNPACK)]
    for name in 'NZCV':
        code.append(HostInstr('hflagext', (h(14), h(15), name), Tag.SYNC))
        code.append(HostInstr('hst', (Slot(FLAG_SLOTS[name]), h(14)), Tag.SYNC))
    code.append(HostInstr('hst', (Slot(CCR_DIRTY), imm(0)), Tag.SYNC))
    return tuple(code)


# Block lowering

_SITE_CAUSE = {
    'memory': SyncCause.MEMORY_ACCESS,
    'system': SyncCause.SYSTEM_LEVEL,
}


def _site_cause(item):
    if isinstance(item, HelperSite):
        return _SITE_CAUSE[item.kind]
    if isinstance(item, RuleSite):
        return SyncCause.CONSTRAINED_RULE if item.constrained else None
    if isinstance(item, FallbackSite):
        return SyncCause.FALLBACK
    if isinstance(item, ExitSite):
        return SyncCause.TB_BOUNDARY
    return None


def coordinated_addresses(items):
    """Guest addresses whose site performs a coordination of its own"""
    addrs = set()
    for pos, item in enumerate(items):
        cause = _site_cause(item)
        if cause is None or not item.instrs:
            continue
        left = pos - 1
        while left >= 0 and isinstance(items[left], CheckSite):
            left -= 1
        neighbours = [items[left]] if left >= 0 else []
        if pos + 1 < len(items):
            neighbours.append(items[pos + 1])
        if isinstance(item, ExitSite) and item.edge_save is not None:
            neighbours.append(item.edge_save)
        if any(is_sync(n) and n.cause is cause for n in neighbours):
            addrs.update(i.addr for i in item.instrs)
    return addrs


def retire_profile(instrs, covered, coordinated):
    """ Profile of retiring ``instrs``

    Parameters
    ----------
    instrs : iterable of GuestInstr
    covered : set
        Addresses translated by a rule
    coordinated : set
        Addresses whose site coordinated state
    """
    counts = [0] * 6
    for instr in instrs:
        category = instr.category
        if category is Category.HALT:
            continue
        counts[0] += 1
        counts[1] += category is Category.SYSTEM_LEVEL
        counts[2] += category is Category.MEMORY_ACCESS
        counts[3] += instr.addr in covered
        counts[4] += category is Category.RULE_ELIGIBLE
        counts[5] += instr.addr in coordinated
    return RetireProfile(*counts)


class _Emitter(object):

    def __init__(self):
        self.code = []
        self.exits = []
        self.edges = []
        self.stubs = []

    def emit(self, op, args=(), tag=Tag.TRANSLATED, sync=None):
        self.code.append(HostInstr(op, tuple(args), tag, sync))
        return len(self.code) - 1

    def extend(self, code, tag=None):
        """Append code, turning relative jump targets absolute"""
        for instr in code:
            here = len(self.code)
            args = tuple(here + 1 + a.skip if isinstance(a, Rel) else a for a in instr.args)
            instr = replace(instr, args=args)
            if tag is not None:
                instr = instr.retag(tag)
            self.code.append(instr)

    def exit(self, info):
        self.exits.append(info)
        return len(self.exits) - 1

    def stub(self, code, info):
        self.stubs.append((tuple(code), self.exit(info)))
        return StubRef(len(self.stubs) - 1)

    def finish(self):
        starts = []
        for code, exit_index in self.stubs:
            starts.append(len(self.code))
            self.extend(code)
            self.emit('hexit', (exit_index,))
        resolved = []
        for instr in self.code:
            if any(isinstance(a, StubRef) for a in instr.args):
                args = tuple(starts[a.index] if isinstance(a, StubRef) else a for a in instr.args)
                instr = replace(instr, args=args)
            resolved.append(instr)
        return tuple(resolved)


def lower_block(block, chain_elision=False):
    """ Lower a HostBlock to executable host code

    Parameters
    ----------
    block : HostBlock
    chain_elision : bool
        Give every coordinated edge an extra chain slot ahead of its boundary
        save, so a link can skip the save (Elimination level and above)

    Returns
    -------
    lowered : LoweredBlock
    """
    tb = block.instrs
    items = block.items
    covered = set(i.addr for item in items if isinstance(item, RuleSite) for i in item.instrs)
    coordinated = coordinated_addresses(items)
    full = retire_profile(tb, covered, coordinated)
    em = _Emitter()
    executed = set()
    pending = set()
    entry_skip = 0

    def early_exit(reason):
        remaining = [i.addr for i in tb if i.addr not in executed]
        resume = min(remaining) if remaining else tb[-1].addr + 4
        profile = retire_profile([i for i in tb if i.addr < resume], covered, coordinated)
        stub_code = []
        if pending:
            stub_code = lower_sync(restore([GPR(n) for n in pending], SyncCause.MEMORY_ACCESS))
        return em.stub(stub_code, ExitInfo(reason, profile, target=resume))

    def epilogue(edge, target, save):
        exit_index = em.exit(ExitInfo(EDGE, full, target=target, edge=edge))
        eslot = None
        if chain_elision and save is not None:
            eslot = em.emit('hchain', (exit_index, True), Tag.CHAIN)
        if save is not None:
            em.extend(lower_sync(save))
        slot = em.emit('hchain', (exit_index, False), Tag.CHAIN)
        em.emit('hexit', (exit_index,))
        em.edges.append(Edge(edge, target, exit_index, slot, eslot))

    for pos, item in enumerate(items):
        if is_sync(item):
            em.extend(lower_sync(item))
            if not item.is_save:
                pending.difference_update(c.n for c in item.components if isinstance(c, GPR))
                if pos == 0 and item.cause is SyncCause.TB_BOUNDARY:
                    entry_skip = len(em.code)
        elif isinstance(item, RuleSite):
            em.extend(item.code, Tag.TRANSLATED)
            executed.update(i.addr for i in item.instrs)
        elif isinstance(item, FallbackSite):
            em.extend(lower_baseline(item.instr), Tag.TRANSLATED)
            executed.add(item.instr.addr)
        elif isinstance(item, CheckSite):
            stub = early_exit(INTERRUPT)
            em.emit('hld', (h(15), Slot(IRQ_PENDING)), Tag.CHECK)
            em.emit('hcmp', (h(15), imm(0)), Tag.CHECK)
            em.emit('hjcc', (Condition.NE, stub), Tag.CHECK)
        elif isinstance(item, HelperSite):
            ends = pos + 1 < len(items) and isinstance(items[pos + 1], ExitSite) and items[pos + 1].instr is item.instr
            stub = None if ends and not may_fault(item.instr) else early_exit(FAULT)
            em.emit('hcall', (item.kind, item.instr, stub), Tag.HELPER)
            executed.add(item.instr.addr)
            if block.pipeline == 'rules':
                pending.update(n for n in regs_written(item.instr) if n < MAPPED_REGS)
        elif isinstance(item, ExitSite):
            _lower_exit(em, block, item, full, epilogue)
        else:
            raise TypeError('cannot lower %r' % (item,))

    lowered = LoweredBlock(block.entry, em.finish(), entry_skip, tuple(em.exits), tuple(em.edges), block, full)
    logger.debug('lowered TB 0x%x: %d host instructions', block.entry, len(lowered.code))
    return lowered


def _lower_exit(em, block, site, full, epilogue):
    if site.kind is ExitKind.TO_RUNTIME:
        if site.reason == HALT:
            info = ExitInfo(HALT, full, target=site.instr.addr)
        elif site.reason == INDIRECT:
            info = ExitInfo(INDIRECT, full, reg=site.instr.operands[0].n)
        elif site.reason in (SVC, ERET):
            info = ExitInfo(site.reason, full)
        else:
            raise ValueError('unknown runtime exit %r' % site.reason)
        em.emit('hexit', (em.exit(info),))
        return

    if site.link is not None:
        em.emit('hst', (Slot(reg_slot(14)), imm(site.link)))
    if site.kind is ExitKind.FALL_THROUGH:
        epilogue(0, site.targets[0], site.edge_save)
        return

    if block.pipeline == 'baseline':
        em.extend(condition_test(site.cond))
        jump = em.emit('hjcc', (Condition.EQ, None))
    else:
        jump = em.emit('hjcc', (site.cond, None))
    epilogue(1, site.targets[1], site.edge_save)
    em.code[jump] = replace(em.code[jump], args=(em.code[jump].args[0], len(em.code)))
    epilogue(0, site.targets[0], site.edge_save)
