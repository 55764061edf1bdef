"""Coordination checker

A linear scan over a block's items that tracks, per state component, whether
the host copy and the EmuStateArea copy are current. Every reader must find
its components current where it reads them: translated code in the host,
helpers, baseline code and the runtime in the area. Any optimisation that
drops or moves a sync operation it should not shows up here.
"""

from ..guest.isa import Condition, flag_def_use, regs_read, regs_written
from .ops import (CCR, GPR, PC, CheckSite, ExitKind, ExitSite, FallbackSite, HelperSite, RuleSite, gprs, is_sync,
                  MAPPED_REGS)

ALL_GPRS = frozenset(GPR(n) for n in range(MAPPED_REGS))


class _Tracker(object):

    def __init__(self):
        self.host = set(ALL_GPRS)
        self.area = set([CCR])
        self.problems = []

    def need(self, pos, where, components, reader):
        copy = self.host if where == 'host' else self.area
        missing = set(components) - copy
        if missing:
            names = sorted('r%d' % c.n if isinstance(c, GPR) else c for c in missing)
            self.problems.append('item %d (%s): %s stale in %s' % (pos, reader, ', '.join(names), where))

    def to_host(self, components):
        self.host.update(components)
        self.area.difference_update(components)

    def to_area(self, components):
        self.area.update(components)
        self.host.difference_update(components)


def _defines(instrs):
    return any(flag_def_use(i)[0] for i in instrs)


def check_coordination(block):
    """ Check Save-before / Restore-after coverage of a rule-translated block

    Parameters
    ----------
    block : HostBlock

    Returns
    -------
    problems : list of str
        Empty when every helper call, baseline site, interrupt check and exit
        finds the guest state it reads current
    """
    if block.pipeline != 'rules':
        return [] if not block.sync_ops() else ['baseline block carries sync operations']
    t = _Tracker()
    cond_test = None
    for pos, item in enumerate(block.items):
        if is_sync(item):
            components = item.components - {PC}
            if item.is_save:
                t.need(pos, 'host', components, str(item))
                t.area.update(components)
            else:
                t.need(pos, 'area', components, str(item))
                t.host.update(components)
            cond_test = None
        elif isinstance(item, RuleSite):
            name = item.rule
            for instr in item.instrs:
                t.need(pos, 'host', gprs(regs_read(instr)), name)
            if item.constrained and not item.prelude:
                if cond_test is not item.cond:
                    t.problems.append('item %d (%s): no condition test to share' % (pos, name))
            elif item.instrs[0].cond is not Condition.AL:
                t.need(pos, 'host', [CCR], name)
            for instr in item.instrs:
                t.to_host(gprs(regs_written(instr)))
            if _defines(item.instrs):
                t.to_host([CCR])
            cond_test = None
            if item.constrained:
                t.host.discard(CCR)
                if not _defines(item.instrs):
                    cond_test = item.cond
        elif isinstance(item, FallbackSite):
            instr = item.instr
            conditional = instr.cond is not Condition.AL
            t.need(pos, 'area', set(gprs(regs_read(instr))) | ({CCR} if conditional else set()), str(instr))
            t.to_area(gprs(regs_written(instr)))
            if _defines([instr]):
                t.area.add(CCR)
            if conditional or _defines([instr]):
                t.host.discard(CCR)
            cond_test = None
        elif isinstance(item, HelperSite):
            instr = item.instr
            t.need(pos, 'area', set(gprs(regs_read(instr))) | {CCR}, str(instr))
            t.to_area(gprs(regs_written(instr)))
            t.host.discard(CCR)
            cond_test = None
        elif isinstance(item, CheckSite):
            t.need(pos, 'area', [CCR], 'interrupt check')
            t.host.discard(CCR)
            cond_test = None
        elif isinstance(item, ExitSite):
            if item.kind is ExitKind.BRANCH:
                t.need(pos, 'host', [CCR], 'branch')
            if item.edge_save is not None:
                t.need(pos, 'host', item.edge_save.components, 'edge save')
                t.area.update(item.edge_save.components)
            if item.reason == 'halt':
                t.need(pos, 'area', ALL_GPRS | {CCR}, 'halt')
            elif item.reason == 'indirect':
                t.need(pos, 'area', set(gprs(regs_read(item.instr))) | {CCR}, 'bx')
            else:
                t.need(pos, 'area', [CCR], 'exit')
    return t.problems
