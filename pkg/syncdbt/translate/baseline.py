"""Baseline two-step translation

Every guest instruction goes through a small fixed IR: load its operands from
the EmuStateArea, compute in scratch host registers, store the result and any
defined flags back. No guest state stays in host registers across guest
instructions, so helper calls need no coordination. Rule translation reuses
this lowering for instructions no rule covers.
"""

import logging

from ..guest.isa import ALU_OPS, Category, Condition, Imm
from ..machine.area import CCR_DIRTY, CCR_PACKED, FLAG_N, FLAG_SLOTS, FLAG_V, FLAG_Z, reg_slot
from .ops import (GUEST_TO_HOST_ALU, CheckSite, FallbackSite, HelperSite, HostBlock, HostInstr, Rel, Slot, h, imm)
from .scan import HELPER_KINDS, scan_tb

logger = logging.getLogger(__name__)

_T0, _T1, _T2 = h(15), h(14), h(13)


def _ld(dest, reg):
    return HostInstr('hld', (dest, Slot(reg_slot(reg))))


def _st(reg, src):
    return HostInstr('hst', (Slot(reg_slot(reg)), src))


def store_flags():
    """Write the host flags to the packed and the per-flag slots (11 instructions)"""
    code = [HostInstr('hflags2reg', (_T0,)), HostInstr('hst', (Slot(CCR_PACKED), _T0))]
    for name in 'NZCV':
        code.append(HostInstr('hflagext', (_T1, _T0, name)))
        code.append(HostInstr('hst', (Slot(FLAG_SLOTS[name]), _T1)))
    code.append(HostInstr('hst', (Slot(CCR_DIRTY), imm(0))))
    return code


def condition_test(cond):
    """ Evaluate a condition from the per-flag slots

    Leaves host Z set exactly when ``cond`` holds.
    """
    if cond in (Condition.EQ, Condition.NE):
        return [HostInstr('hld', (_T0, Slot(FLAG_Z))),
                HostInstr('hcmp', (_T0, imm(1 if cond is Condition.EQ else 0)))]
    return [HostInstr('hld', (_T0, Slot(FLAG_N))),
            HostInstr('hld', (_T1, Slot(FLAG_V))),
            HostInstr('hxor', (_T0, _T0, _T1)),
            HostInstr('hcmp', (_T0, imm(0 if cond is Condition.GE else 1)))]


def _source(op, dest):
    """Load a register operand into ``dest``; immediates are used directly"""
    if isinstance(op, Imm):
        return [], imm(op.value)
    return [_ld(dest, op.n)], dest


def _compute(instr):
    m = instr.mnemonic
    ops = instr.operands
    flag = '.f' if instr.sets_flags else ''
    if m in ALU_OPS:
        code = [_ld(_T0, ops[1].n)]
        load, rhs = _source(ops[2], _T1)
        code += load
        code += [HostInstr('hmov', (_T2, _T0)),
                 HostInstr(GUEST_TO_HOST_ALU[m] + flag, (_T2, _T2, rhs)),
                 _st(ops[0].n, _T2)]
    elif m == 'mov':
        load, src = _source(ops[1], _T0)
        if flag:
            code = load + [HostInstr('hmov.f', (_T1, src)), _st(ops[0].n, _T1)]
        else:
            code = load + [_st(ops[0].n, src)] if load else [HostInstr('hmov', (_T0, src)), _st(ops[0].n, _T0)]
    elif m == 'mvn':
        load, src = _source(ops[1], _T0)
        if not load:
            load = [HostInstr('hmov', (_T0, src))]
        code = load + [HostInstr('hxor' + flag, (_T1, _T0, imm(0xFFFFFFFF))), _st(ops[0].n, _T1)]
    elif m == 'cmp':
        code = [_ld(_T0, ops[0].n)]
        load, rhs = _source(ops[1], _T1)
        code += load + [HostInstr('hcmp', (_T0, rhs))]
    else:
        raise ValueError('%s has no inline baseline lowering' % m)
    if instr.sets_flags or m == 'cmp':
        code += store_flags()
    return code


def lower_baseline(instr):
    """ Baseline host code for one rule-eligible guest instruction

    Uses only h12-h15. Jumps are relative (Rel).

    Returns
    -------
    code : list of HostInstr
    """
    if instr.category is not Category.RULE_ELIGIBLE:
        raise ValueError('%s is not rule-eligible' % instr)
    body = _compute(instr)
    if instr.cond is Condition.AL:
        return body
    return condition_test(instr.cond) + [HostInstr('hjcc', (Condition.NE, Rel(len(body))))] + body


def translate_tb_baseline(program, entry):
    """ Translate the TB at ``entry`` with all guest state memory-resident

    Parameters
    ----------
    program : GuestProgram
    entry : int

    Returns
    -------
    block : HostBlock
        Items: entry interrupt check, one site per instruction, exit
    """
    tb, plan = scan_tb(program, entry, coordinated=False)
    items = [CheckSite()]
    body = tb[:-1] if plan.exit_items[-1].instr is not None else tb
    for instr in body:
        if instr.category in HELPER_KINDS:
            items.append(HelperSite(instr, HELPER_KINDS[instr.category]))
        else:
            items.append(FallbackSite(instr))
    items.extend(plan.exit_items)
    logger.debug('baseline TB 0x%x: %d items', entry, len(items))
    return HostBlock(entry, tb, tuple(items), pipeline='baseline')
