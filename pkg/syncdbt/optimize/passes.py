"""Block-level coordination passes

Every pass is a pure rewrite HostBlock -> HostBlock over the pre-lowering
items and leaves blocks it does not apply to unchanged.
"""

import logging
from dataclasses import replace

from ..guest.isa import Condition, flag_def_use, helper_flag_access, regs_read, regs_written
from ..translate.ops import (CCR, CheckSite, ExitKind, ExitSite, FallbackSite, HelperSite, RuleSite, SyncCause,
                             SyncMode, is_sync, save, restore)

logger = logging.getLogger(__name__)

PACKABLE = frozenset([SyncCause.MEMORY_ACCESS, SyncCause.INTERRUPT_CHECK, SyncCause.TB_BOUNDARY])


def _is(item, cause, is_save=None):
    return is_sync(item) and item.cause is cause and (is_save is None or item.is_save == is_save)


def _pack(op):
    if op is not None and CCR in op.components:
        return op.with_mode(SyncMode.PACKED)
    return op


def _packable(items, i):
    """ Whether the CCR of the sync at ``i`` can travel as one word

    A system-level sync is packed when the helper it brackets touches no
    single flag. A constrained-rule sync is packed when only rule sites lie
    between it and its partner, since translated code reads the flags
    through the host flags register and never through the per-flag slots.
    """
    op = items[i]
    if op.cause in PACKABLE:
        return True
    step = 1 if op.is_save else -1
    k = i + step
    if op.cause is SyncCause.SYSTEM_LEVEL:
        return 0 <= k < len(items) and isinstance(items[k], HelperSite) and \
            helper_flag_access(items[k].instr) == (False, False)
    if op.cause is SyncCause.CONSTRAINED_RULE:
        while 0 <= k < len(items) and isinstance(items[k], RuleSite) and items[k].constrained:
            k += step
        return k != i + step and 0 <= k < len(items) and _is(items[k], SyncCause.CONSTRAINED_RULE, not op.is_save)
    return False


def pass_reduce(block):
    """ Switch CCR coordination to the packed form where nobody reads single flags

    Memory, interrupt-check and boundary syncs store and load the flags as
    one word, and so do constrained-rule pairs and the syncs around vmsr,
    vmrs and tlbi. setcpsr, getcpsr, svc and eret read or write the per-flag
    slots, so their syncs stay Full; the runtime unpacks on demand.
    """
    items = []
    for i, item in enumerate(block.items):
        if is_sync(item):
            if _packable(block.items, i):
                item = _pack(item)
        elif isinstance(item, ExitSite) and item.edge_save is not None:
            item = replace(item, edge_save=_pack(item.edge_save))
        items.append(item)
    return block.with_items(items)


# Restore elimination

def _constrained_groups(items):
    """(start, end) spans of [Save CR, constrained sites..., Restore CR]"""
    groups = []
    i = 0
    while i < len(items):
        if _is(items[i], SyncCause.CONSTRAINED_RULE, True):
            j = i + 1
            while j < len(items) and isinstance(items[j], RuleSite) and items[j].constrained:
                j += 1
            if j > i + 1 and j < len(items) and _is(items[j], SyncCause.CONSTRAINED_RULE, False):
                groups.append((i, j))
                i = j + 1
                continue
        i += 1
    return groups


def _shares_test(sites, cond):
    return all(s.cond is cond and not any(flag_def_use(i)[0] for i in s.instrs) for s in sites)


def pass_eliminate_restores(block):
    """ Keep one Save/Restore pair over a run of same-condition constrained sites

    The host compare of the first site stays valid for the following ones as
    long as nothing between them writes the flags, so later sites also drop
    their condition test.
    """
    items = list(block.items)
    groups = _constrained_groups(items)
    if len(groups) < 2:
        return block
    out = []
    pos = 0
    k = 0
    merged = 0
    while k < len(groups):
        start, end = groups[k]
        cond = items[start + 1].cond
        last = k
        while (last + 1 < len(groups) and groups[last + 1][0] == groups[last][1] + 1
               and _shares_test(items[groups[last + 1][0] + 1:groups[last + 1][1]], cond)
               and _shares_test(items[start + 1:end], cond)):
            last += 1
        out.extend(items[pos:start])
        out.append(items[start])
        out.extend(items[start + 1:end])
        for g in groups[k + 1:last + 1]:
            out.extend(replace(site, prelude=()) for site in items[g[0] + 1:g[1]])
            merged += 1
        out.append(items[groups[last][1]])
        pos = groups[last][1] + 1
        k = last + 1
    out.extend(items[pos:])
    if merged:
        logger.debug('TB 0x%x: eliminated %d restore/save pairs', block.entry, merged)
    return block.with_items(out)


# Memory merging

def _memory_groups(items):
    groups = []
    i = 0
    while i < len(items):
        if _is(items[i], SyncCause.MEMORY_ACCESS, True):
            j = i + 1
            while j < len(items) and (isinstance(items[j], CheckSite) or
                                      (isinstance(items[j], HelperSite) and items[j].kind == 'memory')):
                j += 1
            if j < len(items) and _is(items[j], SyncCause.MEMORY_ACCESS, False):
                groups.append((i, j))
                i = j + 1
                continue
        i += 1
    return groups


def _union(ops, build):
    components = set()
    for op in ops:
        components |= op.components
    packed = any(op.mode is SyncMode.PACKED for op in ops) and CCR in components
    return build(components, SyncCause.MEMORY_ACCESS, SyncMode.PACKED if packed else SyncMode.FULL)


def pass_merge_memory(block):
    """ One Save before the first and one Restore after the last of adjacent memory accesses"""
    items = list(block.items)
    groups = _memory_groups(items)
    out = []
    pos = 0
    k = 0
    while k < len(groups):
        last = k
        while last + 1 < len(groups) and groups[last + 1][0] == groups[last][1] + 1:
            last += 1
        start, end = groups[k][0], groups[last][1]
        out.extend(items[pos:start])
        if last == k:
            out.extend(items[start:end + 1])
        else:
            span = groups[k:last + 1]
            out.append(_union([items[s] for s, _ in span], save))
            for s, e in span:
                out.extend(items[s + 1:e])
            out.append(_union([items[e] for _, e in span], restore))
            logger.debug('TB 0x%x: merged %d memory accesses', block.entry, last - k + 1)
        pos = end + 1
        k = last + 1
    out.extend(items[pos:])
    return block.with_items(out)


# Define-before-use scheduling

def _defines(site):
    return any(flag_def_use(i)[0] for i in site.instrs)


def _uses(site):
    return any(i.cond is not Condition.AL for i in site.instrs)


def _is_definer(item):
    return (isinstance(item, RuleSite) and len(item.instrs) == 1 and not item.constrained
            and item.instrs[0].cond is Condition.AL and _defines(item))


def _find_user(items, d):
    """Index where the flag user's group starts, or None when scheduling is not allowed"""
    for k in range(d + 1, len(items)):
        item = items[k]
        if is_sync(item):
            if item.cause is SyncCause.MEMORY_ACCESS:
                continue
            if item.cause is SyncCause.FALLBACK:
                site = items[k + 1] if item.is_save else None
                if isinstance(site, FallbackSite) and (_uses(site) or _defines(site)):
                    return k if _uses(site) else None
                continue
            if item.cause is SyncCause.CONSTRAINED_RULE and item.is_save:
                return k
            return None
        if isinstance(item, RuleSite):
            if _uses(item):
                return k
            if _defines(item):
                return None
        elif isinstance(item, HelperSite):
            if item.kind != 'memory':
                return None
        elif isinstance(item, FallbackSite):
            if _uses(item) or _defines(item):
                return None
        elif isinstance(item, ExitSite):
            return k if item.kind in (ExitKind.FALL_THROUGH, ExitKind.BRANCH) else None
        else:
            return None
    return None


def _area_flags_current(items, d):
    """Whether the EmuStateArea holds the live flags just before items[d]"""
    current = True
    for item in items[:d]:
        if is_sync(item) and item.is_save and CCR in item.components:
            current = True
        elif isinstance(item, RuleSite) and _defines(item):
            current = False
        elif isinstance(item, FallbackSite) and _defines(item):
            current = True
    return current


def _user_reads(items, u):
    regs = set()
    for item in items[u:]:
        if isinstance(item, (RuleSite, FallbackSite, ExitSite)):
            for instr in item.instrs:
                regs |= regs_read(instr)
            return regs
    return regs


def _movable(items, d, u):
    between = items[d + 1:u]
    if not any(is_sync(i) and CCR in i.components for i in between):
        return False
    if d > 0 and _is(items[d - 1], SyncCause.MEMORY_ACCESS, False) and _is(items[d + 1], SyncCause.MEMORY_ACCESS,
                                                                          True):
        return False
    if not _area_flags_current(items, d):
        return False
    definer = items[d].instrs[0]
    d_reads, d_writes = regs_read(definer), regs_written(definer)
    blocked = d_reads | d_writes | _user_reads(items, u)
    seen_reads = set()
    loaded = False
    for item in between:
        if is_sync(item):
            continue
        for instr in item.instrs:
            reads, writes = regs_read(instr), regs_written(instr)
            if writes & blocked or reads & d_writes:
                return False
            # re-executed from the definer's address after a fault in between
            if writes & (seen_reads | reads):
                return False
            if instr.mnemonic == 'str' and loaded:
                return False
            loaded = loaded or instr.mnemonic == 'ldr'
            seen_reads |= reads
    return True


def pass_schedule_dbu(block):
    """ Move a flag definition down to its use across memory accesses

    ``[cmp; ldr; bne]`` becomes ``[ldr; cmp; bne]``: the flags are not live
    across the access any more, so its sync operations drop CCR.
    """
    items = list(block.items)
    changed = True
    moves = 0
    while changed:
        changed = False
        for d, item in enumerate(items):
            if not _is_definer(item):
                continue
            u = _find_user(items, d)
            if u is None or u == d + 1 or not _movable(items, d, u):
                continue
            between = []
            for x in items[d + 1:u]:
                if is_sync(x) and CCR in x.components:
                    x = x.without([CCR])
                if x is not None:
                    between.append(x)
            items = items[:d] + between + [item] + items[u:]
            changed = True
            moves += 1
            break
    if not moves:
        return block
    logger.debug('TB 0x%x: scheduled %d flag definitions next to their use', block.entry, moves)
    return block.with_items(items)


# Interrupt-check scheduling

def pass_schedule_irq(block):
    """ Move the entry interrupt check into the first memory access's sync pair"""
    items = list(block.items)
    entry = [i for i in range(len(items) - 2)
             if _is(items[i], SyncCause.INTERRUPT_CHECK, True) and isinstance(items[i + 1], CheckSite)
             and _is(items[i + 2], SyncCause.INTERRUPT_CHECK, False)]
    if not entry:
        return block
    first = None
    for k in range(1, len(items)):
        if isinstance(items[k], HelperSite) and items[k].kind == 'memory' and _is(items[k - 1],
                                                                                  SyncCause.MEMORY_ACCESS, True):
            first = k
            break
    if first is None:
        return block
    start = entry[0]
    items = items[:start] + items[start + 3:first] + [CheckSite()] + items[first:]
    logger.debug('TB 0x%x: interrupt check moved to the first memory access', block.entry)
    return block.with_items(items)
