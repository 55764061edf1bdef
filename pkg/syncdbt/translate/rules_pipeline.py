"""One-step rule translation

Guest r0-r11 stay in host h0-h11 and the live flags in the host flags
register. Rule-covered instructions become their template code; everything
else is bracketed by the coordination the scan planned.
"""

import logging

from ..guest.isa import Category, Condition, flag_def_use, regs_read, regs_written
from .ops import (CCR, CheckSite, FallbackSite, HostBlock, RuleSite, SyncCause, gprs, restore, save)
from .rules import match_rule
from .scan import HELPER_KINDS, scan_tb

logger = logging.getLogger(__name__)


def entry_items():
    """Entry restore of the flags followed by the interrupt check with its own sync pair"""
    return [restore([CCR], SyncCause.TB_BOUNDARY),
            save([CCR], SyncCause.INTERRUPT_CHECK),
            CheckSite(),
            restore([CCR], SyncCause.INTERRUPT_CHECK)]


def fallback_items(instr):
    """ A baseline-lowered instruction inside rule-translated code

    The baseline code works on the EmuStateArea, so the registers it reads are
    uploaded first and the ones it writes downloaded after. It evaluates
    conditions from the per-flag slots and clobbers the host flags doing so.
    """
    defines, _ = flag_def_use(instr)
    conditional = instr.cond is not Condition.AL
    before = list(gprs(regs_read(instr))) + ([CCR] if conditional else [])
    after = list(gprs(regs_written(instr))) + ([CCR] if (conditional or defines) else [])
    items = []
    if before:
        items.append(save(before, SyncCause.FALLBACK))
    items.append(FallbackSite(instr))
    if after:
        items.append(restore(after, SyncCause.FALLBACK))
    return items


def rule_items(binding):
    prelude, body = binding.substitute()
    site = RuleSite(binding.instrs, binding.rule.name, prelude, body, binding.rule.constrained)
    if not site.constrained:
        return [site]
    return [save([CCR], SyncCause.CONSTRAINED_RULE), site, restore([CCR], SyncCause.CONSTRAINED_RULE)]


def translate_tb_rules(program, entry, ruleset):
    """ Translate the TB at ``entry`` through the rule set

    Parameters
    ----------
    program : GuestProgram
    entry : int
    ruleset : RuleSet

    Returns
    -------
    block : HostBlock
        Base-level items: entry restore, interrupt check, sites with their
        planned sync operations, exit
    """
    tb, plan = scan_tb(program, entry)
    body = tb[:-1] if plan.exit_items[-1].instr is not None else tb
    items = entry_items()
    covered = 0
    i = 0
    while i < len(body):
        instr = body[i]
        if instr.category in HELPER_KINDS:
            entry_plan = plan.helpers[instr.addr]
            items += [entry_plan.save, entry_plan.site, entry_plan.restore]
            i += 1
            continue
        binding = None
        if instr.category is Category.RULE_ELIGIBLE:
            run = []
            for candidate in body[i:]:
                if candidate.category is not Category.RULE_ELIGIBLE:
                    break
                run.append(candidate)
            binding = match_rule(run, ruleset)
        if binding is None:
            items += fallback_items(instr)
            i += 1
        else:
            items += rule_items(binding)
            covered += len(binding.instrs)
            i += len(binding.instrs)
    items.extend(plan.exit_items)
    logger.debug('rules TB 0x%x: %d of %d instructions rule-covered', entry, covered, len(tb))
    return HostBlock(entry, tb, tuple(items), pipeline='rules')
