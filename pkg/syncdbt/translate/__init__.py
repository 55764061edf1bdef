from .ops import (Tag, HostInstr, HReg, HImm, Slot, Rel, SyncKind, SyncMode, SyncCause, SyncOp, CCR, PC, GPR, RuleSite,
                  HelperSite, FallbackSite, CheckSite, ExitSite, ExitKind, HostBlock, save, restore, parse_host_line)
from .rules import TranslationRule, Binding, RuleSet, parse_rules, load_ruleset, match_rule, STARTER_RULES
from .scan import scan_tb, CoordinationPlan, MAX_TB_LENGTH
from .baseline import translate_tb_baseline, lower_baseline
from .rules_pipeline import translate_tb_rules
from .lowering import lower_sync, lower_block, deferred_unpack_code, LoweredBlock, ExitInfo, RetireProfile
from .coordination import check_coordination

__all__ = ['Tag', 'HostInstr', 'HReg', 'HImm', 'Slot', 'Rel', 'SyncKind', 'SyncMode', 'SyncCause', 'SyncOp', 'CCR',
           'PC', 'GPR', 'RuleSite', 'HelperSite', 'FallbackSite', 'CheckSite', 'ExitSite', 'ExitKind', 'HostBlock',
           'save', 'restore', 'parse_host_line', 'TranslationRule', 'Binding', 'RuleSet', 'parse_rules',
           'load_ruleset', 'match_rule', 'STARTER_RULES', 'scan_tb', 'CoordinationPlan', 'MAX_TB_LENGTH',
           'translate_tb_baseline', 'lower_baseline', 'translate_tb_rules', 'lower_sync', 'lower_block',
           'deferred_unpack_code', 'LoweredBlock', 'ExitInfo', 'RetireProfile', 'check_coordination']
