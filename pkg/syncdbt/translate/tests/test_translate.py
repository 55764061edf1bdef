"""Scan, Pipeline and Lowering Unit Tests"""

from dataclasses import replace

import pytest

from syncdbt.errors import DecodeError, UnknownComponent
from syncdbt.guest import parse_guest_asm
from syncdbt.translate import (scan_tb, translate_tb_rules, translate_tb_baseline, lower_block, lower_sync,
                               lower_baseline, deferred_unpack_code, check_coordination, load_ruleset, save, restore,
                               SyncOp, SyncKind, SyncMode, SyncCause, Tag, CCR, PC, GPR, RuleSite, HelperSite,
                               FallbackSite, CheckSite, ExitSite, ExitKind, MAX_TB_LENGTH)
from syncdbt.translate.lowering import FAULT, INTERRUPT, HALT


def shape(block):
    """Compact description of a block's items"""
    out = []
    for item in block.items:
        if isinstance(item, SyncOp):
            out.append('%s:%s' % (item.kind.value, item.cause.value))
        elif isinstance(item, RuleSite):
            out.append('rule:' + item.rule)
        elif isinstance(item, HelperSite):
            out.append('helper:' + item.instr.mnemonic)
        elif isinstance(item, FallbackSite):
            out.append('fallback:' + item.instr.mnemonic)
        elif isinstance(item, CheckSite):
            out.append('check')
        elif isinstance(item, ExitSite):
            out.append('exit:' + item.kind.value)
    return out


ENTRY = ['Restore:TbBoundary', 'Save:InterruptCheck', 'check', 'Restore:InterruptCheck']

FIG5 = """
start:  cmp r1, r2
        vmsr fpscr, r3
        addeq r4, r4, #1
        b start
"""

LOAD = """
        mov r1, #0x3000
        ldr r2, [r1]
        add r3, r2, r2
        halt
"""

COUNTDOWN = """
loop:   subs r1, r1, #1
        bne loop
        halt
"""


@pytest.fixture(scope='module')
def ruleset():
    return load_ruleset()


def rules_block(text, ruleset, entry=None):
    program = parse_guest_asm(text)
    return translate_tb_rules(program, program.entry if entry is None else entry, ruleset)


class TestScan(object):

    def test_stops_at_branch(self):
        tb, plan = scan_tb(parse_guest_asm(FIG5), 0)
        assert len(tb) == 4
        assert plan.exit_items[-1].kind is ExitKind.FALL_THROUGH
        assert plan.exit_items[-1].targets == (0,)

    def test_length_limit(self):
        tb, plan = scan_tb(parse_guest_asm('add r1, r1, #1\n' * 40), 0)
        assert len(tb) == MAX_TB_LENGTH
        exit_site = plan.exit_items[-1]
        assert exit_site.instr is None
        assert exit_site.targets == (4 * MAX_TB_LENGTH,)

    def test_stops_before_gap(self):
        tb, plan = scan_tb(parse_guest_asm('mov r1, #1\n.org 0x100\nhalt'), 0)
        assert len(tb) == 1
        assert plan.exit_items[-1].targets == (4,)

    def test_no_instruction(self):
        with pytest.raises(DecodeError):
            scan_tb(parse_guest_asm('halt'), 0x40)

    def test_pure_alu_plan(self):
        tb, plan = scan_tb(parse_guest_asm('add r1, r2, r3\nsub r4, r1, #2\nb 0'), 0)
        assert len(plan) == 0
        assert plan.exit_items[-1].edge_save.components == frozenset([CCR])

    def test_two_stores_each_planned(self):
        tb, plan = scan_tb(parse_guest_asm('cmp r1, r2\nstr r1, [r2]\nstr r3, [r2, #4]\nhalt'), 0)
        assert sorted(plan.helpers) == [4, 8]
        assert plan.helpers[4].save.components == frozenset([CCR, GPR(1), GPR(2)])
        assert plan.helpers[8].restore.components == frozenset([CCR])

    def test_svc_helper_in_exit(self):
        _, plan = scan_tb(parse_guest_asm('mov r1, #1\nsvc #0'), 0)
        assert len(plan) == 0
        assert [type(i) for i in plan.exit_items] == [SyncOp, HelperSite, ExitSite]

    def test_baseline_exit_uncoordinated(self):
        _, plan = scan_tb(parse_guest_asm(FIG5), 0, coordinated=False)
        assert plan.exit_items[-1].edge_save is None


class TestRulesPipeline(object):

    def test_coordination_layout(self, ruleset):
        block = rules_block(FIG5, ruleset)
        assert shape(block) == ENTRY + [
            'rule:cmp_reg', 'Save:SystemLevel', 'helper:vmsr', 'Restore:SystemLevel',
            'Save:ConstrainedRule', 'rule:alu_rri_cond', 'Restore:ConstrainedRule', 'exit:FallThrough']
        assert block.items[5].components == frozenset([CCR, GPR(3)])
        assert block.items[7].components == frozenset([CCR])

    def test_add_is_one_host_instruction(self, ruleset):
        site = rules_block('add r1, r2, r3\nhalt', ruleset).items[4]
        assert len(site.code) == 1

    def test_fallback_brackets(self, ruleset):
        block = rules_block('add r12, r1, r2\nhalt', ruleset)
        # r12 lives in the area, so nothing comes back
        assert shape(block)[4:7] == ['Save:Fallback', 'fallback:add', 'Save:TbBoundary']
        assert block.items[4].components == frozenset([GPR(1), GPR(2)])

    def test_conditional_fallback_restores_flags(self, ruleset):
        block = rules_block('mvneq r1, r2\nhalt', ruleset)
        assert shape(block)[4:7] == ['Save:Fallback', 'fallback:mvn', 'Restore:Fallback']
        assert CCR in block.items[4].components
        assert block.items[6].components == frozenset([CCR, GPR(1)])

    def test_pure_alu_fully_covered(self, ruleset):
        block = rules_block('mov r1, #3\nadd r2, r1, r1\nsubs r2, r2, #1\nmvn r3, r2\nhalt', ruleset)
        sites = [i for i in block.items if isinstance(i, (RuleSite, FallbackSite))]
        assert all(isinstance(s, RuleSite) for s in sites)

    def test_halt_saves_everything(self, ruleset):
        block = rules_block('halt', ruleset)
        halt_save = block.items[-2]
        assert halt_save.components == frozenset([CCR, PC] + [GPR(n) for n in range(12)])
        assert halt_save.pc == 0

    def test_rules_never_longer_than_baseline(self, ruleset):
        block = rules_block('mov r1, #3\nadd r2, r1, r1\nsubs r2, r2, #1\nmvn r3, r2\nlsl r4, r3, #2\n'
                            'cmp r4, r1\nhalt', ruleset)
        for site in block.items:
            if isinstance(site, RuleSite):
                assert len(site.code) <= sum(len(lower_baseline(i)) for i in site.instrs)

    @pytest.mark.parametrize('text', [FIG5, LOAD, COUNTDOWN, 'addeq r1, r1, #1\nmovne r2, r1\nbx r2',
                                      'str r1, [r2]\nldr r3, [r2]\nsvc #0', 'add r13, r13, #1\nhalt'])
    def test_coordination_checks_out(self, ruleset, text):
        assert check_coordination(rules_block(text, ruleset)) == []

    def test_checker_catches_missing_save(self, ruleset):
        block = rules_block(LOAD, ruleset)
        items = [i for i in block.items if not (isinstance(i, SyncOp) and i.cause is SyncCause.MEMORY_ACCESS
                                                 and i.is_save)]
        assert check_coordination(block.with_items(items))

    def test_checker_catches_missing_restore(self, ruleset):
        block = rules_block(LOAD, ruleset)
        items = [i for i in block.items if not (isinstance(i, SyncOp) and i.cause is SyncCause.MEMORY_ACCESS
                                                 and not i.is_save)]
        assert check_coordination(block.with_items(items))


class TestBaseline(object):

    def test_add_five_instructions(self):
        instr = parse_guest_asm('add r1, r2, r3').instrs[0]
        code = lower_baseline(instr)
        assert [i.op for i in code] == ['hld', 'hld', 'hmov', 'hadd', 'hst']

    def test_cmp_stores_every_flag(self):
        code = lower_baseline(parse_guest_asm('cmp r1, r2').instrs[0])
        assert len(code) == 14
        assert sum(1 for i in code if i.op == 'hflagext') == 4

    def test_block_items(self):
        block = translate_tb_baseline(parse_guest_asm(LOAD), 0)
        assert shape(block) == ['check', 'fallback:mov', 'helper:ldr', 'fallback:add', 'exit:ToRuntime']
        assert block.sync_ops() == []
        assert check_coordination(block) == []

    def test_only_scratch_registers(self):
        program = parse_guest_asm('adds r1, r2, #4\nmovlt r3, r4\nmvn r5, #7\ncmp r6, r7')
        for instr in program.instrs.values():
            for host in lower_baseline(instr):
                regs = [a.n for a in host.args if hasattr(a, 'n')]
                assert all(n >= 12 for n in regs)


class TestLowerSync(object):

    def test_full_ccr_save(self):
        assert len(lower_sync(save([CCR], SyncCause.MEMORY_ACCESS))) == 14

    def test_packed_ccr_save(self):
        assert len(lower_sync(save([CCR], SyncCause.MEMORY_ACCESS, SyncMode.PACKED))) == 3

    def test_restores_mirror(self):
        assert len(lower_sync(restore([CCR], SyncCause.TB_BOUNDARY))) == 14
        assert len(lower_sync(restore([CCR], SyncCause.TB_BOUNDARY, SyncMode.PACKED))) == 3

    def test_reduction_ratio(self):
        full = len(lower_sync(save([CCR], SyncCause.MEMORY_ACCESS)))
        packed = len(lower_sync(save([CCR], SyncCause.MEMORY_ACCESS, SyncMode.PACKED)))
        assert round(100.0 * (full - packed) / full, 1) == 78.6

    def test_gpr_costs_one(self):
        code = lower_sync(save([GPR(3)], SyncCause.FALLBACK))
        assert len(code) == 1
        assert code[0].op == 'hst'
        assert len(lower_sync(restore([GPR(3), GPR(4)], SyncCause.FALLBACK))) == 2

    def test_tagged_with_cause_once(self):
        code = lower_sync(save([CCR, GPR(1)], SyncCause.SYSTEM_LEVEL))
        assert all(i.tag is Tag.SYNC for i in code)
        assert [i.sync for i in code if i.sync is not None] == [SyncCause.SYSTEM_LEVEL]
        assert code[0].op == 'hst'

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            SyncOp(SyncKind.SAVE, frozenset())

    def test_packed_needs_ccr(self):
        with pytest.raises(ValueError):
            save([GPR(1)], SyncCause.MEMORY_ACCESS, SyncMode.PACKED)

    def test_unknown_component(self):
        with pytest.raises(UnknownComponent):
            save(['SP'], SyncCause.MEMORY_ACCESS)
        with pytest.raises(UnknownComponent):
            save([GPR(13)], SyncCause.MEMORY_ACCESS)

    def test_deferred_unpack(self):
        code = deferred_unpack_code()
        assert len(code) == 10
        assert code[0].sync is SyncCause.DEFERRED_UNPACK


class TestLowerBlock(object):

    def test_entry_skip(self, ruleset):
        lowered = lower_block(rules_block(FIG5, ruleset))
        assert lowered.entry_skip == 14
        assert lowered.code[0].sync is SyncCause.TB_BOUNDARY

    def test_fault_stub_resumes_at_access(self, ruleset):
        lowered = lower_block(rules_block(LOAD, ruleset))
        call = [i for i in lowered.code if i.op == 'hcall'][0]
        stub = lowered.code[call.args[2]]
        assert stub.op == 'hexit'
        info = lowered.exits[stub.args[0]]
        assert info.reason == FAULT
        assert info.target == 4
        assert info.profile.retired == 1

    def test_entry_check_resumes_at_entry(self, ruleset):
        lowered = lower_block(rules_block(LOAD, ruleset))
        jump = [i for i in lowered.code if i.tag is Tag.CHECK and i.op == 'hjcc'][0]
        info = lowered.exits[lowered.code[jump.args[1]].args[0]]
        assert info.reason == INTERRUPT
        assert (info.target, info.profile.retired) == (0, 0)

    def test_halt_profile(self, ruleset):
        lowered = lower_block(rules_block(LOAD, ruleset))
        info = [e for e in lowered.exits if e.reason == HALT][0]
        assert info.target == 12
        assert info.profile.retired == 3
        assert info.profile.memory == 1
        assert info.profile.rule_covered == 2

    def test_branch_edges(self, ruleset):
        lowered = lower_block(rules_block(COUNTDOWN, ruleset))
        assert sorted((e.index, e.target) for e in lowered.edges) == [(0, 0), (1, 8)]
        assert all(e.eslot is None for e in lowered.edges)
        assert lowered.static_counts()[Tag.CHAIN] == 2

    def test_elision_slots(self, ruleset):
        lowered = lower_block(rules_block(COUNTDOWN, ruleset), chain_elision=True)
        assert all(e.eslot is not None and e.eslot < e.slot for e in lowered.edges)
        assert lowered.static_counts()[Tag.CHAIN] == 4

    def test_link_register_written(self, ruleset):
        lowered = lower_block(rules_block('bl 0x40\n.org 0x40\nhalt', ruleset, entry=0))
        stores = [i for i in lowered.code if i.op == 'hst' and i.tag is Tag.TRANSLATED]
        assert stores[0].args[1].value == 4

    def test_jumps_in_range(self, ruleset):
        for text in (FIG5, LOAD, COUNTDOWN, 'addeq r1, r1, #1\nmovne r2, r1\nbx r2'):
            lowered = lower_block(rules_block(text, ruleset))
            for instr in lowered.code:
                if instr.op in ('hjcc', 'hjmp'):
                    assert 0 <= instr.args[-1] < len(lowered.code)

    def test_coordinated_sites(self, ruleset):
        lowered = lower_block(rules_block(FIG5, ruleset))
        # vmsr, addeq and the branch each own a coordination, cmp does not
        assert lowered.full_profile.coordinated == 3

    def test_baseline_has_no_sync(self):
        lowered = lower_block(translate_tb_baseline(parse_guest_asm(FIG5), 0))
        assert lowered.static_counts()[Tag.SYNC] == 0
        assert lowered.entry_skip == 0

    def test_retag_keeps_fields(self):
        code = lower_sync(save([CCR], SyncCause.MEMORY_ACCESS))
        assert replace(code[0], tag=Tag.TRANSLATED).sync is SyncCause.MEMORY_ACCESS
