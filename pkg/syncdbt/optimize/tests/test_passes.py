"""Coordination Pass Unit Tests"""

import pytest

from syncdbt.guest import parse_guest_asm
from syncdbt.translate import (translate_tb_rules, lower_block, check_coordination, load_ruleset, SyncOp, SyncMode,
                               SyncCause, Tag, CCR, GPR, RuleSite, HelperSite, FallbackSite, CheckSite, ExitSite)
from syncdbt.optimize import (pass_reduce, pass_eliminate_restores, pass_merge_memory, pass_schedule_dbu,
                              pass_schedule_irq, run_pipeline, OptLevel)


def shape(block):
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
HALT = ['Save:TbBoundary', 'exit:ToRuntime']

SAME_CONDITION = """
        cmp r1, r2
        addeq r0, r0, #1
        addeq r3, r3, #1
        addeq r4, r4, #1
        halt
"""

TWO_STORES = """
        cmp r1, r2
        str r3, [r4]
        str r5, [r6]
        halt
"""

LOAD_BETWEEN = """
loop:   cmp r1, r2
        ldr r3, [r4]
        bne loop
"""

COMPOSITE = """
loop:   cmp r1, r2
        addeq r0, r0, #1
        addeq r5, r5, #1
        str r3, [r4]
        str r6, [r7]
        bne loop
"""

PROGRAMS = [SAME_CONDITION, TWO_STORES, LOAD_BETWEEN, COMPOSITE,
            'cmp r1, r2\nvmsr fpscr, r3\naddeq r4, r4, #1\nhalt',
            'subs r1, r1, #1\nldr r2, [r3]\nstr r2, [r4, #4]\nbne 0x0',
            'cmp r3, r2\nldr r3, [r4]\nbne 0x0',
            'addeq r1, r1, #1\naddne r2, r2, #1\nmovs r5, r5\nmoveq r6, #3\nhalt',
            'ldr r1, [r2]\ncmp r1, r1\nsvc #1',
            'add r12, r1, r2\nmvneq r1, r2\nstr r1, [r12]\nhalt']


@pytest.fixture(scope='module')
def ruleset():
    return load_ruleset()


def block_of(text, ruleset):
    program = parse_guest_asm(text)
    return translate_tb_rules(program, program.entry, ruleset)


def sync_count(block):
    return lower_block(block).static_counts()[Tag.SYNC]


class TestReduce(object):

    def test_memory_save_packed(self, ruleset):
        block = pass_reduce(block_of('ldr r1, [r2]\nhalt', ruleset))
        op = [i for i in block.items if isinstance(i, SyncOp) and i.cause is SyncCause.MEMORY_ACCESS][0]
        assert op.mode is SyncMode.PACKED

    def test_system_level_stays_full(self, ruleset):
        block = pass_reduce(block_of('setcpsr r1\nhalt', ruleset))
        ops = [i for i in block.items if isinstance(i, SyncOp) and i.cause is SyncCause.SYSTEM_LEVEL]
        assert ops and all(op.mode is SyncMode.FULL for op in ops)

    @pytest.mark.parametrize('text', ['vmsr fpscr, r1\nhalt', 'vmrs r1, fpexc\nhalt', 'tlbi\nhalt'])
    def test_flag_neutral_system_helper_packed(self, ruleset, text):
        block = pass_reduce(block_of(text, ruleset))
        ops = [i for i in block.items if isinstance(i, SyncOp) and i.cause is SyncCause.SYSTEM_LEVEL]
        assert len(ops) == 2 and all(op.mode is SyncMode.PACKED for op in ops)

    @pytest.mark.parametrize('text', ['getcpsr r1\nhalt', 'svc #1', 'eret'])
    def test_flag_reading_system_helper_stays_full(self, ruleset, text):
        block = pass_reduce(block_of(text, ruleset))
        ops = [i for i in block.items if isinstance(i, SyncOp) and i.cause is SyncCause.SYSTEM_LEVEL]
        assert ops and all(op.mode is SyncMode.FULL for op in ops)

    def test_constrained_pair_packed(self, ruleset):
        block = pass_reduce(block_of(SAME_CONDITION, ruleset))
        ops = [i for i in block.items if isinstance(i, SyncOp) and i.cause is SyncCause.CONSTRAINED_RULE]
        assert len(ops) == 6 and all(op.mode is SyncMode.PACKED for op in ops)

    def test_constrained_pair_around_other_site_stays_full(self, ruleset):
        block = block_of('addeq r1, r1, #1\nhalt', ruleset)
        items = list(block.items)
        assert shape(block)[4:7] == ['Save:ConstrainedRule', 'rule:alu_rri_cond', 'Restore:ConstrainedRule']
        block = pass_reduce(block.with_items(items[:6] + [CheckSite()] + items[6:]))
        ops = [i for i in block.items if isinstance(i, SyncOp) and i.cause is SyncCause.CONSTRAINED_RULE]
        assert len(ops) == 2 and all(op.mode is SyncMode.FULL for op in ops)

    def test_fallback_stays_full(self, ruleset):
        block = pass_reduce(block_of('mvneq r1, r2\nhalt', ruleset))
        ops = [i for i in block.items if isinstance(i, SyncOp) and i.cause is SyncCause.FALLBACK]
        assert all(op.mode is SyncMode.FULL for op in ops)

    def test_edge_save_packed(self, ruleset):
        block = pass_reduce(block_of(LOAD_BETWEEN, ruleset))
        assert block.exit.edge_save.mode is SyncMode.PACKED

    def test_gpr_only_sync_untouched(self, ruleset):
        block = pass_reduce(block_of('add r12, r1, r2\nhalt', ruleset))
        op = [i for i in block.items if isinstance(i, SyncOp) and i.cause is SyncCause.FALLBACK][0]
        assert op.mode is SyncMode.FULL

    def test_saves_sync_instructions(self, ruleset):
        block = block_of('ldr r1, [r2]\nhalt', ruleset)
        # six CCR syncs at 14 instructions become 3 each
        assert sync_count(block) - sync_count(pass_reduce(block)) == 6 * 11


class TestEliminateRestores(object):

    def test_same_condition_run(self, ruleset):
        block = pass_eliminate_restores(block_of(SAME_CONDITION, ruleset))
        assert shape(block) == ENTRY + ['rule:cmp_reg', 'Save:ConstrainedRule', 'rule:alu_rri_cond',
                                        'rule:alu_rri_cond', 'rule:alu_rri_cond', 'Restore:ConstrainedRule'] + HALT
        sites = [i for i in block.items if isinstance(i, RuleSite) and i.constrained]
        assert sites[0].prelude
        assert sites[1].prelude == () and sites[2].prelude == ()

    def test_single_conditional_unchanged(self, ruleset):
        block = block_of('cmp r1, r2\naddeq r0, r0, #1\nhalt', ruleset)
        assert pass_eliminate_restores(block) == block

    def test_different_conditions_kept(self, ruleset):
        block = block_of('addeq r1, r1, #1\naddne r2, r2, #1\nhalt', ruleset)
        assert pass_eliminate_restores(block) == block

    def test_separated_runs_kept(self, ruleset):
        block = block_of('addeq r1, r1, #1\nmov r3, r4\naddeq r2, r2, #1\nhalt', ruleset)
        assert pass_eliminate_restores(block) == block

    def test_checker_accepts(self, ruleset):
        assert check_coordination(pass_eliminate_restores(block_of(SAME_CONDITION, ruleset))) == []


class TestMergeMemory(object):

    def test_two_stores(self, ruleset):
        block = pass_merge_memory(block_of(TWO_STORES, ruleset))
        assert shape(block) == ENTRY + ['rule:cmp_reg', 'Save:MemoryAccess', 'helper:str', 'helper:str',
                                        'Restore:MemoryAccess'] + HALT
        assert block.items[5].components == frozenset([CCR, GPR(3), GPR(4), GPR(5), GPR(6)])
        assert block.items[8].components == frozenset([CCR])

    @pytest.mark.parametrize('m', range(2, 9))
    def test_run_keeps_one_pair(self, ruleset, m):
        text = ''.join('str r1, [r2, #%d]\n' % (4 * i) for i in range(m)) + 'halt'
        block = pass_merge_memory(block_of(text, ruleset))
        ops = [i for i in block.items if isinstance(i, SyncOp) and i.cause is SyncCause.MEMORY_ACCESS]
        assert len(ops) == 2
        assert check_coordination(block) == []

    def test_single_access_unchanged(self, ruleset):
        block = block_of('ldr r1, [r2]\nhalt', ruleset)
        assert pass_merge_memory(block) == block

    def test_load_feeding_store(self, ruleset):
        block = pass_merge_memory(block_of('ldr r1, [r2]\nstr r1, [r3]\nhalt', ruleset))
        restore = [i for i in block.items if isinstance(i, SyncOp) and i.cause is SyncCause.MEMORY_ACCESS][-1]
        assert GPR(1) in restore.components
        assert check_coordination(block) == []


class TestScheduleDbu(object):

    def test_definition_moves_past_load(self, ruleset):
        block = pass_schedule_dbu(block_of(LOAD_BETWEEN, ruleset))
        assert shape(block) == ENTRY + ['Save:MemoryAccess', 'helper:ldr', 'Restore:MemoryAccess', 'rule:cmp_reg',
                                        'exit:Branch']
        assert block.items[4].components == frozenset([GPR(4)])
        assert block.items[6].components == frozenset([GPR(3)])
        assert check_coordination(block) == []

    def test_dependence_blocks_motion(self, ruleset):
        block = block_of('cmp r3, r2\nldr r3, [r4]\nbne 0x0', ruleset)
        assert pass_schedule_dbu(block) == block

    def test_definition_result_read_blocks_motion(self, ruleset):
        block = block_of('subs r4, r4, #1\nldr r3, [r4]\nbne 0x0', ruleset)
        assert pass_schedule_dbu(block) == block

    def test_load_before_store_blocks_motion(self, ruleset):
        block = block_of('cmp r1, r2\nldr r3, [r4]\nstr r5, [r6]\nbne 0x0', ruleset)
        assert pass_schedule_dbu(block) == block

    def test_system_helper_blocks_motion(self, ruleset):
        block = block_of('cmp r1, r2\nvmsr fpscr, r3\naddeq r4, r4, #1\nhalt', ruleset)
        assert pass_schedule_dbu(block) == block

    def test_no_user_no_motion(self, ruleset):
        block = block_of('cmp r1, r2\nldr r3, [r4]\nhalt', ruleset)
        assert pass_schedule_dbu(block) == block

    def test_stale_area_flags_block_motion(self, ruleset):
        block = block_of('adds r5, r5, #1\ncmp r1, r2\nldr r3, [r4]\nbne 0x0', ruleset)
        assert pass_schedule_dbu(block) == block

    def test_packed_syncs_lose_mode(self, ruleset):
        block = pass_schedule_dbu(pass_reduce(block_of(LOAD_BETWEEN, ruleset)))
        assert block.items[4].mode is SyncMode.FULL


class TestScheduleIrq(object):

    def test_check_joins_first_access(self, ruleset):
        block = pass_schedule_irq(block_of('cmp r1, r2\nldr r3, [r4]\nhalt', ruleset))
        assert shape(block) == ['Restore:TbBoundary', 'rule:cmp_reg', 'Save:MemoryAccess', 'check', 'helper:ldr',
                                'Restore:MemoryAccess'] + HALT
        assert check_coordination(block) == []

    def test_no_memory_unchanged(self, ruleset):
        block = block_of('cmp r1, r2\naddeq r0, r0, #1\nhalt', ruleset)
        assert pass_schedule_irq(block) == block

    def test_interrupt_exit_resumes_at_access(self, ruleset):
        lowered = lower_block(pass_schedule_irq(block_of('cmp r1, r2\nldr r3, [r4]\nhalt', ruleset)))
        jump = [i for i in lowered.code if i.tag is Tag.CHECK and i.op == 'hjcc'][0]
        info = lowered.exits[lowered.code[jump.args[1]].args[0]]
        assert (info.target, info.profile.retired) == (4, 1)


class TestRunPipeline(object):

    def test_base_is_identity(self, ruleset):
        block = block_of(COMPOSITE, ruleset)
        assert run_pipeline(block, OptLevel.BASE) == block

    def test_scheduling_shape(self, ruleset):
        block = run_pipeline(block_of(LOAD_BETWEEN, ruleset), OptLevel.SCHEDULING)
        assert shape(block) == ['Restore:TbBoundary', 'Save:MemoryAccess', 'check', 'helper:ldr',
                                'Restore:MemoryAccess', 'rule:cmp_reg', 'exit:Branch']

    def test_levels_strictly_cheaper(self, ruleset):
        block = block_of(COMPOSITE, ruleset)
        counts = [sync_count(run_pipeline(block, level)) for level in OptLevel]
        assert counts == sorted(counts, reverse=True)
        assert len(set(counts)) == 4

    @pytest.mark.parametrize('level', list(OptLevel))
    @pytest.mark.parametrize('text', PROGRAMS)
    def test_idempotent(self, ruleset, text, level):
        once = run_pipeline(block_of(text, ruleset), level)
        assert run_pipeline(once, level) == once

    @pytest.mark.parametrize('level', list(OptLevel))
    @pytest.mark.parametrize('text', PROGRAMS)
    def test_coordination_holds(self, ruleset, text, level):
        assert check_coordination(run_pipeline(block_of(text, ruleset), level)) == []

    def test_parse_level(self):
        assert OptLevel.parse('scheduling') is OptLevel.SCHEDULING
        assert OptLevel.parse(' Base ') is OptLevel.BASE
        with pytest.raises(ValueError):
            OptLevel.parse('fastest')
