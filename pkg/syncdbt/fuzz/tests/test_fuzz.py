"""Random Program and Differential Test Unit Tests"""

import numpy as np
import pytest

from syncdbt.fuzz import (GeneratorConfig, ProgramGenerator, random_program, diff_test, compare_run, DEFAULT_CONFIGS,
                          DEFAULT_GENERATOR)
from syncdbt.fuzz.generator import BASE_REG, COUNTER_REG
from syncdbt.guest import parse_guest_asm
from syncdbt.guest.isa import Reg
from syncdbt.machine import parse_workload
from syncdbt.optimize import OptLevel, run_pipeline
from syncdbt.reference import run
from syncdbt.runtime import RunConfig
from syncdbt.translate import translate_tb_rules, check_coordination, load_ruleset

WRITERS = ('add', 'sub', 'and', 'orr', 'eor', 'lsl', 'lsr', 'mov', 'mvn', 'ldr', 'vmrs', 'getcpsr')


class TestProgramGenerator(object):

    def test_deterministic(self):
        assert random_program(3)[1] == random_program(3)[1]
        assert random_program(3)[1] != random_program(4)[1]

    def test_reserved_registers_untouched(self):
        generator = ProgramGenerator(11, GeneratorConfig(length=30))
        for _ in range(20):
            program, _, _ = generator.program()
            writes = [i.operands[0].n for i in program.instrs.values()
                      if i.addr < 0x600 and i.mnemonic in WRITERS and isinstance(i.operands[0], Reg)]
            assert writes.count(BASE_REG) == 1
            assert writes.count(COUNTER_REG) == 2

    @pytest.mark.parametrize('seed', range(10))
    def test_programs_halt(self, seed):
        program, _, mapping = random_program(seed, GeneratorConfig(svc=True, interrupts=2))
        trace, _ = run(program, fuel=10000, config=parse_workload(mapping))
        assert trace.stop == 'halt'

    def test_interrupt_schedule(self):
        _, _, mapping = random_program(5, GeneratorConfig(interrupts=3))
        counts = [entry['count'] for entry in mapping['interrupts']]
        assert counts == sorted(counts) and len(counts) == 3


class TestDiffTest(object):

    def test_small_campaign(self):
        report = diff_test(seed=1, count=8, fuel=5000)
        assert report.programs == 8
        assert report.runs == 8 * len(DEFAULT_CONFIGS)
        assert report.passed, report.mismatches

    def test_default_campaign_takes_interrupts_and_system_calls(self):
        assert DEFAULT_GENERATOR.svc and DEFAULT_GENERATOR.interrupts > 0
        _, text, mapping = ProgramGenerator(1, DEFAULT_GENERATOR).program()
        assert 'eret' in text
        assert len(mapping['interrupts']) == DEFAULT_GENERATOR.interrupts
        assert set(mapping['handlers']) == {'timer', 'svc'}

    def test_reference_out_of_fuel_is_a_failure(self, monkeypatch):
        text = 'spin:   b spin\n'
        program = parse_guest_asm(text)
        monkeypatch.setattr(ProgramGenerator, 'program', lambda self: (program, text, {'program': 'spin.s'}))
        report = diff_test(count=2, fuel=100)
        assert not report.passed
        assert report.runs == 0
        assert [m.config for m in report.mismatches] == ['reference', 'reference']
        assert 'out of fuel' in report.mismatches[0].reason

    def test_system_calls_and_interrupts(self):
        report = diff_test(seed=2, count=6, fuel=5000, generator=GeneratorConfig(svc=True, interrupts=3, system=0.2))
        assert report.passed, report.mismatches

    def test_memory_heavy_without_chaining(self):
        configs = [RunConfig(level=level, chain=False, use_tlb=False) for level in OptLevel]
        report = diff_test(seed=3, count=6, configs=configs, generator=GeneratorConfig(memory=0.5, length=20))
        assert report.passed, report.mismatches

    def test_detects_divergence(self):
        program, _, mapping = random_program(0)
        workload = parse_workload(mapping)
        trace, expected = run(program, config=workload)
        expected = expected.copy()
        expected.regs[BASE_REG] ^= 1
        reason = compare_run(program, workload, trace, expected, RunConfig())
        assert reason is not None and 'final state' in reason

    def test_random_blocks_keep_pipeline_properties(self):
        ruleset = load_ruleset()
        rng = np.random.RandomState(0)
        for seed in rng.randint(0, 10 ** 6, size=40):
            program, _, _ = random_program(int(seed), GeneratorConfig(length=10, branch=0.0))
            block = translate_tb_rules(program, program.labels['loop'], ruleset)
            for level in OptLevel:
                once = run_pipeline(block, level)
                assert run_pipeline(once, level) == once
                assert check_coordination(once) == []


@pytest.mark.slow
class TestFullCampaigns(object):

    def test_ten_thousand_blocks(self):
        ruleset = load_ruleset()
        generator = ProgramGenerator(2024, GeneratorConfig(length=12, branch=0.0, system=0.15, memory=0.3))
        for _ in range(10000):
            program, _, _ = generator.program()
            block = translate_tb_rules(program, program.labels['loop'], ruleset)
            for level in OptLevel:
                once = run_pipeline(block, level)
                assert run_pipeline(once, level) == once
                assert check_coordination(once) == []

    def test_thousand_programs(self):
        report = diff_test(seed=7, count=1000, fuel=10000)
        assert report.programs == 1000
        assert report.runs == 1000 * len(DEFAULT_CONFIGS)
        assert report.passed, report.mismatches[:5]
