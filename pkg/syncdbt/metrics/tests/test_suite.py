"""Bundled Workload Suite Tests"""

import os
from fractions import Fraction

import pytest

from syncdbt.guest.isa import Category
from syncdbt.machine import load_workload, load_program, load_expected
from syncdbt.machine.state import quiescent_view
from syncdbt.metrics import WORKLOAD_DIR, bundled_workloads, run_experiment
from syncdbt.reference import run

NAMES = ['alu-loop', 'irqstorm', 'membound', 'mixed', 'sysmix']


def workload(name):
    return load_workload(os.path.join(WORKLOAD_DIR, name + '.toml'))


@pytest.fixture(scope='module')
def reports():
    return dict((name, run_experiment(workload(name))) for name in NAMES)


class TestSuite(object):

    def test_bundled(self):
        assert [os.path.basename(p) for p in bundled_workloads()] == [n + '.toml' for n in NAMES]

    @pytest.mark.parametrize('name', NAMES)
    def test_expected_state_is_the_reference_one(self, name):
        config = workload(name)
        trace, state = run(load_program(config), fuel=config.fuel, config=config)
        assert trace.stop == 'halt'
        assert quiescent_view(state) == load_expected(config)

    @pytest.mark.parametrize('name', NAMES)
    def test_every_configuration_passes(self, reports, name):
        report = reports[name]
        assert report.passed
        assert all(cell.expected for cell in report)

    def test_mixed_ablation(self, reports):
        report = reports['mixed']
        levels = [cell.metrics.sync_per_guest for cell in report if cell.config.pipeline == 'rules']
        assert all(a > b for a, b in zip(levels, levels[1:]))
        assert report.sync_reduction()['rules@Scheduling'] >= 50

    @pytest.mark.parametrize('name', ['alu-loop', 'mixed'])
    def test_translation_quality(self, reports, name):
        report = reports[name]
        baseline = report.cell('baseline').metrics.host_per_guest
        rules = report.cell('rules@Scheduling').metrics.host_per_guest
        assert rules <= Fraction(9, 10) * baseline

    def test_alu_loop_rule_coverage(self, reports):
        assert reports['alu-loop'].cell('rules@Scheduling').metrics.rule_coverage_pct == 100

    def test_mixed_categories_match_reference(self, reports):
        config = workload('mixed')
        trace, _ = run(load_program(config), fuel=config.fuel, config=config)
        counts = trace.category_counts()
        for cell in reports['mixed']:
            assert cell.metrics.memory_pct == Fraction(100 * counts[Category.MEMORY_ACCESS], trace.retired)
            assert cell.metrics.system_pct == Fraction(100 * counts[Category.SYSTEM_LEVEL], trace.retired)

    def test_irqstorm_liveness(self, reports):
        for cell in reports['irqstorm']:
            assert cell.interrupts_lost == 0
            assert cell.counters.interrupts == 15
            assert cell.counters.max_irq_latency <= 2

    def test_formula_identity_everywhere(self, reports):
        for report in reports.values():
            for cell in report:
                assert cell.metrics.formula_holds()
