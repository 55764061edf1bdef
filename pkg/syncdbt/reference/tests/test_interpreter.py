"""Reference Interpreter Unit Tests"""

import pytest

from syncdbt.errors import FuelExhausted, PrivilegeFault, UnconfiguredVector
from syncdbt.guest import parse_guest_asm
from syncdbt.machine import build_machine, parse_workload, Mode
from syncdbt.machine.state import cpsr_word
from syncdbt.reference import ReferenceInterpreter, run, step

SUM_LOOP = """
start:  mov r0, #0
        mov r1, #5
loop:   add r0, r0, r1
        subs r1, r1, #1
        bne loop
        halt
"""

COUNTING_HANDLER = """
        .org 0x800
handler:
        mov r12, #0x3000
        ldr r13, [r12]
        add r13, r13, #1
        str r13, [r12]
        eret
"""

COUNT_TO_30 = """
start:  mov r1, #0
loop:   add r1, r1, #1
        cmp r1, #30
        bne loop
        halt
""" + COUNTING_HANDLER


def machine_for(text, **config):
    program = parse_guest_asm(text)
    return build_machine(program, parse_workload(dict({'program': 'x.s'}, **config)) if config else None)


class TestStep(object):

    def test_cmp_equal(self):
        machine = machine_for('cmp r1, r1')
        machine.state.regs[1] = 9
        step(machine)
        assert machine.state.nzcv & 4
        assert not machine.state.nzcv & 8

    def test_condition_false_is_nop(self):
        machine = machine_for('addeq r0, r0, #1')
        machine.state.regs[0] = 3
        step(machine)
        assert machine.state.regs[0] == 3
        assert machine.state.pc == 4
        assert machine.retired == 1

    def test_bl_links(self):
        machine = machine_for('.org 0x10\nbl 0x40')
        machine.state.pc = 0x10
        step(machine)
        assert machine.state.regs[14] == 0x14
        assert machine.state.pc == 0x40

    def test_eret_reloads_status(self):
        machine = machine_for('eret')
        machine.state.irq_masked = True
        machine.state.sysregs['spsr'] = cpsr_word(0b1001, Mode.USER, False)
        machine.state.sysregs['elr'] = 0x43
        step(machine)
        state = machine.state
        assert (state.pc, state.nzcv, state.mode, state.irq_masked) == (0x40, 0b1001, Mode.USER, False)
        assert machine.retired == 1

    def test_eret_is_privileged(self):
        machine = machine_for('eret', mode='User')
        with pytest.raises(PrivilegeFault):
            step(machine)
        assert machine.retired == 0


class TestRun(object):

    def test_sum_loop(self):
        trace, state = run(parse_guest_asm(SUM_LOOP))
        assert state.regs[0] == 15
        assert trace.retired == 17
        assert trace.stop == 'halt'

    def test_immediate_halt(self):
        trace, state = run(parse_guest_asm('halt'))
        assert trace.retired == 0
        assert state.pc == 0

    def test_fuel_exhausted(self):
        with pytest.raises(FuelExhausted) as err:
            run(parse_guest_asm(SUM_LOOP), fuel=5)
        assert err.value.retired == 5
        assert err.value.result.retired == 5

    def test_zero_fuel(self):
        with pytest.raises(FuelExhausted) as err:
            run(parse_guest_asm('halt'), fuel=0)
        assert err.value.retired == 0

    def test_deterministic(self):
        first, _ = run(parse_guest_asm(SUM_LOOP))
        second, _ = run(parse_guest_asm(SUM_LOOP))
        assert first.entries == second.entries
        assert first.final == second.final

    def test_interrupt_at_count(self):
        machine = machine_for(COUNT_TO_30, interrupts=[{'count': 10, 'vector': 'timer'}],
                              handlers={'timer': 0x800})
        trace, state = ReferenceInterpreter(machine).run(10000)
        assert trace.interrupts[0][0] >= 10
        assert machine.mem.read_word(0x3000) == 1
        assert state.regs[1] == 30
        assert trace.retired == 1 + 30 * 3 + 5
        # the handler's first instruction retires after trigger
        handler_index = [i for i, e in enumerate(trace.entries) if e.pc == 0x800][0]
        assert handler_index >= 10
        assert not state.irq_masked

    def test_interrupt_pending_at_halt_is_serviced(self):
        machine = machine_for('start: mov r1, #1\nhalt\n' + COUNTING_HANDLER,
                              interrupts=[{'count': 1, 'vector': 'timer'}], handlers={'timer': 0x800})
        trace, _ = ReferenceInterpreter(machine).run(1000)
        assert machine.mem.read_word(0x3000) == 1
        assert trace.retired == 1 + 5

    @pytest.mark.parametrize('gap', range(0, 7))
    def test_back_to_back_interrupts(self, gap):
        # the second trigger lands anywhere inside the first handler
        machine = machine_for(COUNT_TO_30, interrupts=[{'count': 10}, {'count': 11 + gap}],
                              handlers={'timer': 0x800})
        trace, state = ReferenceInterpreter(machine).run(10000)
        assert trace.stop == 'halt'
        assert machine.mem.read_word(0x3000) == 2
        assert state.regs[1] == 30
        assert trace.retired == 1 + 30 * 3 + 2 * 5
        assert [e.pc for e in trace.entries].count(0x800) == 2

    def test_unconfigured_vector(self):
        machine = machine_for('svc #0\nhalt', interrupts=[])
        with pytest.raises(UnconfiguredVector):
            ReferenceInterpreter(machine).run(100)

    def test_page_fault_retry(self):
        source = """
        start:  mov r2, #0x5000
                mov r1, #7
                str r1, [r2]
                halt
                .org 0x900
        fault:  mov r12, #0xF1000
                mov r13, #0x5003       ; frame 5, valid + writable
                str r13, [r12, #20]    ; L2 slot for page 5
                eret
        """
        mappings = [{'page': p << 12, 'frame': p} for p in (0, 3) + tuple(range(0xF0, 0xF2))]
        machine = machine_for(source, page_table=mappings, handlers={'page_fault': 0x900})
        trace, state = ReferenceInterpreter(machine).run(1000)
        assert len(trace.faults) == 1
        assert machine.mem.read_word(0x5000) == 7
        assert state.regs[1] == 7

    def test_privilege_fault_skips(self):
        source = """
        start:  vmrs r1, fpscr
                mov r2, #1
                halt
                .org 0x700
        priv:   mov r3, #9
                eret
        """
        machine = machine_for(source, mode='User', handlers={'privilege': 0x700})
        trace, state = ReferenceInterpreter(machine).run(100)
        assert state.regs[3] == 9
        assert state.regs[2] == 1
        assert state.mode is Mode.USER

    def test_undefined_without_handler_stops(self):
        trace, state = run(parse_guest_asm('mov r1, #1\nb 0x100'))
        assert trace.stop == 'undefined'
        assert state.pc == 0x100
