"""Guest Assembler Unit Tests"""

import pytest

from syncdbt.errors import AsmSyntaxError, UnknownMnemonic, UnresolvedLabel
from syncdbt.guest import parse_guest_asm, format_program, Condition, Reg, Imm, Mem, Target, SysReg
from syncdbt.guest.asm import split_mnemonic


SOURCE = """
; counts down r1 and stores to a buffer
        .org 0x100
start:  mov r1, #5
        mov r2, #buf
loop:   subs r1, r1, #1
        str r1, [r2, #4]
        addeq r0, r0, #1
        bne loop
        vmsr fpscr, r1
        vmrs r3, fpscr
        halt
        .org 0x2000
buf:    .word 0xdeadbeef
        .word 0
"""


class TestParse(object):

    def test_cmp_at_origin(self):
        instr = parse_guest_asm('cmp r1, r2').instrs[0]
        assert instr.addr == 0
        assert instr.mnemonic == 'cmp'
        assert instr.cond is Condition.AL
        assert instr.sets_flags

    def test_conditional_add(self):
        instr = parse_guest_asm('addeq r0, r0, #1').instrs[0]
        assert instr.cond is Condition.EQ
        assert not instr.sets_flags
        assert instr.operands == (Reg(0), Reg(0), Imm(1))

    def test_unresolved_label(self):
        with pytest.raises(UnresolvedLabel) as err:
            parse_guest_asm('nop_line:\n  bne loop')
        assert err.value.line == 2

    def test_unknown_mnemonic(self):
        with pytest.raises(UnknownMnemonic):
            parse_guest_asm('frobnicate r1')

    def test_syntax_error_has_line(self):
        with pytest.raises(AsmSyntaxError) as err:
            parse_guest_asm('mov r1, #1\nadd r1, r2')
        assert err.value.line == 2

    def test_labels_and_data(self):
        program = parse_guest_asm(SOURCE)
        assert program.entry == 0x100
        assert program.labels['loop'] == 0x108
        assert program.instrs[0x104].operands[1] == Imm(0x2000)
        assert program.instrs[0x114].operands == (Target(0x108),)
        assert program.instrs[0x10c].operands[1] == Mem(2, 4)
        assert program.instrs[0x118].operands[0] == SysReg('fpscr')
        assert [program.data[0x2000 + i] for i in range(4)] == [0xef, 0xbe, 0xad, 0xde]
        assert program.data[0x2004] == 0

    def test_negative_offset_and_immediate(self):
        program = parse_guest_asm('ldr r1, [r2, #-8]\nmov r3, #-1')
        assert program.instrs[0].operands[1] == Mem(2, -8)
        assert program.instrs[4].operands[1] == Imm(0xFFFFFFFF)

    def test_case_insensitive(self):
        instr = parse_guest_asm('ADDEQS R1, R2, R3').instrs[0]
        assert instr.mnemonic == 'add' and instr.cond is Condition.EQ and instr.sets_flags


class TestSplitMnemonic(object):

    @pytest.mark.parametrize('word,expected', [
        ('blt', ('b', Condition.LT, False)),
        ('bl', ('bl', Condition.AL, False)),
        ('bx', ('bx', Condition.AL, False)),
        ('addeqs', ('add', Condition.EQ, True)),
        ('movs', ('mov', Condition.AL, True)),
        ('lsls', ('lsl', Condition.AL, True)),
        ('cmpne', ('cmp', Condition.NE, False)),
    ])
    def test_split(self, word, expected):
        assert split_mnemonic(word) == expected

    @pytest.mark.parametrize('word', ['cmps', 'ldreq', 'vmsrs', 'addseq'])
    def test_rejected(self, word):
        assert split_mnemonic(word) is None


class TestRoundTrip(object):

    def test_round_trip(self):
        program = parse_guest_asm(SOURCE)
        assert parse_guest_asm(format_program(program)) == program

    def test_round_trip_is_stable(self):
        text = format_program(parse_guest_asm(SOURCE))
        assert format_program(parse_guest_asm(text)) == text

    def test_entry_not_lowest(self):
        program = parse_guest_asm('handler: halt\n.org 0x40\nstart: mov r1, #1\nhalt')
        assert program.entry == 0x40
        assert parse_guest_asm(format_program(program)).entry == 0x40
