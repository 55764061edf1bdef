from .isa import (Condition, Category, GuestInstr, Reg, Imm, Mem, Target, SysReg, classify, flag_def_use,
                  helper_flag_access, regs_read, regs_written, format_instr)
from .asm import GuestProgram, parse_guest_asm, format_program

__all__ = ['Condition', 'Category', 'GuestInstr', 'Reg', 'Imm', 'Mem', 'Target', 'SysReg', 'classify',
           'flag_def_use', 'helper_flag_access', 'regs_read', 'regs_written', 'format_instr',
           'GuestProgram', 'parse_guest_asm', 'format_program']
