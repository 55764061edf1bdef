from .state import GuestState, Mode, quiescent_equal
from .memory import PhysicalMemory, PageTable, page_walk, READ, WRITE, EXEC
from .tlb import Tlb, tlb_lookup_or_fill
from .interrupts import InterruptController, deliver_interrupt, exception_return
from .area import EmuStateArea
from .helpers import helper_system, helper_memory
from .machine import MachineState, build_machine
from .config import WorkloadConfig, load_workload, parse_workload, load_program, load_expected

__all__ = ['GuestState', 'Mode', 'quiescent_equal', 'PhysicalMemory', 'PageTable', 'page_walk', 'READ', 'WRITE',
           'EXEC', 'Tlb', 'tlb_lookup_or_fill', 'InterruptController', 'deliver_interrupt', 'exception_return',
           'EmuStateArea', 'helper_system', 'helper_memory', 'MachineState', 'build_machine', 'WorkloadConfig',
           'load_workload', 'parse_workload', 'load_program', 'load_expected']
