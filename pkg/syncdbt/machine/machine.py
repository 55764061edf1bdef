"""Guest machine"""

import logging

from ..guest.isa import WORD_MASK
from .interrupts import InterruptController
from .memory import PhysicalMemory, PageTable, PT_ROOT, NUM_FRAMES, page_walk
from .state import GuestState, Mode
from .tlb import Tlb, tlb_lookup_or_fill

logger = logging.getLogger(__name__)


class MachineState(object):
    """ Everything a guest program runs against

    Parameters
    ----------
    program : GuestProgram
    state : GuestState
    mem : PhysicalMemory
    controller : InterruptController
    handlers : dict
        Vector name -> handler entry address
    use_tlb : bool
        Translate through the software TLB; page walks only when False
    """

    def __init__(self, program, state=None, mem=None, controller=None, handlers=None, use_tlb=True,
                 root=PT_ROOT):
        self.program = program
        self.state = state if state is not None else GuestState(pc=program.entry)
        self.mem = mem if mem is not None else PhysicalMemory()
        self.controller = controller if controller is not None else InterruptController()
        self.handlers = dict(handlers or {})
        self.root = root
        self.tlb = Tlb()
        self.use_tlb = use_tlb
        self.retired = 0

    def translate(self, gva, access):
        """ Guest virtual to physical translation

        Returns
        -------
        gpa : int
        hit : bool
            True on a TLB hit, False when a walk was needed
        """
        gva &= WORD_MASK
        if self.use_tlb:
            return tlb_lookup_or_fill(gva, access, self.tlb, self.root, self.mem)
        return page_walk(gva, access, self.root, self.mem), False

    def word_address(self, base, offset):
        """Effective address of a word access. The low two bits are ignored."""
        return (base + offset) & WORD_MASK & ~3

    def pending_interrupt(self):
        if self.state.irq_masked:
            return None
        return self.controller.pending(self.retired)


def build_page_table(mem, config):
    table = PageTable(mem)
    if config is None or config.page_table == 'identity':
        table.identity(NUM_FRAMES if config is None else config.identity_pages)
    else:
        for entry in config.page_table:
            table.map(entry.page, entry.frame, entry.writable)
    return table


def build_machine(program, config=None, use_tlb=True):
    """ Fresh machine for a program, optionally shaped by a WorkloadConfig

    Parameters
    ----------
    program : GuestProgram
    config : WorkloadConfig or None
        None gives an identity-mapped privileged machine without interrupts
    use_tlb : bool

    Returns
    -------
    machine : MachineState
    """
    mem = PhysicalMemory()
    build_page_table(mem, config)
    mem.load_image(program.data)
    if config is None:
        state = GuestState(pc=program.entry)
        controller = InterruptController()
        handlers = {}
    else:
        state = GuestState(regs=config.initial_registers(), pc=program.entry, mode=Mode(config.mode))
        controller = InterruptController(config.schedule)
        handlers = config.handlers
    return MachineState(program, state, mem, controller, handlers, use_tlb)
