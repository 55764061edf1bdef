"""Runtime execution loop

Looks up or translates the block at the guest pc, runs it on the host
machine and handles whatever made it come back: a direct edge to chain, an
indirect branch, a system call or exception return, a pending interrupt, a
guest fault or halt.

Under the rules pipeline guest r0-r11 live in host h0-h11 for the whole run.
r12-r14, the pc and the flags the runtime reads live in the EmuStateArea.
"""

import logging
from dataclasses import dataclass

from ..errors import DecodeError, FuelExhausted, PageFault, RegisterMapError, UndefinedInstruction
from ..guest.isa import NUM_REGS, WORD_MASK
from ..machine.area import EmuStateArea, IRQ_PENDING, PC
from ..machine.interrupts import deliver_interrupt
from ..machine.machine import build_machine
from ..optimize.pipeline import OptLevel
from ..reference.interpreter import ReferenceInterpreter
from ..translate.lowering import EDGE, ERET, FAULT, HALT, INDIRECT, INTERRUPT, SVC
from ..translate.ops import MAPPED_REGS
from .cache import CodeCache, RULES
from .counters import ExecCounters
from .host import HostCPU, deferred_unpack

logger = logging.getLogger(__name__)

HALTED = 'halt'
UNDEFINED = 'undefined'


@dataclass
class RunConfig(object):
    """ Options of one translated run

    Parameters
    ----------
    pipeline : str
        'baseline' or 'rules'
    level : OptLevel
    chain : bool
        Patch direct edges between blocks
    use_tlb : bool
        Software TLB in front of the page walker
    check_regmap : bool
        Compare h0-h11 against a lockstep reference run at every block exit
    fuel : int or None
        Retired-instruction limit, the workload's when None
    verbose : bool
    print_interval : int
        Block executions between progress lines when verbose
    """
    pipeline: str = RULES
    level: OptLevel = OptLevel.SCHEDULING
    chain: bool = True
    use_tlb: bool = True
    check_regmap: bool = False
    fuel: int = None
    verbose: bool = False
    print_interval: int = 10000

    @property
    def label(self):
        if self.pipeline == RULES:
            return 'rules@%s' % OptLevel(self.level).label
        return self.pipeline


class RunResult(object):
    """ Outcome of a translated run

    Attributes
    ----------
    final : GuestState
    counters : ExecCounters
    stop : str
        'halt' or 'undefined'; None when fuel ran out
    interrupts : list of (int, str, int)
        (retired count, vector, latency in block executions) per delivery
    faults : list of GuestFault
    """

    def __init__(self, final, counters, stop, interrupts, faults, machine, cache):
        self.final = final
        self.counters = counters
        self.stop = stop
        self.interrupts = interrupts
        self.faults = faults
        self.machine = machine
        self.cache = cache


class Runtime(object):
    """ One translated run of a machine

    Parameters
    ----------
    machine : MachineState
    config : RunConfig
    ruleset : RuleSet or None
    shadow : ReferenceInterpreter or None
        Lockstep reference for ``check_regmap``
    """

    def __init__(self, machine, config=None, ruleset=None, shadow=None):
        self.machine = machine
        self.config = config if config is not None else RunConfig()
        self.area = EmuStateArea()
        self.counters = ExecCounters()
        self.cache = CodeCache(machine.program, self.config.pipeline, self.config.level, ruleset, self.config.chain)
        self.cpu = HostCPU(machine, self.area, self.counters, follow=self._follow)
        self.rules = self.config.pipeline == RULES
        self.shadow = shadow
        if self.config.check_regmap and len(machine.controller):
            logger.warning('register map check disabled: interrupt timing differs from the reference')
            self.shadow = None
        self.fuel = 0
        self.interrupts = []
        self.faults = []
        self.pending_since = {}
        self.tlb_flushes = machine.tlb.flushes

    # Guest state

    def load_state(self, state):
        self.area.load_state(state)
        if self.rules:
            self.cpu.regs[:MAPPED_REGS] = state.regs[:MAPPED_REGS]
        self.cpu.flags = state.nzcv

    def guest_state(self, pc):
        """ Architectural state composed from host registers, the area and the machine

        Reads the flags without running the deferred unpack.
        """
        state = self.machine.state.copy()
        regs = [self.area.reg(n) for n in range(NUM_REGS)]
        if self.rules:
            regs[:MAPPED_REGS] = self.cpu.regs[:MAPPED_REGS]
        state.regs = regs
        state.pc = pc
        state.nzcv = self.area.read_flags()
        return state

    def _sync_flags(self):
        """Bring the per-flag slots up to date and hand the flags to the machine state"""
        deferred_unpack(self.cpu)
        self.machine.state.nzcv = self.area.per_flag()

    # Interrupts

    def _update_pending(self):
        machine = self.machine
        index = machine.pending_interrupt()
        self.area[IRQ_PENDING] = 0 if index is None else 1
        if index is not None and index not in self.pending_since:
            self.pending_since[index] = self.counters.tb_executions

    def _service_interrupts(self, pc):
        machine = self.machine
        self._update_pending()
        index = machine.pending_interrupt()
        if index is None:
            return pc
        self._sync_flags()
        machine.state.pc = pc
        delivered = machine.controller.deliver_pending(machine.state, machine.handlers, machine.retired)
        latency = self.counters.tb_executions - self.pending_since.pop(delivered, self.counters.tb_executions)
        self.counters.interrupts += 1
        self.counters.max_irq_latency = max(self.counters.max_irq_latency, latency)
        self.interrupts.append((machine.retired, machine.controller.vectors[delivered], latency))
        self.area[PC] = machine.state.pc
        self.area[IRQ_PENDING] = 0
        logger.debug('interrupt %s delivered after %d guest instructions (latency %d blocks)',
                     machine.controller.vectors[delivered], machine.retired, latency)
        return machine.state.pc

    def _deliver_fault(self, fault, pc):
        """ Enter the fault's vector

        Page faults return to ``pc`` so the access is retried, the others
        return past the faulting instruction.
        """
        self.faults.append(fault)
        self._sync_flags()
        state = self.machine.state
        return_pc = pc if isinstance(fault, PageFault) else (pc + 4) & WORD_MASK
        state.pc = pc
        deliver_interrupt(state, fault.vector_name, self.machine.handlers, return_pc=return_pc)
        self.area[PC] = state.pc
        logger.debug('%s delivered to 0x%x', fault, state.pc)
        return state.pc

    # Chaining

    def _follow(self, block, slot, exit_index):
        target = self.cache.follow(block.entry, slot)
        if target is None:
            return None
        profile = block.exits[exit_index].profile
        if self.machine.retired + profile.retired + target[0].full_profile.retired > self.fuel:
            return None
        self._retire(profile)
        self._update_pending()
        return target

    def _retire(self, profile):
        self.counters.add_profile(profile)
        self.machine.retired += profile.retired

    def _chain(self, src, info):
        try:
            dst, _ = self.cache.lookup_or_translate(info.target)
        except DecodeError:
            return
        self.counters.translations = self.cache.translations
        self.cache.link(self.cache.lookup(src.entry), info.edge, dst)

    # Register map check

    def _check_regmap(self, info):
        if self.shadow is None or info.reason in (FAULT, INTERRUPT):
            return
        expected = self.shadow.run_until(self.machine.retired).regs
        actual = self.cpu.regs if self.rules else [self.area.reg(n) for n in range(NUM_REGS)]
        for n in range(MAPPED_REGS):
            if actual[n] != expected[n]:
                raise RegisterMapError(self.machine.retired, n, actual[n], expected[n])

    # Loop

    def _result(self, pc, stop):
        self.counters.tlb_hits = self.machine.tlb.hits
        self.counters.tlb_misses = self.machine.tlb.misses
        self.counters.translations = self.cache.translations
        final = self.guest_state(pc)
        return RunResult(final, self.counters, stop, self.interrupts, self.faults, self.machine, self.cache)

    def _at_halt(self, pc):
        instr = self.machine.program.fetch(pc)
        return instr is not None and instr.mnemonic == 'halt'

    def exec_loop(self, fuel):
        """ Run until halt or until ``fuel`` guest instructions have retired

        A block is only entered, from here or through a chain link, when all
        of it fits in the remaining fuel, so a run never retires more than
        ``fuel``.

        Returns
        -------
        result : RunResult

        Raises
        ------
        FuelExhausted
            Carrying the partial RunResult
        """
        machine = self.machine
        config = self.config
        self.fuel = fuel
        pc = machine.state.pc
        self.load_state(machine.state)
        if fuel <= 0:
            raise FuelExhausted(0, self._result(pc, None))
        while True:
            pc = self._service_interrupts(pc)
            if self._at_halt(pc):
                return self._result(pc, HALTED)
            if machine.retired >= fuel:
                raise FuelExhausted(machine.retired, self._result(pc, None))
            try:
                descriptor, _ = self.cache.lookup_or_translate(pc)
            except DecodeError:
                fault = UndefinedInstruction(pc)
                if 'undefined' not in machine.handlers:
                    logger.error('%s, stopping', fault)
                    return self._result(pc, UNDEFINED)
                pc = self._deliver_fault(fault, pc)
                continue
            if machine.retired + descriptor.lowered.full_profile.retired > fuel:
                raise FuelExhausted(machine.retired, self._result(pc, None))
            self._update_pending()
            block, info = self.cpu.run(descriptor.lowered)
            self.counters.context_switches += 1
            self._retire(info.profile)
            if machine.tlb.flushes != self.tlb_flushes:
                self.tlb_flushes = machine.tlb.flushes
                self.cache.unlink_all()
            self._check_regmap(info)
            if config.verbose and self.counters.context_switches % config.print_interval == 0:
                logger.info('%d guest instructions, %d host instructions, %d blocks translated',
                            machine.retired, self.counters.host_total, self.cache.translations)

            if info.reason == EDGE:
                pc = info.target
                if config.chain:
                    self._chain(block, info)
            elif info.reason == HALT:
                pc = info.target
            elif info.reason in (SVC, ERET):
                pc = self.area[PC]
            elif info.reason == INDIRECT:
                pc = self.area.reg(info.reg) & ~3 & WORD_MASK
            elif info.reason == INTERRUPT:
                pc = info.target
            elif info.reason == FAULT:
                pc = self._deliver_fault(self.cpu.fault, info.target)
            else:
                raise ValueError('unknown exit reason %r' % info.reason)


def run_program(program, workload=None, config=None, ruleset=None):
    """ Translated run of a program on a fresh machine

    Parameters
    ----------
    program : GuestProgram
    workload : WorkloadConfig or None
    config : RunConfig or None
    ruleset : RuleSet or None

    Returns
    -------
    result : RunResult
    """
    config = config if config is not None else RunConfig()
    machine = build_machine(program, workload, use_tlb=config.use_tlb)
    shadow = None
    if config.check_regmap:
        shadow = ReferenceInterpreter(build_machine(program, workload))
    fuel = config.fuel if config.fuel is not None else (workload.fuel if workload is not None else 100000)
    runtime = Runtime(machine, config, ruleset, shadow)
    logger.debug('running %s with fuel %d', config.label, fuel)
    return runtime.exec_loop(fuel)


def exec_loop(machine, cache_config=None, fuel=100000, ruleset=None):
    """Module-level form of Runtime.exec_loop"""
    return Runtime(machine, cache_config, ruleset).exec_loop(fuel)
