"""Run metrics

Every ratio is kept as an exact Fraction so that the coordination formula
can be checked against the directly counted Sync instructions without any
rounding. Reports convert to float only when they are written.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import EmptyRun
from ..translate.ops import SyncCause, Tag


def _pct(part, whole):
    if whole == 0:
        return Fraction(0)
    return Fraction(100 * part, whole)


@dataclass
class Metrics(object):
    """ Metrics of one run

    Attributes
    ----------
    host_per_guest : Fraction
        Executed host instructions per retired guest instruction
    sync_per_guest : Fraction
        ``sync_num * sync_overhead / guest_num``
    sync_overhead : Fraction
        Mean host instructions per executed sync operation
    system_pct, memory_pct, irq_check_pct : Fraction
        System-level and memory instructions, and executed interrupt checks,
        per hundred guest instructions
    rule_coverage_pct : Fraction
        Rule-eligible guest instructions that ran rule-translated code
    coordinated_pct : Fraction
        Guest instructions whose translation coordinated state
    mmu_per_memory : Fraction
        Host instructions charged to address translation per memory access
    irq_rate : Fraction
        Interrupts delivered per guest instruction
    slowdown_proxy : Fraction
        host_per_guest against one host instruction per guest instruction
    speedup_proxy : Fraction or None
        Baseline host instructions over this run's, an instruction-count
        proxy. None without a baseline.
    sync_by_cause : dict
        SyncCause -> executed sync operations
    """
    guest_num: int
    host_total: int
    sync_num: int
    sync_instrs: int
    host_per_guest: Fraction
    sync_per_guest: Fraction
    sync_overhead: Fraction
    system_pct: Fraction
    memory_pct: Fraction
    irq_check_pct: Fraction
    rule_coverage_pct: Fraction
    coordinated_pct: Fraction
    mmu_per_memory: Fraction
    irq_rate: Fraction
    slowdown_proxy: Fraction
    deferred_unpacks: int = 0
    context_switches: int = 0
    speedup_proxy: Fraction = None
    sync_by_cause: dict = field(default_factory=dict)

    def formula_holds(self):
        """sync_per_guest agrees with the Sync instructions counted directly"""
        return self.sync_per_guest == Fraction(self.sync_instrs, self.guest_num)

    def as_row(self):
        """Flat mapping in a stable key order, ratios as floats"""
        row = {}
        for name, value in self.__dict__.items():
            if name == 'sync_by_cause':
                continue
            if isinstance(value, Fraction):
                value = float(value)
            row[name] = value
        for cause in SyncCause:
            row['sync_' + cause.name.lower()] = self.sync_by_cause.get(cause, 0)
        return row


def compute_metrics(counters, baseline=None):
    """ Metrics from the counters of one run

    Parameters
    ----------
    counters : ExecCounters
    baseline : ExecCounters or None
        Run the speedup proxy is measured against

    Returns
    -------
    metrics : Metrics

    Raises
    ------
    EmptyRun
        No guest instruction retired
    """
    guest = counters.guest_num
    if guest <= 0:
        raise EmptyRun()
    sync_num = counters.sync_num
    sync_instrs = counters.tags[Tag.SYNC]
    overhead = Fraction(sync_instrs, sync_num) if sync_num else Fraction(0)
    host_per_guest = Fraction(counters.host_total, guest)
    speedup = None
    if baseline is not None and counters.host_total:
        speedup = Fraction(baseline.host_total, counters.host_total)
    return Metrics(
        guest_num=guest,
        host_total=counters.host_total,
        sync_num=sync_num,
        sync_instrs=sync_instrs,
        host_per_guest=host_per_guest,
        sync_per_guest=sync_num * overhead / guest,
        sync_overhead=overhead,
        system_pct=_pct(counters.system, guest),
        memory_pct=_pct(counters.memory, guest),
        irq_check_pct=_pct(counters.checks, guest),
        rule_coverage_pct=_pct(counters.rule_covered, counters.rule_eligible),
        coordinated_pct=_pct(counters.coordinated, guest),
        mmu_per_memory=Fraction(counters.mmu, counters.memory) if counters.memory else Fraction(0),
        irq_rate=Fraction(counters.interrupts, guest),
        slowdown_proxy=host_per_guest,
        deferred_unpacks=counters.deferred_unpacks,
        context_switches=counters.context_switches,
        speedup_proxy=speedup,
        sync_by_cause=dict(counters.sync_by_cause),
    )
