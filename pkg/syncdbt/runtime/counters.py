"""Execution counters"""

from dataclasses import dataclass, field, fields

from ..translate.ops import SyncCause, Tag


def _tag_counts():
    return dict((tag, 0) for tag in Tag)


def _cause_counts():
    return dict((cause, 0) for cause in SyncCause)


@dataclass
class ExecCounters(object):
    """ Everything a run counts

    Attributes
    ----------
    guest_num : int
        Retired guest instructions
    tags : dict
        Executed host instructions per Tag. Helper calls count the
        instructions the helper is charged.
    sync_by_cause : dict
        Executed sync operations per SyncCause
    context_switches : int
        Returns from translated code to the runtime loop
    translations : int
        Code cache misses
    tb_executions : int
        Blocks entered, from the loop or through a chain link
    mmu : int
        Host instructions charged to the memory helper
    """
    guest_num: int = 0
    tags: dict = field(default_factory=_tag_counts)
    sync_by_cause: dict = field(default_factory=_cause_counts)
    context_switches: int = 0
    translations: int = 0
    chain_links: int = 0
    tb_executions: int = 0
    tlb_hits: int = 0
    tlb_misses: int = 0
    mmu: int = 0
    interrupts: int = 0
    faults: int = 0
    deferred_unpacks: int = 0
    system: int = 0
    memory: int = 0
    rule_covered: int = 0
    rule_eligible: int = 0
    coordinated: int = 0
    checks: int = 0
    max_irq_latency: int = 0

    @property
    def sync_num(self):
        return sum(self.sync_by_cause.values())

    @property
    def host_total(self):
        return sum(self.tags.values())

    def count_sync(self, cause):
        self.sync_by_cause[cause] += 1

    def add_profile(self, profile):
        """Account the guest instructions retired along one block exit"""
        self.guest_num += profile.retired
        self.system += profile.system
        self.memory += profile.memory
        self.rule_covered += profile.rule_covered
        self.rule_eligible += profile.rule_eligible
        self.coordinated += profile.coordinated

    def copy(self):
        other = ExecCounters(**dict((f.name, getattr(self, f.name)) for f in fields(self)))
        other.tags = dict(self.tags)
        other.sync_by_cause = dict(self.sync_by_cause)
        return other

    def __sub__(self, other):
        delta = self.copy()
        for f in fields(self):
            if f.name == 'tags':
                delta.tags = dict((k, v - other.tags[k]) for k, v in self.tags.items())
            elif f.name == 'sync_by_cause':
                delta.sync_by_cause = dict((k, v - other.sync_by_cause[k]) for k, v in self.sync_by_cause.items())
            elif f.name != 'max_irq_latency':
                setattr(delta, f.name, getattr(self, f.name) - getattr(other, f.name))
        return delta

    def as_dict(self):
        """Flat mapping with string keys, tags prefixed ``host_`` and causes ``sync_``"""
        out = {}
        for f in fields(self):
            if f.name not in ('tags', 'sync_by_cause'):
                out[f.name] = getattr(self, f.name)
        for tag, count in self.tags.items():
            out['host_' + tag.value.lower()] = count
        for cause, count in self.sync_by_cause.items():
            out['sync_' + cause.name.lower()] = count
        out['host_total'] = self.host_total
        out['sync_num'] = self.sync_num
        return out
