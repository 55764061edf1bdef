"""Code cache"""

import logging
from dataclasses import dataclass

from ..optimize.chain import ChainGraph
from ..optimize.pipeline import OptLevel, run_pipeline
from ..translate.baseline import translate_tb_baseline
from ..translate.lowering import lower_block
from ..translate.rules import load_ruleset
from ..translate.rules_pipeline import translate_tb_rules

logger = logging.getLogger(__name__)

BASELINE = 'baseline'
RULES = 'rules'
PIPELINES = (BASELINE, RULES)


@dataclass(frozen=True)
class TbDescriptor(object):
    """A resident translation: the optimized block and its lowered code"""
    entry: int
    block: object
    lowered: object
    level: OptLevel
    pipeline: str

    @property
    def static_counts(self):
        return self.lowered.static_counts()


class CodeCache(object):
    """ Translated blocks indexed by guest entry address, plus their chain links

    Parameters
    ----------
    program : GuestProgram
    pipeline : str
        'baseline' or 'rules'
    level : OptLevel
        Optimization level for the rules pipeline
    ruleset : RuleSet or None
        Defaults to the bundled starter rules
    chain : bool
        Patch direct edges between resident blocks
    """

    def __init__(self, program, pipeline=RULES, level=OptLevel.SCHEDULING, ruleset=None, chain=True):
        if pipeline not in PIPELINES:
            raise ValueError('unknown pipeline %r (expected one of %s)' % (pipeline, ', '.join(PIPELINES)))
        self.program = program
        self.pipeline = pipeline
        self.level = OptLevel(level)
        self.ruleset = ruleset if ruleset is not None or pipeline == BASELINE else load_ruleset()
        self.chain = chain
        self.graph = ChainGraph(elide=self.elide)
        self.blocks = {}
        self.translations = 0

    @property
    def elide(self):
        return self.pipeline == RULES and self.chain and self.level >= OptLevel.ELIMINATION

    def __len__(self):
        return len(self.blocks)

    def __contains__(self, entry):
        return entry in self.blocks

    def translate(self, entry):
        """ Scan, translate, optimize and lower the TB at ``entry``

        Raises
        ------
        DecodeError
            No instruction at ``entry``
        """
        if self.pipeline == BASELINE:
            block = translate_tb_baseline(self.program, entry)
        else:
            block = run_pipeline(translate_tb_rules(self.program, entry, self.ruleset), self.level)
        lowered = lower_block(block, chain_elision=self.elide)
        return TbDescriptor(entry, block, lowered, self.level, self.pipeline)

    def lookup(self, entry):
        return self.blocks.get(entry)

    def lookup_or_translate(self, entry):
        """ Resident descriptor for ``entry``, translating on a miss

        Returns
        -------
        descriptor : TbDescriptor
        hit : bool
        """
        descriptor = self.blocks.get(entry)
        if descriptor is not None:
            return descriptor, True
        descriptor = self.translate(entry)
        self.blocks[entry] = descriptor
        self.translations += 1
        logger.debug('translated TB 0x%x: %d host instructions', entry, len(descriptor.lowered.code))
        return descriptor, False

    def link(self, src, edge_index, dst):
        """ Chain ``src``'s direct edge to ``dst``

        Returns
        -------
        link : ChainLink or None
            None when chaining is off or the edge is unknown
        """
        if not self.chain:
            return None
        edges = [e for e in src.lowered.edges if e.index == edge_index]
        if not edges or edges[0].target != dst.entry:
            return None
        return self.graph.link(src.lowered, edges[0], dst.lowered)

    def follow(self, src_entry, slot):
        """ Destination of a patched chain slot

        Returns
        -------
        target : (LoweredBlock, int) or None
        """
        link = self.graph.follow(src_entry, slot)
        if link is None:
            return None
        return self.blocks[link.dst].lowered, link.offset

    def unlink_all(self):
        """Drop every chain link, keeping the translations"""
        count = len(self.graph)
        self.graph.clear()
        if count:
            logger.debug('dropped %d chain links', count)
        return count

    def flush(self):
        self.blocks.clear()
        self.graph.clear()


def lookup_or_translate(cache, entry):
    """Module-level form of CodeCache.lookup_or_translate"""
    return cache.lookup_or_translate(entry)
