"""Chaining between translated blocks

A chained edge jumps from a chain slot in the source block straight into the
destination's code. When the destination defines the guest flags before
reading them, the source's boundary save and the destination's entry restore
are both dead, so the link goes from the slot ahead of the save to the first
instruction after the restore.
"""

import logging
from collections import namedtuple

from ..guest.isa import helper_flag_access
from ..translate.ops import CCR, CheckSite, ExitSite, FallbackSite, HelperSite, RuleSite, SyncCause, is_sync
from .passes import _defines, _uses

logger = logging.getLogger(__name__)

DEF = 'def'
USE = 'use'

ChainLink = namedtuple('ChainLink', ['src', 'edge', 'slot', 'dst', 'offset', 'elided'])


def _first_ccr_access(item, published):
    """ DEF or USE of the guest flags at one item, None when it does neither

    ``published`` tells whether a Save has already put the host flags in the
    EmuStateArea. Before that, anything that can hand the area flags to a
    helper or the runtime reads the flags the elided save would have stored.
    """
    if isinstance(item, RuleSite):
        if _uses(item):
            return USE
        return DEF if _defines(item) else None
    if isinstance(item, FallbackSite):
        if _uses(item):
            return USE
        return DEF if _defines(item) else None
    if isinstance(item, HelperSite):
        reads, writes = helper_flag_access(item.instr)
        if reads or not published:
            return USE
        return DEF if writes else None
    if isinstance(item, CheckSite):
        return None if published else USE
    if isinstance(item, ExitSite):
        return USE
    return None


def block_summary(block):
    """ First access to the guest flags on entry to a block

    Only CCR crosses block boundaries in host state that a link can keep
    live, so the summary maps CCR to DEF or USE. Sync operations neither
    define nor use the flags; a Save only publishes them to the area.

    Parameters
    ----------
    block : HostBlock

    Returns
    -------
    summary : dict
    """
    items = block.items
    start = 1 if items and is_sync(items[0]) and items[0].cause is SyncCause.TB_BOUNDARY else 0
    published = False
    for item in items[start:]:
        if is_sync(item):
            published = published or (item.is_save and CCR in item.components)
            continue
        access = _first_ccr_access(item, published)
        if access is not None:
            return {CCR: access}
    return {CCR: USE}


def pass_inter_tb(src, edge, dst):
    """ Choose how to link one edge

    Parameters
    ----------
    src : LoweredBlock
    edge : Edge
        One of ``src.edges``
    dst : LoweredBlock
        Translation of ``edge.target``

    Returns
    -------
    link : ChainLink
    """
    if edge.target != dst.entry:
        raise ValueError('edge to 0x%x cannot link to TB 0x%x' % (edge.target, dst.entry))
    elide = (edge.eslot is not None and dst.entry_skip > 0 and dst.pipeline == 'rules'
             and block_summary(dst.source)[CCR] == DEF)
    if elide:
        return ChainLink(src.entry, edge.index, edge.eslot, dst.entry, dst.entry_skip, True)
    return ChainLink(src.entry, edge.index, edge.slot, dst.entry, 0, False)


class ChainGraph(object):
    """ Links between resident blocks

    Attributes
    ----------
    links : dict
        (src entry, slot position) -> ChainLink
    """

    def __init__(self, elide=False):
        self.elide = elide
        self.links = {}
        self.elided = 0

    def link(self, src, edge, dst):
        """Patch ``edge`` of ``src`` to jump into ``dst``"""
        link = pass_inter_tb(src, edge, dst)
        if link.elided and not self.elide:
            link = ChainLink(src.entry, edge.index, edge.slot, dst.entry, 0, False)
        for key in [k for k, v in self.links.items() if k[0] == src.entry and v.edge == edge.index]:
            del self.links[key]
        self.links[(src.entry, link.slot)] = link
        self.elided += link.elided
        logger.debug('chained 0x%x edge %d -> 0x%x%s', src.entry, edge.index, dst.entry,
                     ' (boundary sync elided)' if link.elided else '')
        return link

    def follow(self, src_entry, slot):
        """The link patched into a chain slot, None while it falls through"""
        return self.links.get((src_entry, slot))

    def linked(self, src_entry, edge_index):
        return any(k[0] == src_entry and v.edge == edge_index for k, v in self.links.items())

    def unlink(self, entry):
        """Drop every link into or out of a block"""
        stale = [k for k, v in self.links.items() if v.src == entry or v.dst == entry]
        for key in stale:
            del self.links[key]
        return len(stale)

    def clear(self):
        self.links.clear()

    def __len__(self):
        return len(self.links)
