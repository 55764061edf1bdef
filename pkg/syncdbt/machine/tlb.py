"""Software TLB"""

import logging

import numpy as np

from .memory import PAGE_SHIFT, PAGE_SIZE, WRITE, walk_entry
from ..errors import PageFault

logger = logging.getLogger(__name__)

TLB_ENTRIES = 64


class Tlb(object):
    """ Direct-mapped translation cache

    Parameters
    ----------
    entries : int
        Number of slots, indexed by the low bits of the virtual page number
    """

    def __init__(self, entries=TLB_ENTRIES):
        self.entries = entries
        self.valid = np.zeros(entries, dtype=bool)
        self.page = np.zeros(entries, dtype=np.uint32)
        self.frame = np.zeros(entries, dtype=np.uint32)
        self.writable = np.zeros(entries, dtype=bool)
        self.hits = 0
        self.misses = 0
        self.flushes = 0

    def _slot(self, vpn):
        return vpn % self.entries

    def lookup(self, gva):
        """ Cached translation for gva

        Returns
        -------
        entry : tuple or None
            (frame, writable) on a hit
        """
        vpn = gva >> PAGE_SHIFT
        slot = self._slot(vpn)
        if self.valid[slot] and self.page[slot] == vpn:
            return int(self.frame[slot]), bool(self.writable[slot])
        return None

    def fill(self, gva, frame, writable):
        vpn = gva >> PAGE_SHIFT
        slot = self._slot(vpn)
        self.valid[slot] = True
        self.page[slot] = vpn
        self.frame[slot] = frame
        self.writable[slot] = writable

    def flush(self):
        self.valid[:] = False
        self.flushes += 1
        logger.debug('tlb flushed')


def tlb_lookup_or_fill(gva, access, tlb, root, mem):
    """ Translate through the TLB, walking and refilling on a miss

    Returns the same gpa (or raises the same PageFault) as page_walk.
    Faulting accesses never fill the TLB.

    Returns
    -------
    gpa : int
    hit : bool
    """
    cached = tlb.lookup(gva)
    if cached is not None:
        tlb.hits += 1
        frame, writable = cached
        if access == WRITE and not writable:
            raise PageFault(gva, access, PageFault.PROTECTION)
        return (frame << PAGE_SHIFT) | (gva & (PAGE_SIZE - 1)), True
    tlb.misses += 1
    gpa, writable = walk_entry(gva, access, root, mem)
    tlb.fill(gva, gpa >> PAGE_SHIFT, writable)
    return gpa, False
