"""Physical memory and the two-level guest page table"""

import logging

import numpy as np

from ..errors import PageFault
from ..guest.isa import WORD_MASK

logger = logging.getLogger(__name__)

MEM_SIZE = 0x100000
PAGE_SHIFT = 12
PAGE_SIZE = 1 << PAGE_SHIFT
NUM_FRAMES = MEM_SIZE // PAGE_SIZE

PT_ROOT = 0xF0000
L2_BASE = 0xF1000

PTE_VALID = 1
PTE_WRITABLE = 2

READ = 'Read'
WRITE = 'Write'
EXEC = 'Exec'


class PhysicalMemory(object):
    """Byte-addressed guest physical memory backed by a numpy array"""

    def __init__(self, size=MEM_SIZE):
        self.bytes = np.zeros(size, dtype=np.uint8)

    def __len__(self):
        return len(self.bytes)

    def load_image(self, image):
        """ Copy an address -> byte image into memory

        Parameters
        ----------
        image : dict
        """
        for addr, value in image.items():
            self.bytes[addr] = value

    def read_word(self, gpa):
        return int(self.bytes[gpa:gpa + 4].view('<u4')[0])

    def write_word(self, gpa, value):
        self.bytes[gpa:gpa + 4] = np.array([value & WORD_MASK], dtype='<u4').view(np.uint8)

    def copy(self):
        other = PhysicalMemory(len(self.bytes))
        other.bytes[:] = self.bytes
        return other


def l1_index(gva):
    return (gva >> 22) & 0x3FF


def l2_index(gva):
    return (gva >> PAGE_SHIFT) & 0x3FF


class PageTable(object):
    """ Builder for a two-level page table living in guest physical memory

    Entry format: bit 0 valid, bit 1 writable, bits 12 and up the frame.
    The root table sits at PT_ROOT and second-level tables are allocated
    upward from L2_BASE.

    Parameters
    ----------
    mem : PhysicalMemory
    root : int
        Physical address of the first-level table
    """

    def __init__(self, mem, root=PT_ROOT):
        self.mem = mem
        self.root = root
        self._next_l2 = L2_BASE

    def _l2_table(self, gva):
        entry_addr = self.root + 4 * l1_index(gva)
        entry = self.mem.read_word(entry_addr)
        if entry & PTE_VALID:
            return entry & ~0xFFF & WORD_MASK
        table = self._next_l2
        if table + PAGE_SIZE > len(self.mem):
            raise ValueError('out of page-table space')
        self._next_l2 += PAGE_SIZE
        self.mem.write_word(entry_addr, table | PTE_VALID)
        return table

    def map(self, page, frame, writable=True):
        """ Map the page containing ``page`` onto physical ``frame``

        Parameters
        ----------
        page : int
            Guest virtual address inside the page
        frame : int
            Physical frame number
        writable : bool
        """
        if not 0 <= frame < len(self.mem) // PAGE_SIZE:
            raise ValueError('frame %d outside physical memory' % frame)
        table = self._l2_table(page)
        entry = (frame << PAGE_SHIFT) | PTE_VALID | (PTE_WRITABLE if writable else 0)
        self.mem.write_word(table + 4 * l2_index(page), entry)

    def unmap(self, page):
        entry_addr = self.root + 4 * l1_index(page)
        entry = self.mem.read_word(entry_addr)
        if entry & PTE_VALID:
            table = entry & ~0xFFF & WORD_MASK
            self.mem.write_word(table + 4 * l2_index(page), 0)

    def table_frames(self):
        """Frames holding the root and every second-level table allocated so far"""
        return [self.root >> PAGE_SHIFT] + list(range(L2_BASE >> PAGE_SHIFT, self._next_l2 >> PAGE_SHIFT))

    def identity(self, pages=NUM_FRAMES):
        """Map the first ``pages`` frames onto themselves, the table frames read-only"""
        for frame in range(pages):
            self.map(frame << PAGE_SHIFT, frame)
        for frame in self.table_frames():
            if frame < pages:
                self.map(frame << PAGE_SHIFT, frame, writable=False)
        return self


def page_walk(gva, access, root, mem):
    """ Translate a guest virtual address by walking the page table

    Parameters
    ----------
    gva : int
        Guest virtual address
    access : str
        READ, WRITE or EXEC
    root : int
        Physical address of the first-level table
    mem : PhysicalMemory

    Returns
    -------
    gpa : int
        Guest physical address

    Raises
    ------
    PageFault
        NotMapped when either entry is invalid, Protection on a write to a
        read-only page
    """
    gpa, _ = walk_entry(gva, access, root, mem)
    return gpa


def walk_entry(gva, access, root, mem):
    """Like page_walk, also returning whether the page is writable"""
    gva &= WORD_MASK
    l1 = mem.read_word(root + 4 * l1_index(gva))
    if not l1 & PTE_VALID:
        raise PageFault(gva, access, PageFault.NOT_MAPPED)
    table = l1 & ~0xFFF & WORD_MASK
    l2 = mem.read_word(table + 4 * l2_index(gva))
    if not l2 & PTE_VALID:
        raise PageFault(gva, access, PageFault.NOT_MAPPED)
    writable = bool(l2 & PTE_WRITABLE)
    if access == WRITE and not writable:
        raise PageFault(gva, access, PageFault.PROTECTION)
    frame = l2 >> PAGE_SHIFT
    gpa = (frame << PAGE_SHIFT) | (gva & (PAGE_SIZE - 1))
    if gpa + 4 > len(mem):
        raise PageFault(gva, access, PageFault.NOT_MAPPED)
    return gpa, writable
