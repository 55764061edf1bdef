"""Page Walk and TLB Unit Tests"""

import numpy as np
import pytest

from syncdbt.errors import PageFault
from syncdbt.machine import PhysicalMemory, PageTable, Tlb, page_walk, tlb_lookup_or_fill, READ, WRITE
from syncdbt.machine.memory import L2_BASE, PT_ROOT


def identity_memory():
    mem = PhysicalMemory()
    PageTable(mem).identity()
    return mem


class TestPhysicalMemory(object):

    def test_little_endian_words(self):
        mem = PhysicalMemory()
        mem.write_word(0x100, 0x11223344)
        assert list(mem.bytes[0x100:0x104]) == [0x44, 0x33, 0x22, 0x11]
        assert mem.read_word(0x100) == 0x11223344


class TestPageWalk(object):

    def test_identity(self):
        assert page_walk(0x1000, READ, PT_ROOT, identity_memory()) == 0x1000

    def test_unmapped(self):
        with pytest.raises(PageFault) as err:
            page_walk(0xDEAD0000, READ, PT_ROOT, identity_memory())
        assert err.value.kind == PageFault.NOT_MAPPED
        assert err.value.gva == 0xDEAD0000
        assert err.value.access == READ

    def test_hand_built_mapping(self):
        mem = PhysicalMemory()
        PageTable(mem).map(0x40000, 7)
        # manual two-level walk
        l1 = mem.read_word(PT_ROOT + 4 * (0x40010 >> 22))
        l2 = mem.read_word((l1 & ~0xFFF) + 4 * ((0x40010 >> 12) & 0x3FF))
        assert (l2 >> 12) == 7
        assert page_walk(0x40010, READ, PT_ROOT, mem) == 0x7010

    def test_write_to_read_only(self):
        mem = PhysicalMemory()
        PageTable(mem).map(0x5000, 5, writable=False)
        assert page_walk(0x5004, READ, PT_ROOT, mem) == 0x5004
        with pytest.raises(PageFault) as err:
            page_walk(0x5004, WRITE, PT_ROOT, mem)
        assert err.value.kind == PageFault.PROTECTION

    def test_identity_protects_page_table(self):
        mem = identity_memory()
        assert page_walk(PT_ROOT + 8, READ, PT_ROOT, mem) == PT_ROOT + 8
        for gva in (PT_ROOT, L2_BASE + 0x40):
            with pytest.raises(PageFault) as err:
                page_walk(gva, WRITE, PT_ROOT, mem)
            assert err.value.kind == PageFault.PROTECTION
        assert page_walk(PT_ROOT - 4, WRITE, PT_ROOT, mem) == PT_ROOT - 4

    def test_second_level_hole(self):
        mem = PhysicalMemory()
        PageTable(mem).map(0x3000, 3)
        with pytest.raises(PageFault):
            page_walk(0x4000, READ, PT_ROOT, mem)


class TestTlb(object):

    def test_second_lookup_hits(self):
        mem, tlb = identity_memory(), Tlb()
        first = tlb_lookup_or_fill(0x2040, READ, tlb, PT_ROOT, mem)
        second = tlb_lookup_or_fill(0x2080, READ, tlb, PT_ROOT, mem)
        assert first == (0x2040, False)
        assert second == (0x2080, True)
        assert (tlb.hits, tlb.misses) == (1, 1)

    def test_flush_forces_refill(self):
        mem, tlb = identity_memory(), Tlb()
        tlb_lookup_or_fill(0x2040, READ, tlb, PT_ROOT, mem)
        tlb.flush()
        assert tlb_lookup_or_fill(0x2040, READ, tlb, PT_ROOT, mem) == (0x2040, False)
        assert tlb_lookup_or_fill(0x2040, READ, tlb, PT_ROOT, mem) == (0x2040, True)

    def test_faults_never_fill(self):
        mem, tlb = PhysicalMemory(), Tlb()
        PageTable(mem).map(0x1000, 9)
        with pytest.raises(PageFault):
            tlb_lookup_or_fill(0x8000, READ, tlb, PT_ROOT, mem)
        assert not tlb.valid.any()

    def test_protection_on_hit(self):
        mem, tlb = PhysicalMemory(), Tlb()
        PageTable(mem).map(0x1000, 9, writable=False)
        tlb_lookup_or_fill(0x1000, READ, tlb, PT_ROOT, mem)
        with pytest.raises(PageFault) as err:
            tlb_lookup_or_fill(0x1000, WRITE, tlb, PT_ROOT, mem)
        assert err.value.kind == PageFault.PROTECTION

    def test_random_stream_matches_walk(self):
        mem, tlb = PhysicalMemory(), Tlb()
        table = PageTable(mem)
        rng = np.random.RandomState(7)
        pages = rng.choice(200, size=40, replace=False)
        for page in pages:
            table.map(int(page) << 12, int(rng.randint(0, 200)), bool(rng.randint(2)))
        for _ in range(2000):
            gva = int(rng.randint(0, 256)) << 12 | int(rng.randint(0, 1024)) * 4
            access = (READ, WRITE)[rng.randint(2)]
            try:
                expected = page_walk(gva, access, PT_ROOT, mem)
            except PageFault as fault:
                with pytest.raises(PageFault) as err:
                    tlb_lookup_or_fill(gva, access, tlb, PT_ROOT, mem)
                assert err.value == fault
                continue
            assert tlb_lookup_or_fill(gva, access, tlb, PT_ROOT, mem)[0] == expected
        assert tlb.hits > 0 and tlb.misses > 0
