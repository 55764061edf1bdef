"""Report Encoder Unit Tests"""

from fractions import Fraction

import numpy as np
import pytest

from syncdbt.optimize import OptLevel
from syncdbt.translate import SyncCause
from syncdbt.utils.encoders import ReportEncoder


class TestReportEncoder(object):
    """Report Encoder Unit Tests"""

    def test_np_1d_array(self):
        blob = ReportEncoder().encode(np.array([1, 2, 3]))
        assert blob == '[1, 2, 3]'

    def test_np_scalars(self):
        assert ReportEncoder().encode(np.float64(1.0)) == '1.0'
        assert ReportEncoder().encode(np.int64(7)) == '7'
        assert ReportEncoder().encode(np.bool_(True)) == 'true'

    def test_fraction(self):
        assert ReportEncoder().encode(Fraction(1, 4)) == '0.25'

    def test_enums(self):
        assert ReportEncoder().encode([SyncCause.MEMORY_ACCESS, OptLevel.ELIMINATION]) == '["MemoryAccess", 2]'

    def test_2d_array(self):
        with pytest.raises(TypeError):
            ReportEncoder().encode(np.zeros((2, 2)))

    def test_non_np(self):
        blob = ReportEncoder().encode([1, 2, 3])
        assert blob == '[1, 2, 3]'
