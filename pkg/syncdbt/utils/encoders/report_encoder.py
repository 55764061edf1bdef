"""Report Encoder"""

import json
from enum import Enum
from fractions import Fraction

import numpy as np


class ReportEncoder(json.JSONEncoder):
    """Report Encoder

    Encode numpy scalars and arrays, exact ratios and enums as JSON.
    """

    def default(self, obj):
        """Override default encoder

        1D numpy arrays become JSON arrays, numpy scalars and Fractions
        become JSON numbers and enums their value.

        Parameters
        ----------
        obj : nd.array, np.generic, Fraction, Enum or other type
            Object to encode

        Returns
        -------
        json : str
            Encoded JSON blob
        """
        if isinstance(obj, np.ndarray):
            if obj.ndim != 1:
                raise TypeError('can only encode 1D arrays, got shape %s' % (obj.shape,))
            return obj.tolist()
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, (np.floating, Fraction)):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, Enum):
            return obj.value
        return super(ReportEncoder, self).default(obj)
