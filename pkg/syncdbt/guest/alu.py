"""ALU and condition-code semantics

Shared by the reference interpreter and the host machine. The host ALU's
flagged forms produce exactly the same NZCV as the guest's S forms.
"""

from .isa import WORD_MASK

N_BIT = 8
Z_BIT = 4
C_BIT = 2
V_BIT = 1


def pack_flags(n, z, c, v):
    return (N_BIT if n else 0) | (Z_BIT if z else 0) | (C_BIT if c else 0) | (V_BIT if v else 0)


def unpack_flags(nzcv):
    """ Split a packed NZCV value into its four bits

    Returns
    -------
    flags : dict
        Maps 'N', 'Z', 'C', 'V' to 0 or 1
    """
    return {
        'N': (nzcv >> 3) & 1,
        'Z': (nzcv >> 2) & 1,
        'C': (nzcv >> 1) & 1,
        'V': nzcv & 1,
    }


def _nz(result):
    return pack_flags(result >> 31, result == 0, False, False)


def add_with_flags(a, b):
    full = a + b
    result = full & WORD_MASK
    carry = full > WORD_MASK
    overflow = ((~(a ^ b)) & (a ^ result)) >> 31 & 1
    return result, pack_flags(result >> 31, result == 0, carry, overflow)


def sub_with_flags(a, b):
    """a - b. C is set when no borrow occurs."""
    result = (a - b) & WORD_MASK
    carry = a >= b
    overflow = ((a ^ b) & (a ^ result)) >> 31 & 1
    return result, pack_flags(result >> 31, result == 0, carry, overflow)


def shift_left(a, amount):
    amount &= 0xFF
    if amount >= 32:
        return 0
    return (a << amount) & WORD_MASK


def shift_right(a, amount):
    amount &= 0xFF
    if amount >= 32:
        return 0
    return a >> amount


_PLAIN = {
    'and': lambda a, b: a & b,
    'orr': lambda a, b: a | b,
    'eor': lambda a, b: a ^ b,
    'lsl': shift_left,
    'lsr': shift_right,
    'mov': lambda a, b: b,
    'mvn': lambda a, b: ~b & WORD_MASK,
}


def evaluate(op, a, b, set_flags=False, nzcv=0):
    """ Compute a data-processing operation

    Parameters
    ----------
    op : str
        Guest ALU mnemonic (add, sub, and, orr, eor, lsl, lsr, mov, mvn)
    a, b : int
        32-bit operands. ``a`` is ignored by mov and mvn.
    set_flags : bool
        Whether the operation updates the condition codes
    nzcv : int
        Current condition codes, returned unchanged when set_flags is False

    Returns
    -------
    result : int
    nzcv : int
    """
    a &= WORD_MASK
    b &= WORD_MASK
    if op == 'add':
        result, flags = add_with_flags(a, b)
    elif op == 'sub':
        result, flags = sub_with_flags(a, b)
    elif op in _PLAIN:
        result = _PLAIN[op](a, b)
        flags = _nz(result)
    else:
        raise ValueError('not an ALU operation: %r' % op)
    return result, (flags if set_flags else nzcv)
