"""Exceptions"""


class DbtError(Exception):
    """Base class for every error raised by syncdbt"""


# Assembler / decoder

class AsmSyntaxError(DbtError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = 'line %s: ' % line if line is not None else ''
        super(AsmSyntaxError, self).__init__(prefix + message)


class UnknownMnemonic(AsmSyntaxError):
    def __init__(self, mnemonic, line=None):
        self.mnemonic = mnemonic
        super(UnknownMnemonic, self).__init__('unknown mnemonic %r' % mnemonic, line)


class UnresolvedLabel(AsmSyntaxError):
    def __init__(self, label, line=None):
        self.label = label
        super(UnresolvedLabel, self).__init__('unresolved label %r' % label, line)


class DecodeError(DbtError):
    def __init__(self, addr):
        self.addr = addr
        super(DecodeError, self).__init__('no instruction at 0x%x' % addr)


# Guest faults. These are delivered to guest vectors, not propagated.

class GuestFault(DbtError):
    """Architectural exception raised while executing a guest instruction"""
    vector_name = None


class PageFault(GuestFault):
    NOT_MAPPED = 'NotMapped'
    PROTECTION = 'Protection'

    vector_name = 'page_fault'

    def __init__(self, gva, access, kind):
        self.gva = gva
        self.access = access
        self.kind = kind
        super(PageFault, self).__init__('%s page fault at 0x%x (%s)' % (kind, gva, access))

    def __eq__(self, other):
        return isinstance(other, PageFault) and \
            (self.gva, self.access, self.kind) == (other.gva, other.access, other.kind)

    def __hash__(self):
        return hash((self.gva, self.access, self.kind))


class PrivilegeFault(GuestFault):
    vector_name = 'privilege'

    def __init__(self, addr, mnemonic):
        self.addr = addr
        self.mnemonic = mnemonic
        super(PrivilegeFault, self).__init__('%s at 0x%x requires privileged mode' % (mnemonic, addr))


class UndefinedInstruction(GuestFault):
    vector_name = 'undefined'

    def __init__(self, addr):
        self.addr = addr
        super(UndefinedInstruction, self).__init__('undefined instruction at 0x%x' % addr)


class UnconfiguredVector(DbtError):
    def __init__(self, vector):
        self.vector = vector
        super(UnconfiguredVector, self).__init__('no handler configured for vector %r' % (vector,))


# Runtime

class FuelExhausted(DbtError):
    """Fuel ran out before the guest halted. Carries the partial result."""

    def __init__(self, retired, result=None):
        self.retired = retired
        self.result = result
        super(FuelExhausted, self).__init__('fuel exhausted after %d guest instructions' % retired)


class HostFault(DbtError):
    """Malformed host code. Always a translator bug."""

    def __init__(self, index, instr, reason):
        self.index = index
        self.instr = instr
        super(HostFault, self).__init__('host fault at %d (%s): %s' % (index, instr, reason))


class RegisterMapError(DbtError):
    """Host registers disagree with the lockstep reference at a block boundary"""

    def __init__(self, retired, reg, host, expected):
        self.retired = retired
        self.reg = reg
        self.host = host
        self.expected = expected
        super(RegisterMapError, self).__init__('after %d guest instructions h%d = 0x%x, r%d should be 0x%x'
                                               % (retired, reg, host, reg, expected))


# Translator

class UnknownComponent(DbtError):
    def __init__(self, component):
        self.component = component
        super(UnknownComponent, self).__init__('unknown state component %r' % (component,))


class RuleFileError(DbtError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = 'rule file line %s: ' % line if line is not None else ''
        super(RuleFileError, self).__init__(prefix + message)


# Configuration / reporting

class WorkloadConfigError(DbtError):
    pass


class EmptyRun(DbtError):
    def __init__(self):
        super(EmptyRun, self).__init__('no guest instructions retired')


class ReportError(DbtError):
    pass
