"""Translation rules

A rule pairs a parameterized guest pattern (one or more instructions) with a
parameterized host template. Rule files are plain text::

    # comment
    rule alu_rrr
    guest: %aluop %Rd, %Rn, %Rm
    host:  %aluop %Rd, %Rn, %Rm

    rule alu_rrr_cond constrained
    guest: %aluop%cond %Rd, %Rn, %Rm
    host:  %condtest
    host:  hjcc ne, 1
    host:  %aluop %Rd, %Rn, %Rm

Placeholders: ``%R<name>`` binds a guest register r0-r11 (host register of the
same number), ``%imm`` an immediate, ``%aluop`` the ALU family, ``%cond`` a
condition (``%ncond`` is its inverse in templates). ``%condtest`` expands to
the host compare that evaluates ``%cond`` from the live flags; it clobbers the
host flags, so rules using it are constrained.
"""

import logging
import os
import re
from collections import namedtuple
from dataclasses import dataclass

from ..errors import RuleFileError
from ..guest.isa import ALU_OPS, MOVE_OPS, Category, Condition, Imm, Reg, FLAG_SETTING_OPS
from .ops import GUEST_TO_HOST_ALU, MAPPED_REGS, parse_host_line

logger = logging.getLogger(__name__)

STARTER_RULES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'data', 'starter.rules')

PATTERN_MNEMONICS = frozenset(ALU_OPS + MOVE_OPS + ('cmp',))
FLAG_WRITERS = ('hcmp', 'hreg2flags')

PReg = namedtuple('PReg', ['name'])
PImm = namedtuple('PImm', ['name'])

_MNEMONIC = re.compile(r'^(?P<base>%aluop|[a-z]+?)(?P<cond>%cond|eq|ne|ge|lt)?(?P<s>s)?$')
_PLACEHOLDER = re.compile(r'%([A-Za-z][A-Za-z0-9]*)')

_CONDTEST = {
    Condition.EQ: ['hflags2reg h15', 'hflagext h14, h15, Z', 'hcmp h14, #1'],
    Condition.NE: ['hflags2reg h15', 'hflagext h14, h15, Z', 'hcmp h14, #0'],
    Condition.GE: ['hflags2reg h15', 'hflagext h14, h15, N', 'hflagext h13, h15, V', 'hxor h14, h14, h13',
                   'hcmp h14, #0'],
    Condition.LT: ['hflags2reg h15', 'hflagext h14, h15, N', 'hflagext h13, h15, V', 'hxor h14, h14, h13',
                   'hcmp h14, #1'],
}


def condtest(cond):
    """Host lines leaving host Z set exactly when ``cond`` holds on the current flags"""
    return list(_CONDTEST[cond])


@dataclass(frozen=True)
class PatternInstr(object):
    base: str
    cond: object
    sets_flags: bool
    operands: tuple

    def placeholders(self):
        names = set(op.name for op in self.operands if isinstance(op, (PReg, PImm)))
        if self.base == '%aluop':
            names.add('aluop')
        if self.cond == '%cond':
            names.add('cond')
        return names

    @property
    def defines_flags(self):
        return self.sets_flags or self.base == 'cmp'


@dataclass(frozen=True)
class TranslationRule(object):
    """ One guest pattern and its host template

    Attributes
    ----------
    name : str
    pattern : tuple of PatternInstr
    template : tuple of str
        Host lines with placeholders
    constrained : bool
    order : int
        Position in the rule file, breaks ties between equally long matches
    """
    name: str
    pattern: tuple
    template: tuple
    constrained: bool = False
    order: int = 0

    def __len__(self):
        return len(self.pattern)


@dataclass(frozen=True)
class Binding(object):
    """ A rule matched at a guest address

    ``values`` maps placeholder names to register numbers, immediates, the
    guest ALU mnemonic or a Condition.
    """
    rule: TranslationRule
    values: dict
    instrs: tuple

    @property
    def span(self):
        """(first guest address, instruction count)"""
        return (self.instrs[0].addr if self.instrs else None), len(self.instrs)

    def substitute(self):
        """ Concrete host code for the match

        Returns
        -------
        prelude : tuple of HostInstr
            The expanded %condtest, if any
        body : tuple of HostInstr
        """
        prelude, body = [], []
        for line in self.rule.template:
            if line.strip() == '%condtest':
                prelude.extend(parse_host_line(text) for text in condtest(self.values['cond']))
            else:
                body.append(parse_host_line(_fill(line, self.values)))
        return tuple(prelude), tuple(body)


def _fill(line, values):
    def replace(match):
        name = match.group(1)
        if name == 'aluop':
            return GUEST_TO_HOST_ALU[values['aluop']]
        if name == 'cond':
            return values['cond'].value
        if name == 'ncond':
            return values['cond'].inverse().value
        if name.startswith('R'):
            return 'h%d' % values[name]
        if name.startswith('imm'):
            return '#0x%x' % values[name]
        raise KeyError(name)
    return _PLACEHOLDER.sub(replace, line)


# Parsing

def _parse_pattern_operand(text, line):
    text = text.strip()
    if text.startswith('%R'):
        return PReg(text[1:])
    if text.startswith('%imm'):
        return PImm(text[1:])
    if text.startswith('#'):
        try:
            return Imm(int(text[1:], 0) & 0xFFFFFFFF)
        except ValueError:
            pass
    raise RuleFileError('bad pattern operand %r' % text, line)


def parse_pattern_line(text, line=None):
    """ Parse one ``guest:`` line

    Returns
    -------
    pattern : PatternInstr
    """
    token, _, rest = text.strip().partition(' ')
    match = _MNEMONIC.match(token)
    if match is None:
        raise RuleFileError('bad pattern mnemonic %r' % token, line)
    base, cond, s = match.group('base'), match.group('cond'), bool(match.group('s'))
    if base != '%aluop' and base not in PATTERN_MNEMONICS:
        raise RuleFileError('%r cannot be covered by a rule' % token, line)
    if s and base not in FLAG_SETTING_OPS and base != '%aluop':
        raise RuleFileError('%r does not take the s suffix' % token, line)
    if cond is not None and cond != '%cond':
        cond = Condition(cond)
    operands = tuple(_parse_pattern_operand(op, line) for op in rest.split(',')) if rest.strip() else ()
    expected = 2 if base in MOVE_OPS or base == 'cmp' else 3
    if len(operands) != expected:
        raise RuleFileError('%r takes %d operands' % (token, expected), line)
    return PatternInstr(base, cond, s, operands)


def _check_rule(rule, line):
    bound = set()
    for p in rule.pattern:
        bound |= p.placeholders()
    used = set()
    for text in rule.template:
        if text.strip() == '%condtest':
            used.add('cond')
            continue
        for name in _PLACEHOLDER.findall(text):
            used.add('cond' if name == 'ncond' else name)
    unbound = used - bound
    if unbound:
        raise RuleFileError('rule %s: template placeholders %s not bound by the pattern'
                            % (rule.name, ', '.join('%' + n for n in sorted(unbound))), line)

    # concrete instance to validate host syntax and flag effects
    sample = dict((name, 0) for name in bound)
    sample.update((k, v) for k, v in (('aluop', 'add'), ('cond', Condition.EQ)) if k in bound)
    try:
        prelude, body = Binding(rule, sample, ()).substitute()
    except ValueError as err:
        raise RuleFileError('rule %s: %s' % (rule.name, err), line)

    writes_flags = any(i.op in FLAG_WRITERS or i.op.endswith('.f') for i in prelude + body)
    if rule.constrained and not writes_flags:
        raise RuleFileError('rule %s is marked constrained but never writes host flags' % rule.name, line)
    if not rule.constrained:
        if prelude:
            raise RuleFileError('rule %s uses %%condtest and must be constrained' % rule.name, line)
        if writes_flags and not any(p.defines_flags for p in rule.pattern):
            raise RuleFileError('rule %s writes host flags the guest pattern never defines' % rule.name, line)


def parse_rules(text):
    """ Parse a rule file

    Parameters
    ----------
    text : str

    Returns
    -------
    ruleset : RuleSet
    """
    rules = []
    current = None

    def close():
        if current is None:
            return
        name, constrained, pattern, template, line = current
        if not pattern or not template:
            raise RuleFileError('rule %s needs guest and host lines' % name, line)
        rule = TranslationRule(name, tuple(pattern), tuple(template), constrained, len(rules))
        _check_rule(rule, line)
        rules.append(rule)

    for lineno, raw in enumerate(text.splitlines(), 1):
        # '#' also marks immediates, so only whole lines starting with it are comments
        stripped = raw.split(';', 1)[0].strip()
        if not stripped or stripped.startswith('#'):
            continue
        if stripped.startswith('rule '):
            close()
            words = stripped.split()
            if len(words) > 3 or (len(words) == 3 and words[2] != 'constrained'):
                raise RuleFileError('bad rule header %r' % stripped, lineno)
            if any(r.name == words[1] for r in rules):
                raise RuleFileError('duplicate rule %s' % words[1], lineno)
            current = (words[1], len(words) == 3, [], [], lineno)
        elif current is None:
            raise RuleFileError('%r outside a rule' % stripped, lineno)
        elif stripped.startswith('guest:'):
            current[2].append(parse_pattern_line(stripped[len('guest:'):], lineno))
        elif stripped.startswith('host:'):
            current[3].append(stripped[len('host:'):].strip())
        else:
            raise RuleFileError('expected guest: or host:, got %r' % stripped, lineno)
    close()
    logger.debug('parsed %d translation rules', len(rules))
    return RuleSet(rules)


def load_ruleset(path=None):
    """Load a rule file, the bundled starter rules by default"""
    path = path or STARTER_RULES
    try:
        with open(path) as f:
            return parse_rules(f.read())
    except OSError as err:
        raise RuleFileError('cannot read %s: %s' % (path, err))


# Matching

def _bind(pattern, instr, values):
    if instr.category is not Category.RULE_ELIGIBLE:
        return False
    m = instr.mnemonic
    if pattern.base == '%aluop':
        if m not in ALU_OPS or values.setdefault('aluop', m) != m:
            return False
    elif pattern.base != m:
        return False
    if m in FLAG_SETTING_OPS and pattern.sets_flags != instr.sets_flags:
        return False
    if pattern.cond is None:
        if instr.cond is not Condition.AL:
            return False
    elif pattern.cond == '%cond':
        if instr.cond is Condition.AL or values.setdefault('cond', instr.cond) is not instr.cond:
            return False
    elif pattern.cond is not instr.cond:
        return False
    if len(pattern.operands) != len(instr.operands):
        return False
    for p, op in zip(pattern.operands, instr.operands):
        if isinstance(p, PReg):
            if not isinstance(op, Reg) or op.n >= MAPPED_REGS or values.setdefault(p.name, op.n) != op.n:
                return False
        elif isinstance(p, PImm):
            if not isinstance(op, Imm) or values.setdefault(p.name, op.value) != op.value:
                return False
        elif p != op:
            return False
    return True


def match_at(rule, instrs):
    """Binding of ``rule`` against the start of ``instrs``, or None"""
    if len(rule.pattern) > len(instrs):
        return None
    values = {}
    for pattern, instr in zip(rule.pattern, instrs):
        if not _bind(pattern, instr, values):
            return None
    return Binding(rule, values, tuple(instrs[:len(rule.pattern)]))


class RuleSet(object):
    """ Ordered collection of translation rules

    Parameters
    ----------
    rules : list of TranslationRule
    """

    def __init__(self, rules):
        self.rules = list(rules)

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __getitem__(self, name):
        for rule in self.rules:
            if rule.name == name:
                return rule
        raise KeyError(name)

    def match(self, instrs):
        return match_rule(instrs, self)


def match_rule(instrs, ruleset):
    """ Find the rule translating the start of a TB slice

    Parameters
    ----------
    instrs : sequence of GuestInstr
        Non-empty
    ruleset : RuleSet

    Returns
    -------
    binding : Binding or None
        The longest matching pattern, earliest rule on ties. None means no
        rule applies and the caller falls back to baseline emission.
    """
    if not instrs:
        raise ValueError('cannot match an empty slice')
    best = None
    for rule in ruleset:
        binding = match_at(rule, instrs)
        if binding is not None and (best is None or len(rule) > len(best.rule)):
            best = binding
    return best
