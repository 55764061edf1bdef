"""Workload configuration

A workload is a TOML file naming the guest program and describing the
machine it boots on::

    program = "alu-loop.s"
    fuel = 20000
    page_table = "identity"
    interrupts = [{count = 50, vector = "timer"}]
    [handlers]
    timer = 0x8000
"""

import json
import logging
import os
import tomllib
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..errors import WorkloadConfigError
from ..guest.asm import parse_guest_asm
from ..guest.isa import NUM_REGS
from .memory import NUM_FRAMES

logger = logging.getLogger(__name__)

FAULT_VECTORS = ('page_fault', 'privilege', 'undefined', 'svc')


class MappingEntry(BaseModel):
    model_config = ConfigDict(extra='forbid')

    page: int = Field(..., ge=0, le=0xFFFFFFFF)
    frame: int = Field(..., ge=0, lt=NUM_FRAMES)
    writable: bool = True


class InterruptEntry(BaseModel):
    model_config = ConfigDict(extra='forbid')

    count: int = Field(..., ge=0)
    vector: str = 'timer'


class WorkloadConfig(BaseModel):
    """Validated workload description"""
    model_config = ConfigDict(extra='forbid')

    name: str = ''
    program: str
    page_table: Union[Literal['identity'], List[MappingEntry]] = 'identity'
    identity_pages: int = Field(NUM_FRAMES, ge=0, le=NUM_FRAMES)
    interrupts: List[InterruptEntry] = []
    handlers: Dict[str, int] = {}
    fuel: int = Field(100000, ge=0)
    registers: Dict[str, int] = {}
    mode: Literal['User', 'Privileged'] = 'Privileged'
    expected: Optional[str] = None
    base_dir: str = ''

    @field_validator('handlers')
    @classmethod
    def _aligned_handlers(cls, handlers):
        for vector, addr in handlers.items():
            if addr % 4 or addr < 0:
                raise ValueError('handler for %r at 0x%x is not word aligned' % (vector, addr))
        return handlers

    @field_validator('registers')
    @classmethod
    def _known_registers(cls, registers):
        for name in registers:
            if name not in ['r%d' % i for i in range(NUM_REGS)]:
                raise ValueError('unknown register %r' % name)
        return registers

    @property
    def program_path(self):
        return os.path.join(self.base_dir, self.program)

    @property
    def expected_path(self):
        if self.expected is None:
            return None
        return os.path.join(self.base_dir, self.expected)

    @property
    def schedule(self):
        return [(entry.count, entry.vector) for entry in self.interrupts]

    def initial_registers(self):
        regs = [0] * NUM_REGS
        for name, value in self.registers.items():
            regs[int(name[1:])] = value & 0xFFFFFFFF
        return regs


def parse_workload(data, base_dir=''):
    """ Validate a workload mapping

    Parameters
    ----------
    data : dict
        Parsed TOML
    base_dir : str
        Directory relative paths are resolved against

    Returns
    -------
    config : WorkloadConfig
    """
    data = dict(data)
    data.setdefault('base_dir', base_dir)
    try:
        return WorkloadConfig(**data)
    except ValidationError as err:
        raise WorkloadConfigError(str(err))


def load_workload(path):
    """Read and validate a workload TOML file"""
    try:
        with open(path, 'rb') as f:
            data = tomllib.load(f)
    except OSError as err:
        raise WorkloadConfigError('cannot read %s: %s' % (path, err))
    except tomllib.TOMLDecodeError as err:
        raise WorkloadConfigError('%s: %s' % (path, err))
    data.setdefault('name', os.path.splitext(os.path.basename(path))[0])
    config = parse_workload(data, os.path.dirname(os.path.abspath(path)))
    logger.debug('loaded workload %s (program %s)', config.name, config.program_path)
    return config


def load_program(config):
    """Assemble the guest program a workload names"""
    try:
        with open(config.program_path) as f:
            text = f.read()
    except OSError as err:
        raise WorkloadConfigError('cannot read %s: %s' % (config.program_path, err))
    return parse_guest_asm(text)


def load_expected(config):
    """ Committed quiescent view of the workload's final state

    Returns
    -------
    view : dict or None
        None when the workload commits no expected state
    """
    path = config.expected_path
    if path is None:
        return None
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as err:
        raise WorkloadConfigError('cannot read %s: %s' % (path, err))
    except ValueError as err:
        raise WorkloadConfigError('%s: %s' % (path, err))
