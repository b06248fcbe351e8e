"""Morphological program synthesis for IPARC-style grid tasks."""

from .errors import (
    DegenerateProgramError,
    IncompleteRuleError,
    InvalidArgument,
    IparcError,
    ProgramSyntaxError,
    TaskSchemaError,
    TaskValidationError,
    UnresolvedSEError,
)
from .morphology import (
    BinaryBand,
    ColorRule,
    Image,
    SELibrary,
    StructuringElement,
    apply_color_rule,
    default_se_library,
    dilate,
    erode,
    hit_or_miss,
    load_se_library,
)
from .program import MorphProgram, parse_program, print_program, run_program
from .taskio import Category, Task, TaskPair, load_task, save_task, validate_task

__version__ = "0.1.0"
