"""GR(1) reactive synthesis toolchain.

Pipeline: parse a `.gr1spec` document, typecheck it, expand defines,
compile past operators and pattern instances into monitor variables,
build the symbolic game, decide realizability, and extract a controller
or counter-strategy with traceability annotations.
"""

__version__ = "0.1.0"

from .parser import ParseError, SpecError, parse, parse_file
from .syntax import Constraint, Kind, Owner, Side, SpecDocument
from .typecheck import TypeCheckError, expand_defines, typecheck

__all__ = [
    "Constraint",
    "Kind",
    "Owner",
    "ParseError",
    "Side",
    "SpecDocument",
    "SpecError",
    "TypeCheckError",
    "expand_defines",
    "parse",
    "parse_file",
    "typecheck",
    "__version__",
]
