"""Propositional logic programs elicited from LLMs, and inference over them."""

__version__ = "0.1.0"

from .clauses import (Atom, DualHornClause, HornClause, Kind, Model, Program, ProgramError,
                      Status, SymbolTable, load_json_program, parse_program, serialize_program)
from .dual import contrapose, falsify
from .fixpoint import SolverOptions, minimal_model, prove
from .matrix import decode, encode, matrix_model, tp_fix, tp_step

__all__ = [
    "Atom", "DualHornClause", "HornClause", "Kind", "Model", "Program", "ProgramError",
    "SolverOptions", "Status", "SymbolTable", "contrapose", "decode", "encode", "falsify",
    "load_json_program", "matrix_model", "minimal_model", "parse_program", "prove",
    "serialize_program", "tp_fix", "tp_step",
]
