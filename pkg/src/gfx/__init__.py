"""Guarded fixpoint logic workbench."""
from .logic import Signature, parse_formula, to_text, validate_guarded, nnf, width
from .structures import Structure, parse_structure, make_structure, evaluate
from .games import ParityGame, solve, brute_solve
from .compiler import compile
from .automata import accepts
from .finsat import finsat_bounded

__all__ = ["Signature", "parse_formula", "to_text", "validate_guarded", "nnf", "width",
           "Structure", "parse_structure", "make_structure", "evaluate", "ParityGame",
           "solve", "brute_solve", "compile", "accepts", "finsat_bounded"]
