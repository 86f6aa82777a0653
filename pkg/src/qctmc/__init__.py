"""Exact STL model checking over quantum continuous-time Markov chains."""
from .errors import *  # noqa: F401,F403
from .exppoly import Bound, ExpPoly, Polynomial, RealExpPoly
from .io import load_model, open_quantum_walk
from .isolation import find_roots, isolate, solve_atomic
from .linops import Matrix, governing_matrix
from .model import Qctmc, from_ctmc, signal_table, state_at, validate_model
from .stl import check, mnt, parse

__all__ = [
    "Bound", "ExpPoly", "Polynomial", "RealExpPoly", "load_model", "open_quantum_walk", "find_roots",
    "isolate", "solve_atomic", "Matrix", "governing_matrix", "Qctmc", "from_ctmc", "signal_table",
    "state_at", "validate_model", "check", "mnt", "parse",
]
__version__ = "0.1.0"
