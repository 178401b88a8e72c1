"""N-soliton solutions of the Pohlmeyer-Lund-Regge equation and the space
curves they generate under the Lund-Regge flow."""

from .date import SolitonParams, ParamsError, determinants, fg_polynomials, solution_fields
from .curves import nsoliton_curve, sym_numeric
from .presets import PRESETS, get_preset

__version__ = "0.1.0"

__all__ = [
    "SolitonParams",
    "ParamsError",
    "determinants",
    "fg_polynomials",
    "solution_fields",
    "nsoliton_curve",
    "sym_numeric",
    "PRESETS",
    "get_preset",
]
