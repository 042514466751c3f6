"""Controlled spin networks: simulation, odd-even Cartan splits and input-output equivalence."""

__version__ = "0.1.0"

from .cartan import Involution, odd_even_split, verify_theorem_1_2
from .dynamics import ControlSchedule, propagate, two_level_model
from .equivalence import Verdict, cartan_partner, condition_star_decide, falsify_by_simulation, two_level_decide
from .network import build

__all__ = [
    "__version__",
    "ControlSchedule",
    "Involution",
    "Verdict",
    "build",
    "cartan_partner",
    "condition_star_decide",
    "falsify_by_simulation",
    "odd_even_split",
    "propagate",
    "two_level_decide",
    "two_level_model",
    "verify_theorem_1_2",
]
