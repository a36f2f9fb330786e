"""Generalized Moreau enhanced minimization-induced (GME-MI) penalties.

Seed functions define convex penalties by partial minimization; subtracting
a generalized Moreau envelope makes them nonconvex while the total
least-squares cost stays convex. The package builds such models, checks the
convexity condition and solves them with a proximal splitting method.

``BACKEND`` names the kernel implementation in use (``"cython"`` or
``"python"``).
"""

from ._backend import BACKEND
from .design import *  # noqa: F401,F403
from .design import __all__ as _design_all
from .linalg import *  # noqa: F401,F403
from .linalg import __all__ as _linalg_all
from .prox import *  # noqa: F401,F403
from .prox import __all__ as _prox_all
from .seeds import *  # noqa: F401,F403
from .seeds import __all__ as _seeds_all
from .solver import *  # noqa: F401,F403
from .solver import __all__ as _solver_all

__version__ = "0.1.0"

__all__ = ["BACKEND", *_linalg_all, *_prox_all, *_seeds_all, *_design_all, *_solver_all]
