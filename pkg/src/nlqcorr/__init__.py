"""Two-time correlation protocols for linear and nonlinear qubit-pair dynamics.

Library plus experiment CLI: dense few-qubit linear algebra (``qstate``),
Hamiltonian functions of density matrices and their switched multiparticle
extensions (``hamfun``), fixed-step and closed-form evolution (``dynamics``),
the switching-function and Zeno-projection measurement protocols
(``protocols``), beams of pairs (``beams``), generalized entropies and
Kolmogorov-Nagumo averages (``entropy``), and the ``nlqcorr`` command line
(``cli``).
"""

from . import beams, dynamics, entropy, hamfun, protocols, qstate
from ._backend import USING_NUMBA, backend_name
from ._version import __version__

__all__ = [
    "__version__",
    "USING_NUMBA",
    "backend_name",
    "beams",
    "dynamics",
    "entropy",
    "hamfun",
    "protocols",
    "qstate",
]
