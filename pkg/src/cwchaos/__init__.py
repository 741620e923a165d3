"""Complex Gaussian chaos toolkit.

Exact Wirtinger-calculus polynomial algebra over complex Gaussian measures,
the complex Ornstein-Uhlenbeck generator and its carre du champ, Stein-type
solvers, fourth-moment distance bounds to complex normal laws, and empirical
Wasserstein cross-checks.
"""

__version__ = "0.1.0"

from .cpoly import CWPoly, RationalComplex
from .hermite import HermiteExpansion, hermite_poly, phi_basis_element, to_hermite
from .ou import ChaoticVector, Eigenfunction, apply_L, apply_L_inverse, gamma
from .cgauss import GaussianSpec, char_fn, density, sample
from .bounds import BoundReport, MomentSummary, gamma_bound_exact, moment_bound
from .transport import TransportProblem, estimate_dw, w1_exact, w1_sinkhorn

__all__ = [
    "__version__",
    "CWPoly",
    "RationalComplex",
    "HermiteExpansion",
    "hermite_poly",
    "phi_basis_element",
    "to_hermite",
    "ChaoticVector",
    "Eigenfunction",
    "apply_L",
    "apply_L_inverse",
    "gamma",
    "GaussianSpec",
    "char_fn",
    "density",
    "sample",
    "BoundReport",
    "MomentSummary",
    "gamma_bound_exact",
    "moment_bound",
    "TransportProblem",
    "estimate_dw",
    "w1_exact",
    "w1_sinkhorn",
]
