"""Regular matrix pencils, their index, and linear DAEs ``d/dt Ex = Ax``.

Finite-dimensional pencils are analyzed through the bounded operator
``T_mu = (mu E - A)^{-1} E``; a separate lab treats ``d/dt Tx = x`` for
quasi-nilpotent ``T`` on discretized function spaces.
"""

from .errors import (CoefficientOverflow, ContourTouchesSpectrum, IllConditionedSplit,
                     Infeasible, MuInsideContour, NotFiniteIndex, NotInRange, NotRegular,
                     NotSquareSummable, PencilError, PoleAtMu, SpectrumHit, ToleranceAmbiguous)
from .expm import expm
from .pencil import (BoundedReduction, OperatorPart, RegularPencil, certify_regular,
                     finite_eigenvalues, operator_part, reduce_to_bounded, resolvent, tau)
from .projection import (Contour, SpectralProjector, project_operator_form, project_pencil_form,
                         riesz_at_zero)
from .qnlab import (FourierSolution, QNModel, TaylorSolution, l2_fourier_solve, linf_condition,
                    make_volterra, semigroup_solution_check, shift_semigroup, taylor_solve,
                    volterra_norm_asymptotic)
from .subspace import Subspace
from .weierstrass import Trajectory, WeierstrassDecomposition, decouple, solve_ivp
from .wong import (IndexConfig, IndexReport, index_by_ascent_descent, index_by_growth,
                   index_report, wong_ladder)

__version__ = "0.1.0"
