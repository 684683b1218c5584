"""Green-function solver and blow-up diagnostics for ``-Lap u = V e^u`` on the unit disk."""

from .analytic import (EIGHT_PI, BubbleSum, DiskBubble, GelfandSolution, PlanarBubble,
                       b_from_sup, bubble_mass, bubble_u, gelfand_lambda, gelfand_mass,
                       gelfand_u, two_bubble)
from .blowup import (BlowupPoint, ExtractionReport, annulus_sup, extract_blowups,
                     li_shafrir_probe, local_mass, quantization_check)
from .exceptions import (ConfigurationError, DegenerateInputError, DomainError, FoldError,
                         LiouvilleError, NonConvergenceError, NoSolutionError, RunawayError,
                         SingularityError, StallError, StencilError)
from .fields import CurvatureFn, Field
from .geometry import (HALF_DISK, UNIT_DISK, DiskDomain, QuadratureGrid, build_grid,
                       mediatrix_of, mobius)
from .greens import GreenKernel, assemble_kernel, green, green_ball_integral, green_grad_x
from .pohozaev import (DomainSplit, PohozaevReport, divergence_reduction, fit_decay_exponent,
                       holder_profile, mediatrix_gradient_bounds, pohozaev_terms, split_domain,
                       split_report)
from .solver import (ContinuationConfig, ContinuationRun, NewtonConfig, SolutionField,
                     apply_green, continue_branch, newton_solve, radial_shoot, residual_pde)

__version__ = "0.1.0"
