"""Semi-Lagrangian schemes for advection-diffusion problems in divergence form."""

from .cases import (CASES, CaseSpec, ErrorReport, TurbulenceParams, compare_baseline,
                    convergence_study, gaussian_ic, richardson, run_case, run_case_full,
                    turb_diffusivity, varcoef_fields)
from .displacement import (BracketError, DiffusivityDomainError, DisplacementPolicy,
                           advective_displacement, diffusive_bisection, diffusive_fixed_point,
                           solve_displacements)
from .grid import (DegenerateReferenceError, Dirichlet, Grid1D, Grid2D, Periodic, TimeGrid,
                   check_values, l2_norm, linf_norm, relative_error, stability_numbers)
from .interp import eval_1d, eval_2d, nodal_sampler
from .oracles import (BarenblattParams, ConfigurationError, ThetaSchemeConfig, barenblatt_eval,
                      fd_theta_step, fourier_exact, reference_high_res, solve_fd_theta)
from .solver import (DiagonalDiffusivity, ModelError, NumericalBlowup, ProblemSpec1D,
                     PSDViolation, SchemeConfig, TensorDiffusivity, consistency_residual,
                     solve_1d, solve_2d, solve_nonlinear, step_advdiff_1d, step_advection_1d,
                     step_diag_2d, step_diffusion_1d, step_nonlinear, step_tensor_2d,
                     symmetric_eig_2x2)

__version__ = "0.1.0"
