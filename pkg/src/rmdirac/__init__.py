"""Bound states of the relativistic Rosen-Morse well.

Closed-form spectra through hypergeometric quantization roots, an
independent shooting oracle, and a refutation harness for the
polynomial-truncation (Jacobi) solutions that violate the r = 0
boundary condition.
"""

from .config import (RunConfig, Tolerances, canonical_params, default_config,
                     dump_config, parse_config, refutation_config,
                     refutation_params)
from .errors import (BracketingError, ConfigError, ConvergenceError, DomainError,
                     NumericalError, ParameterError, SolverError)
from .hyp import (EvalResult, HypParams, apply_euler, apply_pfaff, gauss_2f1,
                  jacobi_p, ln_gamma)
from .model import (EnergyWindow, PekerisCoeffs, PhysicalParams, ReducedCoeffs,
                    SymmetryKind, bound_window, couplings, map_coeffs,
                    pekeris_approx, pekeris_coeffs, sigma, z_of_r)
from .shooting import (ShootConfig, nu_ode_residual, ode_residual,
                       oracle_eigenfunction, oracle_eigenvalues, shoot_residual)
from .spectrum import (EnergyLevel, RefutationRecord, bracket_roots,
                       enumerate_levels, quantization_value,
                       quantization_value_from_coeffs, refine_root,
                       termination_spectrum)
from .wavefunction import (WavefunctionTable, build_nu_table, build_table,
                           count_nodes, eval_component, eval_nu_component,
                           normalize, radial_grid)

__version__ = "0.1.0"
