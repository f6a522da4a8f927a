"""Linear and quadratic-order analysis of doubly periodic capillary-gravity
waves on shear flows.

Pipeline: validate a profile U(x3), solve the Riccati problem for each
lattice wavevector, enumerate the resonant set, assemble the first-order
kernel, check residuals of the flattened Euler system, and evaluate the
second-order solvability obstruction.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .errors import (AliasError, BoundViolation, ConfigError, DegenerateSurface, IntegrationFailure,
                     NonResonantMode, NotCapillary, ParameterError, ProfileError, ShapeMismatch,
                     ShearwaveError, SymmetryViolation, ZeroFirstComponent)
from .profiles import LatticeSpec, ShearProfile, ValidationReport, WaveParams, logderiv_extrema, validate_profile
from .riccati import (PressureProfile, RiccatiSolution, chebyshev_nodes, pressure_profile, riccati_bounds,
                      solve_riccati)
from .dispersion import (ResonantMode, ResonantSet, calibrate_sigma, dispersion_residual, find_kernel_set,
                         kernel_cutoff_radius, monotonicity_scan)
from .spectral import (SymmetricField, SymmetricVectorField, TrigField, VerticalGrid, analyze, synthesize,
                       x1_average)
from .fields import (FlowState, KernelFields, KernelModeSet, assemble_kernel, background_state,
                     build_flattening, pullback_vector, pushforward_vector, trivial_state)
from .residuals import ResidualReport, linear_residual, nonlinear_residual, order_scaling_probe
from .obstruction import (KERNEL_2D_ONLY, OBSTRUCTED_3D, UNIFORM_FLOW, INCONCLUSIVE, ObstructionProfile,
                          Verdict, averaged_bilinears, obstruction_f, solvability_average, theorem_verdict)
