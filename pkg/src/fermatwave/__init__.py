"""fermatwave: gradient-index optics from rays to waves.

A cross-verifying numerical suite around one chain of ideas: travel-time
(Fermat) rays in a refractive-index field, the same paths as minimizers
of a discrete time functional, a proper-time sliced propagator whose
frequency integral solves the Helmholtz equation, an independent sparse
Helmholtz solver, time-domain pulse synthesis whose fronts arrive at the
ray travel time, and the zeta-regularized determinant identities used in
the reparametrization-gauge normalization.
"""

from .errors import (AccuracyError, ConvergenceError, DomainError,
                     DomainExitError, FermatwaveError, NoSignalError,
                     SolverError, UsageError)
from .grids import UniformGrid
from .medium import (DispersionTable, IndexField, Potential, eval_grad,
                     eval_index, eval_potential)
from .raytrace import (ChristoffelTensor, GeodesicSolution, RayState,
                       christoffel, connect, geodesic_residual, optical_time,
                       ray_acceleration, step_ray, trace_ray)
from .variational import (PathPolyline, minimize_path, path_time,
                          path_time_gradient, polyline_sup_distance,
                          resample_polyline)
from .zetareg import (PowerSpectrumOperator, euler_maclaurin_zeta,
                      fp_determinant, naive_log_partial_product,
                      regularized_det, zeta_constants)
from .propagator import (AbsorberSpec, KernelSlice, SpectralKernel,
                         free_kernel, free_kernel_slice, proper_time_integral,
                         schrodinger_residual, sliced_kernel, stationary_kernel)
from .helmholtz import (HelmholtzProblem, ResidualReport, SpongeSpec,
                        analytic_green, fd_residual, solve_helmholtz)
from .synthesis import (FrequencySpectrum, TimeKernel, dual_time_grid,
                        front_arrival, peak_arrival, synthesize_time)

__version__ = "0.1.0"
