"""Monte Carlo laboratory for Hermitian random matrices with extra index symmetries."""
from .core import (ALL_CLASSES, BranchAmbiguityError, DomainError, EnsembleSpec,
                   HermitianMatrix, IndexDomainError, InvalidSpecError, NumericalError,
                   PreconditionError, SampleSizeError, SolverFailure, Spectrum, SymgueError,
                   SymmetryClass, pos, site, sites)
from .eig import (eigh, eigh_structured, identity_residuals, resolvent_matrix,
                  stieltjes_from_spectrum)
from .fluct import (C_case3, S_goe, S_gue, ks_distance, mc_covariance, mc_mean, mc_run,
                    theory_correlator, variance_slope)
from .laws import (blocklaw, case3_paper_law, case3_stieltjes, get_law, semicircle_law,
                   semicircle_stieltjes)
from .sampler import (build_orbit_system, free_parameter_count, sample_matrix,
                      validate_symmetry)

__version__ = "0.1.0"
