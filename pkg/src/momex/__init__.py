"""High-precision matching of Taylor series to exponential expansions,
with the Hamiltonian moment machinery that feeds them."""

from .errors import (MomexError, ValidationError, NumericalError,
                     UnknownProblem, ParseError, NotNormalized,
                     SingularHankel, SingularMatrix, NoConvergence,
                     IllConditioned, ZeroExponent)
from .expmatch import (PrecisionContext, ExponentialModel,
                       characteristic_polynomial, pencil_roots,
                       solve_amplitudes, match_expansion, evaluate,
                       reconstruct_taylor, hankel_determinant,
                       max_feasible_order)
from .qstate import (GaussianPolyState, PolynomialHamiltonian,
                     MomentSequence, apply_hamiltonian, inner_product,
                     moment_sequence, harmonic_overlap)
from .cmx import (ConnectedMoments, CmxModel, connected_moments,
                  cmx_fit_E, cmx_fit_U, knowles_a0, overlap_s2,
                  track_roots)
from .problems import ProblemSpec, BUILTIN_NAMES, builtin, load_problem, serialize

__version__ = "0.1.0"
