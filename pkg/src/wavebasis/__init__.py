"""wavebasis: explicit orthonormal bases of positive-energy wave-equation
solutions on Minkowski space R^{1,n}, verified operator identities, and a
spectral Cauchy solver."""

import os as _os

# honored only if set before numpy's BLAS spins up its pools
if "WAVEBASIS_NUM_THREADS" in _os.environ:
    _threads = _os.environ["WAVEBASIS_NUM_THREADS"]
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

from .errors import (ChartBoundaryError, ConfigError, DecayError,
                     InvalidModeIndexError, ParameterError, PoleError,
                     UnsupportedDimensionError, WaveBasisError)
from .geometry import (CompactField, NoncompactField, cone_embedding,
                       cover_phase, embedding_radius, from_compact,
                       minkowski_interval, pull_to_compact,
                       push_to_noncompact, to_compact)
from .kleingordon import (SliceGrid, gram_matrix, kg_inner_compact,
                          kg_inner_noncompact, kg_inner_radial, slice_grid,
                          unitarity_deviation)
from .modes import (ModeIndex, RationalMode, Sector, conjugate_field,
                    cylinder_mode, default_m, lowest_energy, mode_indices,
                    mode_norm_constant, radial_polynomial, rational_mode,
                    sector, solution_mode, sphere_mode, weight)
from .operators import (GroupElement, casimir_identity_operator,
                        casimir_identity_residual, casimir_rotations,
                        casimir_sl2, energy_ladder, energy_operator,
                        factorization_residual, group_act, ktype_allows,
                        lowering_operator, raising_operator,
                        rotation_generators, sl2_triple,
                        time_translation_compact, time_translation_via_chart,
                        wave_operator)
from .solver import (CauchyData, Expansion, SpectralCauchySolver,
                     evolve_compare, expand, expand_radial_route,
                     gaussian_data, leapfrog_solution, mode_data, reconstruct,
                     reexpand, tabulated_data)
from .special import (HarmonicBasis, HarmonicPolynomial, dim_harmonic,
                      gauss_legendre, gegenbauer, gegenbauer_rule,
                      harmonic_basis, sphere_area, sphere_grid)

__all__ = [name for name in dir() if not name.startswith("_")]
