"""Band structures, gauge equivalences and exceptional points of 1D
non-Hermitian periodic potentials."""

from .bands import (BandStructure, FdGrid, TailProfile, align_wavefunction, band_sweep,
                    fd_band_oracle, participation_ratio, reconstruct_wavefunction, tail_profile)
from .eig import (EigenDecomposition, EigenSolverError, canonical_order, eig, eig_values_only,
                  left_eigenvectors)
from .ep import (Classification, Coalescence, DispersionFit, EncircleError, EpReport,
                 LoopResult, RiemannMesh, TruncatedModel, circle, classify_ep,
                 coalescence_metrics, dispersion_exponent, encircle, ep_scan, h3_discriminant,
                 k_dispersion_exponent, riemann_sheet_grid, truncated_models, two_level_matrix,
                 two_level_model)
from .gauge import (Character, EquivalenceResult, GaugeAngle, GaugeUndefinedError,
                    NotSymmetrizableError, OffDiagonalForm, Regime, UnsupportedBandwidthError,
                    apply_gauge, dirichlet_negative_control, gauge_angle, gauge_vector,
                    hermitian_equivalent, off_diagonal_form, symmetrizable)
from .model import (BlochHamiltonian, PotentialSpec, build_bloch, converged_truncation, cosine,
                    fig5_potential, fold_k, free, parse_family, parse_potential, pt_symmetric,
                    v1, v1_plus_v2, v2)

__version__ = "0.1.0"
