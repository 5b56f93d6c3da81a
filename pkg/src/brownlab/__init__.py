"""Desk-scale laboratory for spectral distributions of complex matrices.

Exact finite-dimensional instances of operator-theoretic machinery:
eigenvalue-counting spectral measures, splitting (Haagerup-Schultz
style) projections over Borel-set descriptions, Schur-type triangular
forms along spectral orderings, power-root asymptotics |T^n|^(1/n)
with an extended-precision kernel, decomposability diagnostics, and a
gallery of constructions (Jordan sums, thin-rectangle Toeplitz blocks,
exp(iQ), random strictly-upper Gaussian models).
"""

from .matrix import CMatrix, load_matrix, save_matrix
from .numerics import (EXTENDED, STANDARD, GridSpec, PrecisionPolicy,
                       PrecisionError, ScaledPower, SchurForm, expm,
                       power_root, pseudospectrum_grid, resolvent_norm,
                       scaled_power, schur, reorder_schur, svd)
from .regions import (Region, complement, disk, empty, full, halfplane,
                      intersection, points, union)
from .measures import (BrownMeasure, BoundaryAmbiguityError, FKIdentity,
                       Projection, brown, brown_split, fk_identity,
                       hs_projection, join, meet)
from .triangular import (SpectralOrdering, TriangularForm, explicit_ordering,
                         interval_projection, modulus_ordering,
                         ordering_from_curve, upper_triangular_form)
from .asymptotics import (NCPReport, PowerRootTrace, circle_spectrum_check,
                          ncp_diagnostic, ncp_limit_candidate,
                          neumann_inverse, power_root_sequence,
                          qn_series_norms, shifted_ncp_scan)
from .decomp import (DiagnosticReport, disk_conditions,
                     full_spectral_distribution, lange_wang_check,
                     sandwich_check, strong_borel_conditions)
from .gallery import (OperatorFamily, RectangleMapParams, SymbolCoefficients,
                      dt_model, exp_iq, jordan_block, jordan_sum,
                      rectangle_map, thin_spectrum_block,
                      thin_spectrum_family, toeplitz, toeplitz_norm_profile)

__version__ = "0.1.0"
