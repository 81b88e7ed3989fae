"""hlslab: a numerical laboratory for sharp HLS/Sobolev inequalities.

Spectral fractional operators on the sphere, deficit functionals, projection
onto the extremizer manifold, brute-force scalar-inequality certification,
the local-stability certificate, the competing-symmetries flow, and the
Legendre duality transfer between the two deficits.
"""

from ._util import __version__
from .constants import (ProblemParams, ThresholdSet, comparability_bound,
                        constant_relation, funk_hecke_eigenvalue,
                        funk_hecke_eigenvalues, multiplicity, sharp_constant,
                        sphere_area, thresholds)
from .duality import (DualPair, deficit_transfer_check, dual_density,
                      legendre_identity_check, sobolev_stability_from_hls)
from .extremizers import (DecompositionResult, Extremizer, comparability_check,
                          euler_lagrange_residual, extremizer_profile,
                          project_Hminus_s, reverse_bound_check)
from .flows import (AxiSymFunction, FlowTrace, apply_U, axisym_from_callable,
                    competing_iteration, global_ratio_demo, monotonicity_check,
                    radial_from_callable, rearrange, residual_decay_check,
                    target_profile)
from .local_stability import (CertificateParams, DeficitBreakdown,
                              check_split_lemma, deficit_breakdown,
                              duke_bound_check, local_stability_ratio,
                              make_certificate, projection_bound_check,
                              random_admissible, select_K_n0,
                              verify_admissibility)
from .scalar import (ScalarConstants, SplitParams, ViolationReport,
                     build_constants, certify_cubic_bound,
                     certify_proposition1, certify_qestimate,
                     cubic_bound_residual, select_N, split_scalar)
from .sphere import (DeficitReport, SphereContext, ZonalFunction, analyze,
                     apply_Es, apply_P2s, hls_deficit, kernel_P2s_oracle,
                     lp_norm, make_context, sobolev_deficit,
                     stereographic_lift, stereographic_unlift, synthesize)

__all__ = [name for name in dir() if not name.startswith("_")]
