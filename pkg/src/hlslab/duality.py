"""Legendre-transform duality between the Sobolev and HLS deficits.

On the sphere the pairing F <-> G = ||F||_q^{2-q} |F|^{q-1} sgn F links the
two deficits exactly:

    <E_s F, F> - ||F||_q^2  =  ||G||_p^2 - <P_2s G, G>  +  <E_s (F - F1), F - F1>

with F1 = P_2s G.  Constants obey ||G||_p = ||F||_q and <F, G> = ||F||_q^2
(the exponent identity p(q-1) = q), so both identities are algebraic at the
spectral level; any numerical residual is quadrature/truncation noise and
must shrink when Q and L double.  A measured HLS stability constant then
transfers to a Sobolev-side lower bound at half strength.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import ParameterDomainError
from .extremizers import project_Hminus_s
from .sphere import (SphereContext, ZonalFunction, apply_P2s, hls_deficit,
                     inner, lp_norm, quadratic_form_Es, sobolev_deficit)

__all__ = [
    "DualPair",
    "dual_density",
    "legendre_identity_check",
    "deficit_transfer_check",
    "sobolev_stability_from_hls",
    "linearized_sobolev_quotient",
]


@dataclass
class DualPair:
    """Sobolev-side F, its dual density G, and F1 = P_2s G."""

    F: ZonalFunction
    G: ZonalFunction
    F1: ZonalFunction


def dual_density(F: ZonalFunction) -> DualPair:
    """G = ||F||_q^{2-q} |F|^{q-1} sgn(F) pointwise on nodes, F1 = P_2s G."""
    ctx = F.ctx
    q = ctx.params.q
    vals = F.values
    if not np.any(vals):
        raise ParameterDomainError("dual density of the zero function is undefined")
    nrm = lp_norm(F, q)
    g_vals = nrm ** (2.0 - q) * np.abs(vals) ** (q - 1.0) * np.sign(vals)
    G = ZonalFunction(ctx, values=g_vals)
    return DualPair(F=F, G=G, F1=apply_P2s(G))


def legendre_identity_check(pair: DualPair) -> float:
    """| ||F||_q^2 + ||G||_p^2 - 2 <F, G> |; zero analytically."""
    ctx = pair.F.ctx
    e_f = lp_norm(pair.F, ctx.params.q) ** 2
    e_g = lp_norm(pair.G, ctx.params.p) ** 2
    return abs(e_f + e_g - 2.0 * inner(pair.F, pair.G))


def deficit_transfer_check(pair: DualPair) -> float:
    """| sobolev_deficit(F) - hls_deficit(G) - <E_s (F-F1), F-F1> |."""
    diff = pair.F - pair.F1
    return abs(sobolev_deficit(pair.F).deficit
               - hls_deficit(pair.G).deficit
               - quadratic_form_Es(diff))


def sobolev_stability_from_hls(F: ZonalFunction, c_hls: float) -> dict:
    """Sobolev deficit lower bound transferred from an HLS stability constant.

    With phi0 the H^{-s} projection of the dual density G, the chain gives

        sobolev_deficit(F) >= (1/2) min(c_hls/n, 1) <E_s (F - P_2s phi0), .>

    (the distance recombination costs the factor 1/2).  Returns the deficit,
    the bound, and their residual; the projection tolerance plays the role of
    the epsilon-approximation in the underlying argument.
    """
    if c_hls <= 0:
        raise ParameterDomainError("transfer needs a positive HLS constant")
    ctx = F.ctx
    pair = dual_density(F)
    dec = project_Hminus_s(pair.G)
    if dec.degenerate:
        raise ParameterDomainError("projection degenerated; transfer bound unavailable")
    phi = ZonalFunction(ctx, values=pair.G.values - dec.r.values)
    diff = F - apply_P2s(phi)
    dist_sq = quadratic_form_Es(diff)
    deficit = sobolev_deficit(F).deficit
    bound = 0.5 * min(c_hls / ctx.n, 1.0) * dist_sq
    return {
        "deficit": deficit,
        "bound": bound,
        "residual": deficit - bound,
        "distance_sq": dist_sq,
        "hls_deficit": hls_deficit(pair.G).deficit,
        "projection": {"c": dec.phi.c, "tau": dec.phi.tau,
                       "ortho": dec.ortho_residuals},
    }


def linearized_sobolev_quotient(ctx: SphereContext, l: int, eps: float = 1.0e-3) -> float:
    """Measured Sobolev quotient for u = 1 + eps G_l against the tangent gap.

    quotient = sobolev_deficit(u) / <E_s u~, u~> with u~ = u stripped of its
    degree-0 and degree-1 components; analytically 1 - A(l)/A(1) + O(eps),
    which for l = 2 is 4s/(n+2s+2).
    """
    if l < 2:
        raise ParameterDomainError("the quotient degenerates on degrees 0 and 1")
    coeffs = np.zeros(ctx.L + 1)
    coeffs[0] = 1.0
    coeffs[l] = eps
    u = ZonalFunction(ctx, coeffs=coeffs)
    tilde = u.coeffs.copy()
    tilde[:2] = 0.0
    gap = quadratic_form_Es(ZonalFunction(ctx, coeffs=tilde))
    return sobolev_deficit(u).deficit / gap
