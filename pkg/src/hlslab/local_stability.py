"""The local-stability certificate for the HLS deficit near the constant.

For admissible r (r >= -1, mean zero, no degree-1 component, small p-norm)
the deficit of 1 + r divides into a coercive term plus three pieces I1, I2,
I3, each nonnegative under the parameter choices made here.  This module
evaluates that division literally: every piece is computed from its
definition and checked for nonnegativity on sampled admissible inputs; a
failure is reported as a counterexample candidate, not hidden.

Parameter defaults: eps1 = 1/16, eps2 = 1/8, vartheta = 1/2, sigma0 = 1/8,
gamma = eps1/2, M = max(1, 2 gamma); the regime requires n > 14 s so that
the exponent p stays above 7/4.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import scalar
from .constants import (ParameterDomainError, ProblemParams, ThresholdSet,
                        thresholds)
from .sphere import (SphereContext, ZonalFunction, hls_deficit, lp_norm,
                     quadratic_form_P2s)

__all__ = [
    "CertificateParams",
    "DeficitBreakdown",
    "make_certificate",
    "verify_admissibility",
    "random_admissible",
    "split_zonal",
    "check_split_lemma",
    "deficit_breakdown",
    "select_K_n0",
    "certificate_condition",
    "duke_bound_check",
    "projection_bound_check",
    "local_stability_ratio",
]


@dataclass
class CertificateParams:
    """Parameter pack driving the certificate for one (n, s) instance."""

    params: ProblemParams
    eps1: float
    eps2: float
    vartheta: float
    sigma0: float
    gamma: float
    M: float
    K: int
    delta0: float
    n0: Optional[int]
    C_qest: float
    C_coercive: float
    threshold_set: ThresholdSet
    split_params: scalar.SplitParams
    scalar_constants: scalar.ScalarConstants


@dataclass
class DeficitBreakdown:
    """Deficit division: deficit(1+r) >= coercive + I1 + I2 + I3."""

    I1: float
    I2: float
    I3: float
    coercive: float
    total_lower_bound: float
    deficit: float

    def summary_residual(self):
        return self.deficit - self.total_lower_bound


def make_certificate(params: ProblemParams, eps1=1.0 / 16.0, eps2=1.0 / 8.0,
                     K: int = 1, p0: float = 7.0 / 4.0,
                     compute_n0: bool = True) -> CertificateParams:
    """Assemble the certificate pack: scalar constants, thresholds, K0/n0.

    delta2 uses the supplied K (its value at the selected K0 underflows to
    zero for any double, see select_K_n0), so the usable delta0 is governed
    by the caller's K; K = 1 matches the worked threshold examples.
    """
    if params.n <= 14.0 * params.s:
        raise ParameterDomainError(
            f"certificate regime needs n > 14 s, got n={params.n}, s={params.s}")
    vartheta, sigma0 = 0.5, 1.0 / 8.0
    gamma = 0.5 * eps1
    M = max(1.0, 2.0 * gamma)
    N = scalar.select_N(p0, M, eps2)
    sp = scalar.SplitParams(gamma=gamma, M=M, p0=p0, eps=eps2, N=N)
    consts = scalar.build_constants(sp)
    n0 = None
    if compute_n0:
        _, n0 = select_K_n0(params.s, consts.C_qest, eps1=eps1, eps2=eps2, sigma0=sigma0)
    ts = thresholds(params, eps1, eps2, K=K, n0=n0)
    # coercive constant: (2/p) vartheta min(eps1, eps2, C_qest) / 3 >= vartheta min(eps1,eps2)/3
    c_coercive = vartheta * min(eps1, eps2) / 3.0
    return CertificateParams(
        params=params, eps1=eps1, eps2=eps2, vartheta=vartheta, sigma0=sigma0,
        gamma=gamma, M=M, K=int(K), delta0=ts.delta0, n0=n0,
        C_qest=consts.C_qest, C_coercive=c_coercive,
        threshold_set=ts, split_params=sp, scalar_constants=consts,
    )


def split_zonal(r: ZonalFunction, cert: CertificateParams):
    """Nodal split of r at levels gamma and M, as three ZonalFunctions."""
    r1, r2, r3 = scalar.split_scalar(r.values, cert.gamma, cert.M)
    ctx = r.ctx
    return (ZonalFunction(ctx, values=r1),
            ZonalFunction(ctx, values=r2),
            ZonalFunction(ctx, values=r3))


def verify_admissibility(r: ZonalFunction, cert: CertificateParams,
                         rel_tol: float = 1.0e-10) -> dict:
    """Check r >= -1, zero mean, zero degree-1 component, ||r||_p^2 <= delta0.

    Returns an itemized diagnostics dict with an overall `admissible` flag.
    """
    p = cert.params.p
    vals = r.values
    scale = max(float(np.max(np.abs(vals))), 1.0e-300)
    a = r.coeffs
    min_val = float(np.min(vals))
    norm_sq = lp_norm(r, p) ** 2
    checks = {
        "lower_bound": min_val >= -1.0 - 1.0e-12,
        "mean_zero": abs(a[0]) <= rel_tol * scale,
        "degree1_zero": abs(a[1]) <= rel_tol * scale,
        "norm_small": norm_sq <= cert.delta0 * (1.0 + 1.0e-12),
    }
    return {
        "admissible": all(checks.values()),
        "checks": checks,
        "min_value": min_val,
        "mean": float(a[0]),
        "degree1": float(a[1]),
        "lp_norm_sq": norm_sq,
        "delta0": cert.delta0,
    }


def random_admissible(ctx: SphereContext, cert: CertificateParams, rng,
                      count: int, rho_schedule=(0.1, 0.5, 0.9),
                      lmax: Optional[int] = None, max_tries: int = 200):
    """Random admissible zonal functions: band-limited spectra on degrees 2..lmax.

    Coefficients are Gaussian, tapered by each harmonic's peak nodal value so
    the draws stay pointwise tame, then rescaled to ||r||_p^2 = rho * delta0
    with rho cycling through rho_schedule; draws with min r < -1 are rejected.
    """
    if lmax is None:
        lmax = min(ctx.L, 12)
    if lmax < 2 or lmax > ctx.L:
        raise ParameterDomainError(f"need 2 <= lmax <= L, got lmax={lmax}, L={ctx.L}")
    p = cert.params.p
    peak = np.max(np.abs(ctx.basis[2: lmax + 1]), axis=1)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries * count:
            raise ParameterDomainError("admissible sampler rejection rate too high")
        rho = rho_schedule[len(out) % len(rho_schedule)]
        target = math.sqrt(rho * cert.delta0)
        raw = rng.standard_normal(lmax - 1) / peak
        coeffs = np.zeros(lmax + 1)
        coeffs[2:] = raw
        zf = ZonalFunction(ctx, coeffs=coeffs)
        nrm = lp_norm(zf, p)
        if nrm == 0.0:
            continue
        zf = zf * (target / nrm)
        if float(np.min(zf.values)) < -1.0:
            continue
        out.append(zf)
    return out


def check_split_lemma(r: ZonalFunction, cert: CertificateParams) -> float:
    """Residual of the split comparison for the quadratic form:

    sum_i <P r_i, r_i> + 2 int r1 r2 + 2 int r2 r3 + 2 int r1 r3 - <P r, r>;
    contract: >= -1e-9 for r >= -1.
    """
    if float(np.min(r.values)) < -1.0 - 1.0e-12:
        raise ParameterDomainError("split comparison needs r >= -1")
    r1, r2, r3 = split_zonal(r, cert)
    w = r.ctx.weights
    cross = 2.0 * float(np.sum(w * (r1.values * r2.values
                                    + r2.values * r3.values
                                    + r1.values * r3.values)))
    diag = (quadratic_form_P2s(r1) + quadratic_form_P2s(r2) + quadratic_form_P2s(r3))
    return diag + cross - quadratic_form_P2s(r)


def deficit_breakdown(r: ZonalFunction, cert: CertificateParams) -> DeficitBreakdown:
    """Evaluate the deficit division terms from their definitions.

    I1 = (p-1 - (2/p) eps1 (1+vt) th) int r1^2 - <P r1, r1> + s0 th int (r2^2 + r3^p)
    I2 = (p-1 - (2/p) C_qest (1+vt) th - s0 th) int r2^2 - <P r2, r2>
    I3 = ((2/p)(1 - eps2 (1+vt) th) - s0 th) int r3^p - <P r3, r3>
    coercive = (2/p) vt th (eps1 int r1^2 + C_qest int r2^2 + eps2 int r3^p).
    """
    adm = verify_admissibility(r, cert)
    if not adm["admissible"]:
        raise ParameterDomainError(f"inadmissible r: {adm['checks']}")
    params = cert.params
    p, theta = params.p, params.theta
    vt, s0 = cert.vartheta, cert.sigma0
    ctx = r.ctx
    w = ctx.weights
    r1, r2, r3 = split_zonal(r, cert)
    int_r1sq = float(np.sum(w * r1.values**2))
    int_r2sq = float(np.sum(w * r2.values**2))
    int_r3p = float(np.sum(w * r3.values**p))
    two_p = 2.0 / p
    i1 = ((p - 1.0 - two_p * cert.eps1 * (1.0 + vt) * theta) * int_r1sq
          - quadratic_form_P2s(r1) + s0 * theta * (int_r2sq + int_r3p))
    i2 = ((p - 1.0 - two_p * cert.C_qest * (1.0 + vt) * theta - s0 * theta) * int_r2sq
          - quadratic_form_P2s(r2))
    i3 = ((two_p * (1.0 - cert.eps2 * (1.0 + vt) * theta) - s0 * theta) * int_r3p
          - quadratic_form_P2s(r3))
    coercive = two_p * vt * theta * (cert.eps1 * int_r1sq
                                     + cert.C_qest * int_r2sq
                                     + cert.eps2 * int_r3p)
    one_plus = ZonalFunction(ctx, values=1.0 + r.values)
    deficit = hls_deficit(one_plus).deficit
    total = coercive + i1 + i2 + i3
    return DeficitBreakdown(I1=i1, I2=i2, I3=i3, coercive=coercive,
                            total_lower_bound=total, deficit=deficit)


def certificate_condition(K: int, n: float, s: float, B: float) -> bool:
    """(2/3)(2K/(n+2K)) >= (4s/(n+2s)) B, the degree/dimension selection display."""
    return (2.0 / 3.0) * (2.0 * K / (n + 2.0 * K)) >= 4.0 * s / (n + 2.0 * s) * B


def select_K_n0(s: float, C_qest: float, eps1=1.0 / 16.0, eps2=1.0 / 8.0,
                sigma0: float = 1.0 / 8.0) -> Tuple[int, int]:
    """Smallest workable (K0, n0) for the spectral-gap piece of the certificate.

    The display requires n (K - 3 s B) >= 2 s K (3B - 1) with
    B = 1 + (12/7) C_qest + sigma0; feasible n shrink toward 2 s (3B - 1) as
    K grows without bound.  The sweep fixes K0 as the smallest K whose
    minimal n is within a factor two of that infimum (K0 = ceil(6 s B)), then
    takes the smallest integer n for that K0; the condition is re-verified on
    n in [n0, 4 n0] by monotonicity sampling.
    """
    if C_qest <= 0:
        raise ParameterDomainError("C_qest must be positive")
    B = 1.0 + (12.0 / 7.0) * C_qest + sigma0
    K0 = int(math.ceil(6.0 * s * B))
    denom = K0 - 3.0 * s * B
    if denom <= 0:
        K0 += 1
        denom = K0 - 3.0 * s * B
    n0 = int(math.ceil(2.0 * s * K0 * (3.0 * B - 1.0) / denom))
    n0 = max(n0, int(math.floor(14.0 * s)) + 1)
    guard = 0
    while not certificate_condition(K0, n0, s, B):
        n0 += max(1, n0 // 10**6)
        guard += 1
        if guard > 10_000:
            raise ParameterDomainError("K0/n0 sweep failed to close the condition")
    for mult in (1.0, 1.5, 2.0, 3.0, 4.0):
        if not certificate_condition(K0, int(n0 * mult), s, B):
            raise ParameterDomainError("certificate condition not monotone on [n0, 4 n0]")
    return K0, n0


def duke_bound_check(ctx: SphereContext, l: int, p_exp: float) -> float:
    """Harmonic growth bound: (p-1)^{l/2} - ||G_l||_{L^p} >= 0 for p >= 2."""
    if p_exp < 2.0:
        raise ParameterDomainError(f"the growth bound needs p >= 2, got {p_exp}")
    g = ZonalFunction(ctx, coeffs=np.eye(ctx.L + 1)[l])
    return (p_exp - 1.0) ** (0.5 * l) - lp_norm(g, p_exp)


def projection_bound_check(r2: ZonalFunction, K: int, cert: CertificateParams) -> float:
    """Residual of ||Pi_K r2||_2 <= 3^{K/2} gamma^{-p/4} delta0^{p/8} ||r2||_2.

    Pi_K projects onto harmonics of degree < K; r2 must come from the split
    of an admissible function.
    """
    p = cert.params.p
    w = r2.ctx.weights
    full = math.sqrt(float(np.sum(w * r2.values**2)))
    low = math.sqrt(float(np.sum(r2.coeffs[:K] ** 2)))
    bound = 3.0 ** (0.5 * K) * cert.gamma ** (-0.25 * p) * cert.delta0 ** (p / 8.0) * full
    return bound - low


def local_stability_ratio(r: ZonalFunction, cert: CertificateParams) -> float:
    """deficit(1+r) / ||r||_p^2; for n >= n0 bounded below by C_coercive * theta."""
    nrm_sq = lp_norm(r, cert.params.p) ** 2
    if nrm_sq == 0.0:
        raise ParameterDomainError("ratio undefined at r = 0")
    one_plus = ZonalFunction(r.ctx, values=1.0 + r.values)
    return hls_deficit(one_plus).deficit / nrm_sq
