"""The zonal slice of the HLS extremizer manifold and projection onto it.

Zonal extremizers are v_{c,tau}(t) = c (sqrt(1-tau^2)/(1-tau t))^{(n+2s)/2},
tau in (-1,1).  Projection of a zonal g in the H^{-s} form <P_2s ., .> has the
c-variable eliminated in closed form; the remaining 1-D search over tau runs
multistart golden-section.  Tied minimizers feed the residual-norm
comparability check; the companion reverse bound compares the p-norm and the
H^{-s} norm of differences of unit extremizers.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .constants import ParameterDomainError
from .sphere import (SphereContext, ZonalFunction, inner, lp_norm,
                     quadratic_form_P2s)

__all__ = [
    "Extremizer",
    "DecompositionResult",
    "extremizer_profile",
    "unit_profile",
    "unit_profile_dtau",
    "project_Hminus_s",
    "euler_lagrange_residual",
    "comparability_check",
    "reverse_bound_check",
    "off_axis_score",
]

TAU_MARGIN = 1.0e-6
TIE_REL_TOL = 1.0e-9

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class Extremizer:
    """Point (c, tau) on the zonal slice of the extremizer manifold."""

    c: float
    tau: float

    def __post_init__(self):
        if not abs(self.tau) < 1.0:
            raise ParameterDomainError(f"|tau| must be < 1, got {self.tau}")


@dataclass
class DecompositionResult:
    """g = phi.profile + r with phi the H^{-s}-nearest zonal extremizer.

    ortho_residuals are <P_2s r, u_tau> and <P_2s r, d/dtau u_tau>, the
    numerical form of orthogonality to the manifold tangent directions.
    ties lists every multistart minimizer whose objective matches the best
    one to relative TIE_REL_TOL, as (tau, c, hs_distance_sq, lp_distance).
    """

    phi: Extremizer
    r: ZonalFunction
    hs_distance_sq: float
    lp_distance: float
    ortho_residuals: Tuple[float, float]
    degenerate: bool = False
    ties: List[tuple] = field(default_factory=list)


def _profile_fn(c, tau, n, s):
    beta = 0.5 * (n + 2.0 * s)
    root = math.sqrt(1.0 - tau * tau)

    def fn(t):
        return c * (root / (1.0 - tau * np.asarray(t, dtype=float))) ** beta

    return fn


def extremizer_profile(e: Extremizer, ctx: SphereContext) -> ZonalFunction:
    """Nodal profile of v_{c,tau}; the constant c when tau = 0."""
    return ZonalFunction(ctx, fn=_profile_fn(e.c, e.tau, ctx.n, ctx.s))


def unit_profile(ctx: SphereContext, tau: float) -> ZonalFunction:
    return ZonalFunction(ctx, fn=_profile_fn(1.0, tau, ctx.n, ctx.s))


def unit_profile_dtau(ctx: SphereContext, tau: float) -> ZonalFunction:
    """d/dtau of the unit profile: u * beta * (t/(1-tau t) - tau/(1-tau^2))."""
    beta = 0.5 * (ctx.n + 2.0 * ctx.s)
    u = unit_profile(ctx, tau)
    t = ctx.nodes
    fac = beta * (t / (1.0 - tau * t) - tau / (1.0 - tau * tau))
    return ZonalFunction(ctx, values=u.values * fac)


def _golden_min(fn, lo, hi, tol):
    """Golden-section minimum of a unimodal-enough fn on [lo, hi]."""
    h = hi - lo
    if h <= tol:
        mid = 0.5 * (lo + hi)
        return mid, fn(mid)
    steps = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = lo + _INV_PHI2 * h
    d = lo + _INV_PHI * h
    yc, yd = fn(c), fn(d)
    for _ in range(steps):
        if yc < yd:
            hi, d, yd = d, c, yc
            h *= _INV_PHI
            c = lo + _INV_PHI2 * h
            yc = fn(c)
        else:
            lo, c, yc = c, d, yd
            h *= _INV_PHI
            d = lo + _INV_PHI * h
            yd = fn(d)
    return (c, yc) if yc < yd else (d, yd)


def _tau_scores(ctx, g):
    """Factory: tau -> (<Pg,u>, <Pu,u>) for the c-eliminated objective."""
    a_g = g.coeffs
    weighted = ctx.funk_hecke * a_g

    def parts(tau):
        u = unit_profile(ctx, tau)
        a_u = u.coeffs
        pu = float(np.sum(weighted * a_u))
        puu = float(np.sum(ctx.funk_hecke * a_u * a_u))
        return pu, puu

    return parts


def _tau_score_derivative(ctx, g):
    """Factory: tau -> d/dtau of <Pg,u>^2/<Pu,u> (the score to maximize)."""
    a_g = g.coeffs
    weighted = ctx.funk_hecke * a_g

    def dscore(tau):
        a_u = unit_profile(ctx, tau).coeffs
        a_du = unit_profile_dtau(ctx, tau).coeffs
        pu = float(np.sum(weighted * a_u))
        pud = float(np.sum(weighted * a_du))
        puu = float(np.sum(ctx.funk_hecke * a_u * a_u))
        puud = 2.0 * float(np.sum(ctx.funk_hecke * a_u * a_du))
        return (2.0 * pu * pud * puu - pu * pu * puud) / (puu * puu)

    return dscore


def _polish_root(dfn, tau, lo, hi):
    """Refine a score maximum by a sign-bracketed root of its derivative.

    Golden section stalls at sqrt(machine eps) because the objective is
    quadratically flat; the derivative keeps full resolution.
    """
    from scipy.optimize import brentq

    h = 1.0e-8
    while h <= 2.0e-3:
        a = max(lo, tau - h)
        b = min(hi, tau + h)
        fa, fb = dfn(a), dfn(b)
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if fa * fb < 0.0:
            return float(brentq(dfn, a, b, xtol=1.0e-15, rtol=8.9e-16))
        h *= 10.0
    return tau


def project_Hminus_s(g: ZonalFunction, n_starts: int = 9,
                     margin: float = TAU_MARGIN, tau_tol: float = 1.0e-12) -> DecompositionResult:
    """Minimize F(c,tau) = <P_2s (g - v), g - v> over the zonal extremizer slice.

    c is eliminated exactly (c* = <Pg, u_tau>/<Pu_tau, u_tau>), tau by
    multistart golden-section on (-1+margin, 1-margin).  A boundary-pinned
    optimum reproduces the degenerate branch: phi = 0 and r = g.
    """
    ctx = g.ctx
    if not np.any(g.values):
        raise ParameterDomainError("cannot project the zero function")
    if n_starts < 2:
        raise ParameterDomainError("need at least 2 starts")
    parts = _tau_scores(ctx, g)
    pgg = quadratic_form_P2s(g)

    def objective(tau):
        pu, puu = parts(tau)
        return pgg - pu * pu / puu

    dscore = _tau_score_derivative(ctx, g)
    lo_all, hi_all = -1.0 + margin, 1.0 - margin
    edges = np.linspace(lo_all, hi_all, n_starts + 1)
    candidates = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        tau, val = _golden_min(objective, lo, hi, tau_tol)
        if lo_all + 1.0e-9 < tau < hi_all - 1.0e-9:
            tau = _polish_root(dscore, tau, lo_all, hi_all)
            val = objective(tau)
        candidates.append((val, tau))
    candidates.sort()
    best_val, best_tau = candidates[0]

    # deduplicate minimizers, then keep objective ties with the best
    scale = abs(pgg) if pgg != 0.0 else 1.0
    distinct = []
    for val, tau in candidates:
        if all(abs(tau - t0) > 1.0e-5 for _, t0 in distinct):
            distinct.append((val, tau))
    ties = [(val, tau) for val, tau in distinct if val - best_val <= TIE_REL_TOL * scale]

    boundary = 1.0 - margin - 1.0e-9
    if abs(best_tau) >= boundary:
        r = ZonalFunction(ctx, values=g.values.copy())
        return DecompositionResult(
            phi=Extremizer(c=0.0, tau=0.0), r=r,
            hs_distance_sq=pgg, lp_distance=lp_norm(r, ctx.params.p),
            ortho_residuals=(0.0, 0.0), degenerate=True, ties=[],
        )

    tie_records = []
    for val, tau in ties:
        pu, puu = parts(tau)
        c = pu / puu
        phi = ZonalFunction(ctx, fn=_profile_fn(c, tau, ctx.n, ctx.s))
        r = g - phi
        tie_records.append((tau, c, quadratic_form_P2s(r), lp_norm(r, ctx.params.p)))

    tau_star, c_star, hs_sq, lp_dist = tie_records[0]
    u = unit_profile(ctx, tau_star)
    du = unit_profile_dtau(ctx, tau_star)
    phi_fn = _profile_fn(c_star, tau_star, ctx.n, ctx.s)
    r = ZonalFunction(ctx, values=g.values - phi_fn(ctx.nodes), fn=None)
    o1 = quadratic_form_P2s(r, u)
    o2 = quadratic_form_P2s(r, du)
    return DecompositionResult(
        phi=Extremizer(c=c_star, tau=tau_star), r=r,
        hs_distance_sq=hs_sq, lp_distance=lp_dist,
        ortho_residuals=(o1, o2), degenerate=False, ties=tie_records,
    )


def euler_lagrange_residual(e: Extremizer, ctx: SphereContext) -> float:
    """Sup-norm on nodes of P_2s v - ||v||_p^theta v^{p-1} for the profile v."""
    if e.c <= 0:
        raise ParameterDomainError("Euler-Lagrange residual needs c > 0")
    params = ctx.params
    v = extremizer_profile(e, ctx)
    lhs = ZonalFunction(ctx, coeffs=ctx.funk_hecke * v.coeffs).values
    rhs = lp_norm(v, params.p) ** params.theta * v.values ** (params.p - 1.0)
    return float(np.max(np.abs(lhs - rhs)))


def comparability_check(g: ZonalFunction, n_starts: int = 24):
    """Ratio of residual p-norms across tied minimizers; 'unique' if no tie.

    Contract: when ties exist, max/min ratio <= b_{n,s} (comparability bound).
    """
    dec = project_Hminus_s(g, n_starts=n_starts)
    if dec.degenerate or len(dec.ties) < 2:
        return {"tied": False, "status": "unique minimizer", "decomposition": dec}
    norms = [rec[3] for rec in dec.ties]
    ratio = max(norms) / min(norms)
    return {
        "tied": True,
        "status": f"{len(dec.ties)} tied minimizers",
        "ratio": ratio,
        "taus": [rec[0] for rec in dec.ties],
        "decomposition": dec,
    }


def reverse_bound_check(e1: Extremizer, e2: Extremizer, ctx: SphereContext) -> float:
    """Residual of the reverse comparison for unit-norm extremizer differences.

    ||v1 - v2||_p^2 <= ((n+2s)/(n-2s)) 2^{2s/n} <P_2s (v1-v2), v1-v2>;
    returns RHS - LHS (contract: >= -1e-9).  Both inputs must share the same
    positive amplitude c, which fixes the common p-norm the bound assumes.
    """
    if e1.c <= 0 or e2.c <= 0:
        raise ParameterDomainError("reverse bound needs nonnegative (c > 0) extremizers")
    if abs(e1.c - e2.c) > 1.0e-12 * max(e1.c, e2.c):
        raise ParameterDomainError("reverse bound is stated for extremizers of equal amplitude")
    n, s = ctx.n, ctx.s
    d = extremizer_profile(e1, ctx) - extremizer_profile(e2, ctx)
    lhs = lp_norm(d, ctx.params.p) ** 2
    rhs = (n + 2.0 * s) / (n - 2.0 * s) * 2.0 ** (2.0 * s / n) * quadratic_form_P2s(d)
    return rhs - lhs


def off_axis_score(g: ZonalFunction, tau: float, cospsi: float) -> float:
    """Projection score <Pg, v_xi>^2 / <Pv_xi, v_xi> for an off-axis parameter xi.

    xi has modulus tau and polar angle psi against the zonal axis; the cross
    term reduces by the addition theorem to sum_l A_l a_l(g) a_l(u_tau)
    G_l(cos psi)/G_l(1).  Used to check that for zonal g the optimum sits on
    the axis (cos psi = +-1).
    """
    ctx = g.ctx
    u = unit_profile(ctx, tau)
    a_u = u.coeffs
    basis_at = ctx.eval_basis_at(np.array([cospsi, 1.0]))
    transfer = basis_at[:, 0] / basis_at[:, 1]
    pu = float(np.sum(ctx.funk_hecke * g.coeffs * a_u * transfer))
    puu = float(np.sum(ctx.funk_hecke * a_u * a_u))
    return pu * pu / puu
