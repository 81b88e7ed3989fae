"""Discrete competing-symmetries dynamics on R^n.

One step composes the conformal map

    (U f)(x) = (2/|x-e_n|^2)^{n/p} f( 2x'/|x-e_n|^2, (|x|^2-1)/|x-e_n|^2 )

(an L^p isometry: the induced point map comes from an orthogonal map of the
sphere, so 1 + |Tx|^2 = 2 (1 + |x|^2)/|x-e_n|^2 exactly) with the symmetric
decreasing rearrangement R.  Iterates (RU)^k f converge to the fixed profile
h(x) = ||f||_p |S^n|^{-1/p} (2/(1+|x|^2))^{n/p}; along the way the p-norm is
conserved and the fractional quadratic form grows monotonically, which this
module measures through the zonal lift of each radial iterate.

Functions are axially symmetric about e_n and live on a log-radial x
angular-cosine grid; rearrangement works on the exact discrete measure of
that grid (sort by value, accumulate cell masses, invert the distribution),
so equimeasurability holds to interpolation accuracy rather than to a level
grid's resolution.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator, RectBivariateSpline

from .constants import (ParameterDomainError, ProblemParams, log_sphere_area,
                        thresholds)
from .extremizers import project_Hminus_s
from .sphere import (SphereContext, ZonalFunction, gauss_jacobi, hls_deficit,
                     lp_norm, quadratic_form_P2s, radius_of_node)

__all__ = [
    "AxiSymFunction",
    "FlowTrace",
    "axisym_from_callable",
    "radial_from_callable",
    "target_profile",
    "apply_U",
    "rearrange",
    "competing_iteration",
    "monotonicity_check",
    "residual_decay_check",
    "global_ratio_demo",
    "lift_radial_iterate",
]

RHO_MIN, RHO_MAX = 1.0e-4, 1.0e4
N_RADIAL, N_ANGULAR = 1025, 64


@dataclass
class AxiSymFunction:
    """Nonnegative axially symmetric function on a (log-radius, mu) grid.

    The R^n measure of a cell is |S^{n-1}| rho^{n-1} drho times the angular
    probability weight; radial integrals run over log-radius with composite
    Simpson weights, so the node count must be odd.
    """

    n: int
    p_exp: float
    rho: np.ndarray
    mu: np.ndarray
    wmu: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.rho.size % 2 == 0:
            raise ParameterDomainError("radial grid must have an odd node count for Simpson")
        if np.any(self.values < 0.0):
            raise ParameterDomainError("axisymmetric flow functions must be nonnegative")
        self.lam = np.log(self.rho)
        h = self.lam[1] - self.lam[0]
        sw = np.full(self.rho.size, 2.0)
        sw[1::2] = 4.0
        sw[0] = sw[-1] = 1.0
        # radial weight for int F(rho) rho^{n-1} drho = int F e^{n lam} dlam
        self.radial_w = sw * (h / 3.0) * np.exp(self.n * self.lam)
        self.area_sn1 = math.exp(log_sphere_area(self.n - 1))

    @property
    def is_radial(self) -> bool:
        return bool(np.all(self.values == self.values[:, :1]))

    def integral(self, integrand) -> float:
        """int_{R^n} integrand dx for nodal integrand values (R, M)."""
        ang = integrand @ self.wmu
        return self.area_sn1 * float(self.radial_w @ ang)

    def norm(self, p=None) -> float:
        p = self.p_exp if p is None else p
        return self.integral(self.values**p) ** (1.0 / p)

    def radial_values(self) -> np.ndarray:
        if not self.is_radial:
            raise ParameterDomainError("not a radial function")
        return self.values[:, 0]

    def with_values(self, values) -> "AxiSymFunction":
        return AxiSymFunction(self.n, self.p_exp, self.rho, self.mu, self.wmu, values)


def _grid(n, rho_min, rho_max, n_radial, n_angular):
    rho = np.geomspace(rho_min, rho_max, n_radial)
    mu, wmu = gauss_jacobi(n_angular, 0.5 * (n - 3.0), 0.5 * (n - 3.0))
    return rho, mu, wmu


def axisym_from_callable(n, p_exp, fn: Callable, rho_min=RHO_MIN, rho_max=RHO_MAX,
                         n_radial=N_RADIAL, n_angular=N_ANGULAR) -> AxiSymFunction:
    """Sample fn(rho, mu) on the standard grid (n >= 3)."""
    if n < 3:
        raise ParameterDomainError(f"need n >= 3, got {n}")
    rho, mu, wmu = _grid(n, rho_min, rho_max, n_radial, n_angular)
    vals = np.asarray(fn(rho[:, None], mu[None, :]), dtype=float)
    vals = np.broadcast_to(vals, (rho.size, mu.size)).copy()
    return AxiSymFunction(n, float(p_exp), rho, mu, wmu, vals)


def radial_from_callable(n, p_exp, fn: Callable, **kw) -> AxiSymFunction:
    return axisym_from_callable(n, p_exp, lambda r, m: fn(r) + 0.0 * m, **kw)


def target_profile(n, p_exp, norm_p) -> Callable:
    """Limit profile h(rho) = norm_p |S^n|^{-1/p} (2/(1+rho^2))^{n/p}."""
    amp = norm_p * math.exp(-log_sphere_area(n) / p_exp)

    def h(rho):
        return amp * (2.0 / (1.0 + np.asarray(rho, dtype=float) ** 2)) ** (n / p_exp)

    return h


class _RadialInterp:
    """Cubic spline in log-radius with power-law decay past the grid."""

    def __init__(self, f: AxiSymFunction):
        self.lam_lo, self.lam_hi = f.lam[0], f.lam[-1]
        self.spline = CubicSpline(f.lam, f.radial_values())
        self.lo_val = float(f.values[0, 0])
        self.hi_val = float(f.values[-1, 0])
        self.tail_pow = 2.0 * f.n / f.p_exp

    def __call__(self, rho):
        lam = np.log(np.maximum(rho, 1.0e-300))
        out = self.spline(np.clip(lam, self.lam_lo, self.lam_hi))
        out = np.where(lam < self.lam_lo, self.lo_val, out)
        hi = lam > self.lam_hi
        if np.any(hi):
            out = np.where(hi, self.hi_val * np.exp(-self.tail_pow * (lam - self.lam_hi)), out)
        return np.maximum(out, 0.0)


def _interp2d(f: AxiSymFunction):
    spl = RectBivariateSpline(f.lam, f.mu, f.values, kx=3, ky=3)
    lam_lo, lam_hi = f.lam[0], f.lam[-1]
    mu_lo, mu_hi = f.mu[0], f.mu[-1]
    tail_pow = 2.0 * f.n / f.p_exp
    edge = f.values[-1, :]

    def ev(rho, mu):
        lam = np.log(np.maximum(rho, 1.0e-300))
        mu_c = np.clip(mu, mu_lo, mu_hi)
        out = spl.ev(np.clip(lam, lam_lo, lam_hi), mu_c)
        over = lam > lam_hi
        if np.any(over):
            decay = np.exp(-tail_pow * (lam - lam_hi))
            edge_vals = np.interp(mu_c, f.mu, edge)
            out = np.where(over, edge_vals * decay, out)
        return np.maximum(out, 0.0)

    return ev


def apply_U(f: AxiSymFunction) -> AxiSymFunction:
    """Conformal step; output on the same grid, p-norm preserved.

    Image coordinates for x = (rho, mu), D = 1 + rho^2 - 2 rho mu:
    rho'^2 = (1 + rho^2 + 2 rho mu)/D and mu' = (rho^2 - 1)/(D rho');
    values are (2/D)^{n/p} f(rho', mu').  Points mapped past the radial grid
    use power-law decay extrapolation with exponent 2n/p.
    """
    rho = f.rho[:, None]
    mu = f.mu[None, :]
    D = 1.0 + rho * rho - 2.0 * rho * mu
    rho_im = np.sqrt((1.0 + rho * rho + 2.0 * rho * mu) / D)
    with np.errstate(invalid="ignore"):
        mu_im = np.clip((rho * rho - 1.0) / (D * rho_im), -1.0, 1.0)
    if f.is_radial:
        interp = _RadialInterp(f)
        sampled = interp(rho_im)
    else:
        interp = _interp2d(f)
        sampled = interp(rho_im.ravel(), np.broadcast_to(mu_im, D.shape).ravel()).reshape(D.shape)
    vals = (2.0 / D) ** (f.n / f.p_exp) * sampled
    return f.with_values(vals)


def _column_runs(lam_fine, c, n):
    """Monotone runs of one angular column as inverse-interpolation tables.

    Returns a list of (c_ascending, rho^n_matching, sign, offset) so that the
    run's super-level measure contribution at level t is
    sign * (interp(t) - offset), with np.interp's endpoint fill making the
    clamping below/above the run's value range automatic.
    """
    rhon = np.exp(n * lam_fine)
    d = np.diff(c)
    sgn = np.sign(d)
    for k in range(1, sgn.size):  # zero-steps continue the current run
        if sgn[k] == 0.0:
            sgn[k] = sgn[k - 1]
    if sgn.size and sgn[0] == 0.0:
        nz = sgn[sgn != 0.0]
        sgn[0] = nz[0] if nz.size else 1.0
    breaks = [0] + [k + 1 for k in range(sgn.size - 1) if sgn[k + 1] != sgn[k]] + [c.size - 1]
    runs = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        cv, rv = c[a: b + 1], rhon[a: b + 1]
        if sgn[a] > 0:
            # increasing run: measure{c > t} part = rho_end^n - rho_inv(t)^n
            runs.append((cv, rv, -1.0, -rv[-1]))
        else:
            # decreasing run: part = rho_inv(t)^n - rho_start^n
            runs.append((cv[::-1], rv[::-1], 1.0, rv[0]))
    return runs


def rearrange(f: AxiSymFunction, refine: int = 16) -> AxiSymFunction:
    """Symmetric decreasing rearrangement by distribution-function inversion.

    The distribution lambda(t) = |{f > t}| decomposes exactly over the
    angular quadrature into per-column super-level measures; each column is
    smooth in log-radius, so its level-set boundaries come from inverse
    interpolation of spline-refined monotone runs.  f*(rho) then solves
    lambda(t) = omega_n rho^n by vectorized bisection, giving pointwise
    samples of a smooth quantile (no cell-granularity staircase), and the
    p-norm is conserved to quadrature accuracy.
    """
    n = f.n
    lam_fine = np.linspace(f.lam[0], f.lam[-1], (f.lam.size - 1) * refine + 1)
    tables = []
    v_max = 0.0
    for j in range(f.mu.size):
        col = f.values[:, j]
        cf = np.maximum(PchipInterpolator(f.lam, col)(lam_fine), 0.0) if refine > 1 else col
        v_max = max(v_max, float(cf.max()))
        for cv, rv, sign, off in _column_runs(lam_fine, cf, n):
            tables.append((cv, rv, f.wmu[j] * sign, f.wmu[j] * off))

    def level_measure(t):
        acc = np.zeros_like(t)
        for cv, rv, wsign, woff in tables:
            acc += wsign * np.interp(t, cv, rv) + woff
        return f.area_sn1 / n * acc

    omega_n = math.pi ** (0.5 * n) / math.gamma(0.5 * n + 1.0)
    targets = omega_n * f.rho**n
    lo = np.zeros_like(targets)
    hi = np.full_like(targets, v_max)
    for _ in range(52):
        mid = 0.5 * (lo + hi)
        above = level_measure(mid) > targets
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    star = np.minimum.accumulate(0.5 * (lo + hi))
    out = np.repeat(star[:, None], f.mu.size, axis=1)
    return f.with_values(out)


@dataclass
class FlowTrace:
    """Per-iteration diagnostics of the (RU)^k dynamics."""

    n: int
    s: float
    p_exp: float
    H: float
    norms: List[float] = field(default_factory=list)
    qforms: List[float] = field(default_factory=list)
    dist_h: List[float] = field(default_factory=list)
    r_norms: List[float] = field(default_factory=list)
    phi_dist: List[float] = field(default_factory=list)
    extrapolation_steps: int = 0


def lift_radial_iterate(g: AxiSymFunction, ctx: SphereContext) -> ZonalFunction:
    """Zonal lift of a radial iterate onto the sphere context's nodes."""
    interp = _RadialInterp(g)
    rho = radius_of_node(ctx.nodes)
    factor = (0.5 * (1.0 + rho * rho)) ** (g.n / g.p_exp)
    return ZonalFunction(ctx, values=factor * interp(rho))


def _sphere_ctx_for(f: AxiSymFunction, ctx: Optional[SphereContext]) -> SphereContext:
    from .sphere import make_context

    s = f.n * (2.0 - f.p_exp) / (2.0 * f.p_exp)
    if ctx is not None:
        if abs(ctx.params.s - s) > 1.0e-9 or ctx.n != f.n:
            raise ParameterDomainError("sphere context does not match the flow exponents")
        return ctx
    return make_context(f.n, s, L=48, Q=192)


def competing_iteration(f: AxiSymFunction, k_max: int,
                        ctx: Optional[SphereContext] = None,
                        project: bool = True,
                        drift_abort: float = 1.0e-4) -> FlowTrace:
    """Run g_{k+1} = rearrange(apply_U(g_k)) for k_max steps with diagnostics.

    Records ||g_k||_p, the lifted quadratic form <P_2s G_k, G_k> (k >= 1,
    radial iterates), ||g_k - h||_p, and the residual norm of the zonal
    H^{-s} decomposition.  Aborts if the p-norm drifts beyond drift_abort.
    """
    if k_max < 1:
        raise ParameterDomainError("k_max must be >= 1")
    ctx = _sphere_ctx_for(f, ctx)
    p = f.p_exp
    norm0 = f.norm()
    if norm0 == 0.0:
        raise ParameterDomainError("flow needs a nonzero start")
    h_fn = target_profile(f.n, p, norm0)
    h_grid = h_fn(f.rho)[:, None] * np.ones_like(f.values)
    H = norm0 * math.exp(-log_sphere_area(f.n) / p)
    trace = FlowTrace(n=f.n, s=ctx.s, p_exp=p, H=H)

    g = f
    for k in range(k_max + 1):
        nrm = g.norm()
        trace.norms.append(nrm)
        trace.dist_h.append(g.with_values(np.abs(g.values - h_grid)).norm())
        if k >= 1 and g.is_radial:
            G = lift_radial_iterate(g, ctx)
            trace.qforms.append(quadratic_form_P2s(G))
            if project:
                dec = project_Hminus_s(G)
                trace.r_norms.append(dec.lp_distance)
                phi_on_nodes = G.values - dec.r.values
                trace.phi_dist.append(lp_norm(ZonalFunction(ctx, values=phi_on_nodes - H), p))
        else:
            trace.qforms.append(float("nan"))
            if project:
                trace.r_norms.append(float("nan"))
                trace.phi_dist.append(float("nan"))
        if abs(nrm - norm0) > drift_abort * norm0:
            raise ParameterDomainError(
                f"p-norm drift {abs(nrm - norm0)/norm0:.3e} at step {k} exceeds {drift_abort}")
        if k < k_max:
            g = rearrange(apply_U(g))
    return trace


def monotonicity_check(trace: FlowTrace, tol: float = 1.0e-9) -> dict:
    """Assert the lifted quadratic form is nondecreasing along the trace."""
    q = np.asarray([v for v in trace.qforms if not math.isnan(v)])
    if q.size < 2:
        raise ParameterDomainError("monotonicity check needs at least two recorded iterates")
    diffs = np.diff(q)
    scale = max(1.0, float(np.max(np.abs(q))))
    bad = np.nonzero(diffs < -tol * scale)[0]
    return {
        "monotone": bad.size == 0,
        "min_increment": float(np.min(diffs)),
        "violations": [int(i) + 1 for i in bad],
        "values": q.tolist(),
    }


def residual_decay_check(trace: FlowTrace, frac: float = 0.05) -> dict:
    """Check the decomposition residual has decayed below frac * ||g||_p."""
    r = [v for v in trace.r_norms if not math.isnan(v)]
    if not r:
        raise ParameterDomainError("trace has no recorded residual norms")
    norm = trace.norms[0]
    fin = r[-1]
    triangle_ok = True
    for k, rv in enumerate(trace.r_norms):
        if math.isnan(rv):
            continue
        bound = trace.dist_h[k] + trace.phi_dist[k]
        if rv > bound + 1.0e-7 * max(1.0, norm):
            triangle_ok = False
    return {
        "decayed": fin <= frac * norm,
        "final_residual": fin,
        "target": frac * norm,
        "min_residual": min(r),
        "triangle_ok": triangle_ok,
    }


def global_ratio_demo(f: AxiSymFunction, k_max: int = 12,
                      ctx: Optional[SphereContext] = None,
                      delta: Optional[float] = None) -> dict:
    """Link-by-link evaluation of the far-from-manifold quotient chain.

    deficit(f)/dist^2 >= deficit(f)/||f||_p^2 >= deficit(g_k)/||g_k||_p^2:
    the first link uses dist <= ||f||_p (the zero function lies in the
    manifold), the second the growth of the quadratic form under the flow.
    The precondition ||r||_p^2 >= delta ||f||_p^2 is checked on every tied
    minimizer found; if the search cannot certify it, the report says so.
    """
    if not f.is_radial:
        raise ParameterDomainError("the quotient demo expects a radial start")
    ctx = _sphere_ctx_for(f, ctx)
    if delta is None:
        ts = thresholds_for_demo(ctx.params)
        delta = 0.5 * ts / (1.0 + ts)
    F = lift_radial_iterate(f, ctx)
    dec = project_Hminus_s(F)
    norm_sq = lp_norm(F, ctx.params.p) ** 2
    tie_norms = [rec[3] for rec in dec.ties] or [dec.lp_distance]
    pre_ok = all(t**2 >= delta * norm_sq for t in tie_norms)
    deficit = hls_deficit(F).deficit
    trace = competing_iteration(f, k_max, ctx=ctx, project=False)
    links = []
    ok = True
    l1 = deficit / dec.lp_distance**2 if dec.lp_distance > 0 else float("inf")
    l2 = deficit / norm_sq
    if l1 < l2 * (1.0 - 1.0e-9):
        ok = False
    prev = l2
    for q in trace.qforms:
        if math.isnan(q):
            continue
        lk = (norm_sq - q) / norm_sq
        links.append(lk)
        if prev < lk - 1.0e-9 * max(1.0, abs(prev)):
            ok = False
        prev = lk
    return {
        "precondition_verified": pre_ok,
        "delta": delta,
        "deficit": deficit,
        "ratio_dist": l1,
        "ratio_norm": l2,
        "flow_ratios": links,
        "chain_ok": ok,
        "n_times_ratio": ctx.n * l1,
    }


def thresholds_for_demo(params: ProblemParams) -> float:
    """delta0 with the default pack (eps1 = 1/16, eps2 = 1/8, K = 1)."""
    return thresholds(params, 1.0 / 16.0, 1.0 / 8.0, K=1).delta0
