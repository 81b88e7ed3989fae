"""Pointwise scalar inequalities behind the local certificate.

Three nested statements about (1+r)^p for 1 < p <= 2 and r >= -1:

* the cubic remainder bound
      (1+r)^p >= 1 + p r + (1/2) p (p-1) r^2 - theta (r_+)^3,  theta = 2 - p;
* the three-piece refinement with splits r = r1 + r2 + r3 at levels
  gamma < M, whose constants (C_M, C_{M,N}, ...) are constructed here
  exactly as in their derivation; and
* the assembled quadratic/cross-term lower bound with the single constant
  C_qest = 5 C_{M,N} + 8/gamma that the deficit division consumes.

All three are certified by brute force over (p, r) grids; the reports carry
the worst residual and its location so a failure is reproducible.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import ParameterDomainError

__all__ = [
    "SplitParams",
    "ScalarConstants",
    "ViolationReport",
    "split_scalar",
    "cubic_bound_residual",
    "build_constants",
    "select_N",
    "certify_cubic_bound",
    "certify_proposition1",
    "certify_qestimate",
    "default_grid",
]

_N_SEARCH_CAP = 2**30


@dataclass(frozen=True)
class SplitParams:
    """Parameters of the split inequality: levels gamma < M/2 ... M, base exponent p0.

    N is the far-field partition point; it must exceed p0/(2(p0-1)).
    """

    gamma: float
    M: float
    p0: float
    eps: float
    N: int

    def __post_init__(self):
        if not (1.0 < self.p0 < 2.0):
            raise ParameterDomainError(f"p0 must lie in (1,2), got {self.p0}")
        if self.gamma <= 0 or self.M < 2.0 * self.gamma:
            raise ParameterDomainError(f"need 0 < gamma <= M/2, got gamma={self.gamma}, M={self.M}")
        if self.eps <= 0:
            raise ParameterDomainError(f"eps must be positive, got {self.eps}")
        if self.N <= self.p0 / (2.0 * (self.p0 - 1.0)):
            raise ParameterDomainError(f"N must exceed p0/(2(p0-1)) = {self.p0/(2*(self.p0-1)):.4g}, got {self.N}")


@dataclass(frozen=True)
class ScalarConstants:
    """Constants assembled in the proof of the split inequality.

    C_MN = M^-2 max{C1_MN + C1_N, C2_MN, (17/2) M^3} and
    C_qest = 5 C_MN + 8/gamma is the single constant of the final estimate.
    tail_coef = C_M N^{1-p0} ln N multiplies the r3^p correction.
    """

    C1_MN: float
    C1_N: float
    C2_MN: float
    C3_MN: float
    C_M: float
    C_MN: float
    C_qest: float
    tail_coef: float

    def __post_init__(self):
        for name in ("C1_MN", "C1_N", "C2_MN", "C3_MN", "C_M", "C_MN", "C_qest"):
            if getattr(self, name) <= 0:
                raise ParameterDomainError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass
class ViolationReport:
    """Outcome of a brute-force certification sweep.

    count == 0 exactly when the worst residual clears -tolerance.
    """

    inequality: str
    grid: dict
    count: int
    worst_residual: float
    worst_at: dict
    tolerance: float

    @property
    def certified(self) -> bool:
        return self.count == 0


def split_scalar(r, gamma, M):
    """Split r >= -1 into r1 = min(r, gamma), r2 = min((r-gamma)_+, M-gamma), r3 = (r-M)_+.

    The identity r1 + r2 + r3 = r holds exactly, branch by branch.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < -1.0):
        raise ParameterDomainError("split_scalar requires r >= -1")
    if not (0.0 < gamma < M):
        raise ParameterDomainError(f"need 0 < gamma < M, got gamma={gamma}, M={M}")
    r1 = np.minimum(r, gamma)
    r2 = np.minimum(np.maximum(r - gamma, 0.0), M - gamma)
    r3 = np.maximum(r - M, 0.0)
    return r1, r2, r3


def _power_gap(p, r):
    """(1+r)^p - (1+r)^2, exactly zero when p == 2."""
    base = 1.0 + r
    return np.power(base, p) - base * base


def cubic_bound_residual(p, r):
    """Residual of the cubic remainder bound; contract: >= 0 on [1,2] x [-1, inf).

    Evaluated as (1+r)^p - (1+r)^2 + theta (r + (p+1) r^2 / 2) + theta (r_+)^3,
    which regroups the quadratic part so the p = 2 case is exactly zero in
    floating point (both power terms round identically).
    """
    p = float(p)
    r = np.asarray(r, dtype=float)
    if not (1.0 <= p <= 2.0):
        raise ParameterDomainError(f"p must lie in [1,2], got {p}")
    if np.any(r < -1.0):
        raise ParameterDomainError("cubic_bound_residual requires r >= -1")
    theta = 2.0 - p
    rp = np.maximum(r, 0.0)
    return _power_gap(p, r) + theta * (r + 0.5 * (p + 1.0) * r * r) + theta * rp**3


def _c3_bound(p, M, N, p0):
    """Far-field remainder constant C3_{M,N}(p) of the split-inequality proof."""
    lnN = math.log(N)
    boost = N ** (2.0 - p0) * lnN
    return (1.0 + M) / N * (1.0 + 2.0 * boost) + (1.0 + M) ** 2 / N**2 * (0.5 * (p + 1.0) + boost)


def _cm_sweep(p0, M, p_grid, n_lo, n_cap=2**20):
    """Smallest C_M with C3_{M,N} <= C_M N^{1-p0} ln N for all swept N > 2 p0/(p0-1)."""
    ns = sorted(set(list(range(n_lo, min(n_lo + 96, n_cap)))
                    + [int(round(n_lo * 2.0 ** (k / 4.0))) for k in range(0, 81)]))
    ns = [n for n in ns if n_lo <= n <= n_cap]
    best = 0.0
    p_top = float(np.max(p_grid))
    for n in ns:
        c3 = _c3_bound(p_top, M, n, p0)  # (p+1)/2 makes C3 increasing in p
        best = max(best, c3 / (n ** (1.0 - p0) * math.log(n)))
    if not math.isfinite(best) or best <= 0.0:
        raise ParameterDomainError("no finite C_M found on the sweep range")
    return best


def build_constants(sp: SplitParams, p_grid_size: int = 64) -> ScalarConstants:
    """Assemble the split-inequality constants for the given parameters.

    The p-dependent pieces C2 and C3 are maximized over a p-grid in [p0, 2];
    a conservative max keeps the constants valid for every p in the range.
    """
    M, N, p0 = sp.M, sp.N, sp.p0
    p_grid = np.linspace(p0, 2.0, p_grid_size)
    lnN = math.log(N)
    c1_mn = (1.0 + M + N) ** 2 * math.log(1.0 + M + N)
    c1_n = N**2 * lnN
    c2_mn = float(np.max(N ** (p_grid - 3.0) * (1.0 + M) ** 3))
    c3_mn = float(max(_c3_bound(p, M, N, p0) for p in p_grid))
    n_lo = int(math.floor(2.0 * p0 / (p0 - 1.0))) + 1
    c_m = _cm_sweep(p0, M, p_grid, n_lo)
    c_mn = max(c1_mn + c1_n, c2_mn, 8.5 * M**3) / M**2
    c_qest = 5.0 * c_mn + 8.0 / sp.gamma
    tail = c_m * N ** (1.0 - p0) * lnN
    return ScalarConstants(
        C1_MN=c1_mn, C1_N=c1_n, C2_MN=c2_mn, C3_MN=c3_mn,
        C_M=c_m, C_MN=c_mn, C_qest=c_qest, tail_coef=tail,
    )


def select_N(p0, M, eps, cap: int = _N_SEARCH_CAP) -> int:
    """Smallest integer N with N > p0/(2(p0-1)) and C_M N^{1-p0} ln N <= eps.

    Doubling-then-bisection on the eventually decreasing target, then a
    short backward scan to pin minimality; deterministic.
    """
    if eps <= 0:
        raise ParameterDomainError(f"eps must be positive, got {eps}")
    floor_n = int(math.floor(p0 / (2.0 * (p0 - 1.0)))) + 1
    floor_n = max(floor_n, 2)
    p_grid = np.linspace(p0, 2.0, 64)
    n_lo = int(math.floor(2.0 * p0 / (p0 - 1.0))) + 1
    c_m = _cm_sweep(p0, M, p_grid, n_lo)

    def ok(n):
        return c_m * n ** (1.0 - p0) * math.log(n) <= eps

    if ok(floor_n):
        return floor_n
    hi = floor_n
    while not ok(hi):
        hi *= 2
        if hi > cap:
            raise ParameterDomainError(f"eps={eps} unattainable with N <= {cap}")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    while hi - 1 > floor_n and ok(hi - 1):
        hi -= 1
    return hi


def default_grid(r_max=1.0e3, r_points=100_000, p_points=21, p_lo=None):
    """Certification grid: r linear on [-1,1], log-spaced on [1, r_max]."""
    n_lin = r_points // 2
    r = np.concatenate([
        np.linspace(-1.0, 1.0, n_lin),
        np.geomspace(1.0, r_max, r_points - n_lin + 1)[1:],
    ])
    return {"r": r, "p_points": p_points, "p_lo": p_lo, "r_max": r_max}


def _sweep(name, sp, grid, residual_fn, tolerance):
    p_lo = grid.get("p_lo")
    if p_lo is None:
        p_lo = sp.p0
    ps = np.linspace(p_lo, 2.0, grid["p_points"])
    r = grid["r"]
    count = 0
    worst = np.inf
    worst_at = {}
    for p in ps:
        res = residual_fn(float(p), r)
        bad = res < -tolerance
        count += int(np.count_nonzero(bad))
        k = int(np.argmin(res))
        if res[k] < worst:
            worst = float(res[k])
            worst_at = {"p": float(p), "r": float(r[k])}
    desc = {
        "r_points": int(r.size), "r_min": float(r[0]), "r_max": float(r[-1]),
        "p_points": int(ps.size), "p_lo": float(ps[0]), "p_hi": float(ps[-1]),
    }
    return ViolationReport(
        inequality=name, grid=desc, count=count,
        worst_residual=worst, worst_at=worst_at, tolerance=tolerance,
    )


def certify_cubic_bound(grid=None, tolerance=1.0e-10) -> ViolationReport:
    """Brute-force sweep of the cubic remainder bound over [1,2] x [-1, r_max]."""
    if grid is None:
        grid = default_grid(p_lo=1.0)
    if grid.get("p_lo") is None:
        grid = dict(grid, p_lo=1.0)
    return _sweep("cubic-bound", None, grid, cubic_bound_residual, tolerance)


def _prop1_residual(sp: SplitParams, consts: ScalarConstants, p, r):
    """LHS - RHS of the three-piece split inequality at one p over an r-vector.

    RHS = (1/2)p(p-1)(r1+r2)^2 + 2(r1+r2)r3 + (1 - tail_coef * theta) r3^p
          - ((3/2) gamma theta r1^2 + C_MN theta r2^2) [r <= M]
          - C_MN theta M^2 [r > M].

    At p = 2 both sides collapse to the same quadratic and the residual is an
    algebraic identity; that row returns exact zeros.
    """
    theta = 2.0 - p
    if theta == 0.0:
        return np.zeros_like(r)
    r1, r2, r3 = split_scalar(r, sp.gamma, sp.M)
    lhs = _power_gap(p, r) + (2.0 - p) * r + r * r
    low = r <= sp.M
    rhs = (
        0.5 * p * (p - 1.0) * (r1 + r2) ** 2
        + 2.0 * (r1 + r2) * r3
        + (1.0 - consts.tail_coef * theta) * np.where(r3 > 0.0, r3, 0.0) ** p
        - np.where(low, 1.5 * sp.gamma * theta * r1 * r1 + consts.C_MN * theta * r2 * r2, 0.0)
        - np.where(low, 0.0, consts.C_MN * theta * sp.M**2)
    )
    return lhs - rhs


def _qest_residual(sp: SplitParams, consts: ScalarConstants, p, r):
    """LHS - RHS of the assembled quadratic estimate at one p over an r-vector.

    RHS = ((1/2)p(p-1) - 2 gamma theta) r1^2 + ((1/2)p(p-1) - C_qest theta) r2^2
          + 2 r1 r2 + 2 (r1+r2) r3 + (1 - eps theta) r3^p.
    """
    theta = 2.0 - p
    if theta == 0.0:
        return np.zeros_like(r)
    r1, r2, r3 = split_scalar(r, sp.gamma, sp.M)
    lhs = _power_gap(p, r) + (2.0 - p) * r + r * r
    rhs = (
        (0.5 * p * (p - 1.0) - 2.0 * sp.gamma * theta) * r1 * r1
        + (0.5 * p * (p - 1.0) - consts.C_qest * theta) * r2 * r2
        + 2.0 * r1 * r2
        + 2.0 * (r1 + r2) * r3
        + (1.0 - sp.eps * theta) * np.where(r3 > 0.0, r3, 0.0) ** p
    )
    return lhs - rhs


def certify_proposition1(sp: SplitParams, consts: ScalarConstants, grid=None,
                         tolerance=1.0e-10) -> ViolationReport:
    """Certify the three-piece split inequality on the grid; zero violations expected."""
    if grid is None:
        grid = default_grid()
    return _sweep("three-piece-split", sp, grid,
                  lambda p, r: _prop1_residual(sp, consts, p, r), tolerance)


def certify_qestimate(sp: SplitParams, consts: ScalarConstants, grid=None,
                      tolerance=1.0e-10) -> ViolationReport:
    """Certify the assembled quadratic estimate on the grid; zero violations expected."""
    if grid is None:
        grid = default_grid()
    return _sweep("quadratic-estimate", sp, grid,
                  lambda p, r: _qest_residual(sp, consts, p, r), tolerance)
