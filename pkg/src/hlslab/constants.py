"""Closed-form constants of the sharp HLS theory on the sphere.

Everything here is a pure function of the dimension n and the order s:
the sharp constant S_{s,n}, the Funk-Hecke multiplier A_{n,s}(l) of the
fractional integral operator, spherical-harmonic multiplicities N(n,l),
the comparability bound b_{n,s} for residual norms of tied projections,
the smallness thresholds (delta1, delta2, delta0) of the local-stability
certificate, and the positive/general constant relation.

Gamma-quotients are evaluated through log-gamma or telescoping products,
never as quotients of raw gamma values, so every formula stays finite for
dimensions up to 1e10 and beyond.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "ProblemParams",
    "ThresholdSet",
    "sphere_area",
    "sharp_constant",
    "funk_hecke_eigenvalue",
    "funk_hecke_eigenvalues",
    "multiplicity",
    "comparability_bound",
    "thresholds",
    "constant_relation",
]


class ParameterDomainError(ValueError):
    """A constant was requested outside its validity domain."""


@dataclass(frozen=True)
class ProblemParams:
    """Instance (n, s) of the HLS problem with its derived exponents.

    p = 2n/(n+2s) is the HLS exponent, q = 2n/(n-2s) its dual, and
    theta = 2-p = 4s/(n+2s) the departure from the Hilbert case.
    Requires n >= 3 and 0 < s < n/2.
    """

    n: int
    s: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ParameterDomainError(f"dimension n must be an integer >= 3, got {self.n}")
        if not (0.0 < self.s < self.n / 2.0):
            raise ParameterDomainError(f"order s must satisfy 0 < s < n/2, got s={self.s}, n={self.n}")

    @property
    def p(self) -> float:
        return 2.0 * self.n / (self.n + 2.0 * self.s)

    @property
    def q(self) -> float:
        return 2.0 * self.n / (self.n - 2.0 * self.s)

    @property
    def theta(self) -> float:
        return 4.0 * self.s / (self.n + 2.0 * self.s)


@dataclass(frozen=True)
class ThresholdSet:
    """Certificate smallness thresholds; delta0 = min(delta1, delta2).

    delta2 underflows to zero for very large K (its log10 is kept in
    log10_delta2); a ThresholdSet is `usable` only when all deltas are
    representable positive numbers below one.
    """

    delta1: float
    delta2: float
    delta0: float
    K: int
    n0: Optional[int] = None
    log10_delta2: float = float("nan")

    @property
    def usable(self) -> bool:
        return 0.0 < self.delta0 < 1.0


def log_sphere_area(n):
    """log |S^n| with |S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2)."""
    return math.log(2.0) + 0.5 * (n + 1.0) * math.log(math.pi) - math.lgamma(0.5 * (n + 1.0))


def sphere_area(n):
    return math.exp(log_sphere_area(n))


def sharp_constant(params: ProblemParams) -> float:
    """Sharp HLS/Sobolev constant S_{s,n} = Gamma((n+2s)/2)/Gamma((n-2s)/2) * |S^n|^{2s/n}."""
    n, s = params.n, params.s
    log_ratio = math.lgamma(0.5 * (n + 2.0 * s)) - math.lgamma(0.5 * (n - 2.0 * s))
    return math.exp(log_ratio + (2.0 * s / n) * log_sphere_area(n))


def sharp_constant_flat_form(params: ProblemParams) -> float:
    """Same constant via (4 pi)^s * Gamma-ratio * (Gamma(n/2)/Gamma(n))^{2s/n}."""
    n, s = params.n, params.s
    log_val = (
        s * math.log(4.0 * math.pi)
        + math.lgamma(0.5 * (n + 2.0 * s))
        - math.lgamma(0.5 * (n - 2.0 * s))
        + (2.0 * s / n) * (math.lgamma(0.5 * n) - math.lgamma(float(n)))
    )
    return math.exp(log_val)


def funk_hecke_eigenvalue(params: ProblemParams, l: int) -> float:
    """Multiplier A_{n,s}(l) of the fractional integral operator on degree-l harmonics.

    Telescoping product prod_{j<l} (n/2-s+j)/(n/2+s+j); A(0) = 1 and A is
    strictly decreasing in l.
    """
    if l < 0 or int(l) != l:
        raise ParameterDomainError(f"degree l must be a nonnegative integer, got {l}")
    n, s = params.n, params.s
    j = np.arange(l, dtype=float)
    return float(np.prod((0.5 * n - s + j) / (0.5 * n + s + j)))


def funk_hecke_eigenvalues(params: ProblemParams, lmax: int) -> np.ndarray:
    """A_{n,s}(l) for l = 0..lmax as one cumulative product."""
    n, s = params.n, params.s
    j = np.arange(lmax, dtype=float)
    out = np.ones(lmax + 1)
    if lmax > 0:
        out[1:] = np.cumprod((0.5 * n - s + j) / (0.5 * n + s + j))
    return out


# Results beyond this many bits are reported as overflow rather than computed.
_MULTIPLICITY_BIT_CAP = 1 << 22


def multiplicity(n: int, l: int) -> int:
    """Dimension N(n,l) of degree-l spherical harmonics on S^n, exactly.

    N(n,l) = (2l+n-1) Gamma(l+n-1) / (Gamma(l+1) Gamma(n)), an integer;
    computed as C(n+l-1, l) + C(n+l-2, l-1) in exact arithmetic.
    """
    if n < 2 or l < 0:
        raise ParameterDomainError(f"multiplicity needs n >= 2, l >= 0, got n={n}, l={l}")
    if l == 0:
        return 1
    if l * math.log2(max(n, 2)) > _MULTIPLICITY_BIT_CAP:
        raise OverflowError(f"N(n,l) for n={n}, l={l} exceeds the supported size")
    return math.comb(n + l - 1, l) + math.comb(n + l - 2, l - 1)


def comparability_bound(params: ProblemParams) -> float:
    """b_{n,s} = 1 + 2^{1+s/n} sqrt((n+2s)/(n-2s)); always > 3."""
    n, s = params.n, params.s
    return 1.0 + 2.0 ** (1.0 + s / n) * math.sqrt((n + 2.0 * s) / (n - 2.0 * s))


_LOG3 = math.log(3.0)


def thresholds(
    params: ProblemParams,
    eps1: float,
    eps2: float,
    K: int = 1,
    n0: Optional[int] = None,
    conservative_p2: bool = False,
) -> ThresholdSet:
    """Certificate thresholds delta1, delta2(K), delta0 = min.

    delta1 = 98 eps1 / 280^2.  delta2 solves 1 - 3^K gamma^{-p/2} delta2^{p/4} = 2/3
    exactly, i.e. delta2 = gamma^2 3^{-4(K+1)/p} with gamma = eps1/2.  The p used
    is the instance's own p; `conservative_p2` substitutes the p -> 2 limit.
    """
    if not (0.0 < eps1 <= 1.0 / 16.0):
        raise ParameterDomainError(f"eps1 must lie in (0, 1/16], got {eps1}")
    if not (0.0 < eps2 <= 1.0 / 8.0):
        raise ParameterDomainError(f"eps2 must lie in (0, 1/8], got {eps2}")
    if K < 1 or int(K) != K:
        raise ParameterDomainError(f"K must be an integer >= 1, got {K}")
    gamma = 0.5 * eps1
    delta1 = 98.0 * eps1 / 280.0**2
    p_eff = 2.0 if conservative_p2 else params.p
    log_d2 = 2.0 * math.log(gamma) - 4.0 * (K + 1.0) / p_eff * _LOG3
    delta2 = math.exp(log_d2) if log_d2 > -745.0 else 0.0
    delta0 = min(delta1, delta2)
    return ThresholdSet(
        delta1=delta1,
        delta2=delta2,
        delta0=delta0,
        K=int(K),
        n0=n0,
        log10_delta2=log_d2 / math.log(10.0),
    )


def constant_relation(c_pos: float, params: ProblemParams) -> float:
    """Lower bound for the general stability constant from the nonnegative one.

    Returns (1/2) min{c_pos, min{2^{(n+2s)/n} - 2, 1}}.
    """
    if c_pos < 0:
        raise ParameterDomainError(f"c_pos must be nonnegative, got {c_pos}")
    n, s = params.n, params.s
    bridge = min(2.0 ** ((n + 2.0 * s) / n) - 2.0, 1.0)
    return 0.5 * min(c_pos, bridge)
