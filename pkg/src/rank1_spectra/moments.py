"""Limiting even spectral moments and finite-n bounds on the expected moments.

The limiting even moment of order 2s is a sum over tree degree profiles,
weighted by exact tree counts and powers of the limiting averages Lambda_k.
For finite n the same profile sum over partial averages S_{n,k}/n, minus an
explicit repeated-index correction, lower-bounds the expected moment; an
upper bound multiplies the limit by 1 + theta*s with a fully explicit theta.
All combinatorial prefactors are exact big integers; floats enter only at the
final multiplication with Lambda/S powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .combinatorics import enumerate_degree_profiles, tree_count

__all__ = [
    "MomentRow",
    "MomentReport",
    "limiting_even_moment",
    "moment_lower_bound",
    "moment_upper_bound",
    "odd_moment_bound",
    "theta_factor",
    "MAX_ORDER",
]

MAX_ORDER = 64  # maximum s in m_{2s}

Number = Union[int, float, Fraction]


def _profile_sum(averages: Sequence[Number], s: int) -> Number:
    """sum over R_s of tree_count(profile) * prod averages[j]^r_j.

    Exact (Fraction) when every entry is an int or Fraction; float otherwise,
    accumulated profile by profile with compensated summation.
    """
    exact = all(isinstance(a, (int, Fraction)) for a in averages[:s])
    profiles = enumerate_degree_profiles(s)
    if exact:
        total = Fraction(0)
        for profile in profiles:
            term = Fraction(tree_count(profile))
            for j, rj in enumerate(profile.r, start=1):
                if rj:
                    term *= Fraction(averages[j - 1]) ** rj
            total += term
        return total
    terms = []
    for profile in profiles:
        term = float(tree_count(profile))
        for j, rj in enumerate(profile.r, start=1):
            if rj:
                term *= float(averages[j - 1]) ** rj
        terms.append(term)
    return math.fsum(terms)


def limiting_even_moment(lambdas: Sequence[Number], s: int) -> Number:
    """Moment m_{2s} of the limiting spectral distribution from Lambda_1..Lambda_s.

    Exact rational arithmetic when the Lambda values are ints/Fractions
    (useful for the constant-profile specialization); float otherwise.
    """
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if s > MAX_ORDER:
        raise ValueError(f"s={s} exceeds supported range {MAX_ORDER}")
    if len(lambdas) < s:
        raise ValueError(f"need Lambda_1..Lambda_{s}, got {len(lambdas)} entries")
    if any((not _is_positive(a)) for a in lambdas[:s]):
        raise ValueError("Lambda entries must be positive and finite")
    return _profile_sum(lambdas, s)


def _is_positive(a: Number) -> bool:
    if isinstance(a, Fraction):
        return a > 0
    return math.isfinite(float(a)) and float(a) > 0


def moment_lower_bound(values: Sequence[float], s: int) -> float:
    """Finite-n lower bound on the expected spectral moment of order 2s.

    Evaluates the profile sum at the partial averages S_{n,j}/n (identical to
    (1/n^{s+1}) * prod S^{r_j} since the profile entries sum to s+1), minus
    the repeated-index correction
        eps = (sigma_max^{2s} / n^{s+1}) * sum_{j=1..s} binom(n,j) j^{s+1-j}.
    The result may be <= 0 for small n; callers flag that as vacuous rather
    than clamping.
    """
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if n <= s:
        raise ValueError(f"need n > s, got n={n}, s={s}")
    p = v.copy()
    averages = []
    for _ in range(s):
        averages.append(float(np.sum(p, dtype=np.longdouble)) / n)
        p *= v
    main = _profile_sum(averages, s)
    correction = int(sum(math.comb(n, j) * j ** (s + 1 - j) for j in range(1, s + 1)))
    eps = float(v.max()) ** (2 * s) * float(Fraction(correction, n ** (s + 1)))
    return main - eps


def theta_factor(n: int, s: int, K: float, sigma_max: float, sigma_min: float) -> float:
    """The finite-n excess factor
        theta = (K^2 s^6 / (2 n sigma_max^2)) (sigma_max/sigma_min)^{2s}
                * n^{s-1} / (n-s)^{s+1},
    with the integer power ratio exact.  Returns +inf on float overflow."""
    if n <= s:
        raise ValueError(f"need n > s, got n={n}, s={s}")
    if not (0 < sigma_min <= sigma_max <= K):
        raise ValueError(
            f"need 0 < sigma_min <= sigma_max <= K, got {sigma_min}, {sigma_max}, {K}"
        )
    try:
        ratio_pow = (sigma_max / sigma_min) ** (2 * s)
        return (
            (K * K * s ** 6)
            / (2.0 * n * sigma_max * sigma_max)
            * ratio_pow
            * float(Fraction(n ** (s - 1), (n - s) ** (s + 1)))
        )
    except OverflowError:
        return math.inf


def moment_upper_bound(
    n: int, s: int, K: float, sigma_max: float, sigma_min: float, m_limit: float
) -> float:
    """Finite-n upper bound (1 + theta*s) * m_{2s} on the expected spectral moment.

    Returns +inf when theta overflows.  For strongly varying profiles the
    (sigma_max/sigma_min)^{2s} term makes this bound astronomically loose at
    moderate s; it is still finite and correct.
    """
    if m_limit <= 0:
        raise ValueError(f"m_limit must be > 0, got {m_limit}")
    th = theta_factor(n, s, K, sigma_max, sigma_min)
    if math.isinf(th):
        return math.inf
    return (1.0 + th * s) * m_limit


def odd_moment_bound(n: int, s: int, K: float, sigma_max: float) -> float:
    """Decay bound on the magnitude of the odd expected moment of order 2s+1.

    Evaluates
        n^{-s-1/2} * binom(2s+1, s) * (s+1)^{2(2s+3)} * 2^{2s} * K^{2s+1}
        * sum_{p=1..s+1} (n sigma_max^2 / K^2)^{p-1}
    with the combinatorial prefactor exact and the geometric sum closed-form.
    Computed in log space; returns +inf on overflow.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if K <= 0 or sigma_max <= 0:
        raise ValueError("K and sigma_max must be positive")
    prefactor = math.comb(2 * s + 1, s) * (s + 1) ** (2 * (2 * s + 3)) * 2 ** (2 * s)
    q = n * sigma_max * sigma_max / (K * K)
    if q == 1.0:
        log_geom = math.log(s + 1)
    elif q > 1.0:
        # (q^{s+1} - 1) / (q - 1), stable for large q^{s+1}
        log_geom = (s + 1) * math.log(q) + math.log1p(-q ** (-(s + 1))) - math.log(q - 1.0)
    else:
        log_geom = math.log((1.0 - q ** (s + 1)) / (1.0 - q))
    log_value = (
        math.log(prefactor)
        + (2 * s + 1) * math.log(K)
        + log_geom
        - (s + 0.5) * math.log(n)
    )
    try:
        return math.exp(log_value)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class MomentRow:
    """One even order of a moment table."""

    order: int                      # 2s
    limit: float                    # m_{2s}
    lower: Optional[float] = None   # finite-n lower bound (raw, may be <= 0)
    upper: Optional[float] = None   # finite-n upper bound (may be +inf)
    empirical_mean: Optional[float] = None
    empirical_stderr: Optional[float] = None

    @property
    def lower_vacuous(self) -> Optional[bool]:
        return None if self.lower is None else self.lower <= 0

    @property
    def upper_overflow(self) -> Optional[bool]:
        return None if self.upper is None else math.isinf(self.upper)

    @property
    def formula_gap_flagged(self) -> Optional[bool]:
        """True when the empirical mean sits more than 3 standard errors from
        the limiting formula value (the documented convention ambiguity)."""
        if self.empirical_mean is None or not self.empirical_stderr:
            return None
        return abs(self.empirical_mean - self.limit) > 3.0 * self.empirical_stderr


@dataclass(frozen=True)
class MomentReport:
    """Moment table plus the metadata needed to reproduce it."""

    rows: tuple
    n: Optional[int] = None
    sigma_text: str = ""
    K: Optional[float] = None
    seed: Optional[int] = None
    notes: tuple = field(default_factory=tuple)

    def row(self, order: int) -> MomentRow:
        for r in self.rows:
            if r.order == order:
                return r
        raise KeyError(f"no row of order {order}")
