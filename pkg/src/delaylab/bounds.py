"""Closed-form bounds on conditioning and volume of delay matrices.

Each bound comes with a regime tag: the scalar and Hermitian bounds
split on whether any weight singular value sits on the unit circle
(within UNIT_WINDOW), and the general-weight condition bound only
applies when the largest weight singular value stays below one half.
Outside its regime a bound is reported as +inf with a NOT_APPLICABLE
tag rather than silently extrapolated.

The embedding verdict collects the three sufficient conditions under
which the delay matrix provably has full row rank: a weak small-norm
condition, a small-gain condition for contractive weights, and an
expansiveness condition for weights with all singular values >= 1.
Equality in any condition still guarantees rank (the verdict margin is
the largest signed slack over the applicable conditions).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import matcore
from .delaymat import DelaySpec, WClass, build_delay_matrix
from .exceptions import InvalidParamsError, InvalidRangeError, OutOfRegimeError
from .spectra import UNIT_WINDOW

_LN10 = math.log(10.0)


class KappaRegime(enum.Enum):
    AWAY_FROM_UNIT = "away-from-unit"
    AT_UNIT = "at-unit"
    GENERAL_HALF = "general-half"
    NOT_APPLICABLE = "not-applicable"


class DetRegime(enum.Enum):
    SUB_UNIT = "sub-unit"
    AT_UNIT = "at-unit"
    SUPER_UNIT = "super-unit"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class EmbeddingVerdict:
    """Outcome of the sufficient full-rank conditions at (sigma_min, sigma_max).

    ``margin`` is the largest signed slack over the conditions that apply
    at this point; ``guaranteed`` is true when sigma_max is zero or some
    applicable condition holds (margin >= 0).
    """

    weak_ok: bool
    small_gain_ok: bool
    expansive_ok: bool
    guaranteed: bool
    margin: float


@dataclass(frozen=True)
class BoundReport:
    """Bounds applicable to one spec, with their regime tags."""

    kappa_bound: float
    kappa_regime: KappaRegime
    det_bound_log: float
    det_regime: DetRegime
    embedding: EmbeddingVerdict


def _check_sigma(x, name: str) -> float:
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise InvalidRangeError(f"{name} must be finite and >= 0, got {x!r}")
    return x


def scalar_cond_bound(omega, n: int) -> float:
    """Condition number bound for a scalar weight.

    |(|omega|+1)/(|omega|-1)| away from the unit circle; on it (within
    UNIT_WINDOW) the lag-dependent value (2/pi)(n+1).
    """
    if n < 1:
        raise InvalidParamsError("n must be positive")
    x = abs(complex(omega))
    if abs(x - 1.0) <= UNIT_WINDOW:
        return (2.0 / math.pi) * (n + 1)
    return abs((x + 1.0) / (x - 1.0))


def scalar_det_bound(omega, n: int) -> float:
    """Log upper bound on the scalar generalized determinant.

    Splits on |omega| against 1: geometric-tail bounds on either side,
    0.5*log(n+1) exactly on the circle.
    """
    if n < 1:
        raise InvalidParamsError("n must be positive")
    x = abs(complex(omega))
    if abs(x - 1.0) <= UNIT_WINDOW:
        return 0.5 * math.log(n + 1)
    if x < 1.0:
        return -0.5 * math.log(1.0 - x * x)
    return n * math.log(x) - 0.5 * math.log(1.0 - 1.0 / (x * x))


def hermitian_cond_bound(sing_w, n: int) -> float:
    """Condition number bound for a Hermitian weight from its singular values.

    (sigma_max+1)/min_j|sigma_j - 1| when no singular value is on the
    unit circle; ((n+1)/pi)(sigma_max+1) when one is (within
    UNIT_WINDOW).
    """
    if n < 1:
        raise InvalidParamsError("n must be positive")
    s = np.asarray(sing_w, dtype=np.float64)
    if s.ndim != 1 or s.size == 0 or np.any(s < 0) or not np.all(np.isfinite(s)):
        raise InvalidParamsError("sing_w must be non-empty, finite, non-negative")
    gap = np.min(np.abs(s - 1.0))
    smax = float(np.max(s))
    if gap <= UNIT_WINDOW:
        return ((n + 1) / math.pi) * (smax + 1.0)
    return (smax + 1.0) / float(gap)


def hermitian_det_bound(sing_w, n: int) -> float:
    """Log upper bound on the Hermitian generalized determinant.

    Regimes split on sigma_max: fully contractive weights get
    -(m/2)*log(min_j(1 - sigma_j^2)); sigma_max on the unit circle gives
    (m/2)*log(n+1); for sigma_max > 1 the reported value is
    (m/2)*log(n) + n*m*log(sigma_max), which is only an asymptotic
    envelope and can sit below the true value at small n.
    """
    if n < 1:
        raise InvalidParamsError("n must be positive")
    s = np.asarray(sing_w, dtype=np.float64)
    if s.ndim != 1 or s.size == 0 or np.any(s < 0) or not np.all(np.isfinite(s)):
        raise InvalidParamsError("sing_w must be non-empty, finite, non-negative")
    m = s.size
    smax = float(np.max(s))
    if abs(smax - 1.0) <= UNIT_WINDOW:
        return (m / 2.0) * math.log(n + 1)
    if smax < 1.0:
        return -(m / 2.0) * math.log(float(np.min(1.0 - s * s)))
    return (m / 2.0) * math.log(n) + n * m * math.log(smax)


def small_gain_ratio(smax: float) -> float:
    """Threshold on sigma_min^2 below which the small-gain condition fails.

    The denominator sigma^2 - sigma + 1 is bounded below by 3/4, so the
    ratio is defined for every sigma_max; it is negative below roughly
    0.57, where the condition holds for free.
    """
    return (smax**3 - smax**2 + 2.0 * smax - 1.0) / (smax**2 - smax + 1.0)


def embedding_condition(sigma_min, sigma_max) -> EmbeddingVerdict:
    """Evaluate the sufficient full-rank conditions at one (sigma_min, sigma_max).

    Conditions (equality allowed):

    - weak:        sigma_max <= (1 + sigma_min^2) / 2
    - small gain:  sigma_max <= 1  and  sigma_min^2 >= r(sigma_max)
                   with r the cubic-over-quadratic threshold ratio
    - expansive:   sigma_min >= 1  and  sigma_max <= sigma_min^2 - sigma_min + 1

    The zero weight is guaranteed unconditionally.
    """
    smin = _check_sigma(sigma_min, "sigma_min")
    smax = _check_sigma(sigma_max, "sigma_max")
    if smin > smax:
        raise InvalidRangeError(f"sigma_min {smin} exceeds sigma_max {smax}")
    slacks = [0.5 * (1.0 + smin * smin) - smax]
    weak_ok = slacks[0] >= 0.0
    small_gain_ok = False
    if smax <= 1.0:
        slack = smin * smin - small_gain_ratio(smax)
        small_gain_ok = slack >= 0.0
        slacks.append(slack)
    expansive_ok = False
    if smin >= 1.0:
        slack = (smin * smin - smin + 1.0) - smax
        expansive_ok = slack >= 0.0
        slacks.append(slack)
    margin = max(slacks)
    guaranteed = smax == 0.0 or margin >= 0.0
    return EmbeddingVerdict(
        weak_ok=weak_ok,
        small_gain_ok=small_gain_ok,
        expansive_ok=expansive_ok,
        guaranteed=guaranteed,
        margin=margin,
    )


def dominance_terms(weight) -> tuple[float, float]:
    """Operator norms of (I + W W*)^{-1} W and (I + W W*)^{-1} W*.

    The first never exceeds 1/2 (with equality exactly when W has a unit
    singular value); the second is at most sigma_max / (1 + sigma_min^2).
    Together they control the block diagonal dominance of the Gram.
    """
    w = matcore.as_complex_matrix(weight)
    if w.shape[0] != w.shape[1]:
        raise InvalidParamsError("weight must be square")
    g = np.eye(w.shape[0], dtype=np.complex128) + w @ w.conj().T
    t_w = matcore.singular_values(np.linalg.solve(g, w))[0]
    t_ws = matcore.singular_values(np.linalg.solve(g, w.conj().T))[0]
    return float(t_w), float(t_ws)


def general_smax_bound(sigma_max_w) -> float:
    """Upper bound sigma_max(W) + 1 on the largest delay-matrix singular value."""
    return _check_sigma(sigma_max_w, "sigma_max_w") + 1.0


def general_cond_bound(sigma_min_w, sigma_max_w) -> float:
    """Condition number bound for arbitrary weights with sigma_max < 1/2.

    sqrt((1 + 2*sigma_max + sigma_max^2) / (1 - 2*sigma_max + sigma_min^2)),
    independent of the lag depth.

    Raises
    ------
    OutOfRegimeError
        If sigma_max_w >= 1/2, where the Gram diagonal dominance argument
        underlying the bound breaks down.
    """
    smin = _check_sigma(sigma_min_w, "sigma_min_w")
    smax = _check_sigma(sigma_max_w, "sigma_max_w")
    if smin > smax:
        raise InvalidRangeError(f"sigma_min_w {smin} exceeds sigma_max_w {smax}")
    if smax >= 0.5:
        raise OutOfRegimeError(
            f"general condition bound needs sigma_max < 0.5, got {smax}"
        )
    num = 1.0 + 2.0 * smax + smax * smax
    den = 1.0 - 2.0 * smax + smin * smin
    return math.sqrt(num / den)


@dataclass(frozen=True)
class LagMonotonicity:
    """Result of comparing spectra at two lag depths n1 <= n2."""

    sigma_min_drop: bool
    sigma_max_rise: bool
    kappa_rise: bool
    summary_small: matcore.SpectralSummary
    summary_large: matcore.SpectralSummary

    @property
    def all_ok(self) -> bool:
        return self.sigma_min_drop and self.sigma_max_rise and self.kappa_rise


def lag_monotonicity_check(weight, n1: int, n2: int, tol: float = 1e-9) -> LagMonotonicity:
    """Check that deeper lags can only worsen conditioning for a fixed weight.

    Interlacing gives sigma_min non-increasing, sigma_max non-decreasing
    and kappa non-decreasing in the lag depth.  Comparisons allow a
    relative slack ``tol`` on the larger of the two quantities.
    """
    if not (1 <= n1 <= n2):
        raise InvalidParamsError(f"need 1 <= n1 <= n2, got {n1}, {n2}")
    w = matcore.as_complex_matrix(weight)
    m = w.shape[0]
    s1 = matcore.spectral_summary(
        build_delay_matrix(DelaySpec(n=n1, m=m, weight=w))
    )
    s2 = matcore.spectral_summary(
        build_delay_matrix(DelaySpec(n=n2, m=m, weight=w))
    )
    slack = lambda a, b: tol * max(1.0, abs(a), abs(b))  # noqa: E731
    drop = s2.sigma_min <= s1.sigma_min + slack(s1.sigma_min, s2.sigma_min)
    rise = s2.sigma_max >= s1.sigma_max - slack(s1.sigma_max, s2.sigma_max)
    if math.isinf(s1.kappa):
        kappa = math.isinf(s2.kappa)
    elif math.isinf(s2.kappa):
        kappa = True
    else:
        kappa = s2.kappa >= s1.kappa - slack(s1.kappa, s2.kappa)
    return LagMonotonicity(
        sigma_min_drop=drop,
        sigma_max_rise=rise,
        kappa_rise=kappa,
        summary_small=s1,
        summary_large=s2,
    )


def _weight_singular_values(spec: DelaySpec) -> np.ndarray:
    if spec.w_class is WClass.ZERO:
        return np.zeros(spec.m)
    if spec.w_class is WClass.UNITARY:
        # The class claim is checked at construction; computing the
        # spectrum numerically would put it an ulp off the circle and
        # flip the triple-equality embedding verdict.
        return np.ones(spec.m)
    return matcore.singular_values(spec.weight)


def bound_report(spec: DelaySpec) -> BoundReport:
    """Assemble every applicable bound for one spec.

    Scalar and Hermitian weights get their sharp class-specific bounds;
    the zero weight rides the Hermitian ones (it is Hermitian), unitary
    weights get the exact on-circle determinant value, and everything
    else falls back to the general sigma_max < 1/2 condition bound with
    no determinant bound.
    """
    s = _weight_singular_values(spec)
    smax = float(s[0]) if s.size else 0.0
    smin = float(s[-1]) if s.size else 0.0
    n = spec.n
    cls = spec.w_class

    if cls is WClass.SCALAR:
        x = abs(spec.omega)
        at_unit = abs(x - 1.0) <= UNIT_WINDOW
        kb = scalar_cond_bound(spec.omega, n)
        kr = KappaRegime.AT_UNIT if at_unit else KappaRegime.AWAY_FROM_UNIT
        db = scalar_det_bound(spec.omega, n)
        dr = (
            DetRegime.AT_UNIT
            if at_unit
            else (DetRegime.SUB_UNIT if x < 1.0 else DetRegime.SUPER_UNIT)
        )
    elif cls in (WClass.HERMITIAN, WClass.ZERO):
        at_unit = bool(np.min(np.abs(s - 1.0)) <= UNIT_WINDOW)
        kb = hermitian_cond_bound(s, n)
        kr = KappaRegime.AT_UNIT if at_unit else KappaRegime.AWAY_FROM_UNIT
        db = hermitian_det_bound(s, n)
        if abs(smax - 1.0) <= UNIT_WINDOW:
            dr = DetRegime.AT_UNIT
        else:
            dr = DetRegime.SUB_UNIT if smax < 1.0 else DetRegime.SUPER_UNIT
    elif cls is WClass.UNITARY:
        kb, kr = math.inf, KappaRegime.NOT_APPLICABLE
        # All weight singular values are 1, so the on-circle value is exact.
        db, dr = hermitian_det_bound(np.ones(spec.m), n), DetRegime.AT_UNIT
    else:
        if smax < 0.5:
            kb, kr = general_cond_bound(smin, smax), KappaRegime.GENERAL_HALF
        else:
            kb, kr = math.inf, KappaRegime.NOT_APPLICABLE
        db, dr = math.inf, DetRegime.NOT_APPLICABLE

    return BoundReport(
        kappa_bound=float(kb),
        kappa_regime=kr,
        det_bound_log=float(db),
        det_regime=dr,
        embedding=embedding_condition(smin, smax),
    )


def bound_report_from_extremes(sigma_min, sigma_max, n: int | None = None) -> BoundReport:
    """Bounds derivable from weight singular extremes alone (general class)."""
    smin = _check_sigma(sigma_min, "sigma_min")
    smax = _check_sigma(sigma_max, "sigma_max")
    if smin > smax:
        raise InvalidRangeError(f"sigma_min {smin} exceeds sigma_max {smax}")
    if smax < 0.5:
        kb, kr = general_cond_bound(smin, smax), KappaRegime.GENERAL_HALF
    else:
        kb, kr = math.inf, KappaRegime.NOT_APPLICABLE
    return BoundReport(
        kappa_bound=kb,
        kappa_regime=kr,
        det_bound_log=math.inf,
        det_regime=DetRegime.NOT_APPLICABLE,
        embedding=embedding_condition(smin, smax),
    )
