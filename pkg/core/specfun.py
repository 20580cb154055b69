"""
Closed-form constants and covariance kernels of fractional Brownian motion
and of the multifractional (MPRE) kernel.

Every published expression for the unit-lag increment variance V_H is
available so the forms can be cross-checked against each other, and the two
improper integrals behind the short-lag variance constant A(H) are evaluated
by adaptive Gauss-Kronrod quadrature (QUADPACK through scipy).
"""
import logging
import math
import os
from enum import Enum
from typing import Dict, Optional, Union

import numpy as np
from scipy import integrate, special

from core.errors import DomainError, ParameterError, QuadratureError, SingularityError

logger = logging.getLogger(__name__)

ArrayOrFloat = Union[float, np.ndarray]

# |H - 1/2| below which the Gamma(1-2H) forms are replaced by their limit
SINGULAR_BAND = 1e-6

QUAD_EPSABS = 1e-14
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 400
QUAD_MAX_ERROR = 1e-9

# Number of asymptotic series terms used for the J(H) tail beyond the cutoff
TAIL_TERMS = 8


class HurstValue(float):
    """A Hurst exponent, restricted to the open interval (0, 1)"""

    def __new__(cls, value: float) -> "HurstValue":
        value = float(value)
        if not 0.0 < value < 1.0 or math.isnan(value):
            raise ParameterError(f"Hurst exponent must lie in (0, 1), got {value}")
        return super().__new__(cls, value)


class VhVariant(str, Enum):
    """The five equivalent expressions for V_H found in the literature"""

    INTEGRAL_FORM = "integral"
    GAMMA_1M2H = "gamma_1m2h"
    REFLECTION_FORM = "reflection"
    GAMMA_2M2H = "gamma_2m2h"
    SINE_FORM = "sine"

    @classmethod
    def parse(cls, value: Union[str, "VhVariant"]) -> "VhVariant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(f"Unknown V_H variant: {value}")


def singular_policy() -> str:
    """Policy for the removable singularities at H = 1/2 ('limit' or 'raise')"""
    policy = os.getenv("FAIRVOL_SINGULAR_POLICY", "limit").strip().lower()
    if policy not in ("limit", "raise"):
        raise ParameterError(f"FAIRVOL_SINGULAR_POLICY must be 'limit' or 'raise', got {policy!r}")
    return policy


def gamma_fn(x: float) -> float:
    """Gamma function; negative non-integers go through the reflection formula"""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"Gamma argument must be finite, got {x}")
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"Gamma is undefined at non-positive integer {x}")
    if x < 0.0:
        return math.pi / (math.sin(math.pi * x) * float(special.gamma(1.0 - x)))
    return float(special.gamma(x))


def a_const(h: float) -> float:
    """A(H) = Gamma(H+1/2)^2 / (2H sin(pi H) Gamma(2H)), the short-lag variance constant"""
    h = HurstValue(h)
    return gamma_fn(h + 0.5) ** 2 / (2.0 * h * math.sin(math.pi * h) * gamma_fn(2.0 * h))


def a_const_values(h: np.ndarray) -> np.ndarray:
    """Vectorized A(H) for arrays of Hurst values; NaN entries stay NaN"""
    h = np.asarray(h, dtype=float)
    finite = h[np.isfinite(h)]
    if finite.size and (finite.min() <= 0.0 or finite.max() >= 1.0):
        raise ParameterError("Hurst values must lie in (0, 1)")
    return special.gamma(h + 0.5) ** 2 / (2.0 * h * np.sin(np.pi * h) * special.gamma(2.0 * h))


def v_const_values(h: np.ndarray) -> np.ndarray:
    """Vectorized V_H in the sine form"""
    h = np.asarray(h, dtype=float)
    finite = h[np.isfinite(h)]
    if finite.size and (finite.min() <= 0.0 or finite.max() >= 1.0):
        raise ParameterError("Hurst values must lie in (0, 1)")
    return 1.0 / (2.0 * h * np.sin(np.pi * h) * special.gamma(2.0 * h))


def v_const(h: float, variant: Union[str, VhVariant] = VhVariant.SINE_FORM,
            policy: Optional[str] = None) -> float:
    """Variance of the unit-lag fBm increment, V_H, in the requested published form"""
    h = HurstValue(h)
    variant = VhVariant.parse(variant)
    policy = policy or singular_policy()

    if variant in (VhVariant.GAMMA_1M2H, VhVariant.GAMMA_2M2H) and abs(h - 0.5) < SINGULAR_BAND:
        if policy == "raise":
            raise SingularityError(
                f"{variant.value} form of V_H is singular at H = {float(h)} (cos(pi H) = 0)"
            )
        variant = VhVariant.SINE_FORM

    if variant is VhVariant.INTEGRAL_FORM:
        return (1.0 / (2.0 * h) + j_integral(h)) / gamma_fn(h + 0.5) ** 2
    if variant is VhVariant.GAMMA_1M2H:
        return gamma_fn(1.0 - 2.0 * h) * math.cos(math.pi * h) / (math.pi * h)
    if variant is VhVariant.REFLECTION_FORM:
        return gamma_fn(h) * gamma_fn(1.0 - h) / (math.pi * gamma_fn(1.0 + 2.0 * h))
    if variant is VhVariant.GAMMA_2M2H:
        return gamma_fn(2.0 - 2.0 * h) * math.cos(math.pi * h) / (math.pi * h * (1.0 - 2.0 * h))
    return 1.0 / (2.0 * h * math.sin(math.pi * h) * gamma_fn(2.0 * h))


def v_const_all(h: float, policy: Optional[str] = None) -> Dict[str, float]:
    """Every V_H variant at h, keyed by variant name"""
    return {variant.value: v_const(h, variant, policy) for variant in VhVariant}


def fbm_covariance(t: ArrayOrFloat, s: ArrayOrFloat, h: float) -> ArrayOrFloat:
    """E[W^H(t) W^H(s)] = (V_H/2)(|t|^2H + |s|^2H - |t-s|^2H)"""
    h = HurstValue(h)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t < 0) or np.any(s < 0):
        raise ParameterError("fBm covariance is defined for t, s >= 0")
    two_h = 2.0 * h
    cov = 0.5 * v_const(h) * (np.abs(t) ** two_h + np.abs(s) ** two_h - np.abs(t - s) ** two_h)
    return float(cov) if cov.ndim == 0 else cov


def fbm_covariance_matrix(times: np.ndarray, h: float) -> np.ndarray:
    """Gram matrix of fBm observed at the given non-negative times"""
    times = np.asarray(times, dtype=float)
    return fbm_covariance(times[:, None], times[None, :], h)


def fgn_autocov(k: ArrayOrFloat, lag_step: float, h: float) -> ArrayOrFloat:
    """Autocovariance of fGn increments of length lag_step at lag k (counted in steps)"""
    h = HurstValue(h)
    if lag_step <= 0:
        raise ParameterError(f"lag_step must be positive, got {lag_step}")
    k = np.abs(np.asarray(k, dtype=float))
    two_h = 2.0 * h
    gamma = 0.5 * v_const(h) * lag_step ** two_h * (
        np.abs(k + 1.0) ** two_h - 2.0 * k ** two_h + np.abs(k - 1.0) ** two_h
    )
    return float(gamma) if gamma.ndim == 0 else gamma


def fgn_autocorr(k: ArrayOrFloat, h: float) -> ArrayOrFloat:
    """rho(k) = gamma(k)/gamma(0); rho(1) = 2^(2H-1) - 1"""
    return fgn_autocov(k, 1.0, h) / fgn_autocov(0, 1.0, h)


def increment_sd(lag: float, h: float, nu: float) -> float:
    """Short-lag increment standard deviation |lag|^H * nu * sqrt(A(H))"""
    if lag <= 0:
        raise ParameterError(f"lag must be positive, got {lag}")
    if nu <= 0:
        raise ParameterError(f"nu must be positive, got {nu}")
    h = HurstValue(h)
    return abs(lag) ** h * nu * math.sqrt(a_const(h))


def _checked_quad(func, lower: float, upper: float, label: str,
                  epsabs: float = QUAD_EPSABS, **kwargs) -> float:
    """Run scipy quad and turn a non-converged result into a QuadratureError"""
    result = integrate.quad(func, lower, upper, epsabs=epsabs, epsrel=QUAD_EPSREL,
                            limit=QUAD_LIMIT, full_output=1, **kwargs)
    value, abserr, info = result[0], result[1], result[2]
    ier = result[3] if len(result) > 3 and isinstance(result[3], str) else None
    if ier is not None or abserr > QUAD_MAX_ERROR:
        diagnostics = {
            "integral": label,
            "interval": (lower, upper),
            "value": value,
            "abserr": abserr,
            "evaluations": info.get("neval") if isinstance(info, dict) else None,
            "message": ier,
        }
        raise QuadratureError(f"Quadrature for {label} did not converge on [{lower}, {upper}]",
                              diagnostics)
    return value


def _kernel_gap(u: ArrayOrFloat, alpha: float) -> ArrayOrFloat:
    """(u+1)^alpha - u^alpha without cancellation for large u"""
    return np.power(u, alpha) * np.expm1(alpha * np.log1p(1.0 / u))


def _j_tail_coefficients(alpha: float) -> np.ndarray:
    """Coefficients d_m of ((1+1/u)^alpha - 1)^2 = sum_m d_m u^-m, m = 2..TAIL_TERMS+1"""
    binom = np.array([special.binom(alpha, k) for k in range(TAIL_TERMS + 2)])
    coeffs = np.zeros(TAIL_TERMS + 3)
    for m in range(2, TAIL_TERMS + 3):
        coeffs[m] = sum(binom[k] * binom[m - k] for k in range(1, m))
    return coeffs


def _j_tail(alpha: float, cutoff: float, coeffs: np.ndarray) -> float:
    """Integral of the J(H) integrand over [cutoff, inf) from its asymptotic series"""
    total = 0.0
    for m in range(2, TAIL_TERMS + 2):
        total += coeffs[m] * cutoff ** (2.0 * alpha - m + 1.0) / (m - 1.0 - 2.0 * alpha)
    return total


def _j_cutoff(alpha: float, coeffs: np.ndarray) -> float:
    """Smallest decade cutoff at which the first omitted tail term is below 1e-15"""
    m = TAIL_TERMS + 2
    cutoff = 10.0
    while abs(coeffs[m]) * cutoff ** (2.0 * alpha - m + 1.0) / (m - 1.0 - 2.0 * alpha) > 1e-15:
        cutoff *= 10.0
        if cutoff > 1e8:
            raise QuadratureError("J(H) tail cutoff search did not terminate",
                                  {"alpha": alpha, "cutoff": cutoff})
    return max(cutoff, 1e3)


def j_integral(h: float) -> float:
    """J(H) = int_0^inf ((u+1)^(H-1/2) - u^(H-1/2))^2 du by quadrature plus analytic tail"""
    h = HurstValue(h)
    alpha = h - 0.5
    if alpha == 0.0:
        return 0.0

    # [0, 1]: expand the square; the u^alpha singularity goes into the QAWS weight
    pure = 1.0 / (2.0 * alpha + 1.0)
    shifted = (2.0 ** (2.0 * alpha + 1.0) - 1.0) / (2.0 * alpha + 1.0)
    cross = _checked_quad(lambda u: (u + 1.0) ** alpha, 0.0, 1.0, "J(H) cross term",
                          weight="alg", wvar=(alpha, 0.0))
    total = pure + shifted - 2.0 * cross

    coeffs = _j_tail_coefficients(alpha)
    cutoff = _j_cutoff(alpha, coeffs)
    lower = 1.0
    while lower < cutoff:
        upper = min(lower * 10.0, cutoff)
        total += _checked_quad(lambda u: _kernel_gap(u, alpha) ** 2, lower, upper, "J(H)")
        lower = upper
    total += _j_tail(alpha, cutoff, coeffs)
    return total


def i_cosine_closed(h: float) -> float:
    """pi / (2 Gamma(2H+1) sin(pi H))"""
    h = HurstValue(h)
    return math.pi / (2.0 * gamma_fn(2.0 * h + 1.0) * math.sin(math.pi * h))


def i_cosine(h: float) -> float:
    """I(H) = int_0^inf (1 - cos x) x^(-2H-1) dx by quadrature"""
    h = HurstValue(h)
    # (1 - cos x)/x^2 written through sinc so that it is regular at 0
    head = _checked_quad(lambda x: 0.5 * np.sinc(x / (2.0 * np.pi)) ** 2, 0.0, 1.0,
                         "I(H) head", weight="alg", wvar=(1.0 - 2.0 * h, 0.0))
    oscillating = _checked_quad(lambda x: x ** (-2.0 * h - 1.0), 1.0, np.inf,
                                "I(H) Fourier tail", epsabs=1e-11, weight="cos", wvar=1.0,
                                limlst=200)
    return head + 1.0 / (2.0 * h) - oscillating
