"""Closed-form results for the dispersive cat-state source.

Everything here is expressed in the two dimensionless knobs of the scheme:
``big_gamma`` (Kerr coupling over loss rate) and ``tau`` (loss rate times
interaction time).  Input intensity enters as ``alpha_sq``, the mean photon
number of each coherent input.

The qubit coherence, the heralded cat size and the size-normalized
decoherence exponent all share one bracket

    B = 2 sin^2(big_gamma tau / 2) + big_gamma sin(big_gamma tau)
        - big_gamma^2 expm1(tau)

so that ``log_coherence_c == cat_size * big_g`` holds to rounding instead of
merely analytically.  Below a small-``tau`` switch point the bracket cancels
catastrophically and both routes move to the same cubic series, keeping the
identity intact there too.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import PoleError

_TWO_PI = 2.0 * math.pi
_SQRT2 = math.sqrt(2.0)


def _check_scalar(value: float, name: str, minimum: float = 0.0) -> float:
    value = float(value)
    if not math.isfinite(value) or value < minimum:
        raise ValueError(f"{name} must be finite and >= {minimum}, got {value!r}")
    return value


def _series_switch(big_gamma: float) -> float:
    # below this the direct bracket has lost too many digits to cancellation
    return 1e-4 / max(1.0, big_gamma)


def _near_pole(x: float) -> bool:
    """True when x sits at a nonzero multiple of 2*pi to float resolution."""
    k = round(x / _TWO_PI)
    return k >= 1 and abs(x - k * _TWO_PI) <= 1e-13 * x


def _bracket(big_gamma: float, tau: float) -> float:
    s = math.sin(0.5 * big_gamma * tau)
    return (
        2.0 * s * s
        + big_gamma * math.sin(big_gamma * tau)
        - big_gamma * big_gamma * math.expm1(tau)
    )


def _g_series(big_gamma: float, tau: float) -> float:
    # big_g = -2 tau/3 - tau^2/6 - (2 big_gamma^2 + 3) tau^3/90 + O(tau^4)
    g2 = big_gamma * big_gamma
    return tau * (-2.0 / 3.0 + tau * (-1.0 / 6.0 - (2.0 * g2 + 3.0) * tau / 90.0))


def big_g(big_gamma: float, tau: float) -> float:
    """Decoherence exponent per unit cat size, ln C / |beta|^2.

    Always <= 0.  Diverges at big_gamma*tau = 2*pi*k (k >= 1) where the cat
    size vanishes while decoherence does not; landing on such a pole to float
    resolution raises PoleError.  tau = 0 is fine and gives 0.
    """
    big_gamma = _check_scalar(big_gamma, "big_gamma")
    tau = _check_scalar(tau, "tau")
    if tau < _series_switch(big_gamma):
        return _g_series(big_gamma, tau)
    x = big_gamma * tau
    if _near_pole(x):
        raise PoleError(f"big_gamma*tau = {x!r} is a multiple of 2*pi")
    s = math.sin(0.5 * x)
    s2 = s * s
    if s2 == 0.0:
        raise PoleError(f"sin(big_gamma*tau/2) vanished at big_gamma*tau = {x!r}")
    value = _bracket(big_gamma, tau) / ((1.0 + big_gamma * big_gamma) * s2)
    if not math.isfinite(value):
        raise PoleError(f"decoherence exponent overflowed at big_gamma*tau = {x!r}")
    return value


def _loss_exponent(big_gamma: float, tau: float) -> float:
    """g >= 0 such that C = exp(-2 alpha_sq g)."""
    if tau < _series_switch(big_gamma):
        # same series route as big_g so the shared identity survives here
        s = math.sin(0.5 * big_gamma * tau)
        return -math.exp(-tau) * s * s * _g_series(big_gamma, tau)
    return (
        -math.exp(-tau)
        * _bracket(big_gamma, tau)
        / (1.0 + big_gamma * big_gamma)
    )


def log_coherence_c(alpha_sq: float, big_gamma: float, tau: float) -> float:
    """ln C for input intensity alpha_sq.  Use this instead of
    log(coherence_c(...)) when C underflows (alpha_sq up to 1e6 is routine).
    """
    alpha_sq = _check_scalar(alpha_sq, "alpha_sq")
    big_gamma = _check_scalar(big_gamma, "big_gamma")
    tau = _check_scalar(tau, "tau")
    return -2.0 * alpha_sq * _loss_exponent(big_gamma, tau)


def coherence_c(alpha_sq: float, big_gamma: float, tau: float) -> float:
    """Qubit coherence magnitude C in (0, 1] left by the double interaction."""
    return math.exp(log_coherence_c(alpha_sq, big_gamma, tau))


def cat_size(alpha_sq: float, big_gamma: float, tau: float) -> float:
    """|beta|^2 of the heralded cat: 2 e^-tau sin^2(big_gamma tau/2) alpha_sq."""
    alpha_sq = _check_scalar(alpha_sq, "alpha_sq")
    big_gamma = _check_scalar(big_gamma, "big_gamma")
    tau = _check_scalar(tau, "tau")
    s = math.sin(0.5 * big_gamma * tau)
    return 2.0 * math.exp(-tau) * s * s * alpha_sq


def pure_port(alpha: complex, big_gamma: float, tau: float) -> complex:
    """Amplitude exiting the non-cat recombination port.

    Equals (e^(-tau/2 + i big_gamma tau) + e^(-tau/2)) alpha / sqrt(2); the
    photon number missing from it is exactly the cat size.
    """
    big_gamma = _check_scalar(big_gamma, "big_gamma")
    tau = _check_scalar(tau, "tau")
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise ValueError("alpha must be finite")
    damp = math.exp(-0.5 * tau)
    return damp * (cmath.exp(1j * big_gamma * tau) + 1.0) * alpha / _SQRT2


def discrimination_efficiency(gamma_a: complex, gamma_b: complex) -> float:
    """Error-free discrimination probability between two coherent outputs.

    1 - exp(-|gamma_a - gamma_b|^2 / 2), computed through expm1 so identical
    inputs give exactly 0.0.
    """
    d = complex(gamma_a) - complex(gamma_b)
    sep = d.real * d.real + d.imag * d.imag
    if not math.isfinite(sep):
        raise ValueError("amplitudes must be finite")
    return -math.expm1(-0.5 * sep)


@dataclass(frozen=True)
class ClosedFormPoint:
    """Every closed-form quantity of the symmetric scheme at one setting."""

    alpha: complex
    big_gamma: float
    tau: float
    alpha_sq: float
    log_coherence: float
    coherence: float
    cat_size: float
    big_g: float
    even_fidelity: float
    gamma_out: complex


def evaluate_point(alpha: complex, big_gamma: float, tau: float) -> ClosedFormPoint:
    """Bundle the closed forms at (alpha, big_gamma, tau).

    Raises PoleError (via big_g) when big_gamma*tau hits a multiple of 2*pi.
    """
    alpha = complex(alpha)
    a2 = alpha.real * alpha.real + alpha.imag * alpha.imag
    logc = log_coherence_c(a2, big_gamma, tau)
    c = math.exp(logc)
    return ClosedFormPoint(
        alpha=alpha,
        big_gamma=float(big_gamma),
        tau=float(tau),
        alpha_sq=a2,
        log_coherence=logc,
        coherence=c,
        cat_size=cat_size(a2, big_gamma, tau),
        big_g=big_g(big_gamma, tau),
        even_fidelity=0.5 * (1.0 + c),
        gamma_out=pure_port(alpha, big_gamma, tau),
    )
