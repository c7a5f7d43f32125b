"""Working-point designer: pick tau and input intensity for a wanted cat.

Given a target heralding fidelity F and cat amplitude |beta|, the closed
forms reduce the design to one root-find,

    big_g(big_gamma, tau) = ln(2F - 1) / |beta|^2,

after which the input intensity follows from the cat-size relation.  big_g
is strictly 0 at tau = 0 and diverges to -inf at the first pole of the
cat size (big_gamma tau = 2 pi), so the first crossing always lives in
(0, 2 pi / big_gamma) when it is representable at all.

unit_mode="compat-degrees" reproduces legacy intensity tables whose sine was
evaluated with big_gamma*tau/2 read in degrees.  Only the reported intensity
is affected; achieved coherence and fidelity always come from the radians
physics.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ._backend import thread_count
from .closedform import big_g, cat_size, coherence_c, log_coherence_c
from .errors import NoSolutionError, PoleError

_TWO_PI = 2.0 * math.pi

UNIT_MODES = ("radians", "compat-degrees")


@dataclass(frozen=True)
class DesignSpec:
    """What the source should deliver and in which unit convention."""

    fidelity: float
    beta_abs: float
    big_gamma: float
    unit_mode: str = "radians"
    gamma_s: float | None = None

    def __post_init__(self):
        if not (0.5 < self.fidelity < 1.0):
            raise ValueError(
                f"fidelity must lie in (0.5, 1), got {self.fidelity!r}"
            )
        if not (math.isfinite(self.beta_abs) and self.beta_abs > 0.0):
            raise ValueError(f"beta_abs must be positive, got {self.beta_abs!r}")
        if not (math.isfinite(self.big_gamma) and self.big_gamma > 0.0):
            raise ValueError(f"big_gamma must be positive, got {self.big_gamma!r}")
        if self.unit_mode not in UNIT_MODES:
            raise ValueError(f"unit_mode must be one of {UNIT_MODES}")
        if self.gamma_s is not None and not (
            math.isfinite(self.gamma_s) and self.gamma_s > 0.0
        ):
            raise ValueError(f"gamma_s must be positive when given")


@dataclass(frozen=True)
class DesignResult:
    big_gamma: float
    unit_mode: str
    fidelity: float
    beta_abs: float
    tau_int: float
    alpha_sq: float
    achieved_C: float
    achieved_F: float
    identity_residual: float
    t_int_seconds: float | None = None


def _target_exponent(spec: DesignSpec) -> float:
    return math.log(2.0 * spec.fidelity - 1.0) / (spec.beta_abs * spec.beta_abs)


def solve_tau(spec: DesignSpec) -> float:
    """Shortest tau at which the scheme decoheres exactly to the target F.

    Scans (0, 2 pi / big_gamma) on a log grid for the first sign change of
    big_g minus the target, then bisects the bracket to 1e-13 relative
    width.  Raises NoSolutionError when no crossing is representable before
    the pole (e.g. a target exponent beyond float range).
    """
    target = _target_exponent(spec)
    g = spec.big_gamma
    pole = _TWO_PI / g
    hi_edge = pole * (1.0 - 1e-9)

    def f(tau: float) -> float:
        return big_g(g, tau) - target

    lo = min(1e-3, 0.25 * hi_edge)
    while f(lo) <= 0.0:
        lo *= 0.125
        if lo < 1e-300:
            raise NoSolutionError(
                "target exponent is reached only at unrepresentably small tau"
            )

    n_scan = 4096
    ratio = (hi_edge / lo) ** (1.0 / (n_scan - 1))
    prev = lo
    hi = None
    node = lo
    for _ in range(n_scan - 1):
        node *= ratio
        if f(node) <= 0.0:
            hi = node
            break
        prev = node
    if hi is None:
        raise NoSolutionError(
            f"big_g never reaches {target:.6g} before the pole at tau = {pole:.6g}"
        )

    lo = prev
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-13 * mid:
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def input_intensity(spec: DesignSpec, tau: float) -> float:
    """Per-mode input intensity |alpha|^2 giving the wanted cat size at tau.

    In compat-degrees mode the half-angle big_gamma*tau/2 is read as degrees
    when evaluating the sine, matching the legacy tables.
    """
    half = 0.5 * spec.big_gamma * tau
    if spec.unit_mode == "compat-degrees":
        half = math.radians(half)
    s = math.sin(half)
    denom = 2.0 * math.exp(-tau) * s * s
    if denom == 0.0 or not math.isfinite(denom):
        raise PoleError("cat size vanishes at this tau; intensity is unbounded")
    return spec.beta_abs * spec.beta_abs / denom


def design(spec: DesignSpec) -> DesignResult:
    """Solve the full working point for one spec.

    achieved_C and achieved_F are always evaluated with the radians
    intensity, so they certify the physical design even in compat mode.
    identity_residual is the relative defect of ln C = |beta|^2 big_g at the
    returned root.
    """
    tau = solve_tau(spec)
    alpha_sq = input_intensity(spec, tau)
    if spec.unit_mode == "radians":
        alpha_sq_rad = alpha_sq
    else:
        alpha_sq_rad = input_intensity(
            DesignSpec(spec.fidelity, spec.beta_abs, spec.big_gamma, "radians"),
            tau,
        )
    log_c = log_coherence_c(alpha_sq_rad, spec.big_gamma, tau)
    achieved_c = math.exp(log_c)
    rhs = cat_size(alpha_sq_rad, spec.big_gamma, tau) * big_g(spec.big_gamma, tau)
    residual = abs(log_c - rhs) / abs(log_c)
    return DesignResult(
        big_gamma=spec.big_gamma,
        unit_mode=spec.unit_mode,
        fidelity=spec.fidelity,
        beta_abs=spec.beta_abs,
        tau_int=tau,
        alpha_sq=alpha_sq,
        achieved_C=achieved_c,
        achieved_F=0.5 * (1.0 + achieved_c),
        identity_residual=residual,
        t_int_seconds=(tau / spec.gamma_s) if spec.gamma_s is not None else None,
    )


DEFAULT_TABLE_GAMMAS = (0.01, 1.0, 25.0, 50.0, 100.0)


def design_table(
    fidelity: float = 0.99,
    beta_abs: float = 1.6,
    big_gammas: tuple[float, ...] = DEFAULT_TABLE_GAMMAS,
    unit_mode: str = "radians",
    gamma_s: float | None = None,
) -> list[DesignResult]:
    return [
        design(DesignSpec(fidelity, beta_abs, g, unit_mode, gamma_s))
        for g in big_gammas
    ]


CURVE_DEFAULTS = {
    "c": {"big_gammas": (0.5, 1.0, 1.5), "alpha_sq": 4.0e4, "tau_max": 0.2},
    "g": {"big_gammas": (0.01, 5.0, 10.0), "alpha_sq": None, "tau_max": 0.6},
}


def _curve_column(kind, big_gamma, taus, alpha_sq):
    rows = []
    for tau in taus:
        if kind == "c":
            value = coherence_c(alpha_sq, big_gamma, tau)
        else:
            try:
                value = big_g(big_gamma, tau)
            except PoleError:
                value = None
        rows.append((tau, value, big_gamma))
    return rows


def sweep_curves(
    kind: str,
    big_gammas: tuple[float, ...] | None = None,
    taus: list[float] | None = None,
    alpha_sq: float | None = None,
    points: int = 201,
    tau_max: float | None = None,
    max_workers: int | None = None,
) -> list[tuple]:
    """Tabulate C(tau) (kind "c") or big_g(tau) (kind "g") per big_gamma.

    Returns (tau, value, big_gamma) rows grouped by big_gamma in the given
    order; value is None on a pole.  Columns are computed in a thread pool
    but collected in order, so the row list is deterministic.
    """
    if kind not in CURVE_DEFAULTS:
        raise ValueError(f"kind must be 'c' or 'g', got {kind!r}")
    defaults = CURVE_DEFAULTS[kind]
    if big_gammas is None:
        big_gammas = defaults["big_gammas"]
    if alpha_sq is None:
        alpha_sq = defaults["alpha_sq"]
    if kind == "c" and not (alpha_sq is not None and alpha_sq > 0.0):
        raise ValueError("kind 'c' needs a positive alpha_sq")
    if taus is None:
        if tau_max is None:
            tau_max = defaults["tau_max"]
        if not (math.isfinite(tau_max) and tau_max > 0.0):
            raise ValueError(f"tau_max must be positive, got {tau_max!r}")
        if not isinstance(points, int) or points < 2:
            raise ValueError(f"points must be an int >= 2, got {points!r}")
        step = tau_max / (points - 1)
        taus = [i * step for i in range(points)]
    big_gammas = tuple(float(g) for g in big_gammas)
    if not big_gammas:
        raise ValueError("need at least one big_gamma")

    workers = max_workers if max_workers is not None else thread_count()
    workers = max(1, min(workers, len(big_gammas)))
    rows: list[tuple] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        columns = pool.map(
            lambda g: _curve_column(kind, g, taus, alpha_sq), big_gammas
        )
        for column in columns:
            rows.extend(column)
    return rows
