"""Sliced dyad evolution of the dual-rail XPM cat-state source.

The joint state of one polarization qubit and a few coherent modes stays a
short sum of weighted coherent dyads under Kerr cross-phase slices and
amplitude-damping slices, so instead of a density matrix the engine pushes
those weights and amplitudes through exact per-slice maps.  Per-slice loss
uses the exact finite-step channel (not an Euler step), so slicing error
comes only from interleaving the two channels and falls off like 1/n_slices.

Pipeline implemented by run_double_xpm / run_asymmetric:

    (|H> + |V>)/sqrt(2) (x) |alpha>|alpha>
      -> H couples mode 0, V couples mode 1 (Kerr + loss, sliced)
      -> 50:50 recombination (port 1 = sum, port 2 = difference)
      -> optional extra qubit phase, then qubit heralding on D1 or D2
      -> trace out port 1, decompose port 2 into even/odd cat weights

run_asymmetric lets the two interaction times differ and reports fidelity to
the cat the matched scheme would have produced.  Heralding is taken in the
phase-matched qubit basis: the deterministic qubit phase picked up through
the traced-out port is calibrated away before the user phase phi_e is added,
and for exactly matched durations the calibration angle is exactly 0.0 so
the symmetric runner is reproduced bit for bit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _kernels
from .coherent import (
    CatTarget,
    DyadState,
    DyadTerm,
    cat_norm,
    fidelity_to_cat,
    overlap,
)
from .errors import EngineError

_SQRT2 = math.sqrt(2.0)

QubitLossMode = Literal["neglect", "common-decay"]
Detector = Literal["D1", "D2"]


def _check_nonneg(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0.0:
        raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
    return value


@dataclass(frozen=True)
class XpmParams:
    """Physical knobs of one XPM interaction: Kerr rate, loss rate, duration.

    tau and big_gamma are derived views.  With gamma = 0 the dimensionless
    time is 0 regardless of duration, and big_gamma is taken as inf for any
    nonzero chi (0.0 for the trivial chi = 0 case).
    """

    chi: float
    gamma: float
    duration: float

    def __post_init__(self) -> None:
        _check_nonneg(self.chi, "chi")
        _check_nonneg(self.gamma, "gamma")
        _check_nonneg(self.duration, "duration")

    @property
    def tau(self) -> float:
        return self.gamma * self.duration

    @property
    def big_gamma(self) -> float:
        if self.gamma > 0.0:
            return self.chi / self.gamma
        return math.inf if self.chi > 0.0 else 0.0

    @classmethod
    def dimensionless(cls, big_gamma: float, tau: float) -> "XpmParams":
        """Parameters in loss-rate units: gamma = 1, so duration equals tau."""
        return cls(chi=float(big_gamma), gamma=1.0, duration=float(tau))

    @classmethod
    def lossless(cls, kerr_phase: float) -> "XpmParams":
        """Pure Kerr interaction accumulating the given conditional phase."""
        return cls(chi=float(kerr_phase), gamma=0.0, duration=1.0)


@dataclass(frozen=True)
class Channel:
    """One mode Kerr-coupled to one qubit component, with its own loss."""

    mode: int
    qubit: str
    chi: float
    gamma: float
    duration: float

    def __post_init__(self) -> None:
        if not isinstance(self.mode, int) or self.mode < 0:
            raise ValueError(f"mode must be a nonnegative int, got {self.mode!r}")
        if self.qubit not in ("H", "V"):
            raise ValueError(f"qubit must be 'H' or 'V', got {self.qubit!r}")
        _check_nonneg(self.chi, "chi")
        _check_nonneg(self.gamma, "gamma")
        _check_nonneg(self.duration, "duration")


@dataclass(frozen=True)
class ChannelConfig:
    channels: tuple[Channel, ...]
    qubit_loss_mode: QubitLossMode = "neglect"

    def __post_init__(self) -> None:
        object.__setattr__(self, "channels", tuple(self.channels))
        modes = [ch.mode for ch in self.channels]
        if len(set(modes)) != len(modes):
            raise ValueError("each mode may appear in at most one channel")
        if self.qubit_loss_mode not in ("neglect", "common-decay"):
            raise ValueError(f"unknown qubit_loss_mode {self.qubit_loss_mode!r}")

    def success_decay_factor(self) -> float:
        """Heralding attenuation from qubit-carrier decay, 1.0 when neglected."""
        if self.qubit_loss_mode == "neglect":
            return 1.0
        ex = sum(ch.gamma * ch.duration for ch in self.channels)
        return math.exp(-0.5 * ex)


@dataclass(frozen=True)
class CgParams:
    """Displaced-branch description of the single-interaction output."""

    amp_h: complex
    amp_v: complex
    beta: complex


@dataclass(frozen=True)
class SchemeOutput:
    """Everything the heralded source produced at one setting."""

    beta: complex
    gamma_out: complex
    coherence_C: complex
    cat_mixture: dict[str, float]
    herald_probability: float
    herald_probabilities: dict[str, float]
    success_decay_factor: float
    detector: str
    heralded_state: DyadState


def xpm_input_state(alpha: complex, n_modes: int = 2) -> DyadState:
    """(|H> + |V>)/sqrt(2) on the qubit, |alpha> in every mode, as a dyad sum."""
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise ValueError("alpha must be finite")
    amps = (alpha,) * n_modes
    terms = tuple(
        DyadTerm(qubit_row=r, qubit_col=c, ket_amps=amps, bra_amps=amps, weight=0.5)
        for r in ("H", "V")
        for c in ("H", "V")
    )
    return DyadState(terms=terms, n_modes=n_modes)


def slice_kerr(state: DyadState, mode: int, qubit: str, phase: float) -> DyadState:
    """Conditional rotation: amplitudes of `mode` gain e^(i phase) on the
    matching qubit component, ket side by row, bra side by column.  Weights
    never change; phase 0.0 returns the state untouched.
    """
    if qubit not in ("H", "V"):
        raise ValueError(f"qubit must be 'H' or 'V', got {qubit!r}")
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes}-mode state")
    phase = float(phase)
    if phase == 0.0:
        return state
    rot = cmath.exp(1j * phase)
    new_terms = []
    for term in state.terms:
        ket = term.ket_amps
        bra = term.bra_amps
        if term.qubit_row == qubit:
            ket = ket[:mode] + (ket[mode] * rot,) + ket[mode + 1:]
        if term.qubit_col == qubit:
            bra = bra[:mode] + (bra[mode] * rot,) + bra[mode + 1:]
        new_terms.append(
            DyadTerm(term.qubit_row, term.qubit_col, ket, bra, term.weight)
        )
    return DyadState(terms=tuple(new_terms), n_modes=state.n_modes)


def slice_loss(state: DyadState, mode: int, gamma_dt: float) -> DyadState:
    """Exact amplitude-damping channel over one slice of dimensionless length
    gamma_dt.  |a><b| -> w |a s><b s| with s = e^(-gamma_dt/2) and
    w = exp((1 - e^(-gamma_dt)) (conj(b) a - |a|^2/2 - |b|^2/2)).

    The weight update is skipped when a == b so populations stay bit-exact.
    """
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes}-mode state")
    gamma_dt = float(gamma_dt)
    if gamma_dt < 0.0 or not math.isfinite(gamma_dt):
        raise ValueError(f"gamma_dt must be finite and >= 0, got {gamma_dt!r}")
    if gamma_dt == 0.0:
        return state
    damp = math.exp(-0.5 * gamma_dt)
    oms = -math.expm1(-gamma_dt)
    new_terms = []
    for term in state.terms:
        a = term.ket_amps[mode]
        b = term.bra_amps[mode]
        w = term.weight
        if a != b:
            na = a.real * a.real + a.imag * a.imag
            nb = b.real * b.real + b.imag * b.imag
            w = w * cmath.exp(oms * (b.conjugate() * a - 0.5 * (na + nb)))
        ket = term.ket_amps[:mode] + (a * damp,) + term.ket_amps[mode + 1:]
        bra = term.bra_amps[:mode] + (b * damp,) + term.bra_amps[mode + 1:]
        new_terms.append(DyadTerm(term.qubit_row, term.qubit_col, ket, bra, w))
    return DyadState(terms=tuple(new_terms), n_modes=state.n_modes)


_QUBIT_INDEX = {"H": 0, "V": 1}
_QUBIT_NAME = ("H", "V")


def evolve_sliced(state: DyadState, config: ChannelConfig, n_slices: int) -> DyadState:
    """Interleave all channels' Kerr and loss maps over n_slices equal slices.

    Per slice, channels act in their listed order, Kerr before loss.  The
    per-slice factors are precomputed once, so results are deterministic for
    a given backend.
    """
    if not isinstance(n_slices, int) or n_slices < 1:
        raise ValueError(f"n_slices must be a positive int, got {n_slices!r}")
    for ch in config.channels:
        if not ch.mode < state.n_modes:
            raise ValueError(f"channel mode {ch.mode} out of range")
    if not config.channels:
        return state

    n_terms = len(state.terms)
    weights = np.empty(n_terms, dtype=np.complex128)
    kets = np.empty((n_terms, state.n_modes), dtype=np.complex128)
    bras = np.empty_like(kets)
    rows = np.empty(n_terms, dtype=np.uint8)
    cols = np.empty(n_terms, dtype=np.uint8)
    for i, term in enumerate(state.terms):
        weights[i] = term.weight
        kets[i] = term.ket_amps
        bras[i] = term.bra_amps
        rows[i] = _QUBIT_INDEX[term.qubit_row]
        cols[i] = _QUBIT_INDEX[term.qubit_col]

    n_ch = len(config.channels)
    modes = np.empty(n_ch, dtype=np.int64)
    qcomps = np.empty(n_ch, dtype=np.uint8)
    rots = np.empty(n_ch, dtype=np.complex128)
    damps = np.empty(n_ch, dtype=np.float64)
    omss = np.empty(n_ch, dtype=np.float64)
    for i, ch in enumerate(config.channels):
        dt = ch.duration / n_slices
        modes[i] = ch.mode
        qcomps[i] = _QUBIT_INDEX[ch.qubit]
        rots[i] = cmath.exp(1j * ch.chi * dt)
        damps[i] = math.exp(-0.5 * ch.gamma * dt)
        omss[i] = -math.expm1(-ch.gamma * dt)

    _kernels.evolve_packed(
        weights, kets, bras, rows, cols, modes, qcomps, rots, damps, omss, n_slices
    )

    new_terms = tuple(
        DyadTerm(
            qubit_row=_QUBIT_NAME[rows[i]],
            qubit_col=_QUBIT_NAME[cols[i]],
            ket_amps=tuple(complex(z) for z in kets[i]),
            bra_amps=tuple(complex(z) for z in bras[i]),
            weight=complex(weights[i]),
        )
        for i in range(n_terms)
    )
    return DyadState(terms=new_terms, n_modes=state.n_modes)


def apply_qubit_phase(state: DyadState, phase: float) -> DyadState:
    """Rotate the V component: V kets gain e^(i phase), V bras e^(-i phase).

    phase 0.0 (or -0.0) returns the state object unchanged, bit for bit.
    """
    phase = float(phase)
    if not math.isfinite(phase):
        raise ValueError("phase must be finite")
    if phase == 0.0:
        return state
    factor = cmath.exp(1j * phase)
    new_terms = []
    for term in state.terms:
        w = term.weight
        if term.qubit_row == "V":
            w = w * factor
        if term.qubit_col == "V":
            w = w * factor.conjugate()
        new_terms.append(
            DyadTerm(term.qubit_row, term.qubit_col, term.ket_amps, term.bra_amps, w)
        )
    return DyadState(terms=tuple(new_terms), n_modes=state.n_modes)


def herald_qubit(state: DyadState, detector: Detector = "D1") -> tuple[DyadState, float]:
    """Project the qubit on (<H| +- <V|)/sqrt(2) (D1: +, D2: -).

    Returns the unnormalized heralded state (qubit collapsed, relabeled to
    the trivial H/H pair) and the herald probability, i.e. its trace.
    """
    if detector not in ("D1", "D2"):
        raise ValueError(f"detector must be 'D1' or 'D2', got {detector!r}")
    sign = 1.0 if detector == "D1" else -1.0
    new_terms = []
    for term in state.terms:
        coef = 0.5
        if term.qubit_row == "V":
            coef *= sign
        if term.qubit_col == "V":
            coef *= sign
        new_terms.append(
            DyadTerm("H", "H", term.ket_amps, term.bra_amps, term.weight * coef)
        )
    heralded = DyadState(terms=tuple(new_terms), n_modes=state.n_modes)
    prob = heralded.trace().real
    return heralded, prob


def trace_out_mode(state: DyadState, mode: int) -> DyadState:
    """Partial trace over one mode: each weight picks up <bra_m|ket_m>."""
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes}-mode state")
    new_terms = []
    for term in state.terms:
        w = term.weight * overlap(term.bra_amps[mode], term.ket_amps[mode])
        ket = term.ket_amps[:mode] + term.ket_amps[mode + 1:]
        bra = term.bra_amps[:mode] + term.bra_amps[mode + 1:]
        new_terms.append(DyadTerm(term.qubit_row, term.qubit_col, ket, bra, w))
    return DyadState(terms=tuple(new_terms), n_modes=state.n_modes - 1)


def _qubit_blocks(state: DyadState) -> dict[tuple[str, str], DyadTerm]:
    blocks: dict[tuple[str, str], DyadTerm] = {}
    for term in state.terms:
        key = (term.qubit_row, term.qubit_col)
        if key in blocks:
            raise EngineError("state has more than one dyad per qubit block")
        blocks[key] = term
    return blocks


def qubit_coherence(state: DyadState) -> complex:
    """C = w_HV / sqrt(w_HH w_VV) for a four-block qubit-mode state."""
    blocks = _qubit_blocks(state)
    try:
        w_hh = blocks[("H", "H")].weight.real
        w_vv = blocks[("V", "V")].weight.real
        w_hv = blocks[("H", "V")].weight
    except KeyError as exc:
        raise EngineError("state is missing a qubit block") from exc
    if w_hh <= 0.0 or w_vv <= 0.0:
        raise EngineError("qubit populations must be positive")
    return w_hv / math.sqrt(w_hh * w_vv)


def _apply_bs2(state: DyadState) -> DyadState:
    """50:50 recombination of modes 0 and 1: port 0 = sum, port 1 = difference."""
    new_terms = []
    for term in state.terms:
        k0, k1 = term.ket_amps[0], term.ket_amps[1]
        b0, b1 = term.bra_amps[0], term.bra_amps[1]
        ket = ((k0 + k1) / _SQRT2, (k0 - k1) / _SQRT2) + term.ket_amps[2:]
        bra = ((b0 + b1) / _SQRT2, (b0 - b1) / _SQRT2) + term.bra_amps[2:]
        new_terms.append(DyadTerm(term.qubit_row, term.qubit_col, ket, bra, term.weight))
    return DyadState(terms=tuple(new_terms), n_modes=state.n_modes)


def _cat_mixture(port_state: DyadState) -> tuple[dict[str, float], complex, complex]:
    """Even/odd cat weights of a two-branch single-mode state.

    Expects the heralded port: two population dyads of (nearly) equal weight
    p around branch amplitudes u, v and one cross pair c |u><v| + h.c.  The
    exact decomposition of that state into the two orthogonal superpositions
    |u> +- phase |v> (phase = conj(Lambda)/|Lambda|, Lambda = c/p) gives

        raw_pm = (1 +- |Lambda|) (2 +- 2 Re(phase <u|v>)) p / 2

    and the branch whose relative phase has Re >= 0 is the even one.
    Returns the normalized weights plus (u, v) for the caller.
    """
    buckets: dict[tuple[complex, complex], complex] = {}
    for t in port_state.terms:
        key = (t.ket_amps[0], t.bra_amps[0])
        buckets[key] = buckets.get(key, 0.0 + 0.0j) + t.weight
    diag = [(k[0], w) for k, w in buckets.items() if k[0] == k[1]]
    if len(buckets) == 1 and diag:
        # branches coincide: a single coherent state is an even cat of size 0
        amp = diag[0][0]
        return {"even": 1.0, "odd": 0.0}, amp, amp
    if len(buckets) != 4 or len(diag) != 2:
        raise EngineError("heralded port is not a two-branch state")
    u, w_u = diag[0]
    v, w_v = diag[1]
    p_u, p_v = w_u.real, w_v.real
    if p_u <= 0.0 or p_v <= 0.0:
        raise EngineError("branch populations must be positive")
    if abs(p_u - p_v) > 1e-9 * (p_u + p_v):
        raise EngineError("cat decomposition requires balanced branch populations")
    p_mean = 0.5 * (p_u + p_v)
    c = buckets[(u, v)]
    lam = c / p_mean
    mag = abs(lam)
    phase = lam.conjugate() / mag if mag > 0.0 else 1.0 + 0.0j
    q_uv = (phase * overlap(u, v)).real
    raw_plus = (1.0 + mag) * (2.0 + 2.0 * q_uv)
    raw_minus = (1.0 - mag) * (2.0 - 2.0 * q_uv)
    total = raw_plus + raw_minus
    if total <= 0.0:
        raise EngineError("degenerate cat decomposition")
    w_plus = raw_plus / total
    w_minus = raw_minus / total
    if phase.real >= 0.0:
        mixture = {"even": w_plus, "odd": w_minus}
    else:
        mixture = {"even": w_minus, "odd": w_plus}
    return mixture, u, v


def _ideal_beta(alpha: complex, chi: float, gamma: float, duration: float) -> complex:
    theta = chi * duration
    damp = math.exp(-0.5 * gamma * duration)
    return alpha * damp * (cmath.exp(1j * theta) - 1.0) / _SQRT2


def _run_scheme(
    alpha: complex,
    chi: float,
    gamma: float,
    t1: float,
    t2: float,
    phi_e: float,
    n_slices: int,
    qubit_loss_mode: QubitLossMode,
    detector: Detector,
) -> tuple[SchemeOutput, float]:
    config = ChannelConfig(
        channels=(
            Channel(mode=0, qubit="H", chi=chi, gamma=gamma, duration=t1),
            Channel(mode=1, qubit="V", chi=chi, gamma=gamma, duration=t2),
        ),
        qubit_loss_mode=qubit_loss_mode,
    )
    evolved = evolve_sliced(xpm_input_state(alpha), config, n_slices)
    coherence = qubit_coherence(evolved)

    recombined = _apply_bs2(evolved)
    blocks = _qubit_blocks(recombined)
    g_h, d_h = blocks[("H", "H")].ket_amps
    g_v, d_v = blocks[("V", "V")].ket_amps

    beta_ideal = _ideal_beta(alpha, chi, gamma, t1)
    target = CatTarget(beta=beta_ideal, parity="even")

    # heralding basis: cancel the deterministic qubit phase the traced-out
    # port and the branch overlaps would imprint, then add the user's phi_e.
    # Matched durations need no correction; keep that case exactly 0.0 so the
    # symmetric pipeline is untouched bit for bit.
    if t1 == t2:
        phi_cal = 0.0
    else:
        lam_pre = coherence * overlap(g_v, g_h)
        norm = cat_norm(target)
        amp_h = norm * (overlap(beta_ideal, d_h) + overlap(-beta_ideal, d_h))
        amp_v = norm * (overlap(beta_ideal, d_v) + overlap(-beta_ideal, d_v))
        ref = lam_pre * amp_h * amp_v.conjugate()
        phi_cal = cmath.phase(ref) if ref != 0.0 else 0.0
    phased = apply_qubit_phase(recombined, phi_cal - float(phi_e))

    heralded_1, p1 = herald_qubit(phased, "D1")
    heralded_2, p2 = herald_qubit(phased, "D2")
    chosen, p_chosen = (heralded_1, p1) if detector == "D1" else (heralded_2, p2)
    total = p1 + p2
    if p_chosen <= 0.0 or p_chosen < 1e-15 * total:
        raise EngineError(
            f"herald {detector} has vanishing probability ({p_chosen!r}); "
            "nothing to condition on"
        )

    sdf = config.success_decay_factor()
    port2 = trace_out_mode(chosen, 0)
    mixture, _, _ = _cat_mixture(port2)
    fidelity = fidelity_to_cat(port2, target)

    output = SchemeOutput(
        beta=d_h,
        gamma_out=0.5 * (g_h + g_v),
        coherence_C=coherence,
        cat_mixture=mixture,
        herald_probability=p_chosen * sdf,
        herald_probabilities={"D1": p1 * sdf, "D2": p2 * sdf},
        success_decay_factor=sdf,
        detector=detector,
        heralded_state=port2.normalized(),
    )
    return output, fidelity


def run_double_xpm(
    alpha: complex,
    params: XpmParams,
    n_slices: int = 2000,
    qubit_loss_mode: QubitLossMode = "neglect",
    detector: Detector = "D1",
) -> SchemeOutput:
    """Run the matched two-arm scheme and herald a cat on `detector`."""
    output, _ = _run_scheme(
        complex(alpha),
        params.chi,
        params.gamma,
        params.duration,
        params.duration,
        0.0,
        n_slices,
        qubit_loss_mode,
        detector,
    )
    return output


def run_asymmetric(
    alpha: complex,
    params: XpmParams,
    t1: float,
    t2: float,
    phi_e: float = 0.0,
    n_slices: int = 2000,
    qubit_loss_mode: QubitLossMode = "neglect",
    detector: Detector = "D1",
) -> tuple[SchemeOutput, float]:
    """Two-arm scheme with unequal interaction times t1, t2.

    phi_e is an extra qubit phase measured from the phase-matched heralding
    basis.  Returns the scheme output plus the fidelity of the heralded port
    against the even cat the matched t1-scheme would target.  With t1 == t2
    and phi_e = 0 this reproduces run_double_xpm bit for bit.
    """
    _check_nonneg(t1, "t1")
    _check_nonneg(t2, "t2")
    if not math.isfinite(float(phi_e)):
        raise ValueError("phi_e must be finite")
    return _run_scheme(
        complex(alpha),
        params.chi,
        params.gamma,
        float(t1),
        float(t2),
        float(phi_e),
        n_slices,
        qubit_loss_mode,
        detector,
    )


def run_single_xpm(
    alpha: complex, params: XpmParams, n_slices: int = 2000
) -> tuple[complex, CgParams, complex]:
    """Single-arm variant: only H couples, to one lossy Kerr mode.

    Returns (coherence_C, branch parameters, displacement).  Displacing the
    output by `displacement` centers the two branches at -+beta, i.e. the
    H branch at -beta and the V branch at +beta.
    """
    config = ChannelConfig(
        channels=(
            Channel(mode=0, qubit="H", chi=params.chi, gamma=params.gamma,
                    duration=params.duration),
        ),
    )
    evolved = evolve_sliced(xpm_input_state(complex(alpha), n_modes=1), config, n_slices)
    coherence = qubit_coherence(evolved)
    blocks = _qubit_blocks(evolved)
    amp_h = blocks[("H", "H")].ket_amps[0]
    amp_v = blocks[("V", "V")].ket_amps[0]
    displacement = -(amp_h + amp_v) / 2.0
    beta = (amp_v - amp_h) / 2.0
    return coherence, CgParams(amp_h=amp_h, amp_v=amp_v, beta=beta), displacement
