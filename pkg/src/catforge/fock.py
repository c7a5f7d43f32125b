"""Truncated number-basis integrator used to validate the dyad engine.

States live on (mode 1) x (mode 2) x (qubit) with per-mode truncation
``cutoff`` meaning the retained levels 0 .. cutoff-1.  The master equation
with conditional Kerr shifts and per-mode amplitude damping is integrated
with fixed-step RK4; the generator is trace-preserving exactly, so trace
drift directly measures integration error and triggers step halving.

This path scales as cutoff^4 and is only meant for small amplitudes
(|alpha| of order 1); the recommended truncation is 4|alpha|^2 + 10 levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._backend import USING_NUMBA
from .coherent import DyadState
from .engine import ChannelConfig
from .errors import CutoffError, EngineError

_QUBIT_VECS = {
    "H": np.array([1.0, 0.0], dtype=np.complex128),
    "V": np.array([0.0, 1.0], dtype=np.complex128),
    "plus": np.array([1.0, 1.0], dtype=np.complex128) / math.sqrt(2.0),
}


def coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    """Normalized truncated coherent state on levels 0 .. cutoff-1.

    Raises CutoffError when the truncation clips more than 1e-8 of the norm.
    """
    if not isinstance(cutoff, int) or cutoff < 1:
        raise ValueError(f"cutoff must be a positive int, got {cutoff!r}")
    alpha = complex(alpha)
    vec = np.empty(cutoff, dtype=np.complex128)
    vec[0] = math.exp(-0.5 * (alpha.real**2 + alpha.imag**2))
    for n in range(1, cutoff):
        vec[n] = vec[n - 1] * alpha / math.sqrt(n)
    norm_sq = float(np.vdot(vec, vec).real)
    deficit = abs(1.0 - norm_sq)
    if deficit >= 1e-8:
        raise CutoffError(
            f"cutoff {cutoff} clips {deficit:.3e} of |alpha| = {abs(alpha):.3g}; "
            "raise the cutoff"
        )
    return vec / math.sqrt(norm_sq)


@dataclass
class FockDensity:
    """Density operator as a (d1, d2, 2, d1, d2, 2) tensor."""

    cutoffs: tuple[int, int]
    tensor: np.ndarray

    def __post_init__(self):
        d1, d2 = self.cutoffs
        expected = (d1, d2, 2, d1, d2, 2)
        if self.tensor.shape != expected:
            raise ValueError(f"tensor shape {self.tensor.shape} != {expected}")

    @property
    def dim(self) -> int:
        return self.cutoffs[0] * self.cutoffs[1] * 2

    @property
    def matrix(self) -> np.ndarray:
        return self.tensor.reshape(self.dim, self.dim)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermiticity_defect(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m - m.conj().T)))

    def trailing_population(self) -> float:
        """Occupancy of the top retained level of either mode."""
        diag = np.einsum("abcabc->abc", self.tensor).real
        return float(diag[-1, :, :].sum() + diag[:-1, -1, :].sum())

    def normalized(self) -> "FockDensity":
        tr = self.trace()
        if tr <= 0.0:
            raise ValueError("cannot normalize a state with non-positive trace")
        return FockDensity(self.cutoffs, self.tensor / tr)


def product_density(
    amp1: complex, amp2: complex, qubit: str, cutoffs: tuple[int, int]
) -> FockDensity:
    """Pure |amp1>|amp2>|qubit> as a FockDensity; qubit may be 'H', 'V' or 'plus'."""
    if qubit not in _QUBIT_VECS:
        raise ValueError(f"qubit must be one of {sorted(_QUBIT_VECS)}, got {qubit!r}")
    d1, d2 = cutoffs
    psi = np.kron(
        np.kron(coherent_vector(amp1, d1), coherent_vector(amp2, d2)),
        _QUBIT_VECS[qubit],
    )
    rho = np.outer(psi, psi.conj())
    return FockDensity((d1, d2), rho.reshape(d1, d2, 2, d1, d2, 2))


def xpm_input_density(alpha: complex, cutoffs: tuple[int, int]) -> FockDensity:
    """The scheme's input (|H> + |V>)/sqrt(2) (x) |alpha>|alpha>, truncated."""
    return product_density(alpha, alpha, "plus", cutoffs)


def dyad_to_fock(state: DyadState, cutoffs: tuple[int, int]) -> FockDensity:
    """Expand a two-mode dyad state in the truncated number basis."""
    if state.n_modes != 2:
        raise ValueError("dyad_to_fock expects a two-mode state")
    d1, d2 = cutoffs
    qubit_basis = {
        "H": np.array([1.0, 0.0], dtype=np.complex128),
        "V": np.array([0.0, 1.0], dtype=np.complex128),
    }
    dim = d1 * d2 * 2
    rho = np.zeros((dim, dim), dtype=np.complex128)
    for term in state.terms:
        ket = np.kron(
            np.kron(
                coherent_vector(term.ket_amps[0], d1),
                coherent_vector(term.ket_amps[1], d2),
            ),
            qubit_basis[term.qubit_row],
        )
        bra = np.kron(
            np.kron(
                coherent_vector(term.bra_amps[0], d1),
                coherent_vector(term.bra_amps[1], d2),
            ),
            qubit_basis[term.qubit_col],
        )
        rho += term.weight * np.outer(ket, bra.conj())
    return FockDensity((d1, d2), rho.reshape(d1, d2, 2, d1, d2, 2))


def _rates(config: ChannelConfig) -> tuple[list, list, list]:
    """Per-mode Kerr rates, loss rates and coupled qubit components."""
    chi = [0.0, 0.0]
    gamma = [0.0, 0.0]
    qcomp = [0, 0]
    for ch in config.channels:
        if ch.mode not in (0, 1):
            raise ValueError("fock integration supports modes 0 and 1 only")
        chi[ch.mode] = ch.chi
        gamma[ch.mode] = ch.gamma
        qcomp[ch.mode] = 0 if ch.qubit == "H" else 1
    return chi, gamma, qcomp


def _drift_vector(cutoffs, chi, gamma, qcomp) -> np.ndarray:
    d1, d2 = cutoffs
    n1 = np.arange(d1, dtype=np.float64)[:, None, None]
    n2 = np.arange(d2, dtype=np.float64)[None, :, None]
    q = np.arange(2, dtype=np.float64)[None, None, :]
    kerr = chi[0] * n1 * (q == qcomp[0]) + chi[1] * n2 * (q == qcomp[1])
    loss = 0.5 * (gamma[0] * n1 + gamma[1] * n2)
    return (1j * kerr - loss) * np.ones((d1, d2, 2))


def integrate(
    state: FockDensity,
    config: ChannelConfig,
    t: float,
    dt: float | None = None,
) -> FockDensity:
    """Evolve for wall time t under all channels acting simultaneously.

    The step defaults to 0.04 over the largest drift magnitude and the whole
    integration is retried with half the step (up to 6 times) if the final
    trace has drifted by more than 1e-8.  Population reaching the top
    retained level of either mode beyond 1e-6 raises CutoffError, since the
    truncated generator is no longer trustworthy there.
    """
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise ValueError(f"t must be finite and >= 0, got {t!r}")
    if t == 0.0:
        return FockDensity(state.cutoffs, state.tensor.copy())
    chi, gamma, qcomp = _rates(config)
    d1, d2 = state.cutoffs
    dvec = _drift_vector(state.cutoffs, chi, gamma, qcomp)
    lam_max = float(np.max(np.abs(dvec)))
    if dt is None:
        dt = 0.04 / lam_max if lam_max > 0.0 else t
    dt = float(dt)
    if not math.isfinite(dt) or dt <= 0.0:
        raise ValueError(f"dt must be finite and > 0, got {dt!r}")
    dt = min(dt, t)

    sq1 = np.sqrt(np.arange(1, d1 + 1, dtype=np.float64))
    sq2 = np.sqrt(np.arange(1, d2 + 1, dtype=np.float64))
    if USING_NUMBA:
        def rhs(rho, out):
            _kernels.lindblad_rhs_loops(rho, dvec, gamma[0], gamma[1], sq1, sq2, out)
            return out
    else:
        jump1 = (
            gamma[0] * np.outer(sq1[:-1], sq1[:-1]).reshape(d1 - 1, 1, 1, d1 - 1, 1, 1)
            if gamma[0] != 0.0 and d1 > 1 else None
        )
        jump2 = (
            gamma[1] * np.outer(sq2[:-1], sq2[:-1]).reshape(1, d2 - 1, 1, 1, d2 - 1, 1)
            if gamma[1] != 0.0 and d2 > 1 else None
        )
        def rhs(rho, out):
            return _kernels.lindblad_rhs_numpy(rho, dvec, gamma[0], gamma[1],
                                               jump1, jump2, out)

    trace_in = state.trace()
    scratch = np.empty_like(state.tensor)
    for _attempt in range(7):
        steps = max(1, math.ceil(t / dt))
        h = t / steps
        rho = state.tensor.copy()
        check_every = max(1, steps // 8)
        for step in range(steps):
            k1 = rhs(rho, scratch).copy()
            k2 = rhs(rho + (0.5 * h) * k1, scratch).copy()
            k3 = rhs(rho + (0.5 * h) * k2, scratch).copy()
            k4 = rhs(rho + h * k3, scratch)
            rho += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            if (step + 1) % check_every == 0 or step + 1 == steps:
                out = FockDensity(state.cutoffs, rho)
                if out.trailing_population() >= 1e-6:
                    raise CutoffError(
                        f"population {out.trailing_population():.3e} reached the "
                        f"top retained level at step {step + 1}/{steps}; raise the cutoff"
                    )
        out = FockDensity(state.cutoffs, rho)
        if abs(out.trace() - trace_in) <= 1e-8:
            return out
        dt *= 0.5
    raise EngineError("integration failed to hold the trace within 1e-8")


def extract_coherence(state: FockDensity) -> complex:
    """Qubit coherence of a two-mode + qubit density operator.

    With rho_qq' the mode blocks, returns <psi_H| rho_HV |psi_V> divided by
    sqrt(tr rho_HH tr rho_VV), where psi_q is the principal eigenvector of
    rho_qq.  Eigenvector phases are gauged by making each vector's largest
    component real positive; for the symmetric scheme the two gauges cancel
    and the result matches the engine's C with vanishing imaginary part.
    """
    d1, d2 = state.cutoffs
    n = d1 * d2
    t6 = state.tensor
    rho_hh = t6[:, :, 0, :, :, 0].reshape(n, n)
    rho_vv = t6[:, :, 1, :, :, 1].reshape(n, n)
    rho_hv = t6[:, :, 0, :, :, 1].reshape(n, n)
    tr_hh = float(np.trace(rho_hh).real)
    tr_vv = float(np.trace(rho_vv).real)
    if tr_hh <= 1e-12 or tr_vv <= 1e-12:
        raise EngineError("a qubit population vanished; coherence is undefined")

    def principal(block: np.ndarray) -> np.ndarray:
        herm = 0.5 * (block + block.conj().T)
        _, vecs = np.linalg.eigh(herm)
        v = vecs[:, -1]
        idx = int(np.argmax(np.abs(v)))
        pivot = v[idx]
        return v * (pivot.conjugate() / abs(pivot))

    psi_h = principal(rho_hh)
    psi_v = principal(rho_vv)
    return complex(np.vdot(psi_h, rho_hv @ psi_v) / math.sqrt(tr_hh * tr_vv))


def trace_distance(a: FockDensity, b: FockDensity) -> float:
    """(1/2) tr |a - b| via the eigenvalues of the Hermitized difference."""
    if a.cutoffs != b.cutoffs:
        raise ValueError("states must share cutoffs")
    delta = a.matrix - b.matrix
    delta = 0.5 * (delta + delta.conj().T)
    eigs = np.linalg.eigvalsh(delta)
    return float(0.5 * np.sum(np.abs(eigs)))
