"""Exact algebra of coherent-state dyads, cat states and linear optics.

Density operators are represented as finite weighted sums of dyads
|q_row><q_col| (x) |ket_amps><bra_amps|, where each amplitude labels a
coherent state of one optical mode. All inner products use the exact
Gaussian overlap formula, so nothing here is truncated to Fock space and
amplitudes as large as |alpha|^2 ~ 1e12 are handled without error.

A ComplexAmplitude is a plain Python complex (re = field quadrature,
im = conjugate quadrature); every operation is expected to keep it finite.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .errors import DegenerateCatError

ComplexAmplitude = complex

_SQRT2 = math.sqrt(2.0)


def _norm_sq(a: complex) -> float:
    # same expression as the real part of conj(a)*a, so overlap(a, a)
    # cancels to exp(0) = 1 exactly
    return a.real * a.real + a.imag * a.imag


def require_finite(z: complex, name: str = "amplitude") -> complex:
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite, got {z!r}")
    return z


def overlap(a: ComplexAmplitude, b: ComplexAmplitude) -> complex:
    """Coherent-state inner product <a|b>.

    Returns exp(-|a|^2/2 - |b|^2/2 + conj(a)*b); the magnitude equals
    exp(-|a-b|^2/2).
    """
    ex = a.conjugate() * b - 0.5 * (_norm_sq(a) + _norm_sq(b))
    return cmath.exp(ex)


def beamsplitter_5050(
    a: ComplexAmplitude, b: ComplexAmplitude
) -> tuple[ComplexAmplitude, ComplexAmplitude]:
    """Amplitude map of a symmetric 50/50 beam splitter.

    Port 1 is the sum port, port 2 the difference port;
    |out1|^2 + |out2|^2 = |a|^2 + |b|^2.
    """
    return (a + b) / _SQRT2, (a - b) / _SQRT2


def displace(
    a: ComplexAmplitude, x: ComplexAmplitude
) -> tuple[ComplexAmplitude, float]:
    """Displacement D(x) acting on |a>: returns (a + x, imprinted phase).

    Convention D(x)|a> = e^{i Im(x conj(a))} |a + x>.
    """
    return a + x, (x * a.conjugate()).imag


@dataclass(frozen=True)
class CatTarget:
    """An even or odd cat state, N(|beta> +- |-beta>)."""

    beta: ComplexAmplitude
    parity: str = "even"

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        require_finite(self.beta, "beta")

    @property
    def sign(self) -> float:
        return 1.0 if self.parity == "even" else -1.0


def cat_norm(target: CatTarget) -> float:
    """Normalization N +- = (2 +- 2 exp(-2|beta|^2))^(-1/2).

    Tends to 1/sqrt(2) for large |beta|. The odd cat with beta = 0 is the
    zero vector and raises DegenerateCatError.
    """
    q = math.exp(-2.0 * _norm_sq(target.beta))
    inner = 2.0 + 2.0 * target.sign * q
    if inner <= 0.0:
        raise DegenerateCatError("odd cat with beta = 0 has no normalization")
    return inner ** -0.5


@dataclass
class DyadTerm:
    """One weighted dyad: |qubit_row><qubit_col| (x) |ket_amps><bra_amps|."""

    qubit_row: str
    qubit_col: str
    ket_amps: tuple[ComplexAmplitude, ...]
    bra_amps: tuple[ComplexAmplitude, ...]
    weight: complex

    def __post_init__(self):
        self.ket_amps = tuple(self.ket_amps)
        self.bra_amps = tuple(self.bra_amps)
        if len(self.ket_amps) != len(self.bra_amps):
            raise ValueError("ket_amps and bra_amps must have the same length")
        if self.qubit_row not in ("H", "V") or self.qubit_col not in ("H", "V"):
            raise ValueError("qubit components must be 'H' or 'V'")

    def dagger(self) -> "DyadTerm":
        return DyadTerm(
            qubit_row=self.qubit_col,
            qubit_col=self.qubit_row,
            ket_amps=self.bra_amps,
            bra_amps=self.ket_amps,
            weight=self.weight.conjugate(),
        )

    def mode_overlap(self) -> complex:
        """Trace of the mode part, prod_m <bra_m|ket_m>."""
        out = 1.0 + 0.0j
        for k, b in zip(self.ket_amps, self.bra_amps):
            out *= overlap(b, k)
        return out


@dataclass
class DyadState:
    """Weighted dyad sum representing a (possibly unnormalized) density op."""

    terms: list[DyadTerm] = field(default_factory=list)
    n_modes: int = 1

    def __post_init__(self):
        for t in self.terms:
            if len(t.ket_amps) != self.n_modes:
                raise ValueError(
                    f"term has {len(t.ket_amps)} modes, state declares {self.n_modes}"
                )

    def trace(self) -> complex:
        tr = 0.0 + 0.0j
        for t in self.terms:
            if t.qubit_row == t.qubit_col:
                tr += t.weight * t.mode_overlap()
        return tr

    def hermitize(self) -> "DyadState":
        """Return (rho + rho^dagger)/2 as a new state."""
        out = []
        for t in self.terms:
            half = DyadTerm(
                t.qubit_row, t.qubit_col, t.ket_amps, t.bra_amps, 0.5 * t.weight
            )
            out.append(half)
            out.append(half.dagger())
        return DyadState(out, self.n_modes)

    def scaled(self, factor: complex) -> "DyadState":
        return DyadState(
            [
                DyadTerm(t.qubit_row, t.qubit_col, t.ket_amps, t.bra_amps,
                         t.weight * factor)
                for t in self.terms
            ],
            self.n_modes,
        )

    def normalized(self) -> "DyadState":
        tr = self.trace().real
        if tr <= 0.0:
            raise ValueError("cannot normalize a state with non-positive trace")
        return self.scaled(1.0 / tr)

    def pruned(self, rel_threshold: float = 1e-15) -> "DyadState":
        """Drop terms whose trace-scale magnitude |w|*prod|<b|k>| is below
        rel_threshold of the current trace magnitude.

        Only useful for long custom slice products; the built-in pipelines
        keep a handful of terms and never call this.
        """
        scale = abs(self.trace())
        if scale == 0.0:
            return self
        kept = [
            t
            for t in self.terms
            if abs(t.weight) * abs(t.mode_overlap()) >= rel_threshold * scale
        ]
        return DyadState(kept, self.n_modes)

    def validate_finite(self) -> None:
        for t in self.terms:
            require_finite(t.weight, "weight")
            for a in t.ket_amps + t.bra_amps:
                require_finite(a)


def _cat_amp(target: CatTarget, x: ComplexAmplitude, norm: float) -> complex:
    """<CSS(target)|x> for a coherent amplitude x."""
    return norm * (
        overlap(target.beta, x) + target.sign * overlap(-target.beta, x)
    )


def fidelity_to_cat(state: DyadState, target: CatTarget) -> float:
    """<CSS| rho |CSS> for a single-mode state with a trivial qubit.

    The state is normalized internally, so unnormalized heralded outputs can
    be passed directly. Terms must be qubit-diagonal (the qubit has been
    measured away); off-diagonal qubit dyads would have no meaning here.
    """
    if not state.terms:
        raise ValueError("fidelity of an empty state is undefined")
    if state.n_modes != 1:
        raise ValueError("fidelity_to_cat expects a single-mode state")
    norm = cat_norm(target)
    num = 0.0 + 0.0j
    tr = 0.0 + 0.0j
    for t in state.terms:
        if t.qubit_row != t.qubit_col:
            raise ValueError("state still carries qubit coherences")
        k, b = t.ket_amps[0], t.bra_amps[0]
        num += t.weight * _cat_amp(target, k, norm) * _cat_amp(target, b, norm).conjugate()
        tr += t.weight * overlap(b, k)
    # the ratio is real for Hermitian input and invariant under a global
    # phase on all weights
    return (num / tr).real


def combine_cgs(phi1: float, phi2: float, beta: ComplexAmplitude) -> DyadState:
    """Recombine two single-mode cat-like states on a 50/50 beam splitter.

    Input 1 is |beta> + e^{i phi1}|-beta>; input 2 arrives with the opposite
    branch orientation, |-beta> + e^{i phi2}|beta>. The returned state is the
    port-1 output conditioned on vacuum at port 2 (unnormalized, trivial
    qubit):

        e^{i phi2}|sqrt2 beta> + e^{i phi1}|-sqrt2 beta>
        + e^{-|beta|^2} (1 + e^{i(phi1 + phi2)}) |0>

    The vacuum term cancels exactly when phi1 + phi2 = pi, and the output is
    an exact even cat of amplitude sqrt2*beta when additionally phi1 = phi2
    = pi/2. Unequal splits keep a relative branch phase e^{i(phi1 - phi2)},
    which costs fidelity.
    """
    require_finite(beta, "beta")
    big = _SQRT2 * beta
    branches = [
        (cmath.exp(1j * phi2), big),
        (cmath.exp(1j * phi1), -big),
        (
            math.exp(-_norm_sq(beta)) * (1.0 + cmath.exp(1j * (phi1 + phi2))),
            0.0 + 0.0j,
        ),
    ]
    terms = []
    for ci, ki in branches:
        for cj, kj in branches:
            terms.append(
                DyadTerm("H", "H", (ki,), (kj,), ci * cj.conjugate())
            )
    return DyadState(terms, n_modes=1)
