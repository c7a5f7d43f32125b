"""Hot numerical loops, compiled with numba when the backend allows it.

Each function is written once in array form that both numba's nopython mode
and plain numpy-scalar interpretation accept, so the two backends run the
same statements in the same order.
"""

import numpy as np

from ._backend import jit_or_plain


@jit_or_plain
def evolve_packed(weights, kets, bras, rows, cols, modes, qcomps, rots, damps, omss, n_slices):
    """Advance packed dyad terms through n_slices of Kerr + loss channels.

    weights: complex128[T], kets/bras: complex128[T, M], rows/cols: uint8[T]
    (0 = H, 1 = V).  Per channel c: modes[c] is the coupled mode, qcomps[c]
    the qubit component that triggers the Kerr rotation, rots[c] the per-slice
    rotation, damps[c] the per-slice amplitude decay e^(-gamma dt / 2), and
    omss[c] = 1 - e^(-gamma dt).  Arrays are updated in place.

    Diagonal mode pairs (bra == ket bit for bit) skip the weight update so
    populations keep their exact weights; the skipped factor is exactly 1
    there because conj(a)*a - |a|^2 cancels term by term.
    """
    n_terms = weights.shape[0]
    n_channels = modes.shape[0]
    for _ in range(n_slices):
        for c in range(n_channels):
            m = modes[c]
            q = qcomps[c]
            rot = rots[c]
            damp = damps[c]
            oms = omss[c]
            for t in range(n_terms):
                if rows[t] == q:
                    kets[t, m] = kets[t, m] * rot
                if cols[t] == q:
                    bras[t, m] = bras[t, m] * rot
                a = kets[t, m]
                b = bras[t, m]
                if a != b:
                    na = a.real * a.real + a.imag * a.imag
                    nb = b.real * b.real + b.imag * b.imag
                    arg = oms * (np.conj(b) * a - 0.5 * (na + nb))
                    weights[t] = weights[t] * np.exp(arg)
                kets[t, m] = a * damp
                bras[t, m] = b * damp


@jit_or_plain
def lindblad_rhs_loops(rho, dvec, g1, g2, sq1, sq2, out):
    """Master-equation right-hand side, explicit-loop form.

    rho and out have shape (d1, d2, 2, d1, d2, 2); dvec (d1, d2, 2) carries
    the diagonal drift i*kerr - loss/2; sq1[n] = sqrt(n + 1).
    """
    d1 = rho.shape[0]
    d2 = rho.shape[1]
    for n1 in range(d1):
        for n2 in range(d2):
            for q in range(2):
                drift_row = dvec[n1, n2, q]
                for m1 in range(d1):
                    for m2 in range(d2):
                        for p in range(2):
                            val = drift_row * rho[n1, n2, q, m1, m2, p]
                            val = val + rho[n1, n2, q, m1, m2, p] * np.conj(dvec[m1, m2, p])
                            if g1 != 0.0 and n1 + 1 < d1 and m1 + 1 < d1:
                                val = val + g1 * sq1[n1] * sq1[m1] * rho[n1 + 1, n2, q, m1 + 1, m2, p]
                            if g2 != 0.0 and n2 + 1 < d2 and m2 + 1 < d2:
                                val = val + g2 * sq2[n2] * sq2[m2] * rho[n1, n2 + 1, q, m1, m2 + 1, p]
                            out[n1, n2, q, m1, m2, p] = val


def lindblad_rhs_numpy(rho, dvec, g1, g2, jump1, jump2, out):
    """Same right-hand side in sliced-array form (the no-numba path).

    jump1/jump2 are the precomputed broadcastable sqrt((n+1)(m+1)) factors
    including their loss rates, or None when that mode is lossless.
    """
    np.multiply(dvec[:, :, :, None, None, None], rho, out=out)
    out += rho * np.conj(dvec)[None, None, None, :, :, :]
    if jump1 is not None:
        out[:-1, :, :, :-1, :, :] += jump1 * rho[1:, :, :, 1:, :, :]
    if jump2 is not None:
        out[:, :-1, :, :, :-1, :] += jump2 * rho[:, 1:, :, :, 1:, :]
    return out
