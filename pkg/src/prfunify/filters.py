"""Narrowband decimation filter design and polyphase decomposition.

The filter F(z) is built in three steps:

1. a short Type-II linear-phase prototype ``f_pr`` (odd order ``npr``) with
   passband [0, gamma*pi] and a stopband pushed against Nyquist;
2. the L-fold zero-stuffed version ``f_be(n) = f_pr(n/L)`` (``F_pr(z^L)``);
3. the least-squares fit of ``F_pr(z^L)`` restricted to the ideal lowpass
   band |w| < pi/L, which works out to sinc interpolation of the prototype
   taps onto the dense grid:

       f(n) = (1/L) * sum_m f_pr(m) * sinc((n - m L) / L),  n = 0..npr*L

The result has order ``npr*L`` and splits into L polyphase branches
``f_l(n) = f(nL + l)``; branch 0 has ``npr+1`` taps, the rest ``npr``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

DEFAULT_NPR = 5
DEFAULT_L = 64
DEFAULT_GAMMA = 2.0 / 3.0
DEFAULT_DESIGN_DENSITY = 2048


@dataclass(frozen=True)
class FirFilter:
    """Real, symmetric (linear-phase) FIR filter with band-edge metadata.

    Edges are in normalized rad/sample of the rate the filter runs at.
    """

    taps: np.ndarray
    passband_edge: float
    stopband_edge: float

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.float64)
        if taps.ndim != 1 or taps.size < 2:
            raise ValidationError("FIR filter needs at least 2 taps (order >= 1)")
        if not np.all(np.isfinite(taps)):
            raise ValidationError("FIR taps must be finite")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def order(self) -> int:
        return self.taps.size - 1

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.taps, self.taps[::-1]))

    def dc_gain(self) -> float:
        return float(np.sum(self.taps))


@dataclass(frozen=True)
class PolyphaseBank:
    """L polyphase branches of a filter of order ``npr*L``.

    ``components[l][n] == f[n*L + l]``.
    """

    L: int
    npr: int
    components: tuple = field(repr=False)

    def interleave(self) -> np.ndarray:
        """Reassemble the parent filter taps (inverse of decomposition)."""
        out = np.empty(self.npr * self.L + 1)
        for ell, comp in enumerate(self.components):
            out[ell::self.L] = comp
        return out

    def as_matrix(self) -> np.ndarray:
        """(L, npr+1) array of branch taps; branches >= 1 are zero padded
        in their last column. Used by the vectorized update loop."""
        mat = np.zeros((self.L, self.npr + 1))
        for ell, comp in enumerate(self.components):
            mat[ell, : comp.size] = comp
        return mat

    @property
    def tap_sum(self) -> float:
        return float(sum(np.sum(c) for c in self.components))


def _type2_rows(omega, half):
    """Amplitude-response rows of a symmetric even-length filter.

    With taps b_0..b_{M-1} mirrored to length 2M, the zero-phase amplitude
    is sum_k 2*b_k*cos(w*(M-1-k+1/2)).
    """
    k = np.arange(half)
    return 2.0 * np.cos(np.outer(omega, (half - 1 - k) + 0.5))


def design_prototype(npr: int = DEFAULT_NPR, gamma: float = DEFAULT_GAMMA,
                     design_grid_density: int = DEFAULT_DESIGN_DENSITY) -> FirFilter:
    """Least-squares Type-II lowpass prototype of odd order ``npr``.

    Passband [0, gamma*pi] (target 1) and stopband [(1+gamma)*pi/2, pi]
    (target 0) get equal weight on a uniform grid of ``design_grid_density``
    points; the transition band is don't-care. The DC gain is pinned to
    exactly 1 through a single linear equality constraint (solved via the
    KKT system), so normalized convolution sees no overall gain bias.
    """
    if int(npr) != npr or npr % 2 == 0:
        raise ValidationError(f"npr must be an odd integer (Type-II design), got {npr}")
    npr = int(npr)
    if npr < 3:
        raise ValidationError(f"npr must be >= 3, got {npr}")
    if not 0.0 < gamma < 1.0:
        raise ValidationError(f"gamma must lie in (0, 1), got {gamma}")
    if design_grid_density < 8 * (npr + 1):
        raise ValidationError(
            f"design_grid_density must be >= 8*(npr+1) = {8 * (npr + 1)}, got {design_grid_density}")

    half = (npr + 1) // 2
    omega = np.linspace(0.0, np.pi, int(design_grid_density))
    stop_edge = (1.0 + gamma) * np.pi / 2.0
    in_pass = omega <= gamma * np.pi
    in_stop = omega >= stop_edge
    A = np.vstack([_type2_rows(omega[in_pass], half), _type2_rows(omega[in_stop], half)])
    d = np.concatenate([np.ones(in_pass.sum()), np.zeros(in_stop.sum())])
    C = _type2_rows(np.array([0.0]), half)

    kkt = np.block([[A.T @ A, C.T], [C, np.zeros((1, 1))]])
    rhs = np.concatenate([A.T @ d, [1.0]])
    b = np.linalg.solve(kkt, rhs)[:half]
    taps = np.concatenate([b, b[::-1]])
    return FirFilter(taps, passband_edge=gamma * np.pi, stopband_edge=stop_edge)


def upsample_shaping(fpr: FirFilter, L: int) -> FirFilter:
    """Zero-stuff the prototype by L: F_be(z) = F_pr(z^L)."""
    L = _check_L(L)
    out = np.zeros(fpr.order * L + 1)
    out[::L] = fpr.taps
    return FirFilter(out, fpr.passband_edge / L, fpr.stopband_edge / L)


def _sinc_on_grid(n, shift, L):
    """sinc((n - shift)/L) with sin(x)/x semantics in units of pi.

    Exact 1 at n == shift and exact 0 at other multiples of L, so taps on
    the decimation grid reproduce the prototype without rounding noise.
    """
    d = n - shift
    out = np.sinc(d / L)
    on_grid = (d % L) == 0
    out[on_grid] = 0.0
    out[d == 0] = 1.0
    return out


def design_combined(fpr: FirFilter, L: int) -> FirFilter:
    """Combined narrowband filter of order npr*L (step 3 of the design)."""
    L = _check_L(L)
    npr = fpr.order
    n = np.arange(npr * L + 1)
    acc = np.zeros(n.size)
    for m, c in enumerate(fpr.taps):
        acc += c * _sinc_on_grid(n, m * L, L)
    acc /= L
    # Exact symmetry: floating-point addition is commutative.
    acc = (acc + acc[::-1]) / 2.0
    return FirFilter(acc, fpr.passband_edge / L, np.pi / L)


def polyphase_decompose(f: FirFilter, L: int) -> PolyphaseBank:
    """Split ``f`` into L branches, ``components[l] = f[l::L]``."""
    L = _check_L(L)
    if f.order % L:
        raise ValidationError(f"filter order {f.order} is not a multiple of L={L}")
    comps = tuple(np.array(f.taps[ell::L]) for ell in range(L))
    for c in comps:
        c.setflags(write=False)
    return PolyphaseBank(L=L, npr=f.order // L, components=comps)


def frequency_response(f: FirFilter, omega_grid) -> np.ndarray:
    """Evaluate sum_n taps(n) exp(-i w n) on ``omega_grid`` (rad/sample)."""
    w = np.asarray(omega_grid, dtype=np.float64)
    if np.any(w < 0) or np.any(w > np.pi):
        raise ValidationError("omega values must lie in [0, pi]")
    n = np.arange(f.taps.size)
    return np.exp(-1j * np.outer(w, n)) @ f.taps


def design_filter_bank(npr: int = DEFAULT_NPR, L: int = DEFAULT_L, gamma: float = DEFAULT_GAMMA,
                       design_grid_density: int = DEFAULT_DESIGN_DENSITY):
    """Convenience: prototype, combined filter and its polyphase bank."""
    fpr = design_prototype(npr, gamma, design_grid_density)
    f = design_combined(fpr, L)
    return fpr, f, polyphase_decompose(f, L)


def _check_L(L):
    if int(L) != L or L < 2:
        raise ValidationError(f"L must be an integer >= 2, got {L}")
    return int(L)
