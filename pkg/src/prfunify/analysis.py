"""Azimuth compression, windows, impulse-response metrics and PSD tools."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import signal

from .errors import ValidationError
from .filters import FirFilter
from .grid import GridDesign

# ---------------------------------------------------------------- windows


@dataclass(frozen=True)
class WindowSpec:
    """Window description: ``kind`` is 'hamming', 'taylor' or 'rect'."""

    kind: str = "hamming"
    alpha: float = 0.6
    nbar: int = 6
    sll_db: float = -35.0


def window(kind, N: int, *, alpha: float = 0.6, nbar: int = 6, sll_db: float = -35.0) -> np.ndarray:
    """Real window of length ``N`` normalized to unit peak.

    ``kind`` may be a string or a :class:`WindowSpec`.
    """
    if isinstance(kind, WindowSpec):
        kind, alpha, nbar, sll_db = kind.kind, kind.alpha, kind.nbar, kind.sll_db
    if N < 2:
        raise ValidationError(f"window length must be >= 2, got {N}")
    if kind == "rect":
        return np.ones(N)
    if kind == "hamming":
        if not 0.5 < alpha <= 1.0:
            raise ValidationError(f"Hamming alpha must lie in (0.5, 1], got {alpha}")
        n = np.arange(N)
        w = alpha - (1.0 - alpha) * np.cos(2.0 * np.pi * n / (N - 1))
    elif kind == "taylor":
        w = signal.windows.taylor(N, nbar=int(nbar), sll=abs(float(sll_db)), norm=False, sym=True)
    else:
        raise ValidationError(f"unknown window kind {kind!r}")
    return w / np.max(w)


# ---------------------------------------------------------------- compression


def azimuth_compress(y, grid: GridDesign, win=None, pbw_crop: bool = True) -> np.ndarray:
    """Focus a uniformly sampled azimuth line.

    Dechirp to the scene-center range history, window, zero-pad to n_fft,
    FFT (centered, unnormalized) and optionally keep the central n_save bins.
    Pixel pitch of the result is ``grid.x_out / grid.n_fft``.
    """
    y = np.asarray(y, dtype=np.complex128)
    if y.size != grid.n_d:
        raise ValidationError(f"line length {y.size} != n_d {grid.n_d}")
    u = grid.output_positions() - grid.u_mid
    ref = np.exp(1j * 4.0 * np.pi / grid.lambda_c * np.sqrt(grid.R ** 2 + u ** 2))
    w = np.ones(grid.n_d) if win is None else (
        np.asarray(win, dtype=float) if not isinstance(win, (str, WindowSpec)) else window(win, grid.n_d))
    if w.size != grid.n_d:
        raise ValidationError("window length differs from n_d")
    z = y * ref * w
    spec = np.fft.fftshift(np.fft.fft(z, n=grid.n_fft))
    if not pbw_crop:
        return spec
    c, h = grid.n_fft // 2, grid.n_save // 2
    return spec[c - h: c - h + grid.n_save]


# ---------------------------------------------------------------- IPR metrics


@dataclass(frozen=True)
class IprMetrics:
    peak_index: int
    peak_pos_m: float
    islr_db: float
    pslr_db: float
    width_3db_m: float
    mainlobe_span: tuple
    method: str = "null-to-null"
    fallback: bool = False

    def to_dict(self):
        d = asdict(self)
        d["mainlobe_span"] = list(self.mainlobe_span)
        return d


def _quadratic_peak(db, k):
    """Vertex offset and curvature of the parabola through db[k-1:k+2]."""
    y0, y1, y2 = db[k - 1], db[k], db[k + 1]
    a = 0.5 * (y0 + y2) - y1
    b = 0.5 * (y2 - y0)
    offset = -b / (2 * a) if a != 0 else 0.0
    return offset, a


def extract_ipr(image_line, pixel_pitch_m: float, method: str = "null-to-null",
                span_factor: float = 1.0, window_widths: float = 10.0) -> IprMetrics:
    """ISLR, PSLR and -3 dB width of the dominant peak.

    The -3 dB width comes from a parabola through the log-magnitude at the
    peak and its two neighbours. The mainlobe is bounded by the first local
    minima on either side (``null-to-null``) or spans ``span_factor`` fitted
    widths either side of the peak (``fixed-span``). Sidelobe energy is
    integrated over ``window_widths`` mainlobe widths either side.
    """
    if method not in ("null-to-null", "fixed-span"):
        raise ValidationError(f"unknown ISLR method {method!r}")
    p = np.abs(np.asarray(image_line)) ** 2
    n = p.size
    if n < 5:
        raise ValidationError("image line too short")
    k = int(np.argmax(p))
    if not 0 < k < n - 1:
        raise ValidationError("peak lies on the edge of the line")
    tiny = np.finfo(float).tiny
    db = 10.0 * np.log10(np.maximum(p, tiny))
    offset, a = _quadratic_peak(db, k)
    width_px = 2.0 * np.sqrt(3.0 / -a) if a < 0 else np.nan

    fallback = False
    lo = hi = None
    if method == "null-to-null":
        lo = k
        while lo > 0 and p[lo - 1] < p[lo]:
            lo -= 1
        hi = k
        while hi < n - 1 and p[hi + 1] < p[hi]:
            hi += 1
        if lo == 0 or hi == n - 1:
            fallback = True
    if method == "fixed-span" or fallback:
        if not np.isfinite(width_px):
            raise ValidationError("cannot fit a -3 dB width around the peak")
        half = max(1, int(round(span_factor * width_px)))
        lo, hi = max(k - half, 0), min(k + half, n - 1)

    span = hi - lo
    a0 = max(0, int(k - window_widths * span))
    a1 = min(n - 1, int(k + window_widths * span))
    main = p[lo:hi + 1].sum()
    side = p[a0:lo].sum() + p[hi + 1:a1 + 1].sum()
    side_peak = max(p[a0:lo].max(initial=0.0), p[hi + 1:a1 + 1].max(initial=0.0))
    islr = 10.0 * np.log10(side / main) if side > 0 else -np.inf
    pslr = 10.0 * np.log10(side_peak / p[k]) if side_peak > 0 else -np.inf
    return IprMetrics(
        peak_index=k, peak_pos_m=float((k + offset - n // 2) * pixel_pitch_m),
        islr_db=float(islr), pslr_db=float(pslr),
        width_3db_m=float(width_px * pixel_pitch_m), mainlobe_span=(int(lo), int(hi)),
        method=method, fallback=fallback)


# ---------------------------------------------------------------- PSD tools


@dataclass(frozen=True)
class PsdEstimate:
    omega: np.ndarray
    s: np.ndarray
    n_segments: int = 0
    segment_len: int = 0
    overlap: int = 0


def estimate_psd(x, segment_len: int = 256, overlap_frac: float = 0.5, win="hann") -> PsdEstimate:
    """Welch estimate on a centered grid omega in [-pi, pi).

    Density is per rad/sample: unit-variance white noise gives 1/(2*pi).
    """
    x = np.asarray(x, dtype=np.complex128)
    if segment_len > x.size:
        raise ValidationError("segment_len exceeds the signal length")
    if not 0.0 <= overlap_frac < 1.0:
        raise ValidationError("overlap_frac must lie in [0, 1)")
    if isinstance(win, (str, WindowSpec)) and win not in ("hann",):
        win = window(win, segment_len)
    noverlap = int(round(overlap_frac * segment_len))
    omega, s = signal.welch(x, fs=2.0 * np.pi, window=win, nperseg=segment_len,
                            noverlap=noverlap, return_onesided=False, detrend=False,
                            scaling="density")
    omega, s = np.fft.fftshift(omega), np.fft.fftshift(s)
    step = segment_len - noverlap
    n_seg = 1 + (x.size - segment_len) // step
    return PsdEstimate(omega, np.real(s), n_seg, segment_len, noverlap)


def gating_psd_theory(p: float, s_s: PsdEstimate) -> PsdEstimate:
    """Expected PSD after Bernoulli(p) gating of a signal with PSD ``s_s``.

    The integral over one period uses the periodic trapezoid rule on the
    (uniform, [-pi, pi)) grid.
    """
    if not 0.0 < p <= 1.0:
        raise ValidationError(f"p must lie in (0, 1], got {p}")
    s = np.asarray(s_s.s, dtype=float)
    if p == 1.0:
        return s_s
    d_omega = 2.0 * np.pi / s.size
    total = float(np.sum(s) * d_omega)
    out = p * (1.0 - p) * total / (2.0 * np.pi) + p * p * s
    return PsdEstimate(s_s.omega, out, s_s.n_segments, s_s.segment_len, s_s.overlap)


def claim1_oracle(dense, f: FirFilter, L: int) -> np.ndarray:
    """Filter the dense sequence with ``f`` and keep every L-th sample.

    Full linear convolution; the first and last ``f.order`` samples of the
    filtered sequence are partial sums.
    """
    dense = np.asarray(dense)
    if dense.size <= f.order:
        raise ValidationError("dense sequence must be longer than the filter order")
    return np.convolve(dense, f.taps)[::L]


def passband_deviation_db(s_y: PsdEstimate, s_ref: PsdEstimate, gamma: float) -> float:
    """Mean |10 log10(S_y/S_ref)| over |omega| <= gamma*pi."""
    band = np.abs(s_y.omega) <= gamma * np.pi
    tiny = np.finfo(float).tiny
    ratio = np.maximum(s_y.s[band], tiny) / np.maximum(s_ref.s[band], tiny)
    return float(np.mean(np.abs(10.0 * np.log10(ratio))))
