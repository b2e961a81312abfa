"""Preset synthetic experiments: three-scatterer spaceborne scenes imaged
through the full simulate -> resample -> compress -> measure chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import IprMetrics, WindowSpec, azimuth_compress, extract_ipr
from .errors import ValidationError
from .filters import PolyphaseBank, design_filter_bank
from .grid import GridDesign, design_output_grid
from .resampler import DEFAULT_MIN_WEIGHT_FRACTION, resample
from .simulate import (PriSequence, PulseSet, Scatterer, Scene, drop_samples, gen_pri_sequence,
                       positions_from_pri, simulate_acquisition)

#: Fig.-5-style PRI variations (seconds, meters).
PRI_VARIATIONS = {
    "constant": dict(pri_min=0.385e-3, pri_max=0.385e-3, pri_mean=0.385e-3, period=580.0),
    "slow": dict(pri_min=0.375e-3, pri_max=0.395e-3, pri_mean=0.385e-3, period=580.0),
    "fast": dict(pri_min=0.349e-3, pri_max=0.421e-3, pri_mean=0.385e-3, period=34.0),
    "elaborate": dict(pri_min=0.309e-3, pri_max=0.461e-3, pri_mean=0.385e-3, period=268.0),
}

SCENARIO_TARGETS = {
    "scenario1": (-17e3, 0.0, 17e3),
    "scenario2": (-175.0, 0.0, 175.0),
    "center": (0.0,),
}


@dataclass(frozen=True)
class SpaceborneSetup:
    """Spaceborne L-band broadside geometry with a fixed output grid.

    The unpadded aperture spans ``n_d`` output samples at ``pri_out``, so the
    scene-center Doppler history spans ``pbw_target`` Hz when
    ``n_d = pbw_target * lambda * R / (2 * v_p**2 * pri_out)``.
    """

    slant_range: float = 1000e3
    height: float = 760e3
    lambda_c: float = 0.2384
    v_p: float = 7473.0
    pri_out: float = 0.417e-3
    n_fft: int = 8192
    k_cr: float = 1.0
    p_d: float = 2.0
    npr: int = 5
    L: int = 64
    gamma: float = 2.0 / 3.0
    window: WindowSpec = field(default_factory=lambda: WindowSpec("hamming", alpha=0.6))

    def grid(self) -> GridDesign:
        n_d = int(np.floor(self.n_fft * self.k_cr / self.p_d))
        D = n_d * self.v_p * self.pri_out
        return design_output_grid(self.n_fft, self.p_d, self.k_cr, None, self.npr, self.L,
                                  self.gamma, self.lambda_c, None, self.slant_range, self.v_p, D=D)

    def bank(self) -> PolyphaseBank:
        return design_filter_bank(self.npr, self.L, self.gamma)[2]

    def scene(self, targets) -> Scene:
        y_c = -np.sqrt(self.slant_range ** 2 - self.height ** 2)
        return Scene(tuple(Scatterer(float(x), 0.0, 0.0) for x in targets),
                     self.lambda_c, y_c, self.height, self.v_p)

    def doppler_span(self) -> float:
        """Doppler span (Hz) of a scene-center target over the unpadded aperture."""
        g = self.grid()
        return 2.0 * self.v_p ** 2 * g.n_d * self.pri_out / (self.lambda_c * self.slant_range)


def pri_sequence(variation: str) -> PriSequence:
    if variation not in PRI_VARIATIONS:
        raise ValidationError(f"unknown PRI variation {variation!r}; expected one of {sorted(PRI_VARIATIONS)}")
    p = PRI_VARIATIONS[variation]
    kind = variation
    return gen_pri_sequence(kind, p["pri_min"], p["pri_max"], p["pri_mean"], p["period"])


def acquire(setup: SpaceborneSetup, variation: str, targets, grid: GridDesign = None) -> PulseSet:
    """Simulate pulses over the padded aperture of the output grid."""
    g = grid or setup.grid()
    seq = pri_sequence(variation)
    u = positions_from_pri(seq, setup.v_p, g.u_min, g.u_max)
    return simulate_acquisition(setup.scene(targets), u,
                                meta=dict(variation=variation, targets=list(targets)))


@dataclass(frozen=True)
class IprRun:
    metrics: IprMetrics
    n_pulses: int
    n_starved: int
    image: np.ndarray = field(repr=False)


def run_ipr(setup: SpaceborneSetup, variation: str, targets=SCENARIO_TARGETS["scenario1"],
            drop_fraction: float = 0.0, seed=0, method: str = "null-to-null",
            min_weight_fraction: float = DEFAULT_MIN_WEIGHT_FRACTION,
            grid: GridDesign = None, bank: PolyphaseBank = None) -> IprRun:
    """Simulate, resample, compress and measure the scene-center IPR."""
    g = grid or setup.grid()
    b = bank or setup.bank()
    pulses = acquire(setup, variation, targets, g)
    if drop_fraction:
        pulses = drop_samples(pulses, drop_fraction, seed)
    y, report = resample(g, b, pulses.positions, pulses.samples,
                         min_weight_fraction=min_weight_fraction)
    img = azimuth_compress(y, g, setup.window, pbw_crop=True)
    m = extract_ipr(img, g.pixel_pitch, method=method)
    return IprRun(m, len(pulses), len(report.starved), img)


# ---------------------------------------------------------------- dense-grid experiments


def dense_grid(n_dense: int, L: int = 64, npr: int = 5, gamma: float = 2.0 / 3.0) -> GridDesign:
    """Unit-spacing output grid whose padded aperture holds exactly
    ``n_dense`` dense cells (``n_dense`` must be a multiple of L)."""
    if n_dense % L:
        raise ValidationError("n_dense must be a multiple of L")
    n_d = n_dense // L - npr
    return design_output_grid(n_d, 1.0, 1.0, 1.0, npr, L, gamma, 1.0, 1.0, 1.0, 1.0, D=float(n_d))


def dense_positions(grid: GridDesign) -> np.ndarray:
    """Along-track position of every dense cell of the padded aperture.

    Cell ``i`` sits exactly on ``alpha = i/L - (npr-1)/2``; with unit spacing
    these positions are exact binary fractions, so the mapping back to the
    dense index involves no rounding.
    """
    n_dense = grid.n_xac * grid.L
    alpha = np.arange(n_dense) / grid.L - (grid.npr - 1) / 2
    return grid.u_mid + (alpha - (grid.n_d + 1) / 2) * grid.du_out


def bandlimited_noise(n: int, band: float, seed) -> np.ndarray:
    """Complex Gaussian noise, unit variance, flat over |omega| <= band."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    spec = np.fft.fft(x)
    spec[np.abs(np.fft.fftfreq(n) * 2 * np.pi) > band] = 0.0
    y = np.fft.ifft(spec)
    return y / np.sqrt(np.mean(np.abs(y) ** 2))


def claim1_check(p: float, L: int = 64, gamma: float = 2.0 / 3.0, npr: int = 5,
                 log2_len: int = 20, segment_len: int = 256, seed=0,
                 signal_band: float = None) -> dict:
    """Compare the POLYPHASE output PSD of a Bernoulli-gated dense signal with
    the PSD of the filtered-and-decimated ungated signal.

    Returns a dict with the mean absolute passband deviation (dB), both PSD
    estimates, and the resampler's sparsity diagnostic.
    """
    from .analysis import claim1_oracle, estimate_psd, passband_deviation_db
    from .simulate import gate_dense_signal

    fpr, f, bank = design_filter_bank(npr, L, gamma)
    n_dense = 1 << log2_len
    g = dense_grid(n_dense, L, npr, gamma)
    band = np.pi / L if signal_band is None else signal_band
    ss = np.random.SeedSequence(seed)
    s_seed, g_seed = ss.spawn(2)
    dense = bandlimited_noise(n_dense, band, s_seed)
    _, mask = gate_dense_signal(dense, p, g_seed)
    u = dense_positions(g)
    y, report = resample(g, bank, u[mask], dense[mask], rho=band * L / np.pi)
    ref = claim1_oracle(dense, f, L)[npr:npr + g.n_d] / np.sum(f.taps)
    s_y = estimate_psd(y, segment_len)
    s_ref = estimate_psd(ref, segment_len)
    return dict(p=p, deviation_db=passband_deviation_db(s_y, s_ref, gamma), psd_pipeline=s_y,
                psd_oracle=s_ref, report=report, output=y, oracle=ref)
