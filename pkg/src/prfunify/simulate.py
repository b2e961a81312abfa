"""Synthetic variable-PRF acquisitions of point scatterers.

Only the azimuth phase history of a single range bin is modelled: each
scatterer contributes ``sigma * exp(-j*4*pi/lambda * D_s(u))`` where
``D_s`` is the instantaneous slant distance. No antenna pattern, noise or
range migration.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ValidationError

PRI_KINDS = ("slow", "fast", "elaborate", "constant", "custom")

# Normalized level waveforms (phase in [0, 1] -> level in [0, 1]; 0 = pri_min,
# 1 = pri_max). Both are piecewise linear and periodic.
_TRIANGLE = ((0.0, 0.5), (0.25, 1.0), (0.75, 0.0), (1.0, 0.5))
# Two sweeps: a 2/3-swing ramp over the lower part of the range for two
# thirds of the period, then a 1/3-swing ramp over the upper part. The
# phase-average level is 1/2.
_TWO_SWEEP = ((0.0, 2 / 3), (1 / 3, 0.0), (2 / 3, 2 / 3), (5 / 6, 1.0), (1.0, 2 / 3))


@dataclass(frozen=True)
class Scatterer:
    x: float
    y: float
    z: float
    sigma: complex = 1.0 + 0.0j


@dataclass(frozen=True)
class Scene:
    scatterers: tuple
    lambda_c: float
    y_c: float
    z_c: float
    v_p: float

    def __post_init__(self):
        if not self.lambda_c > 0:
            raise ValidationError("lambda_c must be positive")
        if len(self.scatterers) == 0:
            raise ValidationError("scene needs at least one scatterer")
        object.__setattr__(self, "scatterers", tuple(self.scatterers))


@dataclass(frozen=True)
class PriSequence:
    """Periodic PRI schedule as a function of along-track phase.

    ``waveform`` is a table of (phase in [0,1], PRI seconds) breakpoints,
    linearly interpolated.
    """

    kind: str
    pri_min: float
    pri_max: float
    pri_mean: float
    period: float
    waveform: tuple

    def pri_at(self, phase):
        ph, pri = np.array(self.waveform).T
        return np.interp(np.asarray(phase, dtype=float) % 1.0, ph, pri)

    def pulse_mean(self, n: int = 200001) -> float:
        """Mean PRI of pulses over one period.

        Pulses fall at a spatial density proportional to 1/PRI, so the mean
        over pulses is the harmonic mean of PRI over spatial phase.
        """
        pri = self.pri_at(np.linspace(0.0, 1.0, n))
        inv = np.trapezoid(1.0 / pri, dx=1.0 / (n - 1))
        return float(1.0 / inv)


def _warped_table(levels, pri_min, pri_max, kappa, n_fine=0):
    """Map a level table through PRI = min + (max-min)*level**kappa.

    Each linear segment is subdivided so the warped curve stays accurate.
    """
    ph, lv = np.array(levels).T
    fine = np.linspace(0.0, 1.0, 1 + 64 * (len(ph) - 1)) if n_fine == 0 else np.linspace(0, 1, n_fine)
    fine = np.union1d(fine, ph)
    level = np.interp(fine, ph, lv)
    pri = pri_min + (pri_max - pri_min) * level ** kappa
    return tuple(zip(fine.tolist(), pri.tolist()))


def gen_pri_sequence(kind: str, pri_min: float, pri_max: float, pri_mean: float,
                     period_m: float, table=None) -> PriSequence:
    """Build one of the standard PRI variations.

    ``slow``/``fast``: single triangular sweep mean -> max -> min -> mean.
    ``elaborate``: two sweeps of 2/3 and 1/3 of the full swing.
    ``constant``: PRI == pri_mean. ``custom``: ``table`` of (phase, PRI).

    For the swept kinds, the sweep is warped by a power law whose exponent is
    chosen so the pulse-average PRI equals ``pri_mean`` while the extremes
    stay exactly at ``pri_min``/``pri_max``.
    """
    if kind not in PRI_KINDS:
        raise ValidationError(f"unknown PRI kind {kind!r}; expected one of {PRI_KINDS}")
    if not (0 < pri_min <= pri_mean <= pri_max):
        raise ValidationError("PRI bounds must satisfy 0 < pri_min <= pri_mean <= pri_max")
    if not period_m > 0:
        raise ValidationError("period must be positive")

    if kind == "constant":
        return PriSequence(kind, pri_mean, pri_mean, pri_mean, period_m,
                           ((0.0, pri_mean), (1.0, pri_mean)))
    if kind == "custom":
        if table is None or len(table) < 2:
            raise ValidationError("custom PRI kind needs a table of (phase, PRI) pairs")
        tab = tuple((float(p), float(t)) for p, t in table)
        pris = [t for _, t in tab]
        if min(pris) < pri_min or max(pris) > pri_max:
            raise ValidationError("custom PRI table leaves [pri_min, pri_max]")
        return PriSequence(kind, pri_min, pri_max, pri_mean, period_m, tab)

    levels = _TRIANGLE if kind in ("slow", "fast") else _TWO_SWEEP
    if pri_max == pri_min:
        return gen_pri_sequence("constant", pri_min, pri_max, pri_mean, period_m)

    def mean_for(kappa):
        return PriSequence(kind, pri_min, pri_max, pri_mean, period_m,
                           _warped_table(levels, pri_min, pri_max, kappa)).pulse_mean()

    # pulse_mean increases monotonically with 1/kappa; bisect on log(kappa).
    lo, hi = np.log(1e-3), np.log(1e3)
    if not (mean_for(np.exp(hi)) <= pri_mean <= mean_for(np.exp(lo))):
        raise ValidationError("pri_mean is not reachable for this waveform and bounds")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mean_for(np.exp(mid)) > pri_mean:
            lo = mid
        else:
            hi = mid
    kappa = float(np.exp(0.5 * (lo + hi)))
    return PriSequence(kind, pri_min, pri_max, pri_mean, period_m,
                       _warped_table(levels, pri_min, pri_max, kappa))


def positions_from_pri(seq: PriSequence, v_p: float, u_start: float, u_end: float) -> np.ndarray:
    """Pulse positions from ``u_start`` (inclusive) to ``u_end`` (exclusive)."""
    if not u_end > u_start:
        raise ValidationError("u_end must exceed u_start")
    if seq.kind == "constant":
        du = v_p * seq.pri_mean
        n = int(np.floor((u_end - u_start) / du)) + 1
        u = u_start + du * np.arange(n)
        return u[u < u_end]
    ph, pri = np.array(seq.waveform).T
    out = []
    u = float(u_start)
    while u < u_end:
        out.append(u)
        phase = ((u - u_start) / seq.period) % 1.0
        u += v_p * float(np.interp(phase, ph, pri))
    return np.array(out)


def point_target_response(scene: Scene, u) -> np.ndarray:
    """Noise-free azimuth phase history at position(s) ``u``."""
    u = np.asarray(u, dtype=np.float64)
    k2 = 4.0 * np.pi / scene.lambda_c
    acc = np.zeros(u.shape, dtype=np.complex128)
    for s in scene.scatterers:
        ds = np.sqrt((s.x - u) ** 2 + (s.y - scene.y_c) ** 2 + (s.z - scene.z_c) ** 2)
        acc += complex(s.sigma) * np.exp(-1j * k2 * ds)
    return acc


@dataclass(frozen=True)
class PulseSet:
    positions: np.ndarray
    samples: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=np.float64)
        s = np.asarray(self.samples, dtype=np.complex128)
        if p.shape != s.shape or p.ndim != 1:
            raise ValidationError("positions and samples must be 1-D and equally long")
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.positions.size


def simulate_acquisition(scene: Scene, positions, meta: Optional[dict] = None) -> PulseSet:
    positions = np.asarray(positions, dtype=np.float64)
    return PulseSet(positions, point_target_response(scene, positions), dict(meta or {}))


def gate_dense_signal(dense, p: float, seed):
    """Zero each sample independently with probability 1-p.

    Returns ``(gated, mask)``.
    """
    if not 0.0 < p <= 1.0:
        raise ValidationError(f"p must lie in (0, 1], got {p}")
    dense = np.asarray(dense)
    mask = np.random.default_rng(seed).random(dense.shape) < p
    return np.where(mask, dense, 0), mask


def drop_samples(pulses: PulseSet, fraction: float, seed) -> PulseSet:
    """Remove exactly round(fraction*K) pulses chosen uniformly at random."""
    if not 0.0 <= fraction < 1.0:
        raise ValidationError(f"fraction must lie in [0, 1), got {fraction}")
    k = len(pulses)
    n_drop = int(round(fraction * k))
    if n_drop == 0:
        return pulses
    rng = np.random.default_rng(seed)
    keep = np.ones(k, dtype=bool)
    keep[rng.choice(k, size=n_drop, replace=False)] = False
    meta = dict(pulses.meta, dropped_fraction=fraction, drop_seed=seed)
    return replace(pulses, positions=pulses.positions[keep], samples=pulses.samples[keep], meta=meta)
