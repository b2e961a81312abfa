"""Uniform output grid design and mapping of pulse positions onto it.

Positions ``u`` (meters along track) map affinely to output-sample units

    alpha = (u - u_mid)/du_out + (n_d + 1)/2

and then onto the dense grid (L cells per output sample) by flooring.
Internally the dense index is offset by ``L*(npr+1)/2`` so that the padded
aperture (which extends ``npr/2`` output samples past each end of the
unpadded one) never produces a negative index.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import ValidationError

SPEED_OF_LIGHT = 299_792_458.0

# Guards floor() against representation error in products like 8192*1.2/2.4.
_FLOOR_GUARD = 1e-9


@dataclass(frozen=True)
class GridDesign:
    n_fft: int
    p_d: float
    k_cr: float
    k_r: float
    npr: int
    L: int
    gamma: float
    lambda_c: float
    b_chirp: float
    R: float
    v_p: float
    n_d: int
    n_xac: int
    delta_beta: float
    D: float
    du_out: float
    prf_out_spatial: float
    prf_out_temporal: float
    pbw: float
    x_out: float
    u_min: float
    u_mid: float
    u_max: float

    @property
    def n_save(self) -> int:
        return int(round(self.gamma * self.n_fft))

    @property
    def pixel_pitch(self) -> float:
        """Azimuth pixel spacing of the compressed line (meters)."""
        return self.x_out / self.n_fft

    @property
    def half_pad(self) -> int:
        return (self.npr + 1) // 2

    @property
    def dense_offset(self) -> int:
        """Offset added to floor(L*alpha) to get the internal dense index."""
        return self.L * self.half_pad

    @property
    def padded_half_length(self) -> float:
        return self.n_xac * self.du_out / 2.0

    def output_positions(self) -> np.ndarray:
        """Along-track positions of the n_d output samples."""
        n = np.arange(self.n_d)
        return self.u_mid + (n - self.n_d / 2.0) * self.du_out

    def to_text(self) -> str:
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in asdict(self).items())

    @classmethod
    def from_text(cls, text: str) -> "GridDesign":
        raw = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()
        kwargs = {}
        for fld in fields(cls):
            if fld.name not in raw:
                raise ValidationError(f"grid file missing key {fld.name!r}")
            kwargs[fld.name] = int(raw[fld.name]) if fld.type == "int" else float(raw[fld.name])
        return cls(**kwargs)


def _fmt(v):
    return str(v) if isinstance(v, (int, np.integer)) else repr(float(v))


def design_output_grid(n_fft, p_d, k_cr, k_r, npr, L, gamma, lambda_c, b_chirp, R, v_p,
                       u_min=None, u_max=None, D=None) -> GridDesign:
    """Derive the uniform output grid from acquisition parameters.

    If ``D`` (unpadded aperture length, meters) is given it is used as is
    and ``delta_beta = D/R``; otherwise ``delta_beta`` follows from matching
    azimuth to range resolution and ``D = R * delta_beta``.

    ``u_min``/``u_max`` bound the accepted (padded) aperture. When omitted
    they default to a padded aperture of ``n_xac*du_out`` centered at 0.
    """
    for name, val in dict(n_fft=n_fft, p_d=p_d, k_cr=k_cr, npr=npr, L=L,
                          lambda_c=lambda_c, R=R, v_p=v_p).items():
        if not (val > 0 and math.isfinite(val)):
            raise ValidationError(f"{name} must be positive and finite, got {val}")
    if not 0.0 < gamma < 1.0:
        raise ValidationError(f"gamma must lie in (0, 1), got {gamma}")
    if p_d < k_cr:
        raise ValidationError(f"p_d ({p_d}) must be >= k_cr ({k_cr})")
    if int(npr) != npr or npr % 2 == 0:
        raise ValidationError(f"npr must be an odd integer, got {npr}")

    if D is None:
        if not (b_chirp and b_chirp > 0 and k_r and k_r > 0):
            raise ValidationError("b_chirp and k_r are required when D is not given")
        delta_beta = (lambda_c * b_chirp / SPEED_OF_LIGHT) * (k_cr / k_r)
        D = R * delta_beta
    else:
        if not D > 0:
            raise ValidationError(f"D must be positive, got {D}")
        delta_beta = D / R

    n_d = int(math.floor(n_fft * k_cr / p_d * (1.0 + _FLOOR_GUARD)))
    n_xac = n_d + int(npr)
    du_out = D / n_d
    prf_s = 1.0 / du_out
    prf_t = v_p * prf_s

    if (u_min is None) != (u_max is None):
        raise ValidationError("give both u_min and u_max, or neither")
    if u_min is None:
        u_min, u_max = -n_xac * du_out / 2.0, n_xac * du_out / 2.0
    if not u_max > u_min:
        raise ValidationError("u_max must exceed u_min")
    if u_max - u_min < (npr + 1) * du_out:
        raise ValidationError(
            f"aperture [{u_min}, {u_max}] is shorter than npr+1 = {npr + 1} output samples")

    return GridDesign(
        n_fft=int(n_fft), p_d=float(p_d), k_cr=float(k_cr),
        k_r=float(k_r) if k_r else 0.0, npr=int(npr), L=int(L), gamma=float(gamma),
        lambda_c=float(lambda_c), b_chirp=float(b_chirp) if b_chirp else 0.0,
        R=float(R), v_p=float(v_p), n_d=n_d, n_xac=n_xac, delta_beta=float(delta_beta),
        D=float(D), du_out=du_out, prf_out_spatial=prf_s, prf_out_temporal=prf_t,
        pbw=gamma * prf_t, x_out=(lambda_c / 2.0) * R * prf_s,
        u_min=float(u_min), u_mid=(u_min + u_max) / 2.0, u_max=float(u_max),
    )


def map_position(u, g: GridDesign):
    """Output-grid coordinate alpha of along-track position(s) ``u``."""
    return (np.asarray(u, dtype=np.float64) - g.u_mid) / g.du_out + (g.n_d + 1) / 2.0


def unmap_position(alpha, g: GridDesign):
    """Inverse of :func:`map_position`."""
    return g.u_mid + (np.asarray(alpha, dtype=np.float64) - (g.n_d + 1) / 2.0) * g.du_out


def align_to_dense_grid(alpha, L: int):
    """Dense-grid cell index floor(L*alpha); scalar in, int out."""
    ell = np.floor(L * np.asarray(alpha, dtype=np.float64))
    if np.ndim(ell) == 0:
        return int(ell)
    return ell.astype(np.int64)


def realignment_displacement(alpha, L: int):
    """Displacement (in output samples) introduced by snapping to the dense grid."""
    a = np.asarray(alpha, dtype=np.float64)
    return (L * a - np.floor(L * a)) / L


def in_aperture(u, g: GridDesign):
    """Mask of positions the resampler accepts.

    Accepted positions lie inside [u_min, u_max] and inside the padded grid
    extent (n_xac output samples centered on u_mid).
    """
    u = np.asarray(u, dtype=np.float64)
    h = g.padded_half_length
    lo = max(g.u_min, g.u_mid - h)
    hi = min(g.u_max, g.u_mid + h)
    return (u >= lo) & (u <= hi)
