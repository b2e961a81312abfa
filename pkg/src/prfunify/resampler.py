"""Streaming POLYPHASE normalized-convolution resampler.

Each pulse lands on one dense-grid cell ``ell`` and is scattered through a
single polyphase branch into at most ``npr+1`` neighbouring output samples
(input-centered convolution). Two accumulators are kept: the filtered data
``y_acc`` and the filtered gating mask ``w_acc``. The output is their ratio,
which makes the interpolator reproduce constants exactly regardless of
which cells were filled.

Index conventions (``K = (npr+1)/2``):

* internal dense index ``ell = floor(L*alpha) + K*L``;
* accumulator index ``n`` in ``[0, n_xac)``; trimmed output ``j = n - K``;
* output ``j`` sits at ``alpha = j + 1/2``, i.e. ``u = u_mid + (j - n_d/2)*du_out``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import StarvedOutputsError, ValidationError
from .filters import PolyphaseBank
from .grid import GridDesign, in_aperture, map_position

#: Relative starvation threshold, as a fraction of the expected weight
#: p_hat * sum(f) at the observed fill factor.
DEFAULT_MIN_WEIGHT_FRACTION = 0.1

_CHECKPOINT_MAGIC = b"PPCK"
_CHECKPOINT_VERSION = 1


def active_component(ell: int, L: int):
    """Branch ``x`` and output anchor ``m`` that dense cell ``ell`` feeds."""
    m = (ell - 1) // L + 1
    return m * L - ell, m


def target_output_range(ell: int, L: int, npr: int, centered: bool = True):
    """Inclusive range of output indices updated by dense cell ``ell``."""
    if centered:
        h = (npr - 1) // 2
        return (ell - 1) // L - h, ell // L + h
    return (ell - 1) // L + 1, ell // L + npr


@dataclass
class FinalizeReport:
    ingested: int
    dropped: int
    rejected: int
    collisions: int
    starved: list
    p_hat: float
    rho: float
    sparsity_ok: bool
    weight_threshold: float

    def to_dict(self):
        return {
            "ingested": self.ingested, "dropped": self.dropped,
            "rejected": self.rejected, "collisions": self.collisions,
            "starved_count": len(self.starved), "starved": self.starved,
            "p_hat": self.p_hat, "rho": self.rho, "sparsity_ok": self.sparsity_ok,
            "weight_threshold": self.weight_threshold,
        }


@dataclass
class ResampleState:
    """Accumulators for one output line. Single writer; not thread-safe."""

    grid: GridDesign
    bank: PolyphaseBank
    y_acc: np.ndarray = field(init=False, repr=False)
    w_acc: np.ndarray = field(init=False, repr=False)
    ingested: int = 0
    dropped: int = 0
    rejected: int = 0
    collisions: int = 0
    u_first: float = np.inf
    u_last: float = -np.inf

    def __post_init__(self):
        g, b = self.grid, self.bank
        if b.L != g.L or b.npr != g.npr:
            raise ValidationError(
                f"bank (L={b.L}, npr={b.npr}) does not match grid (L={g.L}, npr={g.npr})")
        self.y_acc = np.zeros(g.n_xac, dtype=np.complex128)
        self.w_acc = np.zeros(g.n_xac, dtype=np.float64)
        self._taps = b.as_matrix()
        self._tap_sum = b.tap_sum
        # One flag per dense cell, for the collision counter.
        self._seen = np.zeros((g.n_xac + g.npr + 2) * g.L, dtype=bool)

    # -- ingestion ---------------------------------------------------------
    def ingest(self, u: float, value: complex) -> "ResampleState":
        """Ingest one pulse (Algorithm 1 inner loop)."""
        value = complex(value)
        if not (np.isfinite(value.real) and np.isfinite(value.imag) and np.isfinite(u)):
            self.rejected += 1
            return self
        g = self.grid
        if not in_aperture(u, g):
            self.dropped += 1
            return self
        ell = int(np.floor(g.L * map_position(u, g))) + g.dense_offset
        x, m = active_component(ell, g.L)
        n_lo, n_hi = target_output_range(ell, g.L, g.npr, centered=True)
        shift = g.half_pad - m
        row = self._taps[x]
        for n in range(max(n_lo, 0), min(n_hi, g.n_xac - 1) + 1):
            t = row[n + shift]
            self.y_acc[n] += t * value
            self.w_acc[n] += t
        self._mark(np.array([ell]))
        self._track(u, u)
        self.ingested += 1
        return self

    def ingest_many(self, u, values, chunk: int = 65536) -> "ResampleState":
        """Vectorized equivalent of calling :meth:`ingest` in order.

        Additions into each accumulator cell happen in the same order as the
        per-pulse loop, so the result is bit-identical to it.
        """
        u = np.asarray(u, dtype=np.float64).ravel()
        values = np.asarray(values, dtype=np.complex128).ravel()
        if u.shape != values.shape:
            raise ValidationError("positions and values differ in length")
        for s in range(0, u.size, chunk):
            self._ingest_chunk(u[s:s + chunk], values[s:s + chunk])
        return self

    def _ingest_chunk(self, u, v):
        g = self.grid
        finite = np.isfinite(u) & np.isfinite(v.real) & np.isfinite(v.imag)
        self.rejected += int(np.count_nonzero(~finite))
        u, v = u[finite], v[finite]
        inside = in_aperture(u, g)
        self.dropped += int(np.count_nonzero(~inside))
        u, v = u[inside], v[inside]
        if u.size == 0:
            return
        ell = np.floor(g.L * map_position(u, g)).astype(np.int64) + g.dense_offset
        m = (ell - 1) // g.L + 1
        x = m * g.L - ell
        h = (g.npr - 1) // 2
        n = ((ell - 1) // g.L - h)[:, None] + np.arange(g.npr + 1)[None, :]
        k = n + (g.half_pad - m)[:, None]
        n_hi = (ell // g.L + h)[:, None]
        ok = (n <= n_hi) & (n >= 0) & (n < g.n_xac)
        taps = self._taps[x[:, None], np.clip(k, 0, g.npr)]
        idx = n[ok]
        t = taps[ok]
        vals = np.broadcast_to(v[:, None], n.shape)[ok]
        np.add.at(self.y_acc, idx, t * vals)
        np.add.at(self.w_acc, idx, t)
        self._mark(ell)
        self._track(u.min(), u.max())
        self.ingested += int(u.size)

    def _mark(self, ell):
        # Pulses whose cell was already filled, counting repeats inside ell too.
        uniq, counts = np.unique(ell, return_counts=True)
        self.collisions += int(np.sum(counts - 1) + np.count_nonzero(self._seen[uniq]))
        self._seen[uniq] = True

    def _track(self, lo, hi):
        self.u_first = min(self.u_first, float(lo))
        self.u_last = max(self.u_last, float(hi))

    # -- diagnostics / output ---------------------------------------------
    def sparsity_check(self, rho: float = None):
        return sparsity_check(self, rho)

    def weight_threshold(self, min_weight_fraction=DEFAULT_MIN_WEIGHT_FRACTION) -> float:
        """Weights at or below this value mark an output as starved."""
        g = self.grid
        p_hat = self.ingested / (g.n_xac * g.L)
        absolute = 1e-9 * float(np.max(np.abs(self._taps)))
        return max(absolute, min_weight_fraction * p_hat * self._tap_sum)

    def finalize(self, zero_weight_policy: str = "zero",
                 min_weight_fraction: float = DEFAULT_MIN_WEIGHT_FRACTION, rho: float = None):
        return finalize(self, zero_weight_policy, min_weight_fraction, rho)

    # -- checkpointing -----------------------------------------------------
    def save_checkpoint(self, path) -> None:
        """Write accumulators and counters (little-endian, versioned)."""
        g = self.grid
        header = struct.pack("<4sIQQQQQdd", _CHECKPOINT_MAGIC, _CHECKPOINT_VERSION,
                             g.n_xac, self.ingested, self.dropped, self.rejected,
                             self.collisions, self.u_first, self.u_last)
        seen = np.packbits(self._seen)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(struct.pack("<Q", seen.size))
            fh.write(self.y_acc.astype("<c16").tobytes())
            fh.write(self.w_acc.astype("<f8").tobytes())
            fh.write(seen.tobytes())

    @classmethod
    def load_checkpoint(cls, path, grid: GridDesign, bank: PolyphaseBank) -> "ResampleState":
        state = cls(grid, bank)
        fmt = "<4sIQQQQQdd"
        with open(path, "rb") as fh:
            head = fh.read(struct.calcsize(fmt))
            magic, version, n_xac, ing, drop, rej, coll, u0, u1 = struct.unpack(fmt, head)
            if magic != _CHECKPOINT_MAGIC:
                raise ValidationError("not a resampler checkpoint (bad magic)")
            if version != _CHECKPOINT_VERSION:
                raise ValidationError(f"unsupported checkpoint version {version}")
            if n_xac != grid.n_xac:
                raise ValidationError(f"checkpoint n_xac={n_xac} does not match grid n_xac={grid.n_xac}")
            (n_seen,) = struct.unpack("<Q", fh.read(8))
            state.y_acc = np.frombuffer(fh.read(16 * n_xac), dtype="<c16").astype(np.complex128)
            state.w_acc = np.frombuffer(fh.read(8 * n_xac), dtype="<f8").astype(np.float64)
            seen = np.frombuffer(fh.read(n_seen), dtype=np.uint8)
        state._seen = np.unpackbits(seen)[: state._seen.size].astype(bool)
        state.ingested, state.dropped, state.rejected, state.collisions = ing, drop, rej, coll
        state.u_first, state.u_last = u0, u1
        return state


def new_state(grid: GridDesign, bank: PolyphaseBank) -> ResampleState:
    return ResampleState(grid, bank)


def ingest_pulse(state: ResampleState, u: float, value: complex) -> ResampleState:
    return state.ingest(u, value)


def sparsity_condition(p_hat: float, rho: float, L: int, factor: float = 10.0) -> bool:
    """Operational form of the fill-factor condition p >> rho/(L+rho)."""
    return bool(p_hat > factor * rho / (L + rho))


def sparsity_check(state: ResampleState, rho: float = None):
    """Return (p_hat, rho, ok).

    ``rho`` defaults to the mean input spatial PRF over the output spatial
    PRF, with the mean input spacing taken from the span of ingested
    positions. That equals the signal's relative bandwidth only for
    critically sampled input; pass ``rho`` explicitly when the bandwidth is
    known independently (e.g. oversampled test signals).
    """
    g = state.grid
    p_hat = state.ingested / (g.n_xac * g.L)
    if rho is not None:
        pass
    elif state.ingested >= 2 and state.u_last > state.u_first:
        mean_du_in = (state.u_last - state.u_first) / (state.ingested - 1)
        rho = g.du_out / mean_du_in
    else:
        rho = float("nan")
    ok = bool(np.isfinite(rho) and sparsity_condition(p_hat, rho, g.L))
    return p_hat, rho, ok


def finalize(state: ResampleState, zero_weight_policy: str = "zero",
             min_weight_fraction: float = DEFAULT_MIN_WEIGHT_FRACTION, rho: float = None):
    """Normalize, trim the pad and return ``(y, report)``.

    Outputs whose weight is at or below :meth:`ResampleState.weight_threshold`
    are starved: emitted as 0 (``zero``) or reported via
    :class:`StarvedOutputsError` (``fail``).
    """
    if zero_weight_policy not in ("zero", "fail"):
        raise ValidationError(f"unknown zero_weight_policy {zero_weight_policy!r}")
    if state.ingested == 0:
        raise ValidationError("no pulses were ingested")
    g = state.grid
    k = g.half_pad
    y_acc = state.y_acc[k:k + g.n_d]
    w_acc = state.w_acc[k:k + g.n_d]
    thr = state.weight_threshold(min_weight_fraction)
    starved = np.flatnonzero(w_acc <= thr)
    if starved.size and zero_weight_policy == "fail":
        raise StarvedOutputsError(starved)
    out = np.zeros(g.n_d, dtype=np.complex128)
    good = w_acc > thr
    out[good] = y_acc[good] / w_acc[good]
    p_hat, rho, ok = sparsity_check(state, rho)
    report = FinalizeReport(
        ingested=state.ingested, dropped=state.dropped, rejected=state.rejected,
        collisions=state.collisions, starved=[int(i) for i in starved],
        p_hat=p_hat, rho=rho, sparsity_ok=ok, weight_threshold=thr)
    return out, report


def resample(grid: GridDesign, bank: PolyphaseBank, positions, values,
             zero_weight_policy: str = "zero",
             min_weight_fraction: float = DEFAULT_MIN_WEIGHT_FRACTION, rho: float = None):
    """One-shot helper: ingest all pulses and finalize."""
    state = ResampleState(grid, bank)
    state.ingest_many(positions, values)
    return finalize(state, zero_weight_policy, min_weight_fraction, rho)
