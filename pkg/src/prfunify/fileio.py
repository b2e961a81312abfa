"""File codecs: pulse files (binary and CSV), tap files, CSV tables.

Pulse file layout (little-endian)::

    magic 'PPH1' | u32 version | u64 count | f64 v_p | f64 lambda_c
    count x { f64 position_m | f32 re | f32 im }
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .filters import FirFilter

PULSE_MAGIC = b"PPH1"
PULSE_VERSION = 1
_HEADER = struct.Struct("<4sIQdd")
PULSE_DTYPE = np.dtype([("u", "<f8"), ("re", "<f4"), ("im", "<f4")])


def quantize(samples) -> np.ndarray:
    """Round complex samples to the on-disk f32 precision."""
    s = np.asarray(samples, dtype=np.complex128)
    return s.real.astype(np.float32).astype(np.float64) + 1j * s.imag.astype(np.float32).astype(np.float64)


def write_pulses(path, positions, samples, v_p: float, lambda_c: float) -> None:
    positions = np.asarray(positions, dtype=np.float64)
    samples = np.asarray(samples, dtype=np.complex128)
    if positions.shape != samples.shape:
        raise ValidationError("positions and samples differ in length")
    rec = np.empty(positions.size, dtype=PULSE_DTYPE)
    rec["u"], rec["re"], rec["im"] = positions, samples.real, samples.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(PULSE_MAGIC, PULSE_VERSION, positions.size, float(v_p), float(lambda_c)))
        fh.write(rec.tobytes())


def read_pulse_header(path) -> dict:
    with open(path, "rb") as fh:
        return _parse_header(fh.read(_HEADER.size), path)


def _parse_header(raw, path):
    if len(raw) < _HEADER.size:
        raise ValidationError(f"{path}: truncated pulse-file header")
    magic, version, count, v_p, lam = _HEADER.unpack(raw)
    if magic != PULSE_MAGIC:
        raise ValidationError(f"{path}: not a pulse file (magic {magic!r})")
    if version != PULSE_VERSION:
        raise ValidationError(f"{path}: unsupported pulse-file version {version}")
    return dict(count=count, v_p=v_p, lambda_c=lam)


def iter_pulses(path, chunk: int = 4096):
    """Yield ``(positions, samples)`` blocks of at most ``chunk`` pulses.

    Memory use is bounded by the chunk size, independent of file length.
    """
    path = Path(path)
    if path.suffix == ".csv":
        yield from _iter_csv(path, chunk)
        return
    with open(path, "rb") as fh:
        head = _parse_header(fh.read(_HEADER.size), path)
        remaining = head["count"]
        while remaining:
            n = min(chunk, remaining)
            buf = fh.read(n * PULSE_DTYPE.itemsize)
            if len(buf) != n * PULSE_DTYPE.itemsize:
                raise ValidationError(f"{path}: file shorter than its header count")
            rec = np.frombuffer(buf, dtype=PULSE_DTYPE)
            yield rec["u"].astype(np.float64), rec["re"].astype(np.float64) + 1j * rec["im"].astype(np.float64)
            remaining -= n


def read_pulses(path):
    """Whole file as ``(positions, samples, header)``."""
    path = Path(path)
    blocks = list(iter_pulses(path, chunk=1 << 20))
    header = read_pulse_header(path) if path.suffix != ".csv" else {}
    if not blocks:
        return np.empty(0), np.empty(0, dtype=np.complex128), header
    u = np.concatenate([b[0] for b in blocks])
    s = np.concatenate([b[1] for b in blocks])
    return u, s, header


def write_pulses_csv(path, positions, samples) -> None:
    samples = quantize(samples)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["position", "re", "im"])
        for u, s in zip(positions, samples):
            w.writerow([repr(float(u)), repr(float(s.real)), repr(float(s.imag))])


def _iter_csv(path, chunk):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["position", "re", "im"]:
            raise ValidationError(f"{path}: expected CSV header position,re,im")
        block = []
        for row in reader:
            if not row:
                continue
            block.append([float(v) for v in row])
            if len(block) == chunk:
                a = np.array(block)
                yield a[:, 0], a[:, 1] + 1j * a[:, 2]
                block = []
        if block:
            a = np.array(block)
            yield a[:, 0], a[:, 1] + 1j * a[:, 2]


# ---------------------------------------------------------------- tap files


def write_taps(path, f: FirFilter) -> None:
    with open(path, "w") as fh:
        fh.write(f"# fir order={f.order} pass={f.passband_edge!r} stop={f.stopband_edge!r}\n")
        for t in f.taps:
            fh.write(f"{t:.17e}\n")


def read_taps(path) -> FirFilter:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# fir "):
        raise ValidationError(f"{path}: missing '# fir' header")
    meta = dict(item.split("=", 1) for item in lines[0][len("# fir "):].split())
    taps = np.array([float(x) for x in lines[1:] if x.strip()])
    if taps.size != int(meta["order"]) + 1:
        raise ValidationError(f"{path}: header order {meta['order']} disagrees with {taps.size} taps")
    return FirFilter(taps, float(meta["pass"]), float(meta["stop"]))


def write_csv(path, header, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
