"""Closed-form flop and data-link cost models: POLYPHASE vs. joint BLUI.

All counts are per output sample. BLUI counts are evaluated at both ends
of a range of Q (number of input samples within the real-aperture span),
giving (lo, hi) pairs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .errors import ValidationError

DEFAULT_F_R = 24
DEFAULT_N_BLUI = 9
DEFAULT_L_BLUI = 3

_CEIL_TOL = 1e-9


@dataclass(frozen=True)
class FlopReport:
    scheme: str
    onboard_flops_per_output: tuple
    onground_flops_per_output: tuple
    uplink_floats_per_output: tuple
    params: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        for k in ("onboard_flops_per_output", "onground_flops_per_output", "uplink_floats_per_output"):
            d[k] = list(d[k])
        return d


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise ValidationError(f"{k} must be positive, got {v}")


def _q_pair(q_range):
    if isinstance(q_range, int):
        q_range = (q_range, q_range)
    lo, hi = (int(q) for q in q_range)
    if lo > hi or lo < 1:
        raise ValidationError(f"Q range must be ordered and >= 1, got {q_range}")
    return lo, hi


def polyphase_flops(npr: int, pri_out: float, mean_pri_in: float) -> FlopReport:
    """4*npr flops per input pulse, times the input pulses per output sample."""
    if int(npr) != npr or npr < 1:
        raise ValidationError(f"npr must be a positive integer, got {npr}")
    _positive(pri_out=pri_out, mean_pri_in=mean_pri_in)
    n = int(round(4 * npr * pri_out / mean_pri_in))
    return FlopReport("polyphase", (n, n), (0, 0), (0, 0),
                      dict(npr=int(npr), pri_out=pri_out, mean_pri_in=mean_pri_in))


def blui_q(l_ra: float, pri_in: float, v_p: float) -> int:
    """Input samples within twice the real-aperture length."""
    _positive(l_ra=l_ra, pri_in=pri_in, v_p=v_p)
    return int(math.floor(2.0 * l_ra / (pri_in * v_p)))


def blui_q_range(l_ra: float, pri_min: float, pri_max: float, v_p: float):
    return blui_q(l_ra, pri_max, v_p), blui_q(l_ra, pri_min, v_p)


def onboard_arbitrary(q: int, n_blui: int, formula: str = "table") -> int:
    if formula == "table":
        return 4 * q * (n_blui + 1) + 2 * n_blui
    if formula == "prose":
        return 4 * q * (n_blui + 1) - 1
    raise ValidationError(f"unknown formula variant {formula!r}")


def onground_arbitrary(q: int, f_r: int = DEFAULT_F_R) -> int:
    """Per-output on-ground cost of solving for the interpolation weights."""
    q, fr = Fraction(q), Fraction(f_r)
    val = 2 * q ** 3 / 3 + q ** 2 * (fr + 3) / 2 + q * (fr - Fraction(7, 3)) / 2 + fr
    return int(round(val))


def blui_flops_arbitrary(q_range, n_blui: int = DEFAULT_N_BLUI, f_r: int = DEFAULT_F_R,
                         formula: str = "table") -> FlopReport:
    lo, hi = _q_pair(q_range)
    if n_blui < 1:
        raise ValidationError("n_blui must be >= 1")
    return FlopReport(
        "blui_arbitrary",
        (onboard_arbitrary(lo, n_blui, formula), onboard_arbitrary(hi, n_blui, formula)),
        (onground_arbitrary(lo, f_r), onground_arbitrary(hi, f_r)),
        (2 * lo, 2 * hi),
        dict(q_range=[lo, hi], n_blui=n_blui, f_r=f_r, formula=formula))


def blui_flops_periodic(q_range, n_blui: int = DEFAULT_N_BLUI, psi: int = 1) -> FlopReport:
    lo, hi = _q_pair(q_range)
    if psi < 1:
        raise ValidationError("psi must be >= 1")
    if n_blui < 1:
        raise ValidationError("n_blui must be >= 1")
    on = tuple(4 * (n_blui * psi + q) - 2 for q in (lo, hi))
    up = tuple(n_blui * psi + q for q in (lo, hi))
    return FlopReport("blui_periodic", on, (0, 0), up,
                      dict(q_range=[lo, hi], n_blui=n_blui, psi=psi))


def psi(pri_out: float, l_blui: int, mean_pri_in: float, q: int) -> int:
    """Number of distinct weight sets needed per output, capped at Q.

    The ceiling tolerates 1e-9 relative representation error so exact
    ratios such as 1.11111/(3*0.37037) = 1 are not bumped to 2.
    """
    _positive(pri_out=pri_out, l_blui=l_blui, mean_pri_in=mean_pri_in, q=q)
    ratio = pri_out / (l_blui * mean_pri_in)
    return int(min(math.ceil(ratio * (1.0 - _CEIL_TOL)), q))


def periodicity_r(l_blui: int, n_pri: int, mean_pri_in: float, pri_out: float):
    """Output samples after which the BLUI weight pattern repeats."""
    _positive(l_blui=l_blui, n_pri=n_pri, mean_pri_in=mean_pri_in, pri_out=pri_out)
    r = l_blui * n_pri * mean_pri_in / pri_out
    is_int = abs(r - round(r)) <= 1e-9 * max(1.0, abs(r))
    return r, bool(is_int)


# ---------------------------------------------------------------- presets

#: Acquisition cases compared in the flop table.
PRESETS = {
    "fast": dict(pri_min=0.349e-3, pri_max=0.421e-3, mean_pri=0.385e-3,
                 pri_out_polyphase=0.417e-3, pri_out_periodic=0.770e-3),
    "elaborate": dict(pri_min=0.309e-3, pri_max=0.461e-3, mean_pri=0.385e-3,
                      pri_out_polyphase=0.417e-3, pri_out_periodic=0.770e-3),
    # Periodic system only: no arbitrary-case BLUI entry.
    "staggered": dict(q_range=(5, 8), mean_pri=0.37037e-3,
                      pri_out_polyphase=1.11111e-3, pri_out_periodic=1.11111e-3,
                      periodic_only=True),
}


def compare(preset: str, npr: int = 5, l_ra: float = 10.0, v_p: float = 7473.0,
            n_blui: int = DEFAULT_N_BLUI, l_blui: int = DEFAULT_L_BLUI, f_r: int = DEFAULT_F_R,
            formula: str = "table"):
    """All three reports for one preset column, plus Q range and Psi."""
    if preset not in PRESETS:
        raise ValidationError(f"unknown flop preset {preset!r}; expected one of {sorted(PRESETS)}")
    p = PRESETS[preset]
    q_range = p.get("q_range") or blui_q_range(l_ra, p["pri_min"], p["pri_max"], v_p)
    ps = psi(p["pri_out_periodic"], l_blui, p["mean_pri"], q_range[0])
    return dict(
        preset=preset, q_range=list(q_range), psi=ps,
        polyphase=polyphase_flops(npr, p["pri_out_polyphase"], p["mean_pri"]),
        blui_arbitrary=None if p.get("periodic_only") else blui_flops_arbitrary(
            q_range, n_blui, f_r, formula),
        blui_periodic=blui_flops_periodic(q_range, n_blui, ps),
    )


def _fmt_range(r):
    if r is None:
        return "---"
    lo, hi = r
    return f"{lo}" if lo == hi else f"{lo}~{hi}"


def _field(report, name):
    return None if report is None else getattr(report, name)


def render_table(results) -> str:
    """Plain-text comparison grid, one column per preset."""
    rows = [
        ("Q", lambda r: _fmt_range(r["q_range"])),
        ("Psi", lambda r: str(r["psi"])),
        ("POLYPHASE on-board", lambda r: _fmt_range(r["polyphase"].onboard_flops_per_output)),
        ("BLUI arbitrary on-board", lambda r: _fmt_range(_field(r["blui_arbitrary"], "onboard_flops_per_output"))),
        ("BLUI arbitrary on-ground", lambda r: _fmt_range(_field(r["blui_arbitrary"], "onground_flops_per_output"))),
        ("BLUI arbitrary uplink", lambda r: _fmt_range(_field(r["blui_arbitrary"], "uplink_floats_per_output"))),
        ("BLUI periodic on-board", lambda r: _fmt_range(r["blui_periodic"].onboard_flops_per_output)),
        ("BLUI periodic uplink", lambda r: _fmt_range(r["blui_periodic"].uplink_floats_per_output)),
    ]
    head = ["", *[r["preset"] for r in results]]
    body = [[name, *[fn(r) for r in results]] for name, fn in rows]
    widths = [max(len(str(row[i])) for row in [head, *body]) for i in range(len(head))]
    fmt = lambda row: "  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()
    return "\n".join([fmt(head), *(fmt(r) for r in body)]) + "\n"
