"""Run configuration: flat ``key = value`` text files with ``include``.

Unknown keys are rejected so typos surface early. Later assignments win;
an ``include = other.cfg`` line is expanded in place (paths relative to the
including file).
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .analysis import WindowSpec
from .errors import ValidationError
from .filters import design_filter_bank
from .grid import GridDesign, design_output_grid


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    out: str = "."
    # filter
    npr: int = 5
    L: int = 64
    gamma: float = 2.0 / 3.0
    design_grid_density: int = 2048
    # grid
    n_fft: int = 8192
    p_d: float = 2.0
    k_cr: float = 1.0
    k_r: float = 1.0
    lambda_c: float = 0.2384
    b_chirp: float = 0.0
    R: float = 1000e3
    v_p: float = 7473.0
    D: Optional[float] = None
    pri_out: Optional[float] = 0.417e-3
    u_min: Optional[float] = None
    u_max: Optional[float] = None
    # scenario
    scenario: str = "scenario1"
    targets: str = ""
    height: float = 760e3
    pri_variation: str = "slow"
    drop_fraction: float = 0.0
    pulse_format: str = "binary"
    # resampling
    zero_weight_policy: str = "zero"
    min_weight_fraction: float = 0.1
    chunk: int = 4096
    # analysis
    window: str = "hamming"
    hamming_alpha: float = 0.6
    taylor_nbar: int = 6
    taylor_sll_db: float = -35.0
    islr_method: str = "null-to-null"
    pbw_crop: bool = True
    # flop table
    flop_presets: str = "fast,elaborate,staggered"
    l_ra: float = 10.0
    n_blui: int = 9
    l_blui: int = 3
    f_r: int = 24
    flop_formula: str = "table"
    # claim-1 PSD check
    psd_p: float = 0.3
    psd_log2_len: int = 20
    psd_segment_len: int = 256

    # ------------------------------------------------------------------
    def grid(self) -> GridDesign:
        D = self.D
        if D is None and self.pri_out is not None:
            n_d = int(self.n_fft * self.k_cr / self.p_d * (1 + 1e-9))
            D = n_d * self.v_p * self.pri_out
        return design_output_grid(self.n_fft, self.p_d, self.k_cr, self.k_r, self.npr, self.L,
                                  self.gamma, self.lambda_c, self.b_chirp, self.R, self.v_p,
                                  u_min=self.u_min, u_max=self.u_max, D=D)

    def filters(self):
        return design_filter_bank(self.npr, self.L, self.gamma, self.design_grid_density)

    def window_spec(self) -> WindowSpec:
        return WindowSpec(self.window, self.hamming_alpha, self.taylor_nbar, self.taylor_sll_db)

    def target_list(self):
        from .scenarios import SCENARIO_TARGETS

        if self.scenario == "custom":
            if not self.targets.strip():
                raise ValidationError("scenario = custom needs a 'targets' list")
            return tuple(float(t) for t in self.targets.split(","))
        if self.scenario not in SCENARIO_TARGETS:
            raise ValidationError(
                f"unknown scenario {self.scenario!r}; expected custom or one of {sorted(SCENARIO_TARGETS)}")
        return SCENARIO_TARGETS[self.scenario]

    def validate(self) -> "RunConfig":
        """Resolve grid and filter once so bad parameters fail before any I/O."""
        self.grid()
        self.filters()
        self.window_spec()
        self.target_list()
        if self.zero_weight_policy not in ("zero", "fail"):
            raise ValidationError(f"zero_weight_policy must be zero or fail, got {self.zero_weight_policy!r}")
        if self.pulse_format not in ("binary", "csv"):
            raise ValidationError(f"pulse_format must be binary or csv, got {self.pulse_format!r}")
        return self

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {repr(v) if isinstance(v, float) else v}")
        return "\n".join(lines) + "\n"

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, raw: str):
    t = _TYPES[key]
    try:
        if t == "int":
            return int(raw)
        if t == "float":
            return float(raw)
        if t == "Optional[float]":
            return None if raw.lower() in ("", "none") else float(raw)
        if t == "bool":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ValidationError(f"bad value for {key}: {raw!r}") from None


def parse_config_text(text: str, base_dir: Path = Path("."), _depth: int = 0) -> dict:
    if _depth > 16:
        raise ValidationError("config include nesting too deep")
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key = value")
        key, _, value = (s.strip() for s in line.partition("="))
        if key == "include":
            path = (base_dir / value)
            out.update(parse_config_text(path.read_text(), path.parent, _depth + 1))
            continue
        if key not in _TYPES:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config(path=None, **overrides) -> RunConfig:
    values = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ValidationError(f"config file not found: {p}")
        values = parse_config_text(p.read_text(), p.parent)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)
