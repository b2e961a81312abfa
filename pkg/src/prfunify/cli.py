"""``prf-unify`` command-line front end.

Exit codes: 0 success, 2 validation error, 3 numeric failure (starved
outputs under the ``fail`` policy).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import complexity, fileio
from .analysis import azimuth_compress, extract_ipr
from .config import RunConfig, load_config
from .errors import StarvedOutputsError, ValidationError
from .filters import frequency_response
from .grid import GridDesign
from .resampler import ResampleState, finalize
from .scenarios import SpaceborneSetup, claim1_check, pri_sequence
from .simulate import drop_samples, positions_from_pri, simulate_acquisition

log = logging.getLogger("prf_unify")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- commands


def cmd_design_filter(cfg: RunConfig) -> dict:
    """Write prototype, combined and per-branch taps plus |F(w)|."""
    out = _out_dir(cfg)
    fpr, f, bank = cfg.filters()
    fileio.write_taps(out / "prototype.taps", fpr)
    fileio.write_taps(out / "filter.taps", f)
    bdir = out / "branches"
    bdir.mkdir(exist_ok=True)
    width = len(str(bank.L - 1))
    for ell, comp in enumerate(bank.components):
        # Branch edges are those of the parent filter; the taps are the payload.
        taps = np.asarray(comp)
        path = bdir / f"branch_{ell:0{width}d}.taps"
        with open(path, "w") as fh:
            fh.write(f"# fir order={taps.size - 1} pass={f.passband_edge!r} stop={f.stopband_edge!r}\n")
            fh.writelines(f"{t:.17e}\n" for t in taps)
    omega = np.linspace(0.0, np.pi, 16384)
    mag = np.abs(frequency_response(f, omega))
    fileio.write_csv(out / "response.csv", ["omega", "magnitude"], [omega, mag])
    info = dict(prototype_taps=fpr.order + 1, filter_taps=f.order + 1, branches=bank.L,
                dc_gain=float(np.sum(f.taps)))
    print(json.dumps(info, sort_keys=True))
    return info


def cmd_simulate(cfg: RunConfig) -> Path:
    out = _out_dir(cfg)
    g = cfg.grid()
    setup = SpaceborneSetup(slant_range=cfg.R, height=min(cfg.height, cfg.R), lambda_c=cfg.lambda_c,
                            v_p=cfg.v_p)
    targets = cfg.target_list()
    seq = pri_sequence(cfg.pri_variation)
    u = positions_from_pri(seq, cfg.v_p, g.u_min, g.u_max)
    pulses = simulate_acquisition(setup.scene(targets), u)
    n_full = len(pulses)
    if cfg.drop_fraction:
        pulses = drop_samples(pulses, cfg.drop_fraction, cfg.seed)
    path = out / ("pulses.csv" if cfg.pulse_format == "csv" else "pulses.pph")
    if cfg.pulse_format == "csv":
        fileio.write_pulses_csv(path, pulses.positions, pulses.samples)
    else:
        fileio.write_pulses(path, pulses.positions, pulses.samples, cfg.v_p, cfg.lambda_c)
    (out / "run.cfg").write_text(cfg.to_text())
    (out / "grid.cfg").write_text(g.to_text())
    _write_json(out / "provenance.json", dict(
        scenario=cfg.scenario, targets=list(targets), pri_variation=cfg.pri_variation,
        seed=cfg.seed, drop_fraction=cfg.drop_fraction, pulses_generated=n_full,
        pulses_written=len(pulses), pri_waveform=[list(p) for p in seq.waveform[:: max(1, len(seq.waveform) // 64)]]))
    print(f"wrote {len(pulses)} pulses to {path}")
    return path


def cmd_resample(cfg: RunConfig, input_path, shuffle: bool = False) -> Path:
    out = _out_dir(cfg)
    g = cfg.grid()
    _, _, bank = cfg.filters()
    state = ResampleState(g, bank)
    if shuffle:
        # Permuting needs the whole file in memory; only used to demonstrate
        # order independence.
        u, s, _ = fileio.read_pulses(input_path)
        perm = np.random.default_rng(cfg.seed).permutation(u.size)
        for k in range(0, u.size, cfg.chunk):
            sel = perm[k:k + cfg.chunk]
            state.ingest_many(u[sel], s[sel])
    else:
        for u, s in fileio.iter_pulses(input_path, cfg.chunk):
            state.ingest_many(u, s)
    y, report = finalize(state, cfg.zero_weight_policy, cfg.min_weight_fraction)
    path = out / "uniform.pph"
    fileio.write_pulses(path, g.output_positions(), y, cfg.v_p, cfg.lambda_c)
    (out / "grid.cfg").write_text(g.to_text())
    _write_json(out / "resample_report.json", report.to_dict())
    if not report.sparsity_ok:
        log.warning("sparsity condition not met: p_hat=%.4g, rho=%.4g", report.p_hat, report.rho)
    print(f"wrote {g.n_d} samples to {path} ({report.ingested} ingested, {report.dropped} dropped, "
          f"{len(report.starved)} starved)")
    return path


def cmd_analyze(cfg: RunConfig, input_path) -> dict:
    out = _out_dir(cfg)
    g = cfg.grid()
    _, y, _ = fileio.read_pulses(input_path)
    img = azimuth_compress(y, g, cfg.window_spec(), pbw_crop=cfg.pbw_crop)
    m = extract_ipr(img, g.pixel_pitch, method=cfg.islr_method)
    metrics = m.to_dict()
    _write_json(out / "metrics.json", metrics)
    fileio.write_csv(out / "image_line.csv", ["index", "value"], [np.arange(img.size), np.abs(img)])
    print(json.dumps(metrics, sort_keys=True))
    return metrics


def cmd_flops(cfg: RunConfig) -> list:
    out = _out_dir(cfg)
    presets = [p.strip() for p in cfg.flop_presets.split(",") if p.strip()]
    results = [complexity.compare(p, npr=cfg.npr, l_ra=cfg.l_ra, v_p=cfg.v_p, n_blui=cfg.n_blui,
                                  l_blui=cfg.l_blui, f_r=cfg.f_r, formula=cfg.flop_formula)
               for p in presets]
    table = complexity.render_table(results)
    print(table, end="")
    serial = [{k: (v.to_dict() if hasattr(v, "to_dict") else v) for k, v in r.items()} for r in results]
    _write_json(out / "flops.json", serial)
    return results


def cmd_psd_check(cfg: RunConfig) -> dict:
    out = _out_dir(cfg)
    res = claim1_check(cfg.psd_p, cfg.L, cfg.gamma, cfg.npr, cfg.psd_log2_len,
                       cfg.psd_segment_len, cfg.seed)
    for name in ("psd_pipeline", "psd_oracle"):
        est = res[name]
        fileio.write_csv(out / f"{name}.csv", ["omega", "power"], [est.omega, est.s])
    rep = res["report"]
    summary = dict(p=cfg.psd_p, deviation_db=res["deviation_db"], p_hat=rep.p_hat, rho=rep.rho,
                   sparsity_ok=rep.sparsity_ok, starved=len(rep.starved))
    _write_json(out / "claim1.json", summary)
    print(json.dumps(summary, sort_keys=True))
    return summary


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prf-unify", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    common(sub.add_parser("design-filter", help="design the filter and write tap files"))
    common(sub.add_parser("simulate", help="write a synthetic pulse file"))
    p = common(sub.add_parser("resample", help="resample a pulse file onto the uniform grid"))
    p.add_argument("input", nargs="?", help="pulse file (default: OUT/pulses.pph)")
    p.add_argument("--shuffle", action="store_true", help="ingest pulses in random order")
    p = common(sub.add_parser("analyze", help="compress a uniform line and measure the IPR"))
    p.add_argument("input", nargs="?", help="uniform file (default: OUT/uniform.pph)")
    common(sub.add_parser("flops", help="print the flop-count comparison table"))
    common(sub.add_parser("psd-check", help="gated-signal PSD check against the dense oracle"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, seed=args.seed, out=args.out).validate()
        cmd = args.command
        if cmd == "design-filter":
            cmd_design_filter(cfg)
        elif cmd == "simulate":
            cmd_simulate(cfg)
        elif cmd == "resample":
            src = args.input or str(Path(cfg.out) / ("pulses.csv" if cfg.pulse_format == "csv" else "pulses.pph"))
            cmd_resample(cfg, src, shuffle=args.shuffle)
        elif cmd == "analyze":
            cmd_analyze(cfg, args.input or str(Path(cfg.out) / "uniform.pph"))
        elif cmd == "flops":
            cmd_flops(cfg)
        elif cmd == "psd-check":
            cmd_psd_check(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except StarvedOutputsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
