"""
Command-line front end.

Each subcommand writes plot-ready CSV/JSON files into the output directory
(``--out``, else ``$FIBERRING_OUTPUT_DIR``, else the config's ``output_dir``)
and prints a short report, or the report as JSON with ``--json``.

Exit status: 0 on success, 2 for usage or configuration errors, 3 when a
sweep has too few settings to fit kappa0, 1 for any other failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, io
from .config import ConfigError, RunConfig
from .constants import TWO_PI
from .cqed import (
    NoThresholdError,
    collective_coupling,
    length_sweep,
    multimode_polariton_spectrum,
    multimode_threshold,
    multimode_threshold_closed_form,
    scale_with_length,
    single_atom_cooperativity,
)
from .mode import coupling_strength_at, profile_grid, solve_he11
from .resonator import classify_regime, finesse, quality_factor
from .spectrum import (
    CouplingSweepDataset,
    FlatFitError,
    UnderdeterminedFitError,
    coupling_ratios,
    fit_all_resonances,
    global_kappa0_fit,
    simulate_coupling_sweep,
    synthesize_trace,
)

OUTPUT_ENV = "FIBERRING_OUTPUT_DIR"
SCALING_HEADER = (
    "length_m",
    "g_over_2pi_hz",
    "g_coll_over_2pi_hz",
    "fsr_hz",
    "kappa0_over_2pi_hz",
    "c0",
    "c_coll",
)
PROFILE_HEADER = ("r_m", "phi_rad", "intensity")
POLARITON_HEADER = ("index", "frequency_over_2pi_hz")
GAP_HEADER = ("lower_index", "gap_over_2pi_hz")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNDERDETERMINED = 0, 1, 2, 3


class UsageError(Exception):
    pass


_SPAN_RE = re.compile(r"^\s*([0-9.eE+-]+)\s*(fsr|lw|hz)?\s*$", re.IGNORECASE)


def parse_span(text: str, fsr_hz: float, linewidth_hz: float) -> float:
    """'3fsr' -> 3 FSR, '20lw' -> 20 FWHM linewidths, '2.5e8' or '2.5e8hz' -> Hz."""
    m = _SPAN_RE.match(text)
    if not m:
        raise UsageError(f"cannot parse span {text!r}")
    try:
        value = float(m.group(1))
    except ValueError:
        raise UsageError(f"cannot parse span {text!r}") from None
    unit = (m.group(2) or "hz").lower()
    span = value * {"fsr": fsr_hz, "lw": linewidth_hz, "hz": 1.0}[unit]
    if not (math.isfinite(span) and span > 0):
        raise UsageError("span must be positive")
    return span


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _odd_int(text: str) -> int:
    v = _positive_int(text)
    if v % 2 == 0:
        raise argparse.ArgumentTypeError(f"must be odd, got {v}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (math.isfinite(v) and v >= 0):
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = _nonneg_float(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


# --------------------------------------------------------------------------- helpers


def _output_dir(args, cfg: RunConfig) -> Path:
    out = args.out or os.environ.get(OUTPUT_ENV) or cfg.output_dir or "."
    return Path(out)


def _emit(args, report: dict, lines: Sequence[str]) -> None:
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def _mhz(rate: float) -> float:
    return rate / TWO_PI / 1e6


# --------------------------------------------------------------------------- commands


def cmd_spectrum(args, cfg: RunConfig) -> int:
    block = cfg.block("spectrum")
    regime = args.regime or block["regime"]
    params = cfg.resonator_for_regime(regime)
    if args.span is not None:
        span = parse_span(args.span, params.fsr_hz, params.linewidth_hz)
    elif block.get("span_hz") is not None:
        span = block["span_hz"]
    else:
        span = block["span_fsr"] * params.fsr_hz
    samples = args.samples if args.samples is not None else block["samples"]
    if samples < 8:
        raise UsageError("--samples must be at least 8")
    noise = args.noise if args.noise is not None else block["noise_sigma"]
    seed = args.seed if args.seed is not None else block["seed"]

    trace = synthesize_trace(params, span, samples, noise, seed)
    out = _output_dir(args, cfg)
    trace_path = out / "spectrum_trace.csv"
    trace.to_csv(trace_path)
    report = {
        "regime": regime,
        "kappa0_over_2pi_hz": params.kappa0 / TWO_PI,
        "kappa_ext_over_2pi_hz": params.kappa_ext / TWO_PI,
        "span_hz": span,
        "samples": samples,
        "noise_sigma": noise,
        "seed": seed,
        "model": trace.metadata["model"],
        "trace_csv": str(trace_path),
        "input_digest": trace.digest(),
    }
    lines = [
        f"regime {regime}: kappa0/2pi = {_mhz(params.kappa0):.4g} MHz, "
        f"kappa_ext/2pi = {_mhz(params.kappa_ext):.4g} MHz",
        f"trace: {samples} samples over {span / 1e6:.6g} MHz ({trace.metadata['model']}) -> {trace_path}",
    ]
    if args.fit:
        fits = fit_all_resonances(trace)
        fits.sort(key=lambda f: f.center_hz)
        digest = trace.digest()
        fit_path = out / "spectrum_fit.json"
        centers = [f.center_hz for f in fits]
        spacing = np.diff(centers).tolist()
        io.write_json(
            fit_path,
            {"input_digest": digest, "resonances": [f.to_dict(digest) for f in fits], "spacings_hz": spacing},
        )
        report.update(
            fit_json=str(fit_path),
            n_resonances=len(fits),
            spacings_hz=spacing,
            fits=[f.to_dict() for f in fits],
        )
        lines.append(f"{len(fits)} resonance(s) fitted -> {fit_path}")
        for f in fits:
            lines.append(
                f"  center {f.center_hz / 1e6:+.6f} MHz  kappa/2pi = {_mhz(f.kappa_total):.5f}"
                f" +/- {_mhz(f.uncertainties['kappa_total']):.5f} MHz  T_r = {f.t_res:.3e}"
                f" +/- {f.uncertainties['t_res']:.1e}"
            )
        if spacing:
            lines.append("  spacings: " + ", ".join(f"{s / 1e6:.4f} MHz" for s in spacing))
    _emit(args, report, lines)
    return EXIT_OK


def cmd_coupling_sweep(args, cfg: RunConfig) -> int:
    block = cfg.block("sweep")
    n = args.settings if args.settings is not None else block["settings"]
    noise = args.noise if args.noise is not None else block["noise_sigma"]
    seed = args.seed if args.seed is not None else block["seed"]
    base = cfg.resonator
    ratios = coupling_ratios(n, block["ratio_min"], block["ratio_max"])
    if n < 2:
        # fitting alone cannot fix kappa0 from one {kappa, T_r} pair
        msg = f"warning: {n} setting(s) cannot determine kappa0; at least 2 are needed"
        print(msg, file=sys.stderr)
        try:
            CouplingSweepDataset(tuple((1.0, 0.0) for _ in range(n)))
        except UnderdeterminedFitError as exc:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNDERDETERMINED
    runs = simulate_coupling_sweep(
        base,
        noise_sigma=noise,
        rng_seed=seed,
        n_samples=block["samples"],
        span_linewidths=block["span_linewidths"],
        ratios=ratios,
    )
    fits = [r[2] for r in runs]
    dataset = CouplingSweepDataset.from_fits(fits)
    est = global_kappa0_fit(dataset)
    F = finesse(est.kappa0, base.fsr_hz)
    Q = quality_factor(base.omega0, est.kappa0)
    out = _output_dir(args, cfg)
    data_path = out / "coupling_sweep.csv"
    dataset.to_csv(data_path, {"noise_sigma": noise, "seed": seed, "units": "rad/s"})
    settings = [
        {
            "kappa_ext_true_over_2pi_hz": p.kappa_ext / TWO_PI,
            "kappa_fit_over_2pi_hz": f.kappa_total / TWO_PI,
            "t_res": f.t_res,
            "regime": classify_regime(est.kappa0, max(f.kappa_total - est.kappa0, 0.0)).value,
        }
        for p, _, f in runs
    ]
    report = {
        "settings": n,
        "noise_sigma": noise,
        "seed": seed,
        "kappa0_true_over_2pi_hz": base.kappa0 / TWO_PI,
        "kappa0_over_2pi_hz": est.kappa0 / TWO_PI,
        "kappa0_std_over_2pi_hz": est.std_error / TWO_PI,
        "finesse": F,
        "quality_factor": Q,
        "residual_rms": est.residual_rms,
        "dataset_csv": str(data_path),
        "points": settings,
    }
    io.write_json(out / "coupling_sweep_report.json", report)
    lines = [
        f"{n} settings, noise {noise:g}: dataset -> {data_path}",
        f"kappa0/2pi = {_mhz(est.kappa0):.4f} +/- {_mhz(est.std_error):.4f} MHz"
        f" (configured {_mhz(base.kappa0):.4f} MHz)",
        f"finesse F = {F:.2f}",
        f"quality factor Q = {Q:.3e}",
    ]
    _emit(args, report, lines)
    return EXIT_OK


def cmd_mode(args, cfg: RunConfig) -> int:
    geom = cfg.geometry
    g_block = cfg.block("geometry")
    mode = solve_he11(geom)
    d = cfg.trap_distance_m
    g_d = coupling_strength_at(mode, geom, d, cfg.g_surface)
    R, P, I = profile_grid(mode, geom, g_block["profile_r_max_m"], g_block["profile_n_r"], g_block["profile_n_phi"])
    out = _output_dir(args, cfg)
    prof_path = out / "mode_profile.csv"
    io.write_csv(prof_path, PROFILE_HEADER, [R, P, I], {"radius_m": geom.radius_m, "wavelength_m": geom.wavelength_m})
    summary = {
        "radius_m": geom.radius_m,
        "wavelength_m": geom.wavelength_m,
        "n_core": geom.n_core,
        "n_clad": geom.n_clad,
        "v_number": geom.v_number,
        "single_mode": geom.single_mode,
        "n_eff": mode.n_eff,
        "beta_rad_per_m": mode.beta,
        "h_rad_per_m": mode.h,
        "q_rad_per_m": mode.q,
        "decay_length_m": mode.decay_length,
        "characteristic_residual": mode.residual,
        "trap_distance_m": d,
        "g_surface_over_2pi_hz": cfg.g_surface / TWO_PI,
        "g_at_distance_over_2pi_hz": g_d / TWO_PI,
        "g_ratio": g_d / cfg.g_surface,
        "profile_csv": str(prof_path),
    }
    io.write_json(out / "mode_summary.json", summary)
    lines = [
        f"V = {geom.v_number:.4f}, n_eff = {mode.n_eff:.12f}",
        f"q = {mode.q:.6e} rad/m, decay length 1/q = {mode.decay_length * 1e9:.2f} nm",
        f"g({d * 1e9:.0f} nm)/2pi = {g_d / TWO_PI / 1e6:.3f} MHz"
        f" (surface {cfg.g_surface / TWO_PI / 1e6:.3f} MHz, ratio {g_d / cfg.g_surface:.4f})",
        f"profile -> {prof_path}",
    ]
    _emit(args, summary, lines)
    return EXIT_OK


def cmd_scaling(args, cfg: RunConfig) -> int:
    block = cfg.block("scaling")
    lmin = args.lmin if args.lmin is not None else block["length_min_m"]
    lmax = args.lmax if args.lmax is not None else block["length_max_m"]
    points = args.points if args.points is not None else block["points"]
    if lmin > lmax:
        raise UsageError("--lmin must not exceed --lmax")
    lengths = np.array([lmin]) if lmin == lmax else np.geomspace(lmin, lmax, points)
    ref, atoms = cfg.scaling_reference, cfg.atoms
    rows = length_sweep(ref, atoms, lengths)
    out = _output_dir(args, cfg)
    path = out / "scaling.csv"
    cols = [
        [r.length_m for r in rows],
        [r.g / TWO_PI for r in rows],
        [r.g_coll / TWO_PI for r in rows],
        [r.fsr_hz for r in rows],
        [r.kappa0 / TWO_PI for r in rows],
        [r.c0 for r in rows],
        [r.c_coll for r in rows],
    ]
    io.write_csv(path, SCALING_HEADER, cols, {"n_atoms": atoms.n_atoms, "taper_loss_db": ref.taper_loss_db})
    anchor = scale_with_length(ref, atoms, ref.l_ref)
    report = {
        "scaling_csv": str(path),
        "rows": len(rows),
        "taper_loss_db": ref.taper_loss_db,
        "alpha_fiber_db_per_km": ref.alpha_fiber_db_per_km,
        "c0_ref": anchor.c0,
        "c_coll_ref": anchor.c_coll,
        "c0_critical_coupling_ref": single_atom_cooperativity(anchor.g, 2 * anchor.kappa0, atoms.gamma),
        "threshold_closed_form_m": multimode_threshold_closed_form(ref, atoms),
    }
    lines = [
        f"{len(rows)} lengths in [{lmin:g}, {lmax:g}] m -> {path}",
        f"taper loss {ref.taper_loss_db:.4f} dB per round trip",
        f"at l = {ref.l_ref:g} m: C0 = {anchor.c0:.4f}, C_coll = {anchor.c_coll:.1f}",
    ]
    try:
        l_star = multimode_threshold(ref, atoms)
        report["threshold_m"] = l_star
        lines.append(f"multimode threshold: g_coll/2pi = FSR at l* = {l_star:.4f} m")
    except NoThresholdError as exc:
        report["threshold_m"] = None
        lines.append(f"multimode threshold: none ({exc})")
    _emit(args, report, lines)
    return EXIT_OK


def cmd_multimode(args, cfg: RunConfig) -> int:
    block = cfg.block("multimode")
    n_modes = args.modes if args.modes is not None else block["modes"]
    length = args.length if args.length is not None else block["length_m"]
    point = scale_with_length(cfg.scaling_reference, cfg.atoms, length)
    g_coll = TWO_PI * args.gcoll if args.gcoll is not None else point.g_coll
    fsr = args.fsr if args.fsr is not None else point.fsr_hz
    offset = TWO_PI * block["detuning_offset_over_2pi_hz"]
    ev = multimode_polariton_spectrum(g_coll, fsr, n_modes, offset) / TWO_PI
    gaps = np.diff(ev)
    out = _output_dir(args, cfg)
    path = out / "polaritons.csv"
    gap_path = out / "polariton_gaps.csv"
    meta = {"modes": n_modes, "g_coll_over_2pi_hz": g_coll / TWO_PI, "fsr_hz": fsr}
    io.write_csv(path, POLARITON_HEADER, [np.arange(ev.size, dtype=float), ev], meta)
    io.write_csv(gap_path, GAP_HEADER, [np.arange(gaps.size, dtype=float), gaps], meta)
    report = {
        "modes": n_modes,
        "length_m": length,
        "g_coll_over_2pi_hz": g_coll / TWO_PI,
        "fsr_hz": fsr,
        "g_coll_over_fsr": g_coll / TWO_PI / fsr,
        "eigenfrequencies_over_2pi_hz": ev.tolist(),
        "gaps_over_2pi_hz": gaps.tolist(),
        "gap_ratio_max_min": float(gaps.max() / gaps.min()) if gaps.size and gaps.min() > 0 else None,
        "polaritons_csv": str(path),
        "gaps_csv": str(gap_path),
    }
    lines = [
        f"{n_modes} mode(s), g_coll/2pi = {g_coll / TWO_PI / 1e6:.3f} MHz, FSR = {fsr / 1e6:.3f} MHz"
        f" (ratio {g_coll / TWO_PI / fsr:.3f})",
        "eigenfrequencies/2pi [MHz]: " + ", ".join(f"{x / 1e6:.3f}" for x in ev),
        "gaps/2pi [MHz]: " + ", ".join(f"{x / 1e6:.3f}" for x in gaps),
        f"-> {path}",
    ]
    _emit(args, report, lines)
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def _common(suppress: bool) -> argparse.ArgumentParser:
    # shared options, accepted before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", metavar="PATH", default=default, help="JSON run configuration")
    p.add_argument("--out", metavar="DIR", default=default, help=f"output directory (default ${OUTPUT_ENV})")
    p.add_argument(
        "--json", action="store_true", default=argparse.SUPPRESS if suppress else False, help="print the report as JSON"
    )
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fiberring",
        description="Fiber ring resonator modeling: spectra, fits, nanofiber mode, CQED scaling.",
        parents=[_common(False)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = _common(True)

    p = sub.add_parser("spectrum", parents=[common], help="synthesize (and fit) a transmission scan")
    p.add_argument("--span", help="scan span: Hz, or e.g. '3fsr', '20lw' (FWHM linewidths)")
    p.add_argument("--samples", type=_positive_int)
    p.add_argument("--noise", type=_nonneg_float, help="Gaussian noise sigma on the transmission")
    p.add_argument("--seed", type=int)
    p.add_argument("--regime", choices=("under", "critical", "over"), help="kappa_ext = 0.3, 1 or 3 kappa0")
    p.add_argument("--fit", action="store_true", help="fit every detected resonance")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("coupling-sweep", parents=[common], help="beam-splitter sweep and global kappa0 fit")
    p.add_argument("--settings", type=_positive_int)
    p.add_argument("--noise", type=_nonneg_float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_coupling_sweep)

    p = sub.add_parser("mode", parents=[common], help="HE11 mode of the nanofiber waist")
    p.set_defaults(func=cmd_mode)

    p = sub.add_parser("scaling", parents=[common], help="cooperativity versus ring length")
    p.add_argument("--lmin", type=_positive_float, help="shortest length [m]")
    p.add_argument("--lmax", type=_positive_float, help="longest length [m]")
    p.add_argument("--points", type=_positive_int)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("multimode", parents=[common], help="polariton spectrum for several ring modes")
    p.add_argument("--modes", type=_odd_int, help="number of ring modes (odd)")
    p.add_argument("--gcoll", type=_nonneg_float, help="g_coll / 2pi [Hz] (default: from the scaling model)")
    p.add_argument("--fsr", type=_positive_float, help="FSR [Hz] (default: from the scaling model)")
    p.add_argument("--length", type=_positive_float, help="ring length [m] for the defaults")
    p.set_defaults(func=cmd_multimode)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config)
    except (ConfigError, OSError) as exc:
        print(f"fiberring: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fiberring: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FlatFitError, OSError, ValueError, ArithmeticError) as exc:
        print(f"fiberring: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
