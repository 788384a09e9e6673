"""Command-line front end.

Subcommands: transform | sct | ridge | reconstruct | synth | compare | info.
Exit codes: 0 success, 1 usage error, 2 I/O or format error, 3 numerical
failure.  All commands are deterministic given the config and seed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import tensorio
from .errors import FormatError, ParameterError, TfchirpError
from .metrics import rel_error
from .pipeline import random_study, run_sct, sct_ridges
from .reassign import squeeze_conservation
from .reconstruct import reconstruct_modes
from .ridge import RidgeParams, extract_ridges
from .signal import Signal, WindowFamily, grid_from_resolution, make_window_bank
from .synth import crossing_chirp_pair, random_ict_scene
from .transform import chirplet_transform, project_tfc_to_tf

USAGE_ERROR, IO_ERROR, NUMERICAL_ERROR = 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    window_n: int = 0
    alpha_w: float = 1.0
    half_len: int = 0  # 0 = automatic truncation policy
    alpha_sq: float = 0.01
    nu_rel: float = 1e-4
    q: float = 0.9995
    sigma_pct: float = 15.0
    min_per_frame: int = 0
    n_components: int = 2
    seed: int = 0
    convention: str = "centered"

    def family(self) -> WindowFamily:
        return WindowFamily(self.window_n, self.alpha_w)

    def ridge_params(self) -> RidgeParams:
        return RidgeParams(
            q=self.q,
            sigma_pct=self.sigma_pct,
            seed=self.seed,
            min_per_frame=self.min_per_frame,
        )


_CONFIG_TYPES = {
    "window_n": int,
    "alpha_w": float,
    "half_len": int,
    "alpha_sq": float,
    "nu_rel": float,
    "q": float,
    "sigma_pct": float,
    "min_per_frame": int,
    "n_components": int,
    "seed": int,
    "convention": str,
}


def load_config(path: str | None) -> RunConfig:
    config = RunConfig()
    if path is None:
        return config
    values = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ParameterError(f"{path}:{lineno}: expected key = value")
                key, _, val = line.partition("=")
                key = key.strip()
                if key not in _CONFIG_TYPES:
                    raise ParameterError(f"{path}:{lineno}: unknown key {key!r}")
                try:
                    values[key] = _CONFIG_TYPES[key](val.strip())
                except ValueError as exc:
                    raise ParameterError(f"{path}:{lineno}: {exc}") from exc
    except OSError as exc:
        raise FormatError(f"cannot read config: {exc}") from exc
    config = replace(config, **values)
    if config.convention not in ("centered", "left"):
        raise ParameterError("convention must be 'centered' or 'left'")
    return config


def _read_signal(args, config: RunConfig) -> Signal:
    fmt = args.format
    try:
        if fmt == "wav":
            return tensorio.read_wav(args.input, downsample=args.downsample)
        if args.rate is None:
            raise ParameterError(f"--rate is required for format {fmt!r}")
        if fmt == "csv":
            return tensorio.read_signal_csv(args.input, args.rate, args.t0)
        if fmt in ("raw", "raw-complex"):
            sig = tensorio.read_signal_raw(args.input, args.rate, interleaved_complex=fmt == "raw-complex")
            return Signal(sig.samples, sig.sample_rate_hz, args.t0)
    except OSError as exc:
        raise FormatError(str(exc)) from exc
    raise ParameterError(f"unknown input format {fmt!r}")


def _half_len(config: RunConfig, signal: Signal) -> int:
    if config.half_len > 0:
        return config.half_len
    return config.family().default_half_len(signal.dt_s)


def _write_slice_csv(path: str, tensor, t0_s: float, at_time: float):
    grid = tensor.grid
    frame = int(round((at_time - t0_s) * grid.sample_rate_hz))
    if not (0 <= frame < grid.n_time):
        raise ParameterError(f"--slice time {at_time} outside the record")
    mags = np.abs(tensor.values[:, :, frame])
    rows = []
    for li, lam in enumerate(grid.chirps_hzps):
        for mi, freq in enumerate(grid.freqs_hz):
            rows.append((lam, freq, mags[li, mi]))
    tensorio.write_csv_table(path, ("chirp_hzps", "freq_hz", "magnitude"), rows)


def cmd_transform(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    signal = _read_signal(args, config)
    grid = grid_from_resolution(config.alpha_sq, len(signal), signal.sample_rate_hz)
    bank = make_window_bank(config.family(), _half_len(config, signal), signal.dt_s)
    tensor = chirplet_transform(signal, bank.h, grid, config.convention)
    tensorio.write_tensor(args.output, tensor, signal.t0_s)
    if args.tf_csv:
        tf = project_tfc_to_tf(tensor)
        rows = [
            (signal.t0_s + n / grid.sample_rate_hz, grid.freqs_hz[m], tf.values[m, n])
            for m in range(grid.n_freq)
            for n in range(grid.n_time)
        ]
        tensorio.write_csv_table(args.tf_csv, ("t_s", "freq_hz", "projection"), rows)
    if args.slice is not None:
        _write_slice_csv(args.slice_csv, tensor, signal.t0_s, args.slice)
    return 0


def cmd_sct(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    signal = _read_signal(args, config)
    grid = grid_from_resolution(config.alpha_sq, len(signal), signal.sample_rate_hz)
    result = run_sct(
        signal,
        config.family(),
        grid,
        half_len=_half_len(config, signal),
        convention=config.convention,
        nu_rel=config.nu_rel,
    )
    tensorio.write_tensor(args.output, result.squeezed, signal.t0_s)
    if args.summary:
        residual = squeeze_conservation(result.banks.h, result.field, result.squeezed)
        rows = [
            (signal.t0_s + n / grid.sample_rate_hz, residual[n])
            for n in range(grid.n_time)
        ]
        tensorio.write_csv_table(args.summary, ("t_s", "conservation_residual"), rows)
    if args.slice is not None:
        _write_slice_csv(args.slice_csv, result.squeezed, signal.t0_s, args.slice)
    return 0


def _ridge_rows(ridges, grid, t0_s):
    header = ["t_s"]
    for k in range(ridges.n_components):
        header += [f"omega{k}_hz", f"mu{k}_hzps"]
    rows = []
    for n in range(ridges.n_time):
        row = [t0_s + n / grid.sample_rate_hz]
        for k in range(ridges.n_components):
            row += [ridges.omega_hz[k, n], ridges.mu_hzps[k, n]]
        rows.append(row)
    return header, rows


def cmd_ridge(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    tensor, t0 = tensorio.read_tensor(args.tensor)
    ridges = extract_ridges(tensor, config.n_components, config.ridge_params())
    header, rows = _ridge_rows(ridges, tensor.grid, t0)
    tensorio.write_csv_table(args.output, header, rows)
    return 0


def cmd_reconstruct(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    signal = _read_signal(args, config)
    grid = grid_from_resolution(config.alpha_sq, len(signal), signal.sample_rate_hz)
    analysis = run_sct(
        signal, config.family(), grid,
        half_len=_half_len(config, signal), convention=config.convention,
    )
    ridges = sct_ridges(analysis, config.n_components, config.ridge_params())
    recon_family = WindowFamily(args.recon_n, args.recon_alpha)
    recon_bank = make_window_bank(recon_family, recon_family.default_half_len(signal.dt_s), signal.dt_s)
    modes = reconstruct_modes(signal, ridges, recon_family, recon_bank)
    header, rows = _ridge_rows(ridges, grid, signal.t0_s)
    tensorio.write_csv_table(args.ridge_csv, header, rows)
    for k in range(modes.modes.shape[0]):
        tensorio.write_signal_csv(
            f"{args.mode_prefix}{k}.csv", Signal(modes.modes[k], signal.sample_rate_hz, signal.t0_s)
        )
    if args.truth:
        lines = []
        for k, path in enumerate(args.truth):
            truth = tensorio.read_signal_csv(path, signal.sample_rate_hz)
            err = rel_error(modes.modes[k].real, truth.samples.real)
            lines.append((k, err))
        tensorio.write_csv_table(args.report, ("mode", "rel_error_real"), lines)
    return 0


def cmd_synth(args) -> int:
    if args.scene == "crossing":
        scene = crossing_chirp_pair()
    elif args.scene == "random":
        scene = random_ict_scene(args.seed if args.seed is not None else 0)
    else:
        raise ParameterError(f"unknown scene {args.scene!r}")
    signal = scene.signal()
    tensorio.write_signal_csv(args.output, signal)
    if args.truth_prefix:
        for k in range(scene.components.shape[0]):
            tensorio.write_signal_csv(
                f"{args.truth_prefix}component{k}.csv",
                Signal(scene.components[k], scene.sample_rate_hz, float(scene.times_s[0])),
            )
            rows = list(zip(scene.times_s, scene.ifs_hz[k], scene.chirps_hzps[k]))
            tensorio.write_csv_table(
                f"{args.truth_prefix}curves{k}.csv", ("t_s", "if_hz", "chirp_hzps"), rows
            )
    return 0


def cmd_compare(args) -> int:
    seeds = list(range(args.seeds))
    if not seeds:
        raise ParameterError("--seeds must be >= 1")
    _, summary = random_study(seeds)
    rows = []
    for method, stats in summary.items():
        if stats["rel_mean"] is not None:
            for k, (m, s) in enumerate(zip(stats["rel_mean"], stats["rel_sd"])):
                rows.append((method, k, "rel_error", float(m), float(s)))
        if stats["ot_mean"] is not None:
            for k, (m, s) in enumerate(zip(stats["ot_mean"], stats["ot_sd"])):
                rows.append((method, k, "ot_if", float(m), float(s)))
    tensorio.write_csv_table(args.output, ("method", "mode", "metric", "mean", "sd"), rows)
    return 0


def cmd_info(args) -> int:
    tensor, t0 = tensorio.read_tensor(args.tensor)
    grid = tensor.grid
    print(f"dims: {grid.n_chirp} x {grid.n_freq} x {grid.n_time}")
    print(f"alpha_sq: {grid.alpha_sq}")
    print(f"sample_rate_hz: {grid.sample_rate_hz}")
    print(f"t0_s: {t0}")
    print(f"dtype: {tensor.values.dtype}")
    return 0


def _add_signal_args(parser):
    parser.add_argument("--input", required=True, help="input signal path")
    parser.add_argument("--format", default="csv", choices=("wav", "csv", "raw", "raw-complex"))
    parser.add_argument("--rate", type=float, default=None, help="sample rate (csv/raw)")
    parser.add_argument("--t0", type=float, default=0.0, help="start time of the record")
    parser.add_argument("--downsample", type=int, default=1, help="decimation factor (wav)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tfchirp")
    parser.add_argument("--config", default=None, help="key = value config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="chirplet transform to a TFC1 file")
    _add_signal_args(p)
    p.add_argument("--output", required=True)
    p.add_argument("--tf-csv", default=None, help="also write the TF projection")
    p.add_argument("--slice", type=float, default=None, help="time (s) of a freq-chirp slice CSV")
    p.add_argument("--slice-csv", default="slice.csv")
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("sct", help="synchrosqueezed transform to a TFC1 file")
    _add_signal_args(p)
    p.add_argument("--output", required=True)
    p.add_argument("--summary", default=None, help="per-frame conservation CSV")
    p.add_argument("--slice", type=float, default=None)
    p.add_argument("--slice-csv", default="slice.csv")
    p.set_defaults(fn=cmd_sct)

    p = sub.add_parser("ridge", help="extract ridge curves from a TFC1 file")
    p.add_argument("--tensor", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_ridge)

    p = sub.add_parser("reconstruct", help="full ridge extraction + mode reconstruction")
    _add_signal_args(p)
    p.add_argument("--ridge-csv", required=True)
    p.add_argument("--mode-prefix", required=True, help="mode CSVs are written as <prefix><k>.csv")
    p.add_argument("--recon-n", type=int, default=0, help="reconstruction window power")
    p.add_argument("--recon-alpha", type=float, default=1.0)
    p.add_argument("--truth", nargs="*", default=None, help="clean component CSVs")
    p.add_argument("--report", default="report.csv")
    p.set_defaults(fn=cmd_reconstruct)

    p = sub.add_parser("synth", help="generate a test scene")
    p.add_argument("--scene", required=True, choices=("crossing", "random"))
    p.add_argument("--output", required=True)
    p.add_argument("--truth-prefix", default=None)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("compare", help="multi-seed method comparison table")
    p.add_argument("--seeds", type=int, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("info", help="print a TFC1 header")
    p.add_argument("--tensor", required=True)
    p.set_defaults(fn=cmd_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_ERROR
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except TfchirpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
