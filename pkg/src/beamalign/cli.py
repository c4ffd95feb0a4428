"""Command-line driver: run Monte Carlo sweeps, export beam patterns and codebooks.

Exit codes: 0 success, 2 configuration error, 3 widebeam synthesis failure,
4 I/O error. Diagnostics verbosity comes from the BEAMALIGN_LOG environment
variable (DEBUG/INFO/WARNING/ERROR, default WARNING) and goes to stderr.
"""

import argparse
import configparser
import logging
import os
import sys
from dataclasses import replace
from importlib import resources

import numpy as np

from .arrays import ArrayGeometry, angle_to_spatial
from .beams import (
    SynthesisError,
    build_widebeam_codebook,
    is_adequate,
    synthesize_widebeam,
    write_codebook_csv,
    write_pattern_csv,
)
from .montecarlo import (
    EstimatorSpec,
    ExperimentConfig,
    run_sweep,
    write_results_csv,
)

__all__ = ["main", "load_config", "bundled_config", "ConfigError"]

log = logging.getLogger("beamalign")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SYNTHESIS = 3
EXIT_IO = 4


class ConfigError(Exception):
    """Malformed or unknown configuration content; message names the key."""


def bundled_config(name: str):
    """Path-like handle to a packaged experiment config (e.g. 'fig4.cfg')."""
    return resources.files("beamalign").joinpath("configs", name)


def _parse_interval(text, key):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"{key} must be 'low, high', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _parse_snr_grid(text, key):
    try:
        if ":" in text:
            start, step, stop = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ConfigError(f"{key}: step must be > 0")
            return tuple(np.arange(start, stop + 1e-9, step).tolist())
        return tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _parse_bool(text, key):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


_EXPERIMENT_KEYS = ("n_tot", "m_tot", "n_rf", "trials", "master_seed",
                    "snr_grid_db", "aod_prior_deg", "aoa_prior_deg",
                    "nonadequate_k", "tx_spacing", "rx_spacing")
_CHANNEL_KEYS = ("kind", "k_factor_db", "num_paths", "nlos_normalized")
_ESTIMATOR_KEYS = ("two_stage", "two_stage_nonadequate", "gob", "gob_abp")


def load_config(path) -> ExperimentConfig:
    """Parse an experiment config file; unknown sections or keys are rejected."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)

    for section in parser.sections():
        if section not in ("experiment", "channel", "estimators"):
            raise ConfigError(f"unknown section [{section}]")

    kwargs = {}
    if parser.has_section("experiment"):
        for key, value in parser.items("experiment"):
            if key not in _EXPERIMENT_KEYS:
                raise ConfigError(f"unknown key {key!r} in [experiment]")
            try:
                if key in ("n_tot", "m_tot", "n_rf", "trials", "master_seed"):
                    kwargs[key] = int(value)
                elif key in ("nonadequate_k", "tx_spacing", "rx_spacing"):
                    kwargs[key] = float(value)
                elif key == "snr_grid_db":
                    kwargs[key] = _parse_snr_grid(value, key)
                else:
                    kwargs[key] = _parse_interval(value, key)
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from None

    if parser.has_section("channel"):
        for key, value in parser.items("channel"):
            if key not in _CHANNEL_KEYS:
                raise ConfigError(f"unknown key {key!r} in [channel]")
            try:
                if key == "kind":
                    kwargs["channel_kind"] = value.strip()
                elif key == "k_factor_db":
                    kwargs[key] = float(value)
                elif key == "num_paths":
                    kwargs[key] = int(value)
                else:
                    kwargs[key] = _parse_bool(value, key)
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from None

    if parser.has_section("estimators"):
        entries = []
        for key, value in parser.items("estimators"):
            if key not in _ESTIMATOR_KEYS:
                raise ConfigError(f"unknown key {key!r} in [estimators]")
            try:
                counts = [int(p) for p in value.split(",")]
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from None
            entries.extend(EstimatorSpec(key, count) for count in counts)
        kwargs["estimators"] = tuple(entries)

    try:
        config = ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    for key in ("n_tot", "m_tot", "n_rf", "trials", "master_seed", "channel_kind"):
        origin = "" if key in kwargs or (key == "channel_kind" and "channel_kind" in kwargs) else " (default)"
        log.info("config: %s = %r%s", key, getattr(config, key), origin)
    log.info("config: snr_grid_db = %s points in [%g, %g]", len(config.snr_grid_db),
             config.snr_grid_db[0], config.snr_grid_db[-1])
    log.info("config: estimators = %s", [spec.label for spec in config.estimators])
    return config


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except (ConfigError, configparser.Error) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    try:
        if args.seed is not None:
            config = replace(config, master_seed=args.seed)
        curves = run_sweep(config, workers=args.workers)
    except SynthesisError as exc:
        log.error("widebeam synthesis failed: %s", exc)
        return EXIT_SYNTHESIS
    except ValueError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    try:
        write_results_csv(curves, args.out, config)
    except OSError as exc:
        log.error("cannot write results: %s", exc)
        return EXIT_IO
    for curve in curves:
        print(f"{curve.estimator_id}: soundings={curve.soundings}, "
              f"err {curve.mean_abs_error_deg[0]:.4g} deg @ {curve.snr_db[0]:g} dB"
              f" -> {curve.mean_abs_error_deg[-1]:.4g} deg @ {curve.snr_db[-1]:g} dB")
    return EXIT_OK


def _half_width(args) -> float:
    if args.half_width_k < 1:
        raise ConfigError(f"half-width k must be a positive integer, got {args.half_width_k}")
    return args.half_width_k * args.delta_scale * np.pi / args.n_tot


def _cmd_pattern(args) -> int:
    try:
        geom = ArrayGeometry(args.n_tot)
        delta = _half_width(args)
        adequate, _ = is_adequate(delta, args.n_tot)
        if not adequate:
            if not args.allow_nonadequate:
                log.error("half width %g is not k*pi/N_tot; pass --allow-nonadequate to force", delta)
                return EXIT_CONFIG
            log.warning("synthesizing a non-adequate widebeam (half width %g)", delta)
        beam = synthesize_widebeam(angle_to_spatial(args.boresight_deg, geom), delta,
                                   args.n_rf, geom, allow_nonadequate=True)
    except SynthesisError as exc:
        log.error("synthesis failed: %s", exc)
        return EXIT_SYNTHESIS
    except (ConfigError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    try:
        write_pattern_csv(args.out, beam.combined, geom, grid_points=args.grid_points)
    except OSError as exc:
        log.error("cannot write pattern: %s", exc)
        return EXIT_IO
    print(f"pattern: N={args.n_tot}, n_rf={args.n_rf}, boresight={args.boresight_deg} deg, "
          f"half_width={delta:.6g} rad, {args.grid_points} points -> {args.out}")
    return EXIT_OK


def _cmd_codebook(args) -> int:
    span = (args.span_lo_deg, args.span_hi_deg)
    try:
        geom = ArrayGeometry(args.n_tot)
        codebook = build_widebeam_codebook(span, geom, n_rf=args.n_rf,
                                           num_beams=args.num_beams, k=args.k,
                                           delta_scale=args.delta_scale)
    except SynthesisError as exc:
        log.error("synthesis failed: %s", exc)
        return EXIT_SYNTHESIS
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    if codebook.k is None:
        if not args.allow_nonadequate:
            log.error("resulting half width %g is not adequate; pass --allow-nonadequate",
                      codebook.half_width)
            return EXIT_CONFIG
        log.warning("exporting a non-adequate codebook (half width %g)", codebook.half_width)
    try:
        write_codebook_csv(args.out, codebook)
    except OSError as exc:
        log.error("cannot write codebook: %s", exc)
        return EXIT_IO
    print(f"codebook: {len(codebook.beams)} beams over [{span[0]}, {span[1]}] deg, "
          f"half_width={codebook.half_width:.6g} rad, k={codebook.k} -> {args.out}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beamalign",
                                     description="Two-stage AoD estimation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured Monte Carlo sweep")
    p_run.add_argument("--config", required=True, help="experiment config file")
    p_run.add_argument("--out", required=True, help="output CSV path")
    p_run.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p_run.add_argument("--seed", type=int, default=None, help="override the master seed")
    p_run.set_defaults(func=_cmd_run)

    p_pat = sub.add_parser("pattern", help="synthesize one widebeam and export its pattern")
    p_pat.add_argument("--n-tot", type=int, default=16)
    p_pat.add_argument("--n-rf", type=int, default=5)
    p_pat.add_argument("--boresight-deg", type=float, default=0.0)
    p_pat.add_argument("--half-width-k", type=int, default=2,
                       help="half width as a multiple of pi/N_tot")
    p_pat.add_argument("--grid-points", type=int, default=1024)
    p_pat.add_argument("--delta-scale", type=float, default=1.0,
                       help="scale the half width away from the adequate grid")
    p_pat.add_argument("--allow-nonadequate", action="store_true")
    p_pat.add_argument("--out", required=True)
    p_pat.set_defaults(func=_cmd_pattern)

    p_cb = sub.add_parser("codebook", help="build a widebeam codebook and export it")
    p_cb.add_argument("--n-tot", type=int, default=16)
    p_cb.add_argument("--n-rf", type=int, default=5)
    p_cb.add_argument("--span-lo-deg", type=float, default=-50.0)
    p_cb.add_argument("--span-hi-deg", type=float, default=50.0)
    p_cb.add_argument("--num-beams", type=int, default=None)
    p_cb.add_argument("--k", type=int, default=None)
    p_cb.add_argument("--delta-scale", type=float, default=1.0)
    p_cb.add_argument("--allow-nonadequate", action="store_true")
    p_cb.add_argument("--out", required=True)
    p_cb.set_defaults(func=_cmd_codebook)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("BEAMALIGN_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="beamalign: %(levelname)s: %(message)s")
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
