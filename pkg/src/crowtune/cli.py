"""Batch command-line front-end.

Subcommands: ``optimize`` runs the full phantom -> sinogram -> optimizer
pipeline from a config file; ``reconstruct`` runs one reconstruction with an
explicit parameter file; ``evaluate`` scores an image file; and
``export-weightmap`` regenerates per-dimension weight CSVs from a saved run.

Exit codes: 0 success, 2 usage/config errors, 3 runtime failures.  The
environment variable CROWTUNE_THREADS caps parallel candidate evaluations
(default: available cores).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from pathlib import Path

from . import fileio, fitness, optimizer
from .analysis import UndefinedCorrelationError, pearson, psnr
from .config import RunConfig, load_run_config, parse_kv_file
from .errors import ConfigError, CrowtuneError
from .phantoms import NoiseModel, make_phantom, simulate_sinogram, subsample_views
from .recon import Geometry, ReconParams, reconstruct, required_fields
from .space import preset_space, snap_index


def _threads() -> int:
    raw = os.environ.get("CROWTUNE_THREADS")
    if raw is not None:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigError(f"CROWTUNE_THREADS: invalid integer {raw!r}")
    return os.cpu_count() or 1


def _build_problem(cfg: RunConfig):
    """Phantom, (possibly subsampled) geometry and sinogram, and PICCS prior."""
    ground_truth = make_phantom(cfg.phantom)
    geometry = Geometry.equal_spaced(cfg.phantom.n, cfg.n_angles, cfg.n_detectors)
    sinogram = simulate_sinogram(ground_truth, geometry, cfg.phantom.noise, cfg.phantom.seed)
    sinogram, geometry = subsample_views(sinogram, geometry, cfg.keep_fraction)
    prior = None
    if cfg.recon_algorithm == "piccs":
        prior_spec = dataclasses.replace(cfg.phantom, insert=False, noise=NoiseModel())
        prior = make_phantom(prior_spec)
    return ground_truth, geometry, sinogram, prior


def _make_evaluator(cfg: RunConfig, geometry, sinogram, prior, ground_truth, recorder):
    data_range = float(ground_truth.max())

    def evaluator(position):
        values = cfg.space.value_map(position)
        params = ReconParams.from_mapping(cfg.recon_algorithm, values)
        image = reconstruct(cfg.recon_algorithm, sinogram, geometry, params, prior, cfg.rho)
        report = fitness.evaluate(image, cfg.fitness)
        recorder.append((report.fitness, psnr(image, ground_truth, data_range)))
        return report

    return evaluator


def _write_correlation(path, recorder) -> None:
    """Fitness vs -PSNR correlation across all evaluated candidates.

    Fitness is a minimization score while PSNR rises with quality, so a good
    run shows positive correlation between fitness and negated PSNR.
    """
    pairs = sorted(p for p in recorder if math.isfinite(p[1]))
    value = float("nan")
    if len(pairs) >= 2:
        fits = [p[0] for p in pairs]
        neg_psnr = [-p[1] for p in pairs]
        try:
            value = pearson(fits, neg_psnr)
        except UndefinedCorrelationError:
            pass
    lines = [
        "# correlation of candidate fitness against negated PSNR-vs-ground-truth",
        "metric,value",
        f"pearson_fitness_neg_psnr,{value:.6f}",
        f"samples,{len(pairs)}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_optimize(args) -> int:
    cfg = load_run_config(args.config)
    started = time.perf_counter()
    ground_truth, geometry, sinogram, prior = _build_problem(cfg)
    recorder: list[tuple[float, float]] = []
    evaluator = _make_evaluator(cfg, geometry, sinogram, prior, ground_truth, recorder)

    record = optimizer.run(cfg.space, evaluator, cfg.optimizer,
                           algorithm=cfg.opt_algorithm, init_scheme=cfg.init_scheme,
                           threads=_threads())

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_convergence_csv(out / "convergence.csv", record)
    fileio.write_params_file(out / "best_params.txt", record.best_values)

    best_params = ReconParams.from_mapping(cfg.recon_algorithm, record.best_values)
    best_image = reconstruct(cfg.recon_algorithm, sinogram, geometry, best_params,
                             prior, cfg.rho)
    fileio.write_pgm(out / "best_recon.pgm", best_image)
    fileio.write_image_csv(out / "best_recon.csv", best_image)

    if record.weight_map is not None:
        fileio.write_weightmap_json(out / "weightmap.json", record.weight_map)
        payload = json.loads((out / "weightmap.json").read_text())
        fileio.export_weightmap_csvs(out / "weightmap", payload["dimensions"])

    _write_correlation(out / "correlation.csv", recorder)

    rep = record.best_report
    quality = psnr(best_image, ground_truth, float(ground_truth.max()))
    elapsed = time.perf_counter() - started
    summary = (f"experiment={cfg.experiment} best_fitness={rep.fitness:.6f} "
               f"snr={rep.snr:.6f} hfer={rep.hfer:.6f} psnr={quality:.6f} "
               f"evaluations={record.total_evaluations} wall_time_s={elapsed:.2f}")
    (out / "summary.txt").write_text(summary + "\n")
    print(summary)
    return 0


def _snapped_params(algorithm: str, entries, path) -> dict[str, float]:
    fields = required_fields(algorithm)
    values: dict[str, float] = {}
    for key, (raw, lineno) in entries.items():
        if key not in fields:
            raise ConfigError(f"{path}:{lineno}: unknown parameter {key!r} for {algorithm}")
        try:
            values[key] = float(raw)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: {key}: invalid number {raw!r}")
    missing = [f for f in fields if f not in values]
    if missing:
        raise ConfigError(f"{path}: missing parameter(s) for {algorithm}: {', '.join(missing)}")

    space = preset_space(algorithm)
    specs = {s.name: s for s in space.specs}
    snapped = {}
    for name, value in values.items():
        spec = specs[name]
        k = snap_index(spec, value)
        on_grid = spec.value(k)
        if abs(on_grid - value) > 1e-9 * max(1.0, abs(value)):
            print(f"warning: {name} = {value:g} is off the grid "
                  f"[{spec.lo:g}, {spec.hi:g}, {spec.step:g}]; snapped to {on_grid:g}")
        snapped[name] = on_grid
    return snapped


def cmd_reconstruct(args) -> int:
    cfg = load_run_config(args.config)
    entries = parse_kv_file(args.params)
    values = _snapped_params(cfg.recon_algorithm, entries, args.params)
    params = ReconParams.from_mapping(cfg.recon_algorithm, values)

    ground_truth, geometry, sinogram, prior = _build_problem(cfg)
    image = reconstruct(cfg.recon_algorithm, sinogram, geometry, params, prior, cfg.rho)

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_pgm(out / "recon.pgm", image)
    fileio.write_image_csv(out / "recon.csv", image)

    report = fitness.evaluate(image, cfg.fitness)
    quality = psnr(image, ground_truth, float(ground_truth.max()))
    print(f"fitness={report.fitness:.6f} snr={report.snr:.6f} hfer={report.hfer:.6f} "
          f"laplacian_var={report.laplacian_var:.6f} psnr={quality:.6f}")
    return 0


def cmd_evaluate(args) -> int:
    try:
        image = fileio.read_image(args.image)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc))
    fcfg = fitness.FitnessConfig(eta=args.eta, xi=args.xi, gamma=args.gamma)
    report = fitness.evaluate(image, fcfg)
    print(f"snr = {report.snr:.6f}")
    print(f"hfer = {report.hfer:.6f}")
    print(f"laplacian_var = {report.laplacian_var:.6f}")
    print(f"fitness = {report.fitness:.6f}")
    if args.ref is not None:
        try:
            ref = fileio.read_image(args.ref)
        except (ValueError, OSError) as exc:
            raise ConfigError(str(exc))
        data_range = float(ref.max()) or 1.0
        print(f"psnr = {psnr(image, ref, data_range):.6f}")
    return 0


def cmd_export_weightmap(args) -> int:
    run_dir = Path(args.run_dir)
    source = run_dir / "weightmap.json"
    if not source.is_file():
        raise ConfigError(f"no weight map found at {source}")
    payload = json.loads(source.read_text())
    written = fileio.export_weightmap_csvs(run_dir / "weightmap", payload["dimensions"])
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crowtune",
                                     description="Reconstruction hyperparameter optimization testbed")
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("optimize", help="run the full optimization pipeline")
    p_opt.add_argument("config")
    p_opt.set_defaults(handler=cmd_optimize)

    p_rec = sub.add_parser("reconstruct", help="one-shot reconstruction with explicit parameters")
    p_rec.add_argument("config")
    p_rec.add_argument("--params", required=True)
    p_rec.set_defaults(handler=cmd_reconstruct)

    p_eval = sub.add_parser("evaluate", help="score an image file")
    p_eval.add_argument("image")
    p_eval.add_argument("--ref", default=None)
    p_eval.add_argument("--eta", type=float, default=1.0)
    p_eval.add_argument("--xi", type=float, default=4.0)
    p_eval.add_argument("--gamma", type=float, default=0.25)
    p_eval.set_defaults(handler=cmd_evaluate)

    p_wm = sub.add_parser("export-weightmap", help="regenerate weight-map CSVs from a run directory")
    p_wm.add_argument("run_dir")
    p_wm.set_defaults(handler=cmd_export_weightmap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CrowtuneError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
