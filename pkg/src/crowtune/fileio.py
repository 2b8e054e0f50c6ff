"""Image and sinogram file formats.

Images travel as 16-bit max-normalized binary PGM (P5) or as flat CSV with
9 significant digits; sinograms as CSV with a two-line header carrying the
angle and detector counts.  Every writer's output is readable by the
matching reader here.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

PGM_MAXVAL = 65535


def write_pgm(path, image: np.ndarray) -> None:
    """Write a 16-bit P5 PGM, normalized so the image maximum maps to 65535."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError(f"expected a 2D image, got shape {img.shape}")
    peak = img.max()
    scaled = np.zeros(img.shape, dtype=np.uint16)
    if peak > 0:
        scaled = np.round(np.clip(img, 0.0, None) / peak * PGM_MAXVAL).astype(np.uint16)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{PGM_MAXVAL}\n".encode("ascii"))
        fh.write(scaled.astype(">u2").tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary P5 PGM into floats on [0, 1]."""
    data = Path(path).read_bytes()
    m = re.match(rb"P5\s+(?:#[^\n]*\s+)*(\d+)\s+(\d+)\s+(\d+)\s", data)
    if not m:
        raise ValueError(f"{path}: not a binary P5 PGM")
    w, h, maxval = (int(g) for g in m.groups())
    body = data[m.end():]
    dtype = ">u2" if maxval > 255 else "u1"
    pixels = np.frombuffer(body, dtype=dtype, count=w * h)
    if pixels.size != w * h:
        raise ValueError(f"{path}: truncated pixel data")
    return pixels.reshape(h, w).astype(float) / maxval


def write_image_csv(path, image: np.ndarray) -> None:
    """Row-major CSV, one image row per line, 9 significant digits."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError(f"expected a 2D image, got shape {img.shape}")
    with open(path, "w") as fh:
        for row in img:
            fh.write(",".join(f"{v:.9g}" for v in row) + "\n")


def read_image_csv(path) -> np.ndarray:
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    return arr


def write_sinogram_csv(path, sinogram: np.ndarray) -> None:
    """CSV with a two-line header: n_angles, then n_detectors."""
    sino = np.asarray(sinogram, dtype=float)
    if sino.ndim != 2:
        raise ValueError(f"expected a 2D sinogram, got shape {sino.shape}")
    with open(path, "w") as fh:
        fh.write(f"{sino.shape[0]}\n{sino.shape[1]}\n")
        for row in sino:
            fh.write(",".join(f"{v:.9g}" for v in row) + "\n")


def read_sinogram_csv(path) -> np.ndarray:
    with open(path) as fh:
        n_angles = int(fh.readline())
        n_detectors = int(fh.readline())
        sino = np.loadtxt(fh, delimiter=",", ndmin=2)
    if sino.shape != (n_angles, n_detectors):
        raise ValueError(f"{path}: header says {(n_angles, n_detectors)}, data is {sino.shape}")
    return sino


def read_image(path) -> np.ndarray:
    """Dispatch on extension: .pgm or .csv."""
    suffix = Path(path).suffix.lower()
    if suffix == ".pgm":
        return read_pgm(path)
    if suffix == ".csv":
        return read_image_csv(path)
    raise ValueError(f"{path}: unsupported image format {suffix!r} (expected .pgm or .csv)")


# --- run records ---------------------------------------------------------

CONVERGENCE_COLUMNS = "iteration,best_fitness,mean_fitness,superior_size,explorations"
SOLUTION_COLUMNS = "solution,fitness,snr,hfer,laplacian_var,evaluations"


def write_convergence_csv(path, record) -> None:
    """One row per iteration plus a final-solution row; config echoed as comments."""
    cfg = record.config
    lines = [
        f"# algorithm = {record.algorithm}",
        f"# init = {record.init_scheme}",
        f"# population = {cfg.population}",
        f"# iterations = {cfg.iterations}",
        f"# flight_length = {cfg.flight_length:.6f}",
        f"# ap0 = {cfg.ap0:.6f}",
        f"# ap_inc = {cfg.ap_inc:.6f}",
        f"# kappa0 = {cfg.kappa0:.6f}",
        f"# omega_inc = {cfg.omega_inc:.6f}",
        f"# k0 = {cfg.k0:.6f}",
        f"# weight_floor = {cfg.weight_floor:.6f}",
        f"# neighborhood = {cfg.neighborhood:.6f}",
        f"# seed = {cfg.seed}",
        CONVERGENCE_COLUMNS,
    ]
    for it in record.iterations:
        lines.append(f"{it.iteration},{it.best_fitness:.6f},{it.mean_fitness:.6f},"
                     f"{it.superior_size},{it.explorations}")
    rep = record.best_report
    lines.append(SOLUTION_COLUMNS)
    lines.append(f"final,{rep.fitness:.6f},{rep.snr:.6f},{rep.hfer:.6f},"
                 f"{rep.laplacian_var:.6f},{record.total_evaluations}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_convergence_csv(path):
    """Return (config_echo, iteration_rows, solution_row)."""
    header: dict[str, str] = {}
    rows: list[dict] = []
    solution: dict = {}
    section = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("# ")
            if "=" in body:
                key, value = (p.strip() for p in body.split("=", 1))
                header[key] = value
            continue
        if line == CONVERGENCE_COLUMNS:
            section = "iterations"
            continue
        if line == SOLUTION_COLUMNS:
            section = "solution"
            continue
        parts = line.split(",")
        if section == "iterations":
            rows.append({
                "iteration": parts[0],
                "best_fitness": float(parts[1]),
                "mean_fitness": float(parts[2]),
                "superior_size": int(parts[3]),
                "explorations": int(parts[4]),
            })
        elif section == "solution":
            solution = {
                "fitness": float(parts[1]),
                "snr": float(parts[2]),
                "hfer": float(parts[3]),
                "laplacian_var": float(parts[4]),
                "evaluations": int(parts[5]),
            }
        else:
            raise ValueError(f"{path}: unexpected row before column header: {line!r}")
    if not rows or not solution:
        raise ValueError(f"{path}: incomplete convergence record")
    return header, rows, solution


def write_params_file(path, values: dict[str, float]) -> None:
    """name = value lines, readable back through the config parser."""
    lines = []
    for name, value in values.items():
        if name in ("max_iter", "tv_iter"):
            lines.append(f"{name} = {int(round(value))}")
        else:
            lines.append(f"{name} = {value:.9g}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_weightmap_json(path, weight_map) -> None:
    import json

    payload = {
        "k": weight_map.k,
        "dimensions": [
            {
                "name": spec.name,
                "lo": spec.lo,
                "step": spec.step,
                "count": spec.count,
                "weights": [float(v) for v in w],
            }
            for spec, w in zip(weight_map.space.specs, weight_map.weights)
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def export_weightmap_csvs(out_dir, dimensions) -> list[Path]:
    """One CSV per dimension: grid value, weight (6 decimals)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for dim in dimensions:
        path = out_dir / f"{dim['name']}.csv"
        lines = ["value,weight"]
        for k, w in enumerate(dim["weights"]):
            value = dim["lo"] + k * dim["step"]
            lines.append(f"{value:.6f},{w:.6f}")
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


def read_weightmap_csv(path) -> np.ndarray:
    """Return (value, weight) pairs as a 2-column array."""
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
