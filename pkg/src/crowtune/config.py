"""Flat key = value run configuration files.

Lines hold `key = value` with `#` comments; dotted prefixes group related
keys (e.g. ``optimizer.population``).  Unknown keys are rejected so typos
surface as config errors with a line diagnostic instead of silently using a
default.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .fitness import FitnessConfig
from .optimizer import OptimizerConfig
from .phantoms import KINDS, NoiseModel, PhantomSpec
from .space import ParameterSpace, ParameterSpec, preset_space


def parse_kv_file(path) -> dict[str, tuple[str, int]]:
    """Parse a flat key = value file into {key: (value, line_number)}."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    out: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(p.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{p}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{p}:{lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"{p}:{lineno}: duplicate key {key!r} (first on line {out[key][1]})")
        out[key] = (value, lineno)
    return out


class _Reader:
    """Typed access to parsed keys with file:line:field diagnostics."""

    def __init__(self, path, entries: dict[str, tuple[str, int]]):
        self.path = path
        self.entries = entries
        self.seen: set[str] = set()

    def _fail(self, key: str, message: str):
        line = self.entries[key][1] if key in self.entries else "?"
        raise ConfigError(f"{self.path}:{line}: {key}: {message}")

    def raw(self, key: str, default=None):
        self.seen.add(key)
        if key not in self.entries:
            return default
        return self.entries[key][0]

    def string(self, key: str, default=None, choices=None) -> str:
        value = self.raw(key, default)
        if value is None:
            self._fail(key, "required key is missing")
        if choices is not None and value not in choices:
            self._fail(key, f"expected one of {sorted(choices)}, got {value!r}")
        return value

    def integer(self, key: str, default=None) -> int:
        value = self.raw(key, default)
        if value is None:
            self._fail(key, "required key is missing")
        try:
            return int(str(value))
        except ValueError:
            self._fail(key, f"invalid integer {value!r}")

    def number(self, key: str, default=None) -> float:
        value = self.raw(key, default)
        if value is None:
            self._fail(key, "required key is missing")
        try:
            return float(str(value))
        except ValueError:
            self._fail(key, f"invalid number {value!r}")

    def boolean(self, key: str, default: bool) -> bool:
        value = self.raw(key, None)
        if value is None:
            return default
        low = str(value).lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        self._fail(key, f"invalid boolean {value!r}")

    def reject_unknown(self) -> None:
        for key in self.entries:
            if key not in self.seen:
                line = self.entries[key][1]
                raise ConfigError(f"{self.path}:{line}: {key}: unknown configuration key")


@dataclass
class RunConfig:
    experiment: str
    output_dir: Path
    phantom: PhantomSpec
    n_angles: int
    n_detectors: int
    keep_fraction: float
    recon_algorithm: str
    rho: float
    space: ParameterSpace
    fitness: FitnessConfig
    optimizer: OptimizerConfig
    opt_algorithm: str
    init_scheme: str
    seed: int


def _custom_space(reader: _Reader) -> ParameterSpace | None:
    rows = [(key, *reader.entries[key]) for key in reader.entries if key.startswith("space.custom.")]
    if not rows:
        return None
    rows.sort(key=lambda r: r[2])  # file order defines dimension order
    specs = []
    for key, value, lineno in rows:
        reader.seen.add(key)
        parts = [p.strip() for p in value.replace(",", " ").split()]
        if len(parts) != 3:
            raise ConfigError(f"{reader.path}:{lineno}: {key}: expected 'min, max, step'")
        try:
            lo, hi, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"{reader.path}:{lineno}: {key}: invalid numbers {value!r}")
        specs.append(ParameterSpec(key.removeprefix("space.custom."), lo, hi, step))
    return ParameterSpace(tuple(specs))


def load_run_config(path) -> RunConfig:
    entries = parse_kv_file(path)
    r = _Reader(path, entries)

    experiment = r.string("experiment", "run")
    seed = r.integer("seed", 0)
    output_dir = Path(r.string("output_dir", f"runs/{experiment}"))
    init_scheme = r.string("init", "cdlu", choices=("random", "lhs", "dlu", "cdlu"))

    kind = r.string("phantom.kind", "shepp_logan", choices=KINDS)
    size = r.integer("phantom.size", 64)
    noise_kind = r.string("phantom.noise", "none", choices=("none", "gaussian", "poisson"))
    if noise_kind == "gaussian":
        noise = NoiseModel("gaussian", sigma=r.number("phantom.noise_sigma"))
    elif noise_kind == "poisson":
        noise = NoiseModel("poisson", i0=r.number("phantom.noise_i0"))
    else:
        noise = NoiseModel()
    intensity_raw = r.raw("phantom.intensity", None)
    try:
        phantom = PhantomSpec(
            kind=kind,
            n=size,
            intensity=float(intensity_raw) if intensity_raw is not None else None,
            noise=noise,
            seed=r.integer("phantom.seed", 0),
            insert=r.boolean("phantom.insert", True),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: phantom: {exc}")

    n_angles = r.integer("geometry.n_angles", 30)
    n_detectors = r.integer("geometry.n_detectors", size + size // 2)
    keep_fraction = r.number("geometry.keep_fraction", 1.0)

    recon_algorithm = r.string("recon.algorithm", "asd-pocs", choices=("asd-pocs", "awpcsd", "piccs"))
    rho = r.number("recon.rho", 0.5)

    space = _custom_space(r)
    preset = r.raw("space.preset", None)
    if space is None:
        space = preset_space(preset if preset is not None else recon_algorithm)
    elif preset is not None:
        raise ConfigError(f"{path}: space.preset: cannot combine a preset with space.custom.* rows")

    try:
        fit = FitnessConfig(
            eta=r.number("fitness.eta", 1.0),
            xi=r.number("fitness.xi", 4.0),
            gamma=r.number("fitness.gamma", 0.25),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: fitness: {exc}")

    opt_algorithm = r.string("optimizer.algorithm", "ssa-csa", choices=("csa", "ssa-csa"))
    iterations = r.integer("optimizer.iterations", 30)
    ap_inc_raw = r.raw("optimizer.ap_inc", None)
    try:
        opt = OptimizerConfig(
            population=r.integer("optimizer.population", 25),
            iterations=iterations,
            flight_length=r.number("optimizer.flight_length", 2.0),
            ap0=r.number("optimizer.ap0", 0.3),
            ap_inc=float(ap_inc_raw) if ap_inc_raw is not None else None,
            kappa0=r.number("optimizer.kappa0", 0.4),
            omega_inc=r.number("optimizer.omega_inc", 1.05),
            k0=r.number("optimizer.k0", 1.0),
            weight_floor=r.number("optimizer.weight_floor", 1.0),
            neighborhood=r.number("optimizer.neighborhood", 0.10),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: optimizer: {exc}")

    r.reject_unknown()
    cfg = RunConfig(
        experiment=experiment,
        output_dir=output_dir,
        phantom=phantom,
        n_angles=n_angles,
        n_detectors=n_detectors,
        keep_fraction=keep_fraction,
        recon_algorithm=recon_algorithm,
        rho=rho,
        space=space,
        fitness=fit,
        optimizer=opt,
        opt_algorithm=opt_algorithm,
        init_scheme=init_scheme,
        seed=seed,
    )
    if not 0.0 < keep_fraction <= 1.0:
        raise ConfigError(f"{path}: geometry.keep_fraction: must lie in (0, 1]")
    if n_detectors < size:
        raise ConfigError(f"{path}: geometry.n_detectors: must be >= phantom.size ({size})")
    if not 0.0 <= rho <= 1.0:
        raise ConfigError(f"{path}: recon.rho: must lie in [0, 1]")
    return cfg
