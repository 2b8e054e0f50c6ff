"""2D parallel-beam tomography: projector pair, SART, and the tunable algorithms.

The projector is pixel-driven ray marching: each ray samples the bilinearly
interpolated image at half-pixel steps and scales by the step length.  The
sampling weights are assembled once per geometry into sparse per-angle
matrices, so back projection is the exact transpose of forward projection
and repeated reconstructions amortize the setup cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateImageError

RAY_STEP = 0.5  # ray-march sampling interval, in pixel units
TV_SMOOTH = 1e-8  # smoothing constant inside the TV square root


@dataclass(frozen=True)
class Geometry:
    """Square n x n image, unit pixels, unit detector spacing."""

    n: int
    n_detectors: int
    angles: tuple[float, ...]

    def __post_init__(self):
        if len(self.angles) < 1:
            raise ValueError("need at least one projection angle")
        if self.n_detectors < self.n:
            raise ValueError(f"detector row ({self.n_detectors}) must cover the image width ({self.n})")

    @property
    def n_angles(self) -> int:
        return len(self.angles)

    @classmethod
    def equal_spaced(cls, n: int, n_angles: int, n_detectors: int) -> "Geometry":
        """Angles equally spaced over [0, pi)."""
        angles = tuple(math.pi * k / n_angles for k in range(n_angles))
        return cls(n=n, n_detectors=n_detectors, angles=angles)


class _Projector:
    """Per-angle sparse system matrices plus the SART normalizers."""

    def __init__(self, geometry: Geometry):
        n = geometry.n
        n_det = geometry.n_detectors
        t_max = n * math.sqrt(2.0) / 2.0 + 1.0
        n_t = int(2.0 * t_max / RAY_STEP) + 1
        t = -t_max + RAY_STEP * np.arange(n_t)
        s = (np.arange(n_det) - (n_det - 1) / 2.0) * 1.0
        half = (n - 1) / 2.0

        self.geometry = geometry
        self.blocks: list[sp.csr_matrix] = []
        for theta in geometry.angles:
            ux, uy = math.cos(theta), math.sin(theta)
            # ray direction is perpendicular to the detector axis (ux, uy)
            px = s[:, None] * ux + t[None, :] * (-uy)
            py = s[:, None] * uy + t[None, :] * ux
            col = px + half
            row = py + half
            i0 = np.floor(row).astype(np.int64)
            j0 = np.floor(col).astype(np.int64)
            fr = row - i0
            fc = col - j0
            det_idx = np.broadcast_to(np.arange(n_det)[:, None], i0.shape)

            rows, cols, data = [], [], []
            for di, dj, w in (
                (0, 0, (1 - fr) * (1 - fc)),
                (0, 1, (1 - fr) * fc),
                (1, 0, fr * (1 - fc)),
                (1, 1, fr * fc),
            ):
                ii = i0 + di
                jj = j0 + dj
                ok = (ii >= 0) & (ii < n) & (jj >= 0) & (jj < n) & (w > 0)
                rows.append(det_idx[ok])
                cols.append(ii[ok] * n + jj[ok])
                data.append(RAY_STEP * w[ok])
            block = sp.coo_matrix(
                (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                shape=(n_det, n * n),
            ).tocsr()
            self.blocks.append(block)

        self.full = sp.vstack(self.blocks, format="csr")
        ones_img = np.ones(n * n)
        ones_det = np.ones(n_det)
        self.row_sums = [b @ ones_img for b in self.blocks]
        self.col_sums = [b.T @ ones_det for b in self.blocks]


@lru_cache(maxsize=8)
def _projector(geometry: Geometry) -> _Projector:
    return _Projector(geometry)


def forward_project(image: np.ndarray, geometry: Geometry) -> np.ndarray:
    """Line integrals of the image for every (angle, detector) ray."""
    p = _projector(geometry)
    _check_image(image, geometry)
    return (p.full @ np.asarray(image, dtype=float).ravel()).reshape(geometry.n_angles, geometry.n_detectors)


def back_project(sinogram: np.ndarray, geometry: Geometry) -> np.ndarray:
    """Exact adjoint of forward_project (transposed interpolation weights)."""
    p = _projector(geometry)
    sino = np.asarray(sinogram, dtype=float)
    if sino.shape != (geometry.n_angles, geometry.n_detectors):
        raise ValueError(f"sinogram shape {sino.shape} does not match geometry")
    return (p.full.T @ sino.ravel()).reshape(geometry.n, geometry.n)


def _check_image(image: np.ndarray, geometry: Geometry) -> None:
    if np.shape(image) != (geometry.n, geometry.n):
        raise ValueError(f"image shape {np.shape(image)} does not match geometry n={geometry.n}")


def sart_sweep(image: np.ndarray, sinogram: np.ndarray, geometry: Geometry, relaxation: float) -> np.ndarray:
    """One full SART pass over all angles, with nonnegativity after the pass.

    Rays with zero footprint and pixels with zero column sum contribute no
    update.
    """
    p = _projector(geometry)
    _check_image(image, geometry)
    x = np.asarray(image, dtype=float).ravel().copy()
    sino = np.asarray(sinogram, dtype=float)
    for a in range(geometry.n_angles):
        block = p.blocks[a]
        resid = sino[a] - block @ x
        rs = p.row_sums[a]
        resid = np.divide(resid, rs, out=np.zeros_like(resid), where=rs > 0)
        upd = block.T @ resid
        cs = p.col_sums[a]
        upd = np.divide(upd, cs, out=np.zeros_like(upd), where=cs > 0)
        x += relaxation * upd
    return np.clip(x, 0.0, None).reshape(geometry.n, geometry.n)


def _forward_diffs(image: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dx = np.zeros_like(image)
    dy = np.zeros_like(image)
    dx[:-1, :] = image[1:, :] - image[:-1, :]
    dy[:, :-1] = image[:, 1:] - image[:, :-1]
    return dx, dy


def tv_norm(image: np.ndarray) -> float:
    """Smoothed isotropic total variation with forward differences."""
    dx, dy = _forward_diffs(np.asarray(image, dtype=float))
    return float(np.sqrt(dx * dx + dy * dy + TV_SMOOTH**2).sum())


def tv_gradient(image: np.ndarray) -> np.ndarray:
    """Analytic gradient of tv_norm."""
    img = np.asarray(image, dtype=float)
    dx, dy = _forward_diffs(img)
    s = np.sqrt(dx * dx + dy * dy + TV_SMOOTH**2)
    a = dx / s
    b = dy / s
    g = -(a + b)
    g[1:, :] += a[:-1, :]
    g[:, 1:] += b[:, :-1]
    return g


def awtv_norm(image: np.ndarray, delta: float) -> float:
    """Adaptive-weighted TV: difference terms damped by exp(-(diff/delta)^2)."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    dx, dy = _forward_diffs(np.asarray(image, dtype=float))
    wx = np.exp(-((dx / delta) ** 2))
    wy = np.exp(-((dy / delta) ** 2))
    return float(np.sqrt(wx * dx * dx + wy * dy * dy + TV_SMOOTH**2).sum())


def awtv_gradient(image: np.ndarray, delta: float) -> np.ndarray:
    """Analytic gradient of awtv_norm (weights differentiated through)."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    img = np.asarray(image, dtype=float)
    dx, dy = _forward_diffs(img)
    wx = np.exp(-((dx / delta) ** 2))
    wy = np.exp(-((dy / delta) ** 2))
    s = np.sqrt(wx * dx * dx + wy * dy * dy + TV_SMOOTH**2)
    a = wx * dx * (1.0 - (dx / delta) ** 2) / s
    b = wy * dy * (1.0 - (dy / delta) ** 2) / s
    g = -(a + b)
    g[1:, :] += a[:-1, :]
    g[:, 1:] += b[:, :-1]
    return g


# Parameter subsets each algorithm consumes (names match the search-space presets).
ASD_POCS_FIELDS = ("max_iter", "tv_iter", "epsilon", "alpha", "alpha_red", "lambda", "lambda_red", "r_max")
AWPCSD_FIELDS = ("max_iter", "tv_iter", "epsilon", "lambda", "lambda_red", "delta")
PICCS_FIELDS = ASD_POCS_FIELDS

_FIELD_ATTR = {
    "max_iter": "max_iter",
    "tv_iter": "tv_iter",
    "epsilon": "epsilon",
    "alpha": "alpha",
    "alpha_red": "alpha_red",
    "lambda": "lam",
    "lambda_red": "lambda_red",
    "r_max": "r_max",
    "delta": "delta",
}


@dataclass(frozen=True)
class ReconParams:
    """Hyperparameters for the iterative algorithms; unused fields stay None."""

    max_iter: int | None = None
    tv_iter: int | None = None
    epsilon: float | None = None
    alpha: float | None = None
    alpha_red: float | None = None
    lam: float | None = None
    lambda_red: float | None = None
    r_max: float | None = None
    delta: float | None = None

    @classmethod
    def from_mapping(cls, algorithm: str, mapping: dict[str, float]) -> "ReconParams":
        """Build params for one algorithm from a name -> value mapping."""
        fields = required_fields(algorithm)
        missing = [f for f in fields if f not in mapping]
        if missing:
            raise ValueError(f"{algorithm}: missing parameter(s) {', '.join(missing)}")
        unknown = [k for k in mapping if k not in fields]
        if unknown:
            raise ValueError(f"{algorithm}: unknown parameter(s) {', '.join(unknown)}")
        kwargs = {_FIELD_ATTR[f]: mapping[f] for f in fields}
        for key in ("max_iter", "tv_iter"):
            if key in kwargs:
                kwargs[key] = int(round(kwargs[key]))
        return cls(**kwargs)

    def require(self, fields: tuple[str, ...], algorithm: str) -> None:
        missing = [f for f in fields if getattr(self, _FIELD_ATTR[f]) is None]
        if missing:
            raise ValueError(f"{algorithm}: missing parameter(s) {', '.join(missing)}")


def required_fields(algorithm: str) -> tuple[str, ...]:
    key = algorithm.lower().replace("_", "-")
    if key in ("asd-pocs", "piccs"):
        return ASD_POCS_FIELDS
    if key == "awpcsd":
        return AWPCSD_FIELDS
    raise ValueError(f"unknown reconstruction algorithm {algorithm!r}")


def _ratio(dg: float, dp: float) -> float:
    if dp > 0:
        return dg / dp
    return 0.0 if dg == 0 else math.inf


def _constrained_tv_loop(sinogram, geometry, params: ReconParams, grad_fn,
                         x0: np.ndarray | None = None,
                         trace: list | None = None) -> np.ndarray:
    """Shared outer loop: SART data steps alternating with TV descent.

    The TV step size is alpha times the SART update magnitude; alpha shrinks
    when TV motion dominates (dg/dp > r_max) while the data residual is
    already within epsilon, and the loop exits early once both the residual
    and the motion ratio are inside their tolerances.  When given, ``trace``
    collects one diagnostics dict per outer iteration.
    """
    sino = np.asarray(sinogram, dtype=float)
    x = np.zeros((geometry.n, geometry.n)) if x0 is None else np.asarray(x0, dtype=float).copy()
    relaxation = float(params.lam)
    alpha = float(params.alpha)
    for _ in range(int(params.max_iter)):
        x_prev = x
        x = sart_sweep(x, sino, geometry, relaxation)
        relaxation *= params.lambda_red
        if not np.isfinite(x).all():
            raise DegenerateImageError("reconstruction produced non-finite values")
        dd = float(np.linalg.norm(forward_project(x, geometry) - sino))
        dp = float(np.linalg.norm(x - x_prev))
        x_pre_tv = x
        dtvg = alpha * dp
        for _ in range(int(params.tv_iter)):
            g = grad_fn(x)
            gn = float(np.linalg.norm(g))
            if gn == 0.0:
                break
            x = x - dtvg * g / gn
        x = np.clip(x, 0.0, None)
        if not np.isfinite(x).all():
            raise DegenerateImageError("reconstruction produced non-finite values")
        dg = float(np.linalg.norm(x - x_pre_tv))
        ratio = _ratio(dg, dp)
        if trace is not None:
            trace.append({"dd": dd, "dp": dp, "dg": dg, "alpha": alpha})
        if ratio > params.r_max and dd <= params.epsilon:
            alpha *= params.alpha_red
        if dd <= params.epsilon and ratio <= params.r_max:
            break
    return x


def asd_pocs(sinogram: np.ndarray, geometry: Geometry, params: ReconParams,
             trace: list | None = None) -> np.ndarray:
    """TV-constrained reconstruction alternating SART and steepest-descent TV."""
    params.require(ASD_POCS_FIELDS, "asd-pocs")
    return _constrained_tv_loop(sinogram, geometry, params, tv_gradient, trace=trace)


def piccs(sinogram: np.ndarray, geometry: Geometry, prior: np.ndarray,
          params: ReconParams, rho: float = 0.5,
          x0: np.ndarray | None = None) -> np.ndarray:
    """Prior-constrained variant: descends rho*TV(x - prior) + (1-rho)*TV(x).

    ``x0`` optionally seeds the loop (e.g. at the prior itself); the default
    start is the zero image, as for asd_pocs.
    """
    params.require(PICCS_FIELDS, "piccs")
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    prior = np.asarray(prior, dtype=float)
    _check_image(prior, geometry)

    def grad(x):
        return rho * tv_gradient(x - prior) + (1.0 - rho) * tv_gradient(x)

    return _constrained_tv_loop(sinogram, geometry, params, grad, x0=x0)


# AwPCSD's TV step scale relative to the SART update magnitude.  The
# adaptive scheme replaces asd_pocs's tunable alpha with this fixed fraction
# plus the residual-gated halving below.
AWPCSD_STEP_FRACTION = 0.1


def awpcsd(sinogram: np.ndarray, geometry: Geometry, params: ReconParams,
           trace: list | None = None) -> np.ndarray:
    """Adaptive-weighted variant with a projection-controlled TV step size.

    Each outer iteration sets the TV step from the SART update magnitude; a
    step is rejected, and the step size halved, whenever it pushes the data
    residual beyond epsilon without at least reducing it.  All max_iter
    iterations run (no early exit; there is no r_max here).
    """
    params.require(AWPCSD_FIELDS, "awpcsd")
    sino = np.asarray(sinogram, dtype=float)
    x = np.zeros((geometry.n, geometry.n))
    relaxation = float(params.lam)
    delta = float(params.delta)
    epsilon = float(params.epsilon)
    for _ in range(int(params.max_iter)):
        x_prev = x
        x = sart_sweep(x, sino, geometry, relaxation)
        relaxation *= params.lambda_red
        if not np.isfinite(x).all():
            raise DegenerateImageError("reconstruction produced non-finite values")
        resid = float(np.linalg.norm(forward_project(x, geometry) - sino))
        dp = float(np.linalg.norm(x - x_prev))
        dtvg = AWPCSD_STEP_FRACTION * dp
        if trace is not None:
            trace.append({"dd": resid, "dp": dp, "dtvg": dtvg})
        for _ in range(int(params.tv_iter)):
            g = awtv_gradient(x, delta)
            gn = float(np.linalg.norm(g))
            if gn == 0.0:
                break
            x_try = x - dtvg * g / gn
            r_try = float(np.linalg.norm(forward_project(x_try, geometry) - sino))
            if r_try > epsilon and r_try > resid:
                dtvg *= 0.5
            else:
                x = x_try
                resid = r_try
        x = np.clip(x, 0.0, None)
        if not np.isfinite(x).all():
            raise DegenerateImageError("reconstruction produced non-finite values")
    return x


def reconstruct(algorithm: str, sinogram: np.ndarray, geometry: Geometry,
                params: ReconParams, prior: np.ndarray | None = None,
                rho: float = 0.5) -> np.ndarray:
    """Dispatch to one of the three algorithms by name."""
    key = algorithm.lower().replace("_", "-")
    if key == "asd-pocs":
        return asd_pocs(sinogram, geometry, params)
    if key == "awpcsd":
        return awpcsd(sinogram, geometry, params)
    if key == "piccs":
        if prior is None:
            raise ValueError("piccs requires a prior image")
        return piccs(sinogram, geometry, prior, params, rho)
    raise ValueError(f"unknown reconstruction algorithm {algorithm!r}")
