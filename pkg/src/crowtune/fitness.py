"""No-reference image quality objectives and the combined minimization fitness.

The score trades off noise (mean/std SNR per slice) against sharpness
(high-frequency energy ratio of the centered power spectrum).  Both terms
are reference-free, so candidate reconstructions can be ranked without a
ground-truth image:

    fitness = eta * (1 / SNR) + xi * (1 - HFER)       (lower is better)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateImageError


@dataclass(frozen=True)
class FitnessConfig:
    """Weights for the combined objective and the HFER cutoff ratio."""

    eta: float = 1.0
    xi: float = 4.0
    gamma: float = 0.25

    def __post_init__(self):
        if self.eta < 0 or self.xi < 0 or self.eta + self.xi <= 0:
            raise ValueError(f"weights must be nonnegative with eta + xi > 0, got ({self.eta}, {self.xi})")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")


@dataclass(frozen=True)
class FitnessReport:
    """All metrics for one evaluated volume plus the scalar fitness."""

    snr: float
    hfer: float
    laplacian_var: float
    fitness: float
    objective_vector: tuple[float, float]  # (1/snr, 1 - hfer)


def _as_stack(volume) -> np.ndarray:
    """Normalize input to a (K, h, w) stack; a single 2D slice becomes K=1."""
    arr = np.asarray(volume, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValueError(f"expected a 2D slice or a 3D slice stack, got shape {arr.shape}")
    return arr


def snr(volume) -> float:
    """Mean over slices of mean/std (population standard deviation)."""
    stack = _as_stack(volume)
    out = 0.0
    for k, sl in enumerate(stack):
        if sl.size < 2:
            raise ValueError("slices need at least 2 pixels")
        sd = sl.std()
        if sd == 0.0:
            raise DegenerateImageError(f"slice {k} has zero variance")
        out += sl.mean() / sd
    return out / len(stack)


def power_spectrum(slice2d: np.ndarray) -> np.ndarray:
    """Squared modulus of the 2D DFT with the frequency origin centered."""
    sl = np.asarray(slice2d, dtype=float)
    if sl.ndim != 2 or min(sl.shape) < 2:
        raise ValueError(f"expected a slice of at least 2x2, got shape {sl.shape}")
    return np.fft.fftshift(np.abs(np.fft.fft2(sl)) ** 2)


def _radial_frequency(shape: tuple[int, int]) -> tuple[np.ndarray, float]:
    """Centered integer radial bin distances and the grid's maximum radius."""
    n, m = shape
    u = np.arange(n) - n // 2
    v = np.arange(m) - m // 2
    q = np.sqrt(u[:, None] ** 2 + v[None, :] ** 2)
    q_max = np.sqrt((n // 2) ** 2 + (m // 2) ** 2)
    return q, q_max


def hfer(volume, gamma: float) -> float:
    """Mean over slices of the power fraction strictly beyond gamma * Q_max."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    stack = _as_stack(volume)
    q, q_max = _radial_frequency(stack.shape[1:])
    cutoff = gamma * q_max
    out = 0.0
    for k, sl in enumerate(stack):
        p = power_spectrum(sl)
        total = p.sum()
        if total == 0.0:
            raise DegenerateImageError(f"slice {k} has zero spectral energy")
        out += p[q > cutoff].sum() / total
    return out / len(stack)


def laplacian_variance(volume) -> float:
    """Variance of 4-neighbor Laplacian responses, pooled over all slices.

    Only interior pixels respond, so slices must be at least 3x3.
    """
    stack = _as_stack(volume)
    if min(stack.shape[1:]) < 3:
        raise ValueError("slices need at least 3x3 pixels for the Laplacian")
    responses = []
    for sl in stack:
        r = (-4.0 * sl[1:-1, 1:-1] + sl[:-2, 1:-1] + sl[2:, 1:-1]
             + sl[1:-1, :-2] + sl[1:-1, 2:])
        responses.append(r.ravel())
    return float(np.var(np.concatenate(responses)))


def evaluate(volume, config: FitnessConfig = FitnessConfig()) -> FitnessReport:
    """Compute all metrics and the scalar minimization fitness for one volume."""
    s = snr(volume)
    h = hfer(volume, config.gamma)
    lap = laplacian_variance(volume)
    inv_snr = 1.0 / s
    deficit = 1.0 - h
    return FitnessReport(
        snr=s,
        hfer=h,
        laplacian_var=lap,
        fitness=config.eta * inv_snr + config.xi * deficit,
        objective_vector=(inv_snr, deficit),
    )
