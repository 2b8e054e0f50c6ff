"""Post-hoc analysis metrics: Pearson correlation and reference-based PSNR."""

from __future__ import annotations

import math

import numpy as np

from .errors import CrowtuneError


class UndefinedCorrelationError(CrowtuneError, ValueError):
    """Pearson correlation of a constant series is undefined."""


def pearson(x, y) -> float:
    """Pearson correlation coefficient of two equal-length series."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.ndim != 1 or xa.shape != ya.shape or xa.size < 2:
        raise ValueError(f"need two equal-length 1D series of length >= 2, got {xa.shape} and {ya.shape}")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sx = math.sqrt(float(np.sum(dx * dx)))
    sy = math.sqrt(float(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("correlation is undefined for a constant series")
    return float(np.sum(dx * dy)) / (sx * sy)


def psnr(image, reference, data_range: float) -> float:
    """Peak signal-to-noise ratio in decibels; identical inputs give +inf."""
    img = np.asarray(image, dtype=float)
    ref = np.asarray(reference, dtype=float)
    if img.shape != ref.shape:
        raise ValueError(f"shape mismatch: {img.shape} vs {ref.shape}")
    if data_range <= 0:
        raise ValueError(f"data_range must be positive, got {data_range}")
    mse = float(np.mean((img - ref) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(data_range**2 / mse)
