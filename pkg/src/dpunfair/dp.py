"""Laplace mechanism, noise bookkeeping and error metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF = math.inf
#: Floor of the relative-error denominator, avoids dividing by an exact 0.
REL_FLOOR = math.exp(-100)


def make_rng(seed: int | None) -> np.random.Generator:
    """One PCG64 stream per measure invocation."""
    return np.random.default_rng(seed)


def check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0 (or inf), got {epsilon}")
    return epsilon


@dataclass(frozen=True)
class NoiseSpec:
    sensitivity: float
    epsilon: float
    seed: int | None = None

    def __post_init__(self):
        if not self.sensitivity > 0:
            raise ValueError(f"sensitivity must be > 0, got {self.sensitivity}")
        check_epsilon(self.epsilon)

    @property
    def scale(self) -> float:
        if math.isinf(self.epsilon):
            return 0.0
        return self.sensitivity / self.epsilon


def _open_uniform(rng: np.random.Generator, size):
    # u in (-1/2, 1/2): the endpoint -1/2 would give log(0)
    r = rng.random(size)
    if size is None:
        while r == 0.0:
            r = rng.random()
    else:
        zero = r == 0.0
        while zero.any():
            r[zero] = rng.random(int(zero.sum()))
            zero = r == 0.0
    return r - 0.5


def laplace_sample(scale: float, rng: np.random.Generator, size=None):
    """Zero-mean Laplace variate(s) by inverse CDF.

    ``u ~ U(-1/2, 1/2)``, ``x = -scale * sign(u) * ln(1 - 2|u|)``.  A scale of
    0 returns 0 without consuming randomness.
    """
    if scale < 0:
        raise ValueError("scale must be >= 0")
    if scale == 0:
        return 0.0 if size is None else np.zeros(size)
    u = _open_uniform(rng, size)
    x = -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))
    return float(x) if size is None else x


def laplace_cdf(x, scale: float = 1.0):
    x = np.asarray(x, dtype=float) / scale
    return np.where(x < 0, 0.5 * np.exp(x), 1.0 - 0.5 * np.exp(-x))


def add_noise(value: float, spec: NoiseSpec, rng: np.random.Generator) -> float:
    return float(value) + laplace_sample(spec.scale, rng)


def relative_l1(noisy: float, exact: float) -> float:
    return abs(noisy - exact) / max(exact, REL_FLOOR)
