"""Mantegna sampler for Lévy-stable step lengths, plus uniform headings."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BETA_MAX, BETA_MIN, TWO_PI, RngStream, SimParams, wrap_angle


class LevyParamError(ValueError):
    pass


@dataclass(frozen=True)
class LevyParams:
    beta: float = 1.0
    scale: float = 1.0
    step_cap: float = math.inf

    def __post_init__(self):
        _check_beta(self.beta)
        if not self.scale > 0:
            raise LevyParamError(f"scale must be > 0 (got {self.scale})")
        if not self.step_cap > 0:
            raise LevyParamError(f"step_cap must be > 0 (got {self.step_cap})")

    @classmethod
    def from_sim(cls, params: SimParams) -> "LevyParams":
        return cls(params.beta, params.levy_scale, params.step_cap)


def _check_beta(beta: float) -> None:
    if not BETA_MIN <= beta <= BETA_MAX:
        raise LevyParamError(f"beta must lie in [{BETA_MIN}, {BETA_MAX}] (got {beta})")


def mantegna_sigma(beta: float) -> float:
    """Standard deviation of the numerator Gaussian in Mantegna's algorithm.

    sigma_u = [G(1+b) sin(pi b/2) / (G((1+b)/2) b 2^((b-1)/2))]^(1/b)
    """
    _check_beta(beta)
    num = math.gamma(1.0 + beta) * math.sin(math.pi * beta / 2.0)
    den = math.gamma((1.0 + beta) / 2.0) * beta * 2.0 ** ((beta - 1.0) / 2.0)
    return (num / den) ** (1.0 / beta)


def step_from_normals(u: float, v: float, params: LevyParams) -> float:
    """Step length from one pair of Gaussian draws: min(scale |u / |v|^(1/b)|, cap)."""
    raw = u / abs(v) ** (1.0 / params.beta)
    step = min(params.scale * abs(raw), params.step_cap)
    if step <= 0.0:
        # u == 0 (or underflow); a zero-length step would never complete.
        step = math.ulp(0.0)
    return step


def draw_step(rng: RngStream, params: LevyParams, sigma_u: float | None = None) -> tuple[float, float]:
    """Draw ``(step_size, direction)``; direction is uniform on [0, 2*pi)."""
    if sigma_u is None:
        sigma_u = mantegna_sigma(params.beta)
    u = rng.normal(sigma_u)
    v = rng.normal()
    while v == 0.0:
        v = rng.normal()
    direction = wrap_angle(rng.random() * TWO_PI)
    return step_from_normals(u, v, params), direction


def sample_steps(generator: np.random.Generator, params: LevyParams, n: int) -> np.ndarray:
    """Vectorized bulk draw of ``n`` step lengths (no headings), for statistics."""
    sigma_u = mantegna_sigma(params.beta)
    u = generator.normal(0.0, sigma_u, n)
    v = generator.normal(0.0, 1.0, n)
    v[v == 0.0] = np.finfo(float).tiny
    steps = np.minimum(params.scale * np.abs(u / np.abs(v) ** (1.0 / params.beta)), params.step_cap)
    return np.maximum(steps, math.ulp(0.0))
