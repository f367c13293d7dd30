"""Distance-statistic decoder.

The receiver tests a single hypothesis u by the statistic

    d(y, u) = (1/n) * sum_t [ (y_t - lam_t)^2 - y_t ],   lam_t = lam_tilde_t * u_t,

whose expectation is zero under the true hypothesis because a Poisson
variable's variance equals its mean.  The decoding region accepts when
|d| <= delta_n with delta_n = a * c * (min_t lam_tilde_t)^2 * n^((b-1)/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import CodeParams


def threshold(params: CodeParams, lam_min) -> float:
    """Decoding threshold delta_n = a * c * lam_min^2 * n^((b-1)/2)."""
    lam_min = float(lam_min)
    return (params.radius_coeff * params.decode_coeff * lam_min**2
            * params.block_length ** ((params.radius_exp - 1.0) / 2.0))


@dataclass(frozen=True)
class DecoderConfig:
    """Per-slot absorbing probability (scalar or length-n vector) plus the
    acceptance threshold for a given code."""

    lam: float | np.ndarray
    delta: float
    params: CodeParams

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"threshold delta must be > 0, got {self.delta}")
        lam = np.asarray(self.lam, dtype=float)
        if lam.ndim > 1 or (lam.ndim == 1 and lam.size != self.params.block_length):
            raise ValueError("lam must be a scalar or a length-n vector")
        if np.any(lam < 0) or np.any(lam > 1):
            raise ValueError("absorbing probabilities must lie in [0, 1]")

    @property
    def lam_min(self) -> float:
        return float(np.min(self.lam))

    @property
    def lam_max(self) -> float:
        return float(np.max(self.lam))

    @classmethod
    def from_params(cls, params: CodeParams, lam) -> "DecoderConfig":
        """Build the config with the threshold the code's parameters imply."""
        lam_arr = np.asarray(lam, dtype=float) if np.ndim(lam) else float(lam)
        lam_min = float(np.min(lam_arr))
        return cls(lam=lam_arr, delta=threshold(params, lam_min), params=params)


def distance_stat(y, u, lam) -> float:
    """d(y, u) for counts y and an amplitude-scaled codeword u.

    `lam` is the scalar or per-slot absorbing probability; the per-slot
    Poisson mean is lam_t * u_t.
    """
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    if y.shape != u.shape or y.ndim != 1 or y.size == 0:
        raise ValueError(f"y and u must be equal-length vectors, got {y.shape} vs {u.shape}")
    mean = np.asarray(lam, dtype=float) * u
    # np.sum accumulates pairwise, keeping the statistic exact far below
    # any usable threshold at these block lengths
    return float(np.sum((y - mean) ** 2 - y) / y.size)


def is_in_region(y, u, cfg: DecoderConfig) -> bool:
    """Membership in the decoding region: |d(y, u)| <= delta_n (two-sided)."""
    return abs(distance_stat(y, u, cfg.lam)) <= cfg.delta
