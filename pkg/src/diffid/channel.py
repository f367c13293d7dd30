"""Closed-form 1D diffusion channel with Poisson reception.

A point source at the origin releases molecules into a 1D medium with
diffusion coefficient D; a receiver sits at L_R.  The concentration follows
the two-term image solution of the free diffusion equation, the probability
that a molecule has been captured by the receiver by time t is

    lam_tilde(t) = erfc(L_R / sqrt(4 D t)),

and the received count for a release of x molecules is Poisson with mean
x * lam_tilde.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc


@dataclass(frozen=True)
class ChannelParams:
    """Physical channel constants.

    diffusion_coeff  D, m^2/s
    receiver_pos     L_R, m
    peak_amplitude   A, maximum molecules released per slot
    slot_time        sampling time at which the absorbing probability is
                     evaluated, s
    sender_pos       fixed at the origin
    """

    diffusion_coeff: float
    receiver_pos: float
    peak_amplitude: float
    slot_time: float
    sender_pos: float = 0.0

    def __post_init__(self):
        if self.diffusion_coeff <= 0:
            raise ValueError(f"diffusion_coeff must be > 0, got {self.diffusion_coeff}")
        if self.receiver_pos <= 0:
            raise ValueError(f"receiver_pos must be > 0, got {self.receiver_pos}")
        if self.peak_amplitude <= 0:
            raise ValueError(f"peak_amplitude must be > 0, got {self.peak_amplitude}")
        if self.slot_time <= 0:
            raise ValueError(f"slot_time must be > 0, got {self.slot_time}")
        if self.sender_pos != 0.0:
            raise ValueError("sender_pos is fixed at 0")


@dataclass(frozen=True)
class AbsorbProb:
    """Absorbing probability lam_tilde, a number in [0, 1]."""

    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"absorbing probability must lie in [0, 1], got {self.value}")

    def __float__(self):
        return self.value


def concentration(l, t: float, p: ChannelParams):
    """Concentration profile rho(l, t), units 1/m, for a unit release at l=0.

    Two-term solution: source Gaussian plus its image about the receiver
    plane at 2*L_R.  Accepts a scalar or array of positions l.  Singular at
    t = 0 (the initial condition is a Dirac delta), so t must be positive.
    """
    if t <= 0:
        raise ValueError(f"concentration requires t > 0, got t={t}")
    l = np.asarray(l, dtype=float)
    four_dt = 4.0 * p.diffusion_coeff * t
    norm = 1.0 / math.sqrt(math.pi * four_dt)
    rho = norm * (np.exp(-(l**2) / four_dt)
                  + np.exp(-((l - 2.0 * p.receiver_pos) ** 2) / four_dt))
    return rho if rho.ndim else float(rho)


def absorb_prob(t: float, p: ChannelParams) -> AbsorbProb:
    """Probability that a molecule released at t=0 has been absorbed by time t."""
    if t <= 0:
        raise ValueError(f"absorb_prob requires t > 0, got t={t}")
    return AbsorbProb(float(erfc(p.receiver_pos / math.sqrt(4.0 * p.diffusion_coeff * t))))


def peak_rate_time(p: ChannelParams) -> float:
    """Time at which the absorption rate peaks: L_R^2 / (6 D)."""
    return p.receiver_pos**2 / (6.0 * p.diffusion_coeff)


def _lam_value(lam) -> float:
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"absorbing probability must lie in [0, 1], got {lam}")
    return lam


def channel_pmf(y, x: float, lam, amplitude: float | None = None):
    """Poisson reception pmf  P(Y = y | x released) with mean x * lam_tilde.

    Evaluated in log space so large counts do not overflow.  `y` may be a
    scalar or array of nonnegative integers.  If `amplitude` is given, x is
    checked against the release constraint 0 <= x <= A.
    """
    lam = _lam_value(lam)
    if x < 0:
        raise ValueError(f"released molecules x must be >= 0, got {x}")
    if amplitude is not None and x > amplitude:
        raise ValueError(f"released molecules x={x} exceeds amplitude {amplitude}")
    y_arr = np.asarray(y)
    if np.any(y_arr < 0) or not np.issubdtype(y_arr.dtype, np.integer):
        raise ValueError("counts y must be nonnegative integers")
    mean = x * lam
    if mean == 0.0:
        pmf = np.where(y_arr == 0, 1.0, 0.0)
    else:
        from scipy.special import gammaln

        logpmf = y_arr * math.log(mean) - mean - gammaln(y_arr + 1.0)
        pmf = np.exp(logpmf)
    return pmf if pmf.ndim else float(pmf)


def sample_output(x: float, lam, rng: np.random.Generator, size=None,
                  amplitude: float | None = None):
    """Draw Poisson reception counts with mean x * lam_tilde.

    Identical generator state yields identical draws; callers own their
    generators, so independent trials can run in parallel.
    """
    lam = _lam_value(lam)
    if x < 0:
        raise ValueError(f"released molecules x must be >= 0, got {x}")
    if amplitude is not None and x > amplitude:
        raise ValueError(f"released molecules x={x} exceeds amplitude {amplitude}")
    out = rng.poisson(x * lam, size=size)
    return out if size is not None else int(out)
