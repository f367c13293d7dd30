"""Identification codebooks by sphere-packing rejection sampling.

Codewords are binary on-off-keying vectors; the transmitted value per slot
is bit * A.  A codeword is accepted when its amplitude-scaled Euclidean
distance to every previously accepted codeword is at least 2*r0 with
r0 = sqrt(a) * n^((1+b)/4), which for OOK vectors is exactly a minimum
Hamming distance of ceil((2*r0/A)^2).

Also evaluates the closed-form counting and error-bound expressions that
accompany the construction: the saturated-packing lower bound on the number
of codewords, and the Chebyshev-style Type I / Type II error bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

#: rejection-sampling draw budget per codeword slot
DEFAULT_ATTEMPTS_PER_WORD = 10_000

#: guards floor/ceil against one-ulp undershoot where the exact value is an
#: integer (e.g. n=10, R=0.1 gives exactly 10 codewords)
_INT_EPS = 1e-9


class CodebookError(RuntimeError):
    """Raised when a codebook cannot be constructed at all."""


@dataclass(frozen=True)
class CodeParams:
    """Construction and decoding constants.

    block_length  n, channel uses per message
    rate          rate on the super-exponential scale log(N) / (n log n)
    radius_coeff  a > 0
    radius_exp    b in [0, 1]
    decode_coeff  c in (0, 2)
    amplitude     A, molecules released for an ON slot
    """

    block_length: int
    rate: float
    radius_coeff: float
    radius_exp: float
    decode_coeff: float
    amplitude: float

    def __post_init__(self):
        if self.block_length < 2:
            raise ValueError(f"block_length must be >= 2, got {self.block_length}")
        if self.rate <= 0:
            raise ValueError(f"rate must be > 0, got {self.rate}")
        if self.radius_coeff <= 0:
            raise ValueError(f"radius_coeff a must be > 0, got {self.radius_coeff}")
        if not 0.0 <= self.radius_exp <= 1.0:
            raise ValueError(f"radius_exp b must lie in [0, 1], got {self.radius_exp}")
        if not 0.0 < self.decode_coeff < 2.0:
            raise ValueError(f"decode_coeff c must lie in (0, 2), got {self.decode_coeff}")
        if self.amplitude <= 0:
            raise ValueError(f"amplitude must be > 0, got {self.amplitude}")


def sphere_radius(n: int, a: float, b: float) -> float:
    """Packing-sphere radius sqrt(a) * n^((1+b)/4)."""
    return math.sqrt(a) * n ** ((1.0 + b) / 4.0)


def num_codewords(n: int, rate: float) -> int:
    """Target codebook size floor(2^(rate * n * log2 n)), but at least 2.

    An identification code needs two messages to identify anything, and
    flooring never overstates the rate.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    return max(2, int(math.floor(2.0 ** (rate * n * math.log2(n)) + _INT_EPS)))


def min_hamming(r0: float, amplitude: float) -> int:
    """Smallest Hamming distance compatible with scaled separation 2*r0.

    Scaled OOK words at Hamming distance h are A*sqrt(h) apart, so
    h >= (2*r0/A)^2.
    """
    if r0 <= 0 or amplitude <= 0:
        raise ValueError("r0 and amplitude must be positive")
    return int(math.ceil((2.0 * r0 / amplitude) ** 2 - _INT_EPS))


@dataclass
class Codebook:
    """Accepted OOK codewords plus the construction bookkeeping.

    `codewords` is a (achieved, n) uint8 array with entries in {0, 1}; the
    transmitted vector for word i is codewords[i] * A.  `achieved_size` may
    fall short of `target_size` when the draw budget saturates; that is a
    reportable outcome, not an error.
    """

    params: CodeParams
    codewords: np.ndarray
    r0: float
    target_size: int
    seed: int | None = None

    @property
    def achieved_size(self) -> int:
        return int(self.codewords.shape[0])

    @property
    def is_partial(self) -> bool:
        return self.achieved_size < self.target_size

    def scaled(self) -> np.ndarray:
        """Codewords scaled to physical release amplitudes."""
        return self.codewords.astype(float) * self.params.amplitude


def _pack_bits(word: np.ndarray) -> int:
    out = 0
    for bit in word:
        out = (out << 1) | int(bit)
    return out


def generate_codebook(params: CodeParams, rng, max_attempts_per_word: int = DEFAULT_ATTEMPTS_PER_WORD) -> Codebook:
    """Rejection-sample a codebook: draw uniform binary words, keep those at
    least 2*r0 (scaled) from everything already kept.

    `rng` is either an integer seed (recorded on the result so artifacts are
    reproducible) or a ready numpy Generator.  Stops at the target size or
    when `max_attempts_per_word` consecutive draws fail for one slot.
    """
    if max_attempts_per_word < 1:
        raise ValueError("max_attempts_per_word must be >= 1")
    seed = None
    if isinstance(rng, (int, np.integer)):
        seed = int(rng)
        rng = np.random.default_rng(seed)
    n = params.block_length
    r0 = sphere_radius(n, params.radius_coeff, params.radius_exp)
    target = num_codewords(n, params.rate)
    h_min = min_hamming(r0, params.amplitude)

    words: list[np.ndarray] = []
    packed: list[int] = []        # bit-packed words for fast Hamming tests (n <= 64)
    packed_arr = np.zeros(0, dtype=np.uint64)
    use_packed = n <= 64
    attempts = 0
    while len(words) < target:
        cand = rng.integers(0, 2, size=n, dtype=np.uint8)
        attempts += 1
        ok = True
        if words:
            if use_packed:
                x = np.uint64(_pack_bits(cand))
                ok = int(np.bitwise_count(packed_arr ^ x).min()) >= h_min
            else:
                dist = np.count_nonzero(np.asarray(words) != cand[None, :], axis=1)
                ok = int(dist.min()) >= h_min
        if ok:
            words.append(cand)
            if use_packed:
                packed.append(_pack_bits(cand))
                packed_arr = np.array(packed, dtype=np.uint64)
            attempts = 0
        elif attempts >= max_attempts_per_word:
            break
    if not words:
        raise CodebookError(
            f"no codeword fits: r0={r0:.4g} requires Hamming distance {h_min} > n={n}")
    return Codebook(params=params, codewords=np.array(words, dtype=np.uint8),
                    r0=r0, target_size=target, seed=seed)


def packing_count_lower_bound(n: int, amplitude: float, r0: float) -> float:
    """log2 of the saturated-packing lower bound on the codebook size:

        N >= 2^-n * A^n * Gamma(n/2 + 1) / (pi^(n/2) * r0^n),

    evaluated through log-Gamma so it is usable at n ~ 1e6.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ln2 = math.log(2.0)
    return (-n + n * math.log2(amplitude) + math.lgamma(n / 2.0 + 1.0) / ln2
            - (n / 2.0) * math.log2(math.pi) - n * math.log2(r0))


def type1_bound(params: CodeParams, lam_min) -> float:
    """Closed-form Type I error bound 3A / (a^2 c^2 lam_min^4 n^b).

    May exceed 1, in which case it is vacuous but still returned as-is.
    """
    lam_min = float(lam_min)
    if lam_min <= 0:
        raise ValueError("type1_bound requires lam_min > 0")
    return (3.0 * params.amplitude
            / (params.radius_coeff**2 * params.decode_coeff**2 * lam_min**4
               * params.block_length**params.radius_exp))


def type2_bound(params: CodeParams, lam_min, lam_max=None) -> float:
    """Closed-form Type II error bound, the sum of a cross-term and a
    separation term:

        8 A^3 lam_max^3 / (a c lam_min^2 n^(b+1))
          + 3 A / (4 a^2 lam_min^4 n^b (2 - c n^((b-1)/2))).

    Only valid while c * n^((b-1)/2) < 2; raises otherwise.
    """
    lam_min = float(lam_min)
    lam_max = lam_min if lam_max is None else float(lam_max)
    if lam_min <= 0:
        raise ValueError("type2_bound requires lam_min > 0")
    n, a, b, c = (params.block_length, params.radius_coeff,
                  params.radius_exp, params.decode_coeff)
    A = params.amplitude
    gap = 2.0 - c * n ** ((b - 1.0) / 2.0)
    if gap <= 0:
        raise ValueError(f"type2_bound invalid at n={n}: 2 - c*n^((b-1)/2) = {gap:.4g} <= 0")
    term1 = 8.0 * A**3 * lam_max**3 / (a * c * lam_min**2 * n ** (b + 1.0))
    term2 = 3.0 * A / (4.0 * a**2 * lam_min**4 * n**b * gap)
    return term1 + term2


# --- serialization -----------------------------------------------------------
#
# Text format: '#'-prefixed header lines carrying the construction parameters,
# then one codeword per line as a binary string.  repr() round-trips floats
# bit-exactly.

_HEADER_KEYS = ("n", "target_N", "achieved_N", "A", "a", "b", "c", "R", "r0",
                "min_hamming", "seed")


def save_codebook(cb: Codebook, path) -> None:
    p = cb.params
    values = {
        "n": p.block_length,
        "target_N": cb.target_size,
        "achieved_N": cb.achieved_size,
        "A": repr(p.amplitude),
        "a": repr(p.radius_coeff),
        "b": repr(p.radius_exp),
        "c": repr(p.decode_coeff),
        "R": repr(p.rate),
        "r0": repr(cb.r0),
        "min_hamming": min_hamming(cb.r0, p.amplitude),
        "seed": "none" if cb.seed is None else cb.seed,
    }
    lines = [f"# {k} = {values[k]}" for k in _HEADER_KEYS]
    lines += ["".join(str(int(bit)) for bit in w) for w in cb.codewords]
    Path(path).write_text("\n".join(lines) + "\n")


def load_codebook(path) -> Codebook:
    header: dict[str, str] = {}
    rows: list[list[int]] = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line.lstrip("# ").partition("=")
            header[key.strip()] = value.strip()
            continue
        if set(line) - {"0", "1"}:
            raise ValueError(f"invalid codeword line: {line!r}")
        rows.append([int(ch) for ch in line])
    missing = [k for k in _HEADER_KEYS if k not in header]
    if missing:
        raise ValueError(f"codebook header missing keys: {missing}")
    n = int(header["n"])
    params = CodeParams(block_length=n, rate=float(header["R"]),
                        radius_coeff=float(header["a"]), radius_exp=float(header["b"]),
                        decode_coeff=float(header["c"]), amplitude=float(header["A"]))
    words = np.array(rows, dtype=np.uint8)
    if words.size and words.shape[1] != n:
        raise ValueError(f"codeword length {words.shape[1]} does not match n={n}")
    if words.shape[0] != int(header["achieved_N"]):
        raise ValueError("achieved_N header does not match the number of codewords")
    seed = None if header["seed"] == "none" else int(header["seed"])
    return Codebook(params=params, codewords=words, r0=float(header["r0"]),
                    target_size=int(header["target_N"]), seed=seed)
