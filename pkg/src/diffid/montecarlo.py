"""Seeded Monte Carlo estimation of identification error probabilities.

Type I: transmit each codeword, count how often its own decoding region
rejects the reception.  Type II: transmit codeword i and count how often the
reception lands in codeword j's region, for every ordered pair i != j; the
receptions drawn for i are shared across all j, which matches the decoder
seeing one signal and cuts the cost N-fold.

Randomness management: one counter-derived stream per (master_seed, kind,
n, codeword), so results are bit-identical regardless of execution order or
worker count; error rates are exact fractions of integer counters.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelParams, absorb_prob
from .codebook import (Codebook, CodeParams, generate_codebook, type1_bound,
                       type2_bound, DEFAULT_ATTEMPTS_PER_WORD)
from .decoder import DecoderConfig

_TYPE1_TAG = 1
_TYPE2_TAG = 2
_CODEBOOK_TAG = 0xCB
_TIMEPOINT_TAG = 0x71

#: 95% normal-approximation quantile
_Z95 = 1.96


@dataclass(frozen=True)
class TrialPlan:
    """Trial counts, master seed and the (scalar) absorbing probability."""

    iter1: int
    iter2: int
    master_seed: int
    lam: float

    def __post_init__(self):
        if self.iter1 < 1 or self.iter2 < 1:
            raise ValueError("iter1 and iter2 must be >= 1")
        object.__setattr__(self, "lam", float(self.lam))
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam}")


@dataclass
class ErrorReport:
    """Empirical Type I/II statistics for one (codebook, channel) instance,
    alongside the matching closed-form bounds."""

    n: int
    n_codewords: int
    lam: float
    type1_rates: np.ndarray
    avg_type1: float
    max_type1: float
    avg_type2: float
    max_type2: float
    argmax_pair: tuple[int, int]
    bound_type1: float
    bound_type2: float
    ci_max_type1: float
    ci_max_type2: float
    iter1: int
    iter2: int
    seed: int
    wall_clock: float
    warnings: tuple[str, ...] = ()


def ci_halfwidth(p_hat: float, trials: int) -> float:
    """95% normal-approximation halfwidth; an exact-zero rate reports the
    rule-of-three upper bound 3/trials instead."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if p_hat == 0.0:
        return 3.0 / trials
    return _Z95 * np.sqrt(p_hat * (1.0 - p_hat) / trials)


def _stream(master_seed: int, tag: int, n: int, i: int) -> np.random.Generator:
    return np.random.default_rng((master_seed, tag, n, int(i)))


def _type1_block(codewords, amplitude, lam, delta, master_seed, iter1, idxs):
    """Rejection counts |d| > delta for the listed codeword indices."""
    n = codewords.shape[1]
    mean = lam * amplitude
    out = np.zeros(len(idxs), dtype=np.int64)
    for k, i in enumerate(idxs):
        on = np.flatnonzero(codewords[i])
        if on.size == 0:
            continue  # all-zero word: d is identically 0, never rejected
        rng = _stream(master_seed, _TYPE1_TAG, n, i)
        y = rng.poisson(mean, size=(iter1, on.size)).astype(np.float64)
        d = ((y - mean) ** 2 - y).sum(axis=1) / n
        out[k] = int(np.count_nonzero(np.abs(d) > delta))
    return out


def _type2_block(codewords, amplitude, lam, delta, master_seed, iter2, idxs):
    """Per transmit codeword i: (max cross-acceptance count, argmax j, total).

    d(Y, u_j) decomposes over i's ON support: slots where j is ON contribute
    (Y-m)^2 - Y, slots where j is OFF contribute Y^2 - Y, and j-ON slots
    outside the support contribute the constant m^2 (Y is surely 0 there).
    That turns the sweep over all j into one matrix product per i.
    """
    n = codewords.shape[1]
    mean = lam * amplitude
    book = codewords.astype(np.float64)
    weights = book.sum(axis=1)
    res = []
    for i in idxs:
        on = np.flatnonzero(codewords[i])
        rng = _stream(master_seed, _TYPE2_TAG, n, i)
        y = rng.poisson(mean, size=(iter2, on.size)).astype(np.float64)
        p = (y - mean) ** 2 - y
        q = y * y - y
        u_on = book[:, on]
        const = mean * mean * (weights - u_on.sum(axis=1))
        d = (p @ u_on.T + q @ (1.0 - u_on).T + const[None, :]) / n
        counts = np.count_nonzero(np.abs(d) <= delta, axis=0).astype(np.int64)
        counts[i] = 0
        masked = counts.copy()
        masked[i] = -1
        j = int(np.argmax(masked))
        res.append((int(counts[j]), j, int(counts.sum())))
    return res


def _run_blocks(fn, common, n_items, workers):
    idxs = list(range(n_items))
    if workers <= 1 or n_items <= 1:
        return [fn(*common, idxs)]
    blocks = [b.tolist() for b in np.array_split(np.arange(n_items), min(4 * workers, n_items))]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *common, blk) for blk in blocks]
        return [f.result() for f in futures]  # submission order, not completion


def _check_consistent(cb: Codebook, cfg: DecoderConfig, plan: TrialPlan):
    if cfg.params != cb.params:
        raise ValueError("decoder config is for a different code")
    if np.ndim(cfg.lam) != 0:
        raise ValueError("Monte Carlo estimation uses a scalar absorbing probability")
    if float(cfg.lam) != plan.lam:
        raise ValueError("plan and decoder disagree on the absorbing probability")


def estimate_type1(cb: Codebook, cfg: DecoderConfig, plan: TrialPlan,
                   workers: int = 1) -> np.ndarray:
    """Per-codeword Type I rates: fraction of trials whose reception falls
    outside the transmitted codeword's own region."""
    _check_consistent(cb, cfg, plan)
    common = (cb.codewords, cb.params.amplitude, plan.lam, cfg.delta,
              plan.master_seed, plan.iter1)
    parts = _run_blocks(_type1_block, common, cb.achieved_size, workers)
    return np.concatenate(parts) / plan.iter1


@dataclass(frozen=True)
class Type2Result:
    max_rate: float
    argmax_pair: tuple[int, int]
    avg_rate: float


def estimate_type2(cb: Codebook, cfg: DecoderConfig, plan: TrialPlan,
                   workers: int = 1) -> Type2Result:
    """Maximum and average cross-acceptance rate over ordered pairs i != j."""
    _check_consistent(cb, cfg, plan)
    n_words = cb.achieved_size
    if n_words < 2:
        raise ValueError("Type II estimation needs at least 2 codewords")
    common = (cb.codewords, cb.params.amplitude, plan.lam, cfg.delta,
              plan.master_seed, plan.iter2)
    parts = _run_blocks(_type2_block, common, n_words, workers)
    best_count, best_pair, total = -1, (0, 1), 0
    i = 0
    for part in parts:
        for count, j, subtotal in part:
            if count > best_count:
                best_count, best_pair = count, (i, j)
            total += subtotal
            i += 1
    return Type2Result(max_rate=best_count / plan.iter2, argmax_pair=best_pair,
                       avg_rate=total / (n_words * (n_words - 1) * plan.iter2))


def evaluate(cb: Codebook, plan: TrialPlan, workers: int = 1) -> ErrorReport:
    """Full empirical + theoretical error report for one codebook/channel."""
    start = time.perf_counter()
    cfg = DecoderConfig.from_params(cb.params, plan.lam)
    rates1 = estimate_type1(cb, cfg, plan, workers=workers)
    t2 = estimate_type2(cb, cfg, plan, workers=workers)
    b1 = type1_bound(cb.params, plan.lam)
    b2 = type2_bound(cb.params, plan.lam)
    max1 = float(rates1.max())
    warnings = []
    if cb.is_partial:
        warnings.append(f"partial_codebook:{cb.achieved_size}/{cb.target_size}")
    if b1 >= 1.0:
        warnings.append("type1_bound_vacuous")
    if b2 >= 1.0:
        warnings.append("type2_bound_vacuous")
    return ErrorReport(
        n=cb.params.block_length, n_codewords=cb.achieved_size, lam=plan.lam,
        type1_rates=rates1, avg_type1=float(rates1.mean()), max_type1=max1,
        avg_type2=t2.avg_rate, max_type2=t2.max_rate, argmax_pair=t2.argmax_pair,
        bound_type1=b1, bound_type2=b2,
        ci_max_type1=float(ci_halfwidth(max1, plan.iter1)),
        ci_max_type2=float(ci_halfwidth(t2.max_rate, plan.iter2)),
        iter1=plan.iter1, iter2=plan.iter2, seed=plan.master_seed,
        wall_clock=time.perf_counter() - start, warnings=tuple(warnings))


def _derived_seed(*entropy) -> int:
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def codebook_seed(master_seed: int, n: int) -> int:
    """Deterministic per-blocklength construction seed."""
    return _derived_seed(master_seed, _CODEBOOK_TAG, n)


def sweep_blocklength(n_values, template: CodeParams, plan: TrialPlan,
                      workers: int = 1,
                      max_attempts_per_word: int = DEFAULT_ATTEMPTS_PER_WORD) -> list[ErrorReport]:
    """One ErrorReport per block length, with fresh codebooks seeded from the
    plan's master seed.  Partial codebooks are reported, not fatal."""
    reports = []
    for n in n_values:
        params = replace(template, block_length=int(n))
        cb = generate_codebook(params, codebook_seed(plan.master_seed, int(n)),
                               max_attempts_per_word=max_attempts_per_word)
        reports.append(evaluate(cb, plan, workers=workers))
    return reports


def sweep_time(params: CodeParams, channel: ChannelParams, times, plan: TrialPlan,
               workers: int = 1,
               max_attempts_per_word: int = DEFAULT_ATTEMPTS_PER_WORD) -> list[ErrorReport]:
    """Fixed code, varying diffusion time: for each t the absorbing
    probability erfc(L_R / sqrt(4 D t)) feeds both the channel sampling and
    the decoder threshold.  One codebook is shared across the sweep."""
    times = [float(t) for t in times]
    if any(t <= 0 for t in times):
        raise ValueError("diffusion times must be positive")
    n = params.block_length
    cb = generate_codebook(params, codebook_seed(plan.master_seed, n),
                           max_attempts_per_word=max_attempts_per_word)
    reports = []
    for k, t in enumerate(times):
        lam = absorb_prob(t, channel).value
        plan_t = replace(plan, lam=lam,
                         master_seed=_derived_seed(plan.master_seed, _TIMEPOINT_TAG, k))
        reports.append(evaluate(cb, plan_t, workers=workers))
    return reports
