"""Hit, miss and false-detection probabilities of two-point sampling.

A randomized Hough run draws two distinct pixels per experiment.  The chance
that both come from one line of ``n`` pixels among ``N`` candidates is
``n(n-1) / (N(N-1))``.  Restricting sampling to a region holding a fraction
``I_c`` of the pixels shrinks the population to ``N * I_c``; line pixels are
assumed to lie wholly inside the region, while pixels of a spurious structure
of ``m`` pixels are assumed spread uniformly, so only ``m * I_c`` survive.
Counts over ``M`` experiments are binomial.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .rng import UNIT, splitmix64_block, substream_seed

log = logging.getLogger(__name__)

EXACT_MAX_M = 64


def _clamp(p, what):
    if p < 0.0 or p > 1.0:
        log.info("clamped %s = %r into [0, 1]", what, p)
        return min(max(p, 0.0), 1.0)
    return p


def _check_population(N):
    if N < 2:
        raise ValueError(f"population N={N} must be >= 2")


def p_hit(n, N):
    """Chance a random pixel pair lies on a line of ``n`` pixels."""
    _check_population(N)
    if n < 0 or n > N:
        raise ValueError(f"line pixels n={n} outside [0, N={N}]")
    return float(Fraction(n * (n - 1), N * (N - 1)))


def p_hit_improved(n, N, I_c):
    """Hit chance when sampling only inside the region."""
    if not 0 < I_c <= 1:
        raise ValueError(f"I_c={I_c} outside (0, 1]")
    pop = N * I_c
    if pop < 2:
        raise ValueError(f"region population N*I_c={pop} below 2")
    if n < 0 or n > pop:
        raise ValueError(f"line pixels n={n} exceed region population {pop}")
    return _clamp(n * (n - 1) / (pop * (pop - 1)), "p_hit_improved")


def p_noise(m, N):
    """Chance a random pair lies on a spurious structure of ``m`` pixels."""
    _check_population(N)
    if m < 0 or m > N:
        raise ValueError(f"noise pixels m={m} outside [0, N={N}]")
    return float(Fraction(m * (m - 1), N * (N - 1)))


def p_noise_improved(m, N, I_c):
    if not 0 < I_c <= 1:
        raise ValueError(f"I_c={I_c} outside (0, 1]")
    if m < 0 or m > N:
        raise ValueError(f"noise pixels m={m} outside [0, N={N}]")
    pop = N * I_c
    if pop < 2:
        raise ValueError(f"region population N*I_c={pop} below 2")
    mi = m * I_c
    return _clamp(mi * (mi - 1) / (pop * (pop - 1)), "p_noise_improved")


def _check_binom(M, k, p):
    if M < 0 or k < 0 or k > M:
        raise ValueError(f"need 0 <= k <= M, got k={k}, M={M}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")


def _pmf_exact(M, k, p):
    q = Fraction(p)
    return float(math.comb(M, k) * q**k * (1 - q) ** (M - k))


def _pmf_log(M, k, p):
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if p == 1.0:
        return 1.0 if k == M else 0.0
    logc = math.lgamma(M + 1) - math.lgamma(k + 1) - math.lgamma(M - k + 1)
    return math.exp(logc + k * math.log(p) + (M - k) * math.log1p(-p))


def binom_pmf(M, k, p):
    """``C(M, k) p^k (1-p)^(M-k)``; exact rationals up to M=64, log domain beyond."""
    _check_binom(M, k, p)
    if M <= EXACT_MAX_M:
        return _pmf_exact(M, k, p)
    return _pmf_log(M, k, p)


def _cdf(M, k0, p):
    if M <= EXACT_MAX_M:
        q = Fraction(p)
        total = sum(math.comb(M, k) * q**k * (1 - q) ** (M - k) for k in range(k0 + 1))
        return float(total)
    return math.fsum(_pmf_log(M, k, p) for k in range(k0 + 1))


def p_miss(M, k0, p):
    """Probability of at most ``k0`` hits in ``M`` experiments."""
    _check_binom(M, k0, p)
    return _clamp(_cdf(M, k0, p), "p_miss")


def p_false(M, k0, p):
    """Probability of more than ``k0`` hits in ``M`` experiments."""
    _check_binom(M, k0, p)
    return _clamp(1.0 - _cdf(M, k0, p), "p_false")


@dataclass(frozen=True)
class SamplingScenario:
    N: int
    n: int
    m: int = 0
    I_c: float = 1.0
    M: int = 100
    k0: int = 5
    name: str = ""

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if not 0 <= self.n <= self.N or not 0 <= self.m <= self.N:
            raise ValueError("n and m must lie in [0, N]")
        if not 0 < self.I_c <= 1:
            raise ValueError("I_c must lie in (0, 1]")
        if self.M < 1 or not 0 <= self.k0 <= self.M:
            raise ValueError("need M >= 1 and 0 <= k0 <= M")


@dataclass(frozen=True)
class MonteCarloEstimate:
    p: float
    stderr: float
    hits: int
    trials: int

    def agrees(self, expected, n_se=3.0):
        if self.stderr == 0:
            return self.p == expected
        return abs(self.p - expected) <= n_se * self.stderr


def _hits(pop, n, trials, seed):
    u = splitmix64_block(seed, 2 * trials)
    first = ((u[0::2] >> np.uint64(11)).astype(np.float64) * UNIT * pop).astype(np.int64)
    second = ((u[1::2] >> np.uint64(11)).astype(np.float64) * UNIT * (pop - 1)).astype(np.int64)
    second += second >= first
    return int(np.count_nonzero((first < n) & (second < n)))


def monte_carlo_hit(scenario, trials, seed=0, improved=False, partitions=1):
    """Empirical hit frequency of literal pair sampling.

    The population is ``N`` pixels (``N * I_c`` when ``improved``) of which the
    first ``n`` belong to the line.  Trials may be split into ``partitions``
    independently seeded substreams; the estimate depends on both the seed and
    the partition count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    pop = scenario.N * scenario.I_c if improved else scenario.N
    if abs(pop - round(pop)) > 1e-9:
        raise ValueError(f"population {pop} is not a whole number of pixels")
    pop = int(round(pop))
    if pop < 2 or scenario.n > pop:
        raise ValueError(f"degenerate population {pop} for n={scenario.n}")
    hits = 0
    base, extra = divmod(trials, partitions)
    for part in range(partitions):
        count = base + (1 if part < extra else 0)
        if count:
            hits += _hits(pop, scenario.n, count, substream_seed(seed, part) if partitions > 1 else seed)
    p = hits / trials
    return MonteCarloEstimate(p, math.sqrt(p * (1 - p) / trials), hits, trials)


PROB_COLUMNS = ("scenario", "N", "n", "m", "I_c", "M", "k0",
                "p_c", "p_c_improved", "p_miss", "p_miss_improved",
                "p_r", "p_r_improved", "p_false", "p_false_improved",
                "mc_p_c", "mc_p_c_se", "mc_p_c_improved", "mc_p_c_improved_se", "mc_ok")


def scenario_row(sc, trials=100_000, seed=0):
    """One table row: closed forms for both sampling schemes plus a Monte Carlo check."""
    pc = p_hit(sc.n, sc.N)
    pci = p_hit_improved(sc.n, sc.N, sc.I_c)
    pr = p_noise(sc.m, sc.N)
    pri = p_noise_improved(sc.m, sc.N, sc.I_c)
    mc = monte_carlo_hit(sc, trials, seed)
    mci = monte_carlo_hit(sc, trials, seed + 1, improved=True)
    return {
        "scenario": sc.name,
        "N": sc.N, "n": sc.n, "m": sc.m, "I_c": sc.I_c, "M": sc.M, "k0": sc.k0,
        "p_c": pc, "p_c_improved": pci,
        "p_miss": p_miss(sc.M, sc.k0, pc), "p_miss_improved": p_miss(sc.M, sc.k0, pci),
        "p_r": pr, "p_r_improved": pri,
        "p_false": p_false(sc.M, sc.k0, pr), "p_false_improved": p_false(sc.M, sc.k0, pri),
        "mc_p_c": mc.p, "mc_p_c_se": mc.stderr,
        "mc_p_c_improved": mci.p, "mc_p_c_improved_se": mci.stderr,
        "mc_ok": mc.agrees(pc) and mci.agrees(pci),
    }
