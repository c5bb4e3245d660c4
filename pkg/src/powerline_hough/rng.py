"""SplitMix64 pseudo-random generator.

Every seeded component (pair sampling, scene synthesis, Monte Carlo) draws from
this generator so results are reproducible bit-for-bit on any platform.  The
sequence is the reference SplitMix64: state advances by the golden-ratio
increment and each output is the finalizer mix of the new state.

Reference vector (seed 1234567, first five outputs)::

    6457827717110365317
    3203168211198807973
    9817491932198370423
    4593380528125082431
    16408922859458223821
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

# 2**-53, maps the top 53 bits of a draw onto [0, 1)
UNIT = 1.0 / 9007199254740992.0


def mix64(z):
    z = (z ^ (z >> 30)) * MIX1 & MASK64
    z = (z ^ (z >> 27)) * MIX2 & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Scalar SplitMix64 stream.

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64.
    """

    def __init__(self, seed):
        self.state = int(seed) & MASK64

    def next_u64(self):
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def random(self):
        """Uniform float in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * UNIT

    def below(self, n):
        """Uniform integer in [0, n)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        return int(self.random() * n)

    def uniform(self, lo, hi):
        return lo + (hi - lo) * self.random()

    def integers(self, lo, hi):
        """Uniform integer in the closed range [lo, hi]."""
        return lo + self.below(hi - lo + 1)

    def block(self, count):
        """Draw ``count`` outputs at once as a uint64 array, advancing the stream."""
        out = splitmix64_block(self.state, count)
        self.state = (self.state + count * GOLDEN_GAMMA) & MASK64
        return out

    def random_block(self, count):
        return (self.block(count) >> np.uint64(11)).astype(np.float64) * UNIT


def splitmix64_block(state, count):
    """Vectorized outputs ``1..count`` following ``state`` (state itself is not emitted)."""
    k = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(state) + k * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def substream_seed(seed, index):
    """Seed for an independent substream, used when work is partitioned."""
    return mix64((int(seed) + (index + 1) * GOLDEN_GAMMA) & MASK64) ^ (index * MIX2 & MASK64)
