"""Polar line parameter space, standard and randomized Hough transforms.

Lines are written in normal form ``x cos(theta) + y sin(theta) = rho`` with
``theta`` in [0, pi) the angle of the line normal and ``rho`` the signed
distance from the top-left origin.  ``(theta, rho)`` and ``(theta - pi, -rho)``
describe the same line, which matters near the wrap at ``theta = 0``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels
from .rng import UNIT, SplitMix64


@dataclass(frozen=True)
class PolarLine:
    theta: float
    rho: float
    votes: int = 0

    @property
    def theta_deg(self):
        return math.degrees(self.theta)

    def sort_key(self):
        return (-self.votes, self.theta, self.rho)

    def distance_to(self, x, y):
        return abs(x * math.cos(self.theta) + y * math.sin(self.theta) - self.rho)


def sort_lines(lines):
    """Votes descending, then theta, then rho ascending."""
    return sorted(lines, key=PolarLine.sort_key)


def normalize(theta, rho):
    """Fold ``(theta, rho)`` into theta in [0, pi) without changing the line."""
    k = math.floor(theta / math.pi)
    theta -= k * math.pi
    if k % 2:
        rho = -rho
    # theta / pi can underflow, leaving tiny negatives or values rounding to pi
    if theta < 0:
        theta += math.pi
        rho = -rho
    if theta >= math.pi:
        theta -= math.pi
        rho = -rho
    return theta, rho


def angle_gap(t1, t2):
    """Smallest difference between two line orientations, in [0, pi/2]."""
    d = abs(t1 - t2) % math.pi
    return min(d, math.pi - d)


def align(ref, line):
    """``(theta, rho)`` of ``line`` on the branch closest to ``ref.theta``."""
    theta, rho = line.theta, line.rho
    if theta - ref.theta > math.pi / 2:
        return theta - math.pi, -rho
    if ref.theta - theta > math.pi / 2:
        return theta + math.pi, -rho
    return theta, rho


def eps_equal(l1, l2, eps_theta, eps_rho):
    """Whether two lines agree within the tolerances, wrap-aware."""
    theta, rho = align(l1, l2)
    return abs(theta - l1.theta) <= eps_theta and abs(rho - l1.rho) <= eps_rho


def max_rho(width, height):
    return int(math.ceil(math.hypot(width, height)))


def polar_from_two_points(p1, p2):
    """Normal-form parameters of the line through two distinct points."""
    (x1, y1), (x2, y2) = p1, p2
    if x1 == x2 and y1 == y2:
        raise ValueError(f"points coincide: {p1}")
    x1, y1, x2, y2 = float(x1), float(y1), float(x2), float(y2)
    theta = math.atan2(-(x2 - x1), y2 - y1)
    if theta < 0.0:
        theta += math.pi
    if theta >= math.pi:
        theta -= math.pi
    return PolarLine(theta, x1 * math.cos(theta) + y1 * math.sin(theta), 0)


@dataclass
class Accumulator:
    """Vote array over ``theta_bins x rho_bins`` cells.

    Bin ``i`` is centred on ``theta = i * pi / theta_bins``; bin ``j`` on
    ``rho = (j - rho_offset) * rho_res``.
    """

    theta_bins: int
    rho_res: float
    rho_offset: int
    cells: np.ndarray

    @classmethod
    def empty(cls, width, height, theta_bins=180, rho_res=1.0):
        offset = int(math.ceil(max_rho(width, height) / rho_res))
        cells = np.zeros((theta_bins, 2 * offset + 1), dtype=np.int64)
        return cls(theta_bins, float(rho_res), offset, cells)

    @property
    def rho_bins(self):
        return self.cells.shape[1]

    @property
    def theta_step(self):
        return math.pi / self.theta_bins

    def thetas(self):
        return np.arange(self.theta_bins) * self.theta_step

    def center(self, theta_bin, rho_bin):
        return theta_bin * self.theta_step, (rho_bin - self.rho_offset) * self.rho_res

    def bin_of(self, line):
        return bin_of(line, self)


def bin_of(line, acc):
    """Nearest ``(theta_bin, rho_bin)`` for ``line``; theta wraps with rho negated."""
    theta, rho = normalize(line.theta, line.rho)
    t = int(math.floor(theta / acc.theta_step + 0.5))
    if t >= acc.theta_bins:
        t -= acc.theta_bins
        rho = -rho
    r = int(math.floor(rho / acc.rho_res + 0.5)) + acc.rho_offset
    if not 0 <= r < acc.rho_bins:
        raise ValueError(f"rho {line.rho} outside accumulator range")
    return t, r


def trig_table(theta_bins):
    """cos and sin at the bin centres."""
    step = math.pi / theta_bins
    cos = np.array([math.cos(i * step) for i in range(theta_bins)])
    sin = np.array([math.sin(i * step) for i in range(theta_bins)])
    return cos, sin


def _masked(edges, mask):
    if mask is None:
        return edges
    from .region import mask_edges

    return mask_edges(edges, mask)


def accumulate(xs, ys, acc, chunk=4096):
    """Add one vote per theta bin for every point, in place."""
    cos, sin = trig_table(acc.theta_bins)
    nr = acc.rho_bins
    base = np.arange(acc.theta_bins, dtype=np.int64) * nr
    flat = acc.cells.reshape(-1)
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    for k in range(0, xs.size, chunk):
        rho = xs[k:k + chunk, None] * cos[None, :] + ys[k:k + chunk, None] * sin[None, :]
        idx = np.floor(rho / acc.rho_res + 0.5).astype(np.int64) + acc.rho_offset
        flat += np.bincount((idx + base).ravel(), minlength=flat.size)
    return acc


def _wrapped_pad(c):
    nt, nr = c.shape
    pad = np.zeros((nt + 2, nr + 2), dtype=c.dtype)
    pad[1:-1, 1:-1] = c
    # neighbours across the theta wrap come from the opposite row with rho mirrored
    pad[0, 1:-1] = c[-1, ::-1]
    pad[-1, 1:-1] = c[0, ::-1]
    return pad


def find_peaks(acc, vote_threshold):
    """Cells at or above threshold that survive 3x3 non-maximum suppression.

    A cell survives when no neighbour holds more votes.  Neighbours across the
    theta wrap are taken from the opposite row with rho mirrored.  Connected
    survivors form a plateau of equal votes; each plateau yields one peak, at
    the member closest to the plateau's centre (the later one in raster order
    on a tie).
    """
    c = acc.cells
    nt, nr = c.shape
    pad = _wrapped_pad(c)
    is_max = c >= max(vote_threshold, 1)
    for dt in (-1, 0, 1):
        for dr in (-1, 0, 1):
            if dt or dr:
                is_max &= c >= pad[1 + dt:1 + dt + nt, 1 + dr:1 + dr + nr]
    ts, rs = np.nonzero(is_max)
    if ts.size == 0:
        return []
    labels, count = ndimage.label(is_max, structure=np.ones((3, 3), dtype=bool))
    parent = np.arange(count + 1)

    def root(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    # join plateaus that touch across the wrap
    first, last = labels[0], labels[-1][::-1]
    for dr in (-1, 0, 1):
        a = first[max(0, -dr):nr - max(0, dr)]
        b = last[max(0, dr):nr - max(0, -dr)]
        for u, v in zip(a[(a > 0) & (b > 0)].tolist(), b[(a > 0) & (b > 0)].tolist()):
            ru, rv = root(u), root(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
    roots = np.array([root(k) for k in range(count + 1)])
    lab = roots[labels[ts, rs]]
    # plateaus split by the wrap have no meaningful centroid; take their earliest cell
    merged = np.zeros(count + 1, dtype=bool)
    merged[roots[roots != np.arange(count + 1)]] = True
    wrapped = merged[lab]
    n = np.bincount(lab, minlength=count + 1).astype(np.float64)
    mt = np.bincount(lab, ts, minlength=count + 1) / np.maximum(n, 1)
    mr = np.bincount(lab, rs, minlength=count + 1) / np.maximum(n, 1)
    dist = (ts - mt[lab]) ** 2 + (rs - mr[lab]) ** 2
    dist[wrapped] = 0.0
    late = np.where(wrapped, 1, -1)
    order = np.lexsort((late * rs, late * ts, dist, lab))
    keep = order[np.r_[True, lab[order][1:] != lab[order][:-1]]]
    lines = []
    for t, r in zip(ts[keep].tolist(), rs[keep].tolist()):
        theta, rho = acc.center(t, r)
        lines.append(PolarLine(theta, rho, int(c[t, r])))
    return sort_lines(lines)


def standard_hough(edges, mask=None, theta_bins=180, vote_threshold=1, rho_res=1.0):
    """One-to-many voting of every edge pixel over all theta bins.

    Returns
    -------
    acc : Accumulator
    lines : list of PolarLine
        Peaks with at least ``vote_threshold`` votes, strongest first.
    """
    if vote_threshold < 1:
        raise ValueError("vote_threshold must be >= 1")
    edges = _masked(edges, mask)
    acc = Accumulator.empty(edges.width, edges.height, theta_bins, rho_res)
    xs, ys = edges.coords()
    if xs.size == 0:
        return acc, []
    accumulate(xs, ys, acc)
    return acc, find_peaks(acc, vote_threshold)


@dataclass(frozen=True)
class SamplingParams:
    max_samples: int = 20000
    epsilon_theta: float = math.radians(1.0)
    epsilon_rho: float = 2.0
    vote_threshold: int = 20
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_samples < 1:
            raise ValueError("max_samples must be >= 1")
        if self.epsilon_theta < 0 or self.epsilon_rho < 0:
            raise ValueError("tolerances must be non-negative")
        if self.vote_threshold < 2:
            raise ValueError("vote_threshold must be >= 2")


@dataclass(frozen=True)
class SparseVotes:
    """All entries of a randomized run, in creation order."""

    theta: np.ndarray
    rho: np.ndarray
    votes: np.ndarray
    samples: int
    diagnostic: str = None

    def __len__(self):
        return int(self.votes.size)

    @property
    def max_votes(self):
        return int(self.votes.max()) if self.votes.size else 0

    def lines(self, vote_threshold):
        keep = np.flatnonzero(self.votes >= vote_threshold)
        return sort_lines(
            PolarLine(float(self.theta[k]), float(self.rho[k]), int(self.votes[k])) for k in keep
        )


@dataclass(frozen=True)
class RandomizedResult:
    lines: list
    entries: int
    samples: int
    diagnostic: str = None


# smallest grid cells used for lookups when tolerances are tiny
_MIN_CELL_THETA = math.pi / 720
_MIN_CELL_RHO = 0.5


def sample_votes(xs, ys, width, height, max_samples, seed, epsilon_theta, epsilon_rho):
    """Run the two-point sampler over the given points and return every entry."""
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    ys = np.ascontiguousarray(ys, dtype=np.int64)
    empty = np.zeros(0)
    if xs.size < 2:
        return SparseVotes(empty, empty.copy(), np.zeros(0, dtype=np.int64), 0,
                           diagnostic=f"need at least 2 edge pixels, got {xs.size}")
    th, rh, votes = _kernels.rht_accumulate(
        xs, ys, int(max_samples), np.uint64(int(seed) & (2**64 - 1)),
        float(epsilon_theta), float(epsilon_rho),
        max(float(epsilon_theta), _MIN_CELL_THETA), max(float(epsilon_rho), _MIN_CELL_RHO),
        float(max_rho(width, height)),
    )
    return SparseVotes(th, rh, votes, int(max_samples))


def randomized_hough(edges, mask=None, params=SamplingParams()):
    """Two-point randomized Hough transform.

    Draws ``params.max_samples`` unordered pairs of distinct edge pixels with
    a seeded SplitMix64 stream.  Each pair maps to one ``(theta, rho)`` which
    is merged into the earliest existing entry within the tolerances (the
    entry keeps the running mean of its samples) or opens a new entry.
    """
    edges = _masked(edges, mask)
    xs, ys = edges.coords()
    sv = sample_votes(xs, ys, edges.width, edges.height, params.max_samples,
                      params.rng_seed, params.epsilon_theta, params.epsilon_rho)
    return RandomizedResult(sv.lines(params.vote_threshold), len(sv), sv.samples, sv.diagnostic)


def sample_pairs(n, count, seed):
    """Reference pair stream matching the compiled sampler, for tests and tools."""
    rng = SplitMix64(seed)
    pairs = []
    for _ in range(count):
        i = int((rng.next_u64() >> 11) * UNIT * n)
        j = int((rng.next_u64() >> 11) * UNIT * (n - 1))
        if j >= i:
            j += 1
        pairs.append((i, j))
    return pairs
