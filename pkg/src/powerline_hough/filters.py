"""False-peak suppression for bundles of parallel lines.

Power lines run parallel and at a regular spacing.  Candidates are first
reduced to the dominant orientation, then to a set whose neighbouring gaps
are nearly equal.
"""

import math
from dataclasses import dataclass

import numpy as np

from .hough import align, angle_gap

VERTICAL = math.inf


class NotParallelError(ValueError):
    pass


@dataclass(frozen=True)
class FilterParams:
    enabled: bool = True
    angle_bin: float = 1.0
    spacing_variance_threshold: float = 0.01
    spacing_normalization: str = "by-mean"

    def __post_init__(self):
        if not self.angle_bin > 0:
            raise ValueError("angle_bin must be positive")
        if not self.spacing_variance_threshold > 0:
            raise ValueError("spacing_variance_threshold must be positive")
        if self.spacing_normalization not in ("none", "by-mean"):
            raise ValueError("spacing_normalization must be 'none' or 'by-mean'")


def slope_of(p1, p2):
    """Slope ``dy/dx`` through two points, ``VERTICAL`` when ``dx == 0``."""
    (xm, ym), (xn, yn) = p1, p2
    if xm == xn and ym == yn:
        raise ValueError(f"points coincide: {p1}")
    if xm == xn:
        return VERTICAL
    return (ym - yn) / (xm - xn)


def parallel_distance(l1, l2, angle_tol=math.radians(1.0)):
    """Distance between two parallel lines.

    With ``A = cos(theta)``, ``B = sin(theta)``, ``C = -rho`` the normal is
    already unit length, so ``|C1 - C2| / sqrt(A**2 + B**2)`` is just the rho
    difference once both lines sit on the same theta branch.
    """
    gap = angle_gap(l1.theta, l2.theta)
    if gap > angle_tol:
        raise NotParallelError(f"orientations differ by {math.degrees(gap):.3f} deg")
    _, rho2 = align(l1, l2)
    return abs(l1.rho - rho2)


def slope_mode_filter(candidates, params=FilterParams()):
    """Keep candidates in the most populated orientation bin and its two neighbours.

    Bins are ``angle_bin`` degrees wide and wrap around at 180.  Ties between
    bins go to the larger vote total, then the smaller bin index.
    """
    if not candidates:
        return []
    nbins = max(1, int(round(180.0 / params.angle_bin)))
    bins = [int(math.floor(math.degrees(c.theta) / params.angle_bin)) % nbins for c in candidates]
    counts = np.zeros(nbins, dtype=np.int64)
    totals = np.zeros(nbins, dtype=np.int64)
    for b, c in zip(bins, candidates):
        counts[b] += 1
        totals[b] += c.votes
    mode = min(range(nbins), key=lambda b: (-counts[b], -totals[b], b))
    keep = {(mode - 1) % nbins, mode, (mode + 1) % nbins}
    return [c for c, b in zip(candidates, bins) if b in keep]


def _aligned_rhos(lines):
    ref = lines[0]
    return [align(ref, l)[1] for l in lines]


def gap_variance(rhos, normalization="by-mean"):
    """Population variance of consecutive gaps between sorted offsets."""
    gaps = np.diff(np.sort(np.asarray(rhos, dtype=np.float64)))
    if gaps.size == 0:
        return 0.0
    if normalization == "by-mean":
        mean = gaps.mean()
        if mean == 0:
            return 0.0
        gaps = gaps / mean
    return float(gaps.var())


def spacing_variance_filter(parallel, params=FilterParams()):
    """Drop lines until the spacing of the rest is regular.

    Lines are ordered by rho.  While the gap variance is not below the
    threshold and more than two lines remain, the line whose removal leaves
    the smallest variance is dropped (ties: fewer votes first, then larger
    rho).  The survivors come back in rho order.
    """
    if len(parallel) < 2:
        return list(parallel)
    rhos = _aligned_rhos(parallel)
    order = sorted(range(len(parallel)), key=lambda i: (rhos[i], parallel[i].theta))
    kept = [parallel[i] for i in order]
    kr = [rhos[i] for i in order]
    norm = params.spacing_normalization
    while len(kept) > 2 and gap_variance(kr, norm) >= params.spacing_variance_threshold:
        best = None
        for i in range(len(kept)):
            v = gap_variance(kr[:i] + kr[i + 1:], norm)
            key = (v, kept[i].votes, -kr[i])
            if best is None or key < best[0]:
                best = (key, i)
        i = best[1]
        del kept[i]
        del kr[i]
    return kept
