"""Delineation of the band that holds the line bundle.

The image is cut into vertical pixel strips.  Inside each strip, rows whose
longest horizontal edge run is long enough are taken as crossings of a line.
Crossings that do not continue into neighbouring strips are clutter, since
the lines run across the whole image.  Each strip's band extends the maximum
line spacing ``d2`` beyond its first and last remaining crossing.  Strip bands are spliced into a piecewise-rectangular
region and the region's share of the image is the segmentation coefficient.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import longest_runs, strip_runs
from .raster import BinaryImage


class SpacingEstimationError(ValueError):
    """No strip had enough line crossings to measure the spacing."""


@dataclass(frozen=True)
class Strip:
    index: int
    x_start: int
    x_end: int

    @property
    def width(self):
        return self.x_end - self.x_start


@dataclass(frozen=True)
class StripSegment:
    strip: int
    y: int
    x_start: int
    length: int
    # first and last merged row; default to ``y``
    top: int = None
    bottom: int = None

    def __post_init__(self):
        if self.top is None:
            object.__setattr__(self, "top", self.y)
        if self.bottom is None:
            object.__setattr__(self, "bottom", self.y)
        if not self.top <= self.y <= self.bottom:
            raise ValueError(f"row {self.y} outside merged extent [{self.top}, {self.bottom}]")


@dataclass(frozen=True)
class StripBounds:
    x_start: int
    x_end: int
    upper_y: int
    lower_y: int

    @property
    def area(self):
        return (self.x_end - self.x_start) * (self.lower_y - self.upper_y + 1)


@dataclass(frozen=True)
class RegionModel:
    width: int
    height: int
    strips: tuple
    d1: float
    d2: float
    i_c: float
    sentinel: bool = False

    def __post_init__(self):
        for s in self.strips:
            if not 0 <= s.upper_y <= s.lower_y < self.height:
                raise ValueError(f"invalid strip bounds {s}")
        if self.d1 is not None and not 0 < self.d1 <= self.d2:
            raise ValueError(f"need 0 < d1 <= d2, got {self.d1}, {self.d2}")
        if not 0 < self.i_c <= 1:
            raise ValueError(f"i_c {self.i_c} outside (0, 1]")

    @classmethod
    def full(cls, width, height, strips, d1=None, d2=None):
        bounds = tuple(StripBounds(s.x_start, s.x_end, 0, height - 1) for s in strips)
        return cls(width, height, bounds, d1, d2, 1.0, sentinel=True)

    def recompute_ic(self):
        return segmentation_coefficient(self.strips, self.width, self.height)

    def mask(self):
        m = np.zeros((self.height, self.width), dtype=bool)
        for s in self.strips:
            m[s.upper_y:s.lower_y + 1, s.x_start:s.x_end] = True
        return m

    def contains(self, xs, ys):
        """Vectorized membership test for pixel coordinates."""
        upper = np.empty(self.width, dtype=np.int64)
        lower = np.empty(self.width, dtype=np.int64)
        for s in self.strips:
            upper[s.x_start:s.x_end] = s.upper_y
            lower[s.x_start:s.x_end] = s.lower_y
        xs = np.asarray(xs)
        ys = np.asarray(ys)
        return (ys >= upper[xs]) & (ys <= lower[xs])

    def to_dict(self):
        return {
            "width": self.width,
            "height": self.height,
            "strips": [
                {"x_start": s.x_start, "x_end": s.x_end, "upper_y": s.upper_y, "lower_y": s.lower_y}
                for s in self.strips
            ],
            "d1": self.d1,
            "d2": self.d2,
            "i_c": self.i_c,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc):
        strips = tuple(StripBounds(s["x_start"], s["x_end"], s["upper_y"], s["lower_y"]) for s in doc["strips"])
        width = doc.get("width", strips[-1].x_end)
        height = doc["height"]
        model = cls(width, height, strips, doc["d1"], doc["d2"], doc["i_c"])
        if model.recompute_ic() != model.i_c:
            raise ValueError("i_c does not match the strip bounds")
        return model


def segmentation_coefficient(bounds, width, height):
    return sum(b.area for b in bounds) / (width * height)


def split_strips(width, n=8):
    """Partition ``[0, width)`` into ``n`` contiguous strips, wider ones first."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if width < n:
        raise ValueError(f"width {width} smaller than strip count {n}")
    base, extra = divmod(width, n)
    strips, x = [], 0
    for i in range(n):
        w = base + (1 if i < extra else 0)
        strips.append(Strip(i, x, x + w))
        x += w
    return strips


def _group_rows(rows, lengths, starts, strip, merge_below):
    segments = []
    group = []
    for y in rows:
        if group and y - group[-1] >= merge_below:
            segments.append(_representative(group, lengths, starts, strip))
            group = []
        group.append(y)
    if group:
        segments.append(_representative(group, lengths, starts, strip))
    return segments


def _representative(group, lengths, starts, strip):
    best = max(group, key=lambda y: (lengths[y], -y))
    return StripSegment(strip.index, int(best), int(starts[best]), int(lengths[best]),
                        int(group[0]), int(group[-1]))


def _strip_runs(edges, strip):
    return longest_runs(np.ascontiguousarray(edges.mask), strip.x_start, strip.x_end)


def _all_strip_runs(edges, strips):
    bounds = np.array([s.x_start for s in strips] + [strips[-1].x_end], dtype=np.int64)
    lengths, starts = strip_runs(np.ascontiguousarray(edges.mask), bounds)
    return [(lengths[i], starts[i]) for i in range(len(strips))]


def find_segments(edges, strip, min_run, d1, runs=None):
    """Line crossings inside one strip, top to bottom.

    A row qualifies when its longest horizontal edge run is at least
    ``min_run``.  Qualifying rows closer than ``d1 / 2`` to the previous one
    belong to the same line and are merged; the representative row is the one
    with the longest run, and ``top`` / ``bottom`` record the merged extent.
    """
    if min_run < 1:
        raise ValueError("min_run must be >= 1")
    if not d1 > 0:
        raise ValueError("d1 must be positive")
    lengths, starts = runs if runs is not None else _strip_runs(edges, strip)
    rows = np.flatnonzero(lengths >= min_run)
    return _group_rows(rows.tolist(), lengths, starts, strip, d1 / 2.0)


def strip_boundaries(segments, d2, image_height):
    """Band ``(upper_y, lower_y)`` for one strip.

    The band reaches ``d2`` below the last crossing and ``d2`` above the first,
    measured from the crossings' merged extents and clipped to the image.  With no crossings the whole strip height is
    returned.
    """
    if not segments:
        return 0, image_height - 1
    upper = max(int(math.floor(segments[0].top - d2)), 0)
    lower = min(int(math.ceil(segments[-1].bottom + d2)), image_height - 1)
    return upper, lower


def track_lengths(per_strip, tolerance):
    """Length, in strips, of the longest chain of linked crossings through each segment.

    Crossings in neighbouring strips link when their rows differ by at most
    ``tolerance``.
    """
    n = len(per_strip)
    left = [[1] * len(segs) for segs in per_strip]
    right = [[1] * len(segs) for segs in per_strip]
    for i in range(1, n):
        for a, seg in enumerate(per_strip[i]):
            for b, prev in enumerate(per_strip[i - 1]):
                if abs(seg.y - prev.y) <= tolerance:
                    left[i][a] = max(left[i][a], left[i - 1][b] + 1)
    for i in range(n - 2, -1, -1):
        for a, seg in enumerate(per_strip[i]):
            for b, nxt in enumerate(per_strip[i + 1]):
                if abs(seg.y - nxt.y) <= tolerance:
                    right[i][a] = max(right[i][a], right[i + 1][b] + 1)
    return [[lt + rt - 1 for lt, rt in zip(ls, rs)] for ls, rs in zip(left, right)]


def persistent(per_strip, min_track, tolerance):
    """Drop crossings that do not continue through ``min_track`` consecutive strips."""
    if min_track <= 1:
        return per_strip
    lengths = track_lengths(per_strip, tolerance)
    return [[s for s, k in zip(segs, ks) if k >= min_track] for segs, ks in zip(per_strip, lengths)]


def estimate_spacings(segments):
    """Minimum and maximum gap between consecutive crossings."""
    if len(segments) < 2:
        raise SpacingEstimationError(f"need at least 2 segments, got {len(segments)}")
    gaps = np.diff([s.y for s in segments])
    return float(gaps.min()), float(gaps.max())


@dataclass(frozen=True)
class RegionConfig:
    enabled: bool = True
    n_strips: int = 8
    min_run: int = 5
    d1: float = None
    d2: float = None
    # estimate spacings from the first usable strip, or the median over strips
    spacing_source: str = "median"
    # strips without crossings take bounds interpolated from their neighbours
    interpolate_empty: bool = True
    # rows closer than this merge while the spacing is still unknown
    provisional_merge: float = 2.0
    # a crossing must link through this many neighbouring strips (1 disables)
    min_track_strips: int = 4
    # steepest tilt, in degrees, tolerated when linking crossings across strips
    max_tilt_deg: float = 10.0

    def __post_init__(self):
        if self.spacing_source not in ("first", "median"):
            raise ValueError("spacing_source must be 'first' or 'median'")
        if self.min_run < 1 or self.n_strips < 1 or self.min_track_strips < 1:
            raise ValueError("min_run, n_strips and min_track_strips must be >= 1")
        if not 0 <= self.max_tilt_deg < 90:
            raise ValueError("max_tilt_deg must lie in [0, 90)")


def _estimate(per_strip, source):
    usable = [segs for segs in per_strip if len(segs) >= 2]
    if not usable:
        raise SpacingEstimationError("no strip contains two or more line crossings")
    if source == "first":
        return estimate_spacings(usable[0])
    pairs = np.array([estimate_spacings(segs) for segs in usable])
    return float(np.median(pairs[:, 0])), float(np.median(pairs[:, 1]))


def _interpolate(bounds, empty):
    filled = [i for i in range(len(bounds)) if i not in empty]
    if not filled:
        return bounds
    out = list(bounds)
    for i in empty:
        left = max((j for j in filled if j < i), default=None)
        right = min((j for j in filled if j > i), default=None)
        if left is None or right is None:
            src = bounds[left if right is None else right]
            out[i] = (src[0], src[1])
        else:
            w = (i - left) / (right - left)
            out[i] = (int(round(bounds[left][0] + w * (bounds[right][0] - bounds[left][0]))),
                      int(round(bounds[left][1] + w * (bounds[right][1] - bounds[left][1]))))
    return out


def link_tolerance(strips, max_tilt_deg):
    """Row drift allowed between crossings of one line in neighbouring strips."""
    width = max(s.width for s in strips)
    return math.ceil(width * math.tan(math.radians(max_tilt_deg))) + 2


def build_region(edges, config=RegionConfig()):
    """Region model for an edge map.

    ``d1`` / ``d2`` come from the config when given, otherwise they are
    measured from the crossings.  When nothing can be measured the region is
    the whole image (``i_c == 1``) and ``d1``, ``d2`` are ``None``.
    """
    strips = split_strips(edges.width, config.n_strips)
    runs = _all_strip_runs(edges, strips)
    tol = link_tolerance(strips, config.max_tilt_deg)
    min_track = min(config.min_track_strips, len(strips))
    d1, d2 = config.d1, config.d2
    if d1 is None or d2 is None:
        provisional = persistent(
            [find_segments(edges, s, config.min_run, 2 * config.provisional_merge, r)
             for s, r in zip(strips, runs)],
            min_track, tol)
        try:
            est1, est2 = _estimate(provisional, config.spacing_source)
        except SpacingEstimationError:
            if d1 is None and d2 is None:
                return RegionModel.full(edges.width, edges.height, strips)
            est1 = est2 = d1 if d2 is None else d2
        d1 = est1 if d1 is None else d1
        d2 = est2 if d2 is None else d2
        d1 = min(d1, d2)

    per_strip = persistent([find_segments(edges, s, config.min_run, d1, r) for s, r in zip(strips, runs)],
                           min_track, tol)
    bounds = [strip_boundaries(segs, d2, edges.height) for segs in per_strip]
    if config.interpolate_empty:
        bounds = _interpolate(bounds, {i for i, segs in enumerate(per_strip) if not segs})
    sb = tuple(StripBounds(s.x_start, s.x_end, u, l) for s, (u, l) in zip(strips, bounds))
    i_c = segmentation_coefficient(sb, edges.width, edges.height)
    return RegionModel(edges.width, edges.height, sb, float(d1), float(d2), i_c,
                       sentinel=i_c == 1.0 and not any(per_strip))


def mask_edges(edges, region):
    """Edge map restricted to the region."""
    if (edges.width, edges.height) != (region.width, region.height):
        raise ValueError(
            f"edge map is {edges.width}x{edges.height}, region is {region.width}x{region.height}")
    return BinaryImage(edges.mask & region.mask())
