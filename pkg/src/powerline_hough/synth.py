"""Seeded synthetic scenes of parallel power lines with exact ground truth.

Scenes are drawn in layers: background, textured clutter blocks, short clutter
segments, the lines themselves, then salt noise.  All randomness comes from
one SplitMix64 stream, so a spec and its seed pin the image bit-for-bit.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .hough import PolarLine, align, angle_gap, normalize
from .raster import GrayImage, clip_line
from .rng import SplitMix64


@dataclass(frozen=True)
class LineSpec:
    theta_deg: float
    rho: float
    width: int = 1

    def __post_init__(self):
        if self.width not in (1, 2):
            raise ValueError("line width must be 1 or 2 px")


@dataclass(frozen=True)
class NoiseSpec:
    salt: float = 0.0
    clutter_blocks: int = 0
    block_size: tuple = (16, 64)
    clutter_segments: int = 0
    segment_length: tuple = (10, 40)

    def __post_init__(self):
        if not 0 <= self.salt <= 1:
            raise ValueError("salt density must lie in [0, 1]")
        if self.clutter_blocks < 0 or self.clutter_segments < 0:
            raise ValueError("clutter counts must be non-negative")


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    lines: tuple = ()
    noise: NoiseSpec = NoiseSpec()
    band: tuple = None
    line_level: int = 200
    background: int = 60
    seed: int = 0
    conformant: bool = False
    d1: float = None
    d2: float = None

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(
            l if isinstance(l, LineSpec) else LineSpec(**l) for l in self.lines))
        if isinstance(self.noise, dict):
            object.__setattr__(self, "noise", NoiseSpec(**self.noise))
        if self.band is not None:
            object.__setattr__(self, "band", tuple(self.band))

    def to_dict(self):
        d = asdict(self)
        d["lines"] = [asdict(l) for l in self.lines]
        d["noise"] = asdict(self.noise)
        d["noise"]["block_size"] = list(self.noise.block_size)
        d["noise"]["segment_length"] = list(self.noise.segment_length)
        d["band"] = list(self.band) if self.band is not None else None
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        noise = dict(doc.pop("noise", {}))
        for key in ("block_size", "segment_length"):
            if key in noise:
                noise[key] = tuple(noise[key])
        lines = tuple(LineSpec(**l) for l in doc.pop("lines", ()))
        return cls(lines=lines, noise=NoiseSpec(**noise), **doc)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class GroundTruth:
    lines: tuple
    band: tuple
    band_fraction: float
    d1: float
    d2: float
    pixels: tuple = field(repr=False, default=())

    def expected_ic(self, height):
        """Band plus the ``d2`` margins on both sides, as a share of the rows."""
        if self.d2 is None:
            return self.band_fraction
        return self.band_fraction + 2.0 * self.d2 / height

    def to_dict(self):
        return {
            "lines": [{"theta_deg": math.degrees(l.theta), "rho": l.rho} for l in self.lines],
            "band": list(self.band) if self.band else None,
            "band_fraction": self.band_fraction,
            "d1": self.d1,
            "d2": self.d2,
            "pixel_counts": [int(p.size) for p in self.pixels],
        }


def _line_rows(line, width):
    """Row of the line centre at the first and last column."""
    t = math.radians(line.theta_deg)
    s, c = math.sin(t), math.cos(t)
    if abs(s) < 1e-9:
        return None
    return [(line.rho - x * c) / s for x in (0, width - 1)]


def validate(spec):
    if spec.width < 1 or spec.height < 1:
        raise ValueError("scene must be at least 1x1")
    for l in spec.lines:
        if clip_line(math.radians(l.theta_deg), l.rho, spec.width, spec.height) is None:
            raise ValueError(f"line {l} does not cross the canvas")
    if spec.band is not None:
        top, bottom = spec.band
        for l in spec.lines:
            rows = _line_rows(l, spec.width)
            if rows is None or min(rows) < top or max(rows) > bottom:
                raise ValueError(f"line {l} leaves the band {spec.band}")
    if spec.conformant and len(spec.lines) > 1:
        thetas = [math.radians(l.theta_deg) for l in spec.lines]
        spread = max(angle_gap(a, b) for a in thetas for b in thetas)
        if spread > math.radians(2.0):
            raise ValueError("conformant scenes need lines within 2 degrees of each other")
        if spec.d1 is not None and spec.d2 is not None:
            gaps = np.diff(sorted(l.rho for l in spec.lines))
            if gaps.min() < spec.d1 - 1e-9 or gaps.max() > spec.d2 + 1e-9:
                raise ValueError(f"line gaps {gaps.tolist()} outside [{spec.d1}, {spec.d2}]")


def _line_mask(theta, rho, lw, w, h):
    ys, xs = np.mgrid[0:h, 0:w]
    d = xs * math.cos(theta) + ys * math.sin(theta) - rho
    return (d >= -lw / 2.0) & (d < lw / 2.0)


def _stamp_block(img, rng, spec):
    lo, hi = spec.noise.block_size
    bw, bh = rng.integers(lo, hi), rng.integers(lo, hi)
    x0 = rng.below(max(spec.width - bw, 0) + 1)
    y0 = rng.below(max(spec.height - bh, 0) + 1)
    # clutter stays darker than the lines so they remain visible across it
    top = max(spec.background + 10, min(spec.background + 70, spec.line_level - 45))
    base = rng.integers(spec.background + 10, top)
    amp = rng.integers(5, 25)
    patch = img[y0:y0 + bh, x0:x0 + bw]
    tex = rng.random_block(patch.size).reshape(patch.shape)
    patch[...] = np.clip(base + (2.0 * tex - 1.0) * amp, 0, 255)


def _stamp_segment(img, rng, spec):
    lo, hi = spec.noise.segment_length
    length = rng.integers(lo, hi)
    cx, cy = rng.uniform(0, spec.width - 1), rng.uniform(0, spec.height - 1)
    ang = rng.uniform(0, math.pi)
    lw = 1 + rng.below(2)
    level = rng.integers(spec.line_level - 40, 255)
    steps = max(int(length) * 2, 1)
    for k in range(steps + 1):
        t = (k / steps - 0.5) * length
        x = cx + t * math.cos(ang)
        y = cy + t * math.sin(ang)
        xi, yi = int(math.floor(x + 0.5)), int(math.floor(y + 0.5))
        for dy in range(lw):
            if 0 <= xi < spec.width and 0 <= yi + dy < spec.height:
                img[yi + dy, xi] = level


def generate_scene(spec):
    """Render ``spec`` and return ``(GrayImage, GroundTruth)``."""
    validate(spec)
    w, h = spec.width, spec.height
    rng = SplitMix64(spec.seed)
    img = np.full((h, w), spec.background, dtype=np.float64)
    for _ in range(spec.noise.clutter_blocks):
        _stamp_block(img, rng, spec)
    for _ in range(spec.noise.clutter_segments):
        _stamp_segment(img, rng, spec)

    truth_lines, pixel_sets = [], []
    for l in spec.lines:
        theta, rho = normalize(math.radians(l.theta_deg), l.rho)
        m = _line_mask(math.radians(l.theta_deg), l.rho, l.width, w, h)
        img[m] = spec.line_level
        truth_lines.append(PolarLine(theta, rho, 0))
        pixel_sets.append(np.flatnonzero(m.ravel()))

    if spec.noise.salt > 0:
        salt = rng.random_block(w * h).reshape(h, w) < spec.noise.salt
        img[salt] = 255

    band, frac, d1, d2 = _band_stats(spec)
    truth = GroundTruth(tuple(truth_lines), band, frac, d1, d2, tuple(pixel_sets))
    return GrayImage(np.clip(np.rint(img), 0, 255).astype(np.uint8)), truth


def _band_stats(spec):
    """Row band spanned by the lines and their vertical spacings."""
    if not spec.lines:
        return None, 0.0, None, None
    rows = [_line_rows(l, spec.width) for l in spec.lines]
    if any(r is None for r in rows):
        return None, 0.0, None, None
    top = min(min(r) for r in rows)
    bottom = max(max(r) for r in rows)
    # vertical distance between neighbouring lines, measured at the left edge
    left = sorted(r[0] for r in rows)
    gaps = np.diff(left)
    extent = left[-1] - left[0]
    d1 = float(gaps.min()) if gaps.size else None
    d2 = float(gaps.max()) if gaps.size else None
    return (int(math.floor(top)), int(math.ceil(bottom))), extent / spec.height, d1, d2


def conformant_spec(seed, width=620, height=810, n_lines=4, salt=0.005, clutter_blocks=10,
                    clutter_segments=10, band_range=(0.1, 0.4), tilt_deg=5.0, spacing_ratio=1.15,
                    block_size=(16, 96), segment_length=(10, 60)):
    """Random scene that satisfies the parallel, evenly spaced bundle model.

    The band fraction (bundle plus ``d2`` margins above and below) is drawn
    from ``band_range``; gaps are integers drawn from ``[d1, d2]`` with
    ``d2 = floor(spacing_ratio * d1)``.
    """
    rng = SplitMix64(seed ^ 0x5EED5EED)
    frac = rng.uniform(*band_range)
    gaps_n = n_lines - 1
    # widest possible region: all gaps at d2 plus two d2 margins plus a few rows of slack
    d1 = max(2, int(math.floor((frac * height - 6) / ((gaps_n + 2) * spacing_ratio))))
    d2 = max(d1, int(math.floor(spacing_ratio * d1)))
    gaps = [rng.integers(d1, d2) for _ in range(gaps_n)]
    theta_deg = 90.0 + rng.uniform(-tilt_deg, tilt_deg)
    t = math.radians(theta_deg)
    s, c = math.sin(t), math.cos(t)
    # y(x) = (rho - x c) / s; keep the whole region (with d2 margins) on the canvas
    sweep = [-(x * c) / s for x in (0, width - 1)]
    span = sum(gaps)
    lo = d2 + 2 - min(sweep)
    hi = height - 1 - d2 - 2 - span - max(sweep)
    if hi < lo:
        raise ValueError("scene parameters do not fit the canvas")
    y0 = rng.uniform(lo, hi)
    offsets = np.concatenate([[0.0], np.cumsum(gaps)])
    lines = tuple(LineSpec(theta_deg, (y0 + off) * s, 1) for off in offsets)
    noise = NoiseSpec(salt, clutter_blocks, tuple(block_size), clutter_segments, tuple(segment_length))
    return SceneSpec(width, height, lines, noise, None, 200, 60, seed, True, d1 * s, d2 * s)


@dataclass(frozen=True)
class EvalMetrics:
    tp: int
    fp: int
    fn: int
    eps_theta_deg: float
    eps_rho: float

    @property
    def precision(self):
        return 1.0 if self.tp + self.fp == 0 else self.tp / (self.tp + self.fp)

    @property
    def recall(self):
        return 1.0 if self.tp + self.fn == 0 else self.tp / (self.tp + self.fn)


def evaluate(detected, truth, eps_theta_deg=1.0, eps_rho=2.0):
    """Greedy one-to-one matching of detections to true lines.

    Candidate pairs within both tolerances are matched in order of increasing
    normalized cost ``dtheta / eps_theta + drho / eps_rho``.
    """
    if not eps_theta_deg > 0 or not eps_rho > 0:
        raise ValueError("tolerances must be positive")
    truth_lines = truth.lines if isinstance(truth, GroundTruth) else tuple(truth)
    eps_t = math.radians(eps_theta_deg)
    pairs = []
    for i, t in enumerate(truth_lines):
        for j, d in enumerate(detected):
            theta, rho = align(t, d)
            dt, dr = abs(theta - t.theta), abs(rho - t.rho)
            if dt <= eps_t and dr <= eps_rho:
                pairs.append((dt / eps_t + dr / eps_rho, i, d.theta, d.rho, -d.votes, j))
    pairs.sort()
    used_t, used_d = set(), set()
    for _, i, *_rest, j in pairs:
        if i in used_t or j in used_d:
            continue
        used_t.add(i)
        used_d.add(j)
    tp = len(used_t)
    return EvalMetrics(tp, len(detected) - tp, len(truth_lines) - tp, eps_theta_deg, eps_rho)


def bundle_spec(seed=7, width=620, height=810, gaps=(14, 20, 14), theta_deg=91.0, top=380.0,
                salt=0.005):
    """Four slightly tilted lines with the given vertical gaps and light salt noise."""
    s = math.sin(math.radians(theta_deg))
    ys = np.concatenate([[0.0], np.cumsum(gaps)]) + top
    lines = tuple(LineSpec(theta_deg, y * s, 1) for y in ys)
    return SceneSpec(width, height, lines, NoiseSpec(salt), None, 200, 60, seed, True,
                     min(gaps) * s, max(gaps) * s)
