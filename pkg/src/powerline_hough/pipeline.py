"""End-to-end line detection: edge map, optional region, voting, filtering.

Three methods share the preprocessing stage:

``standard``
    Exhaustive voting over every edge pixel.
``random``
    Two-point sampling over every edge pixel.
``improved``
    Two-point sampling restricted to the line region, followed by the
    orientation and spacing filters.

With the region and both filters disabled, ``improved`` runs exactly the
``random`` method.
"""

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field

from . import filters as flt
from .hough import Accumulator, accumulate, find_peaks, sample_votes, sort_lines
from .prob import p_hit
from .region import RegionConfig, RegionModel, build_region
from .ridge import RidgeParams, canny_baseline, ridge_map

METHODS = ("standard", "random", "improved")


class ConfigError(ValueError):
    """A configuration document is malformed."""


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


@dataclass(frozen=True)
class PreprocessConfig:
    method: str = "hessian"
    sigma: float = 1.0
    response_threshold: float = 0.3
    polarity: str = "bright"
    canny_low: float = 20.0
    canny_high: float = 50.0

    def __post_init__(self):
        if self.method not in ("hessian", "canny"):
            raise ConfigError(f"unknown preprocessing method {self.method!r}")
        if self.method == "hessian":
            RidgeParams(self.sigma, self.response_threshold, self.polarity)
        elif self.canny_low > self.canny_high or self.canny_low < 0:
            raise ConfigError("need 0 <= canny_low <= canny_high")


@dataclass(frozen=True)
class HoughConfig:
    theta_bins: int = 180
    rho_res: float = 1.0
    # absolute vote threshold; None means threshold_fraction of the strongest peak
    vote_threshold: int = None
    threshold_fraction: float = 0.5
    # fixed sample count; None sizes the budget from the hit probability
    max_samples: int = None
    target_votes: int = 150
    # pixels on one line; None takes the image width
    expected_line_pixels: int = None
    min_samples: int = 500
    sample_cap: int = 200_000
    epsilon_theta_deg: float = 1.0
    epsilon_rho: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.theta_bins < 1 or not self.rho_res > 0:
            raise ConfigError("theta_bins must be >= 1 and rho_res positive")
        if self.vote_threshold is not None and self.vote_threshold < 2:
            raise ConfigError("vote_threshold must be >= 2")
        if not 0 < self.threshold_fraction <= 1:
            raise ConfigError("threshold_fraction must lie in (0, 1]")
        if self.max_samples is not None and self.max_samples < 1:
            raise ConfigError("max_samples must be >= 1")
        if self.target_votes < 1 or not 1 <= self.min_samples <= self.sample_cap:
            raise ConfigError("need target_votes >= 1 and 1 <= min_samples <= sample_cap")
        if self.epsilon_theta_deg < 0 or self.epsilon_rho < 0:
            raise ConfigError("tolerances must be non-negative")


@dataclass(frozen=True)
class OutputConfig:
    csv: str = None
    overlay: str = None
    report: str = None


_SECTIONS = {
    "preprocess": PreprocessConfig,
    "hough": HoughConfig,
    "region": RegionConfig,
    "filter": flt.FilterParams,
    "output": OutputConfig,
}


@dataclass(frozen=True)
class PipelineConfig:
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    hough: HoughConfig = field(default_factory=HoughConfig)
    region: RegionConfig = field(default_factory=RegionConfig)
    filter: flt.FilterParams = field(default_factory=flt.FilterParams)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self):
        return {name: dataclasses.asdict(getattr(self, name)) for name in _SECTIONS}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(doc) - set(_SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")
        parts = {}
        for name, kind in _SECTIONS.items():
            sub = doc.get(name, {})
            if not isinstance(sub, dict):
                raise ConfigError(f"section {name!r} must be an object")
            names = {f.name for f in dataclasses.fields(kind)}
            bad = set(sub) - names
            if bad:
                raise ConfigError(f"unknown key(s) in {name!r}: {', '.join(sorted(bad))}")
            try:
                parts[name] = kind(**sub)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"section {name!r}: {exc}") from exc
        return cls(**parts)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def preprocess(img, config=PreprocessConfig()):
    """Binary edge map of a grayscale image."""
    if config.method == "hessian":
        return ridge_map(img, RidgeParams(config.sigma, config.response_threshold, config.polarity))
    return canny_baseline(img, config.canny_low, config.canny_high)


def sample_budget(n_points, width, config):
    """Number of pair draws for the sampled methods.

    Enough draws that a line of ``expected_line_pixels`` is expected to
    collect ``target_votes`` votes when ``n_points`` pixels are sampled.
    Fewer candidate pixels raise the hit chance, so the budget shrinks.
    """
    if config.max_samples is not None:
        return config.max_samples
    if n_points < 2:
        return config.min_samples
    line = min(config.expected_line_pixels or width, n_points)
    p = p_hit(line, n_points) if line >= 2 else 0.0
    if p <= 0.0:
        return config.sample_cap
    return int(min(max(math.ceil(config.target_votes / p), config.min_samples), config.sample_cap))


@dataclass
class DetectionReport:
    method: str
    config: dict
    edge_pixels: int
    sampled_pixels: int
    samples: int
    threshold: int
    region: RegionModel
    lines: list
    counts: dict
    timings: dict = None
    diagnostic: str = None

    @property
    def hough_ms(self):
        """Time of the voting stage plus region building and filtering."""
        if not self.timings:
            return 0.0
        return sum(v for k, v in self.timings.items() if k != "preprocess")

    def to_dict(self, include_timings=False):
        doc = {
            "method": self.method,
            "config": self.config,
            "edge_pixels": self.edge_pixels,
            "sampled_pixels": self.sampled_pixels,
            "samples": self.samples,
            "threshold": self.threshold,
            "region": self.region.to_dict() if self.region is not None else None,
            "counts": dict(self.counts),
            "lines": [
                {"theta_deg": l.theta_deg, "rho": l.rho, "votes": l.votes} for l in self.lines
            ],
            "diagnostic": self.diagnostic,
        }
        if include_timings:
            doc["timings_ms"] = dict(self.timings or {})
        return doc

    def to_json(self, include_timings=False):
        return json.dumps(self.to_dict(include_timings), indent=2) + "\n"


def _threshold(strongest, config):
    if config.vote_threshold is not None:
        return int(config.vote_threshold)
    return max(2, int(math.ceil(config.threshold_fraction * strongest)))


def _check_counts(counts):
    if not counts["candidates"] >= counts["after_slope"] >= counts["after_spacing"]:
        raise AssertionError(f"stage counts increased: {counts}")


def detect_edges(edges, config=PipelineConfig(), method="improved", img_width=None):
    """Run one detection method on a prepared edge map.

    Stage timings cover voting, and for ``improved`` also region building,
    masking and filtering; preprocessing is excluded.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    hc = config.hough
    width = img_width or edges.width
    timings = {}
    region = None
    diagnostic = None
    use_region = method == "improved" and config.region.enabled
    use_filters = method == "improved" and config.filter.enabled

    if use_region:
        t0 = time.perf_counter()
        try:
            region = build_region(edges, config.region)
        except ValueError as exc:
            raise StageError("region", exc) from exc
        timings["region"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    if method == "standard":
        acc = Accumulator.empty(edges.width, edges.height, hc.theta_bins, hc.rho_res)
        xs, ys = edges.coords()
        accumulate(xs, ys, acc)
        sampled = int(xs.size)
        samples = 0
        threshold = _threshold(int(acc.cells.max()), hc)
        candidates = find_peaks(acc, threshold)
    else:
        xs, ys = edges.coords()
        if region is not None:
            inside = region.contains(xs, ys)
            xs, ys = xs[inside], ys[inside]
        sampled = int(xs.size)
        samples = sample_budget(xs.size, width, hc)
        sv = sample_votes(xs, ys, edges.width, edges.height, samples, hc.seed,
                          math.radians(hc.epsilon_theta_deg), hc.epsilon_rho)
        diagnostic = sv.diagnostic
        if sv.diagnostic is not None:
            samples = 0
        threshold = _threshold(sv.max_votes, hc)
        candidates = sv.lines(threshold)
    timings["hough"] = (time.perf_counter() - t0) * 1e3

    lines = candidates
    after_slope = candidates
    if use_filters:
        t0 = time.perf_counter()
        after_slope = flt.slope_mode_filter(candidates, config.filter)
        lines = sort_lines(flt.spacing_variance_filter(after_slope, config.filter))
        timings["filter"] = (time.perf_counter() - t0) * 1e3
    counts = {"candidates": len(candidates), "after_slope": len(after_slope),
              "after_spacing": len(lines)}
    _check_counts(counts)

    return DetectionReport(method, config.to_dict(), edges.count, sampled, samples,
                           threshold, region, lines, counts, timings, diagnostic)


def detect_pipeline(img, config=PipelineConfig(), method="improved"):
    """Preprocess ``img`` and run ``method`` on the resulting edge map."""
    t0 = time.perf_counter()
    try:
        edges = preprocess(img, config.preprocess)
    except ValueError as exc:
        raise StageError("preprocess", exc) from exc
    pre_ms = (time.perf_counter() - t0) * 1e3
    report = detect_edges(edges, config, method)
    report.timings = {"preprocess": pre_ms, **report.timings}
    return report


LINE_CSV_HEADER = "method,theta_deg,rho_px,votes"


def lines_csv(method, lines):
    rows = [LINE_CSV_HEADER]
    rows += [f"{method},{l.theta_deg:.6f},{l.rho:.6f},{l.votes}" for l in lines]
    return "\n".join(rows) + "\n"
