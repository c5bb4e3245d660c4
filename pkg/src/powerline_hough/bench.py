"""Timing and quality comparison of the three detection methods."""

import csv
import io
import json
import statistics
from dataclasses import dataclass
from pathlib import Path

from .pipeline import METHODS, PipelineConfig, detect_edges, preprocess
from .synth import EvalMetrics, SceneSpec, evaluate, generate_scene

BENCH_COLUMNS = ("scene_id", "method", "threshold", "elapsed_ms", "precision", "recall")

# Reference group (a) figures: method -> (vote threshold, elapsed ms).
# Kept for documentation; absolute timings depend on the machine.
REFERENCE_GROUP_A = {"standard": (112, 200.8), "random": (113, 123.0), "improved": (113, 72.2)}


@dataclass(frozen=True)
class BenchRecord:
    scene_id: str
    method: str
    threshold: int
    elapsed_ms: float
    metrics: EvalMetrics

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not self.elapsed_ms > 0:
            raise ValueError("elapsed time must be positive")

    def row(self):
        return (self.scene_id, self.method, str(self.threshold), f"{self.elapsed_ms:.3f}",
                f"{self.metrics.precision:.6f}", f"{self.metrics.recall:.6f}")


def _scene_list(scenes):
    for k, item in enumerate(scenes):
        if isinstance(item, tuple):
            yield item
        else:
            yield f"scene{k:03d}", item


def run_bench(scenes, config=PipelineConfig(), repetitions=3, methods=METHODS,
              eps_theta_deg=1.0, eps_rho=2.0):
    """Time each method on each scene and score its detections.

    ``scenes`` holds ``SceneSpec`` objects or ``(scene_id, SceneSpec)`` pairs.
    Preprocessing runs once per scene; the reported time is the median over
    ``repetitions`` runs of the method's voting stage (plus region and
    filtering for ``improved``).  Detections are identical across repetitions
    since every run is seeded.
    """
    if repetitions < 3:
        raise ValueError("repetitions must be >= 3")
    records = []
    for scene_id, spec in _scene_list(scenes):
        img, truth = generate_scene(spec)
        edges = preprocess(img, config.preprocess)
        for method in methods:
            times, report = [], None
            for _ in range(repetitions):
                report = detect_edges(edges, config, method)
                times.append(report.hough_ms)
            metrics = evaluate(report.lines, truth, eps_theta_deg, eps_rho)
            elapsed = max(statistics.median(times), 1e-6)
            records.append(BenchRecord(scene_id, method, report.threshold, elapsed, metrics))
    return records


def bench_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()


def summarize(records):
    """Per-method median time and aggregate detection counts."""
    out = {}
    for method in METHODS:
        rs = [r for r in records if r.method == method]
        if not rs:
            continue
        tp = sum(r.metrics.tp for r in rs)
        fp = sum(r.metrics.fp for r in rs)
        fn = sum(r.metrics.fn for r in rs)
        out[method] = {
            "scenes": len(rs),
            "median_ms": statistics.median(r.elapsed_ms for r in rs),
            "tp": tp,
            "fp": fp,
            "fn": fn,
            "precision": 1.0 if tp + fp == 0 else tp / (tp + fp),
            "recall": 1.0 if tp + fn == 0 else tp / (tp + fn),
        }
    return out


def load_scenes(directory):
    """``(scene_id, SceneSpec)`` for every ``*.json`` file, sorted by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory}: not a directory")
    scenes = []
    for path in sorted(directory.glob("*.json")):
        try:
            spec = SceneSpec.from_json(path.read_text(encoding="utf-8"))
        except (ValueError, TypeError, KeyError, json.JSONDecodeError) as exc:
            raise ValueError(f"{path}: {exc}") from exc
        scenes.append((path.stem, spec))
    if not scenes:
        raise ValueError(f"{directory}: no scene files")
    return scenes
