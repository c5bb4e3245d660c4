import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from powerline_hough.hough import PolarLine
from powerline_hough.synth import (EvalMetrics, GroundTruth, LineSpec, NoiseSpec, SceneSpec,
                                   bundle_spec, conformant_spec, evaluate, generate_scene, validate)


def truth_of(lines):
    return GroundTruth(tuple(lines), None, 0.0, None, None)


def test_blank_scene():
    img, truth = generate_scene(SceneSpec(40, 30, background=17))
    assert np.all(img.pixels == 17)
    assert truth.lines == () and truth.band is None


def test_single_horizontal_line_pixels():
    img, truth = generate_scene(SceneSpec(50, 20, (LineSpec(90.0, 7.0),)))
    assert truth.pixels[0].size == 50
    assert np.all(img.pixels[7] == 200)
    assert np.count_nonzero(img.pixels == 200) == 50


def test_two_pixel_line():
    _, truth = generate_scene(SceneSpec(50, 20, (LineSpec(90.0, 7.5, 2),)))
    assert truth.pixels[0].size == 100


def test_line_off_canvas_rejected():
    with pytest.raises(ValueError):
        generate_scene(SceneSpec(50, 20, (LineSpec(90.0, 500.0),)))


def test_line_width_validated():
    with pytest.raises(ValueError):
        LineSpec(90.0, 3.0, 3)


def test_noise_validated():
    with pytest.raises(ValueError):
        NoiseSpec(salt=1.5)


def test_conformant_rejects_spread():
    spec = SceneSpec(100, 100, (LineSpec(90, 30), LineSpec(94, 60)), conformant=True)
    with pytest.raises(ValueError):
        validate(spec)


def test_conformant_rejects_gap_outside_range():
    spec = SceneSpec(100, 100, (LineSpec(90, 30), LineSpec(90, 40), LineSpec(90, 70)),
                     conformant=True, d1=10, d2=20)
    with pytest.raises(ValueError):
        validate(spec)


def test_band_constraint():
    spec = SceneSpec(100, 100, (LineSpec(90, 30),), band=(40, 60))
    with pytest.raises(ValueError):
        validate(spec)


def test_bundle_scene_deterministic():
    spec = bundle_spec()
    assert (spec.width, spec.height, spec.seed) == (620, 810, 7)
    img1, truth1 = generate_scene(spec)
    img2, truth2 = generate_scene(spec)
    assert len(truth1.lines) == 4
    assert img1.pixels.tobytes() == img2.pixels.tobytes()
    assert truth1.lines == truth2.lines
    assert truth1.d1 == pytest.approx(14.0) and truth1.d2 == pytest.approx(20.0)


def test_seed_changes_noise():
    a, _ = generate_scene(conformant_spec(3))
    spec = conformant_spec(3)
    b, _ = generate_scene(SceneSpec.from_dict({**spec.to_dict(), "seed": 4}))
    assert a.pixels.tobytes() != b.pixels.tobytes()


def test_truth_pixels_before_noise():
    spec = SceneSpec(64, 64, (LineSpec(90.0, 20.0),), NoiseSpec(salt=0.5), seed=1)
    _, truth = generate_scene(spec)
    assert truth.pixels[0].tolist() == list(range(20 * 64, 21 * 64))


def test_spec_json_round_trip():
    spec = conformant_spec(12)
    again = SceneSpec.from_json(spec.to_json())
    assert again == spec
    assert json.loads(spec.to_json())["noise"]["block_size"] == list(spec.noise.block_size)


@pytest.mark.parametrize("seed", range(20))
def test_conformant_spec_model(seed):
    spec = conformant_spec(seed)
    validate(spec)
    _, truth = generate_scene(spec)
    assert len(truth.lines) == 4
    assert 0 < truth.expected_ic(spec.height) <= 0.4
    thetas = [l.theta for l in truth.lines]
    assert max(thetas) - min(thetas) < 1e-12


def test_generation_under_fixed_seed_is_stable():
    img, _ = generate_scene(conformant_spec(0, clutter_blocks=20, clutter_segments=10, salt=0.01))
    img2, _ = generate_scene(conformant_spec(0, clutter_blocks=20, clutter_segments=10, salt=0.01))
    assert img.pixels.tobytes() == img2.pixels.tobytes()


# evaluate

LINES = [PolarLine(math.radians(90 + 0.1 * k), 100.0 + 20 * k, 0) for k in range(4)]


def test_evaluate_exact():
    m = evaluate(LINES, truth_of(LINES))
    assert (m.tp, m.fp, m.fn) == (4, 0, 0)
    assert m.precision == m.recall == 1.0


def test_evaluate_empty_detection():
    m = evaluate([], truth_of(LINES))
    assert m.recall == 0.0 and m.precision == 1.0


def test_evaluate_extra_line():
    m = evaluate(LINES + [PolarLine(math.radians(30), 5.0, 3)], truth_of(LINES))
    assert (m.tp, m.fp, m.fn) == (4, 1, 0)
    assert m.precision == pytest.approx(0.8) and m.recall == 1.0


def test_evaluate_one_to_one():
    truth = [PolarLine(math.pi / 2, 50.0)]
    m = evaluate([PolarLine(math.pi / 2, 50.5), PolarLine(math.pi / 2, 49.0)], truth)
    assert (m.tp, m.fp, m.fn) == (1, 1, 0)


def test_evaluate_across_wrap():
    truth = [PolarLine(math.radians(0.3), 40.0)]
    m = evaluate([PolarLine(math.radians(179.8), -41.0)], truth)
    assert m.tp == 1


def test_evaluate_tolerances():
    truth = [PolarLine(math.pi / 2, 50.0)]
    assert evaluate([PolarLine(math.pi / 2, 52.5)], truth).tp == 0
    assert evaluate([PolarLine(math.pi / 2 + math.radians(1.5), 50.0)], truth).tp == 0
    with pytest.raises(ValueError):
        evaluate([], truth, eps_theta_deg=0)


def test_empty_metrics_vacuous():
    m = EvalMetrics(0, 0, 0, 1.0, 2.0)
    assert m.precision == m.recall == 1.0


detections = st.lists(st.tuples(st.floats(85, 95), st.floats(90, 170), st.integers(1, 50)),
                      max_size=8)


@given(detections, st.randoms(use_true_random=False))
def test_evaluate_permutation_invariant(items, rnd):
    found = [PolarLine(math.radians(t), r, v) for t, r, v in items]
    shuffled = list(found)
    rnd.shuffle(shuffled)
    a = evaluate(found, truth_of(LINES))
    b = evaluate(shuffled, truth_of(LINES))
    assert (a.tp, a.fp, a.fn) == (b.tp, b.fp, b.fn)
    assert a.tp + a.fn == 4 and a.tp + a.fp == len(found)
