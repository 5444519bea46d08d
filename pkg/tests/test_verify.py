import json

import numpy as np
import pytest

from pixelflow.errors import UnknownClass
from pixelflow.modules.scene import SceneSpec, synthesize_scene
from pixelflow.modules.verify import presence_verify
from pixelflow.seeds import mix64
from pixelflow.values import ImageValue

FOUR = (("car", 1), ("bicycle", 1), ("motorbike", 1), ("truck", 1))


def test_generator_output_always_verifies_against_its_spec():
    # generator/verifier consistency over 100 seeds
    spec = SceneSpec(FOUR, "noise", 128, 96)
    expected = [n for n, _ in FOUR]
    for seed in range(100):
        scene = synthesize_scene(spec, mix64("genver", seed))
        ok, _ = presence_verify(scene.image, expected)
        assert ok.value, f"seed {seed} failed verification"


def test_solid_black_image_fails():
    image = ImageValue(np.zeros((32, 32, 3), dtype=np.uint8))
    ok, report = presence_verify(image, ["car"])
    assert not ok.value
    assert json.loads(report.text)["fractions"]["car"] == 0.0


def test_missing_class_reported_with_near_zero_fraction():
    scene = synthesize_scene(SceneSpec((("car", 1),), "noise", 128, 96), 5)
    ok, report = presence_verify(scene.image, ["car", "truck"])
    assert not ok.value
    fractions = json.loads(report.text)["fractions"]
    assert fractions["car"] >= 0.005
    assert fractions["truck"] == pytest.approx(0.0, abs=1e-6)


def test_unknown_class_rejected():
    image = ImageValue(np.zeros((8, 8, 3), dtype=np.uint8))
    with pytest.raises(UnknownClass):
        presence_verify(image, ["boat"])


def test_min_fraction_threshold_is_respected():
    scene = synthesize_scene(SceneSpec((("dog", 1),), "noise", 128, 96), 9)
    ok_low, _ = presence_verify(scene.image, ["dog"], min_fraction=0.001)
    ok_high, _ = presence_verify(scene.image, ["dog"], min_fraction=0.9)
    assert ok_low.value and not ok_high.value


def test_report_is_deterministic():
    scene = synthesize_scene(SceneSpec((("car", 1),), "noise", 64, 48), 3)
    r1 = presence_verify(scene.image, ["car"])[1]
    r2 = presence_verify(scene.image, ["car"])[1]
    assert r1.text == r2.text
