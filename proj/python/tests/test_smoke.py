import math
import os

import numpy as np
import pytest

import otsnet

TINY = {
    "model.dim": "16",
    "model.head_dim": "4",
    "model.encoder_depth": "5",
    "model.decoder_depth": "1",
    "model.slots": "6",
}


def test_config_defaults_and_overrides():
    cfg = otsnet.config()
    assert cfg["train.alpha"] == "0.3"
    assert cfg["model.lambda_init"] == "0.05"
    tiny = otsnet.config(overrides=TINY)
    assert tiny["model.dim"] == "16"
    with pytest.raises(otsnet.ConfigError, match="model.colour"):
        otsnet.config(overrides={"model.colour": "red"})


def test_synth_is_deterministic():
    a = otsnet.synth_generate(5, seed=3)
    b = otsnet.synth_generate(5, seed=3)
    assert len(a) == 5
    for (img_a, text_a), (img_b, text_b) in zip(a, b):
        assert img_a.shape == (8, 32)
        assert text_a == text_b
        assert 1 <= len(text_a) <= 5
        np.testing.assert_array_equal(img_a, img_b)


def test_build_mask_small_case():
    mask = otsnet.build_mask(2, 3)
    assert mask.shape == (3, 5)
    assert mask.dtype == np.bool_
    # Every slot sees the visual tokens.
    assert mask[:, :2].all()
    # Slots are causal among themselves.
    slots = mask[:, 2:]
    np.testing.assert_array_equal(slots, np.tril(np.ones((3, 3), dtype=bool)))


def test_gumbel_softmax_rows_sum_to_one():
    logits = np.array([[1.0, 2.0, 0.5], [0.0, 0.0, 0.0]])
    noise = otsnet.gumbel_noise([1, 2, 3], seed=1)[0]
    y = otsnet.gumbel_softmax(logits, 0.5, noise)
    assert y.shape == (2, 3)
    np.testing.assert_allclose(y.sum(axis=1), 1.0, atol=1e-12)
    plain = otsnet.gumbel_softmax(logits, 1.0)
    expected = np.exp(logits[0]) / np.exp(logits[0]).sum()
    np.testing.assert_allclose(plain[0], expected, atol=1e-12)


def test_lambda_value_matches_closed_form():
    q1, k1, q2, k2 = [0.1, 0.2], [0.3, -0.1], [0.05, 0.0], [0.2, 0.4]
    expected = math.exp(0.1 * 0.3 - 0.2 * 0.1) - math.exp(0.05 * 0.2) + 0.8
    assert otsnet.lambda_value(q1, k1, q2, k2, 0.8) == pytest.approx(expected, abs=1e-14)


def test_metrics():
    assert otsnet.edit_distance("kitten", "sitting") == 3
    seq, char = otsnet.score(["abc", "xy"], ["abc", "xz"])
    assert seq == pytest.approx(0.5)
    assert 0.0 < char < 1.0


def test_model_recognizes_a_batch(tmp_path):
    model = otsnet.Model(overrides=TINY)
    model.initialize(7)
    assert model.parameter_count > 0
    assert "mmcv.head.weight" in model.parameter_names
    images = np.stack([otsnet.render_text("ab"), np.zeros((8, 32))])
    out = model.recognize(images)
    assert len(out) == 2
    for record in out:
        assert set(record) == {"text", "confidences", "mean_confidence", "stop"}
        assert record["stop"] in ("eos", "max_len")
    assert model.recognize(images) == out

    model.save(str(tmp_path / "ckpt"))
    other = otsnet.Model(overrides=TINY)
    other.load(str(tmp_path / "ckpt"))
    np.testing.assert_array_equal(other.parameter("mmcv.head.weight"), model.parameter("mmcv.head.weight"))
    assert other.recognize(images) == out

    with pytest.raises(otsnet.DimensionError):
        model.recognize(np.zeros((1, 4, 4)))


def test_run_command_reports_config_errors(tmp_path):
    code, _, err = otsnet.run_command("train", config=str(tmp_path / "missing.cfg"))
    assert code == 2
    assert err
