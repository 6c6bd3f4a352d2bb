import math

import numpy as np
import pytest

import tensorfda as tf


def test_basis_is_orthonormal():
    b = tf.OrthonormalBasis.uniform(0.0, 1.0, 10, 3)
    nodes, weights = np.polynomial.legendre.leggauss(6)
    edges = np.linspace(0.0, 1.0, 12)
    x = np.concatenate([(lo + hi) / 2 + (hi - lo) / 2 * nodes for lo, hi in zip(edges[:-1], edges[1:])])
    w = np.concatenate([(hi - lo) / 2 * weights for lo, hi in zip(edges[:-1], edges[1:])])
    e = b.evaluate(x)
    gram = e.T @ (e * w[:, None])
    assert np.abs(gram - np.eye(b.dimension)).max() < 1e-10


def test_projection_of_sine():
    b = tf.OrthonormalBasis.uniform(0.0, 1.0, 34, 3)
    x = np.linspace(0.0, 1.0, 2049)
    y = np.sin(2 * math.pi * x)
    c = b.project(x, y)
    assert np.abs(b.evaluate(x) @ c - y).max() < 1e-4


def test_hilbert_and_gradient():
    h = tf.HilbertMap(1)
    assert [h.backward(t) for t in range(4)] == [(0, 0), (0, 1), (1, 1), (1, 0)]
    assert h.forward(1, 1) == 2
    img = np.add.outer(np.arange(6.0), np.arange(5.0))
    g = tf.gradient_image(img)
    assert np.allclose(g[1:-1, 1:-1], math.sqrt(2.0), atol=1e-12)
    assert len(tf.hilbert_sequence(np.zeros((28, 28)))) == 32 * 32


def test_pipeline_and_classify(tmp_path):
    cfg = tf.default_config()
    cfg["dataset"]["synthetic"]["samples_per_class"] = 140
    cfg["basis"]["interior_knots"] = 20
    metrics = tf.run_pipeline(cfg, tmp_path)
    assert metrics["test_accuracy"] >= 0.95
    curves = tf.read_csv_curves(tmp_path / "eigenfunctions_0.csv")
    assert "mean" in curves
    label, residuals = tf.classify(tmp_path / "model.json", curves["x"], curves["mean"])
    assert label == 0
    assert len(residuals) == 2


def test_errors_are_typed(tmp_path):
    with pytest.raises(tf.ConfigError):
        tf.run_pipeline({"seeed": 3})
    bad = tmp_path / "model.json"
    bad.write_text('{"format_version": 7}')
    with pytest.raises(tf.VersionError):
        tf.classify(bad, [0.0, 1.0], [0.0, 0.0])
