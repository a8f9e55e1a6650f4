"""Metrics, probes, and the time-stepping experiment."""

import numpy as np
import pytest

from lpde.errors import ArgumentError, MetricError
from lpde.evaluation import (
    Metrics,
    TimestepConfig,
    linear_probe,
    nmse,
    nmse_target_normalized,
    probe_task,
    relative_error,
    timestep_experiment,
)
from lpde.fields import SolutionField


class TestNMSE:
    def test_exact_prediction(self):
        x = np.random.default_rng(0).standard_normal((4, 7))
        assert nmse(x, x.copy()) == 0.0

    def test_hand_fixture(self):
        assert abs(nmse([[2.0, 0.0]], [[1.0, 0.0]]) - 0.25) < 1e-15

    def test_scale_sensitivity_of_printed_formula(self):
        u = np.random.default_rng(1).standard_normal((3, 5))
        assert abs(nmse(2 * u, u) - 0.25) < 1e-12

    def test_zero_norm_prediction_rejected(self):
        with pytest.raises(MetricError):
            nmse([[0.0, 0.0]], [[1.0, 0.0]])

    def test_joint_scaling_invariance(self):
        rng = np.random.default_rng(2)
        p, t = rng.standard_normal((4, 6)), rng.standard_normal((4, 6))
        assert abs(nmse(p, t) - nmse(3.7 * p, 3.7 * t)) < 1e-12

    def test_target_normalized_variant(self):
        assert abs(nmse_target_normalized([[2.0, 0.0]], [[1.0, 0.0]]) - 1.0) < 1e-15


class TestRelativeError:
    def test_exact(self):
        x = np.ones((2, 3))
        assert relative_error(x, x.copy()) == 0.0

    def test_hand_fixtures(self):
        assert abs(relative_error([[1.0, 1.0]], [[0.0, 0.0]]) - 1.0) < 1e-15
        assert abs(relative_error([[4.0]], [[3.0]]) - 0.25) < 1e-15

    def test_degree_zero_homogeneity(self):
        rng = np.random.default_rng(3)
        p, t = rng.standard_normal((4, 6)), rng.standard_normal((4, 6))
        assert abs(relative_error(p, t) - relative_error(5 * p, 5 * t)) < 1e-12

    def test_zero_norm_rejected(self):
        with pytest.raises(MetricError):
            relative_error([[0.0]], [[1.0]])


class TestLinearProbe:
    def test_recovers_linear_labels(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((200, 8))
        w = rng.standard_normal((8, 2))
        y = x @ w + 0.3
        res = linear_probe(x, y, probe_task("viscosity"), ridge_lambda=1e-10, seed=0)
        assert res.metrics.nmse <= 1e-10

    def test_constant_labels_intercept_only(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((100, 6))
        y = np.full(100, 2.5)
        res = linear_probe(x, y, probe_task("viscosity"), seed=0)
        assert res.metrics.relative_error <= 1e-10

    def test_ridge_reproducible(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((120, 5))
        y = rng.standard_normal(120)
        a = linear_probe(x, y, probe_task("viscosity"), seed=3)
        b = linear_probe(x, y, probe_task("viscosity"), seed=3)
        assert a.metrics == b.metrics

    def test_sgd_sigmoid_bounded_and_seeded(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((160, 6))
        true_w = rng.standard_normal(6)
        y = 0.002 + 0.005 / (1 + np.exp(-x @ true_w))
        task = probe_task("viscosity", bounds=(0.001, 0.008))
        a = linear_probe(x, y, task, mode="sgd_sigmoid", seed=1)
        b = linear_probe(x, y, task, mode="sgd_sigmoid", seed=1)
        assert a.metrics == b.metrics
        assert np.all(a.predictions >= 0.001) and np.all(a.predictions <= 0.008)

    def test_task_label_extraction(self, kdv_fields):
        task = probe_task("init_coeffs")
        labels = task.labels(kdv_fields)
        assert labels.shape == (len(kdv_fields), 20)
        ic = kdv_fields[0].meta["ic"]
        assert np.allclose(labels[0][:10], ic["amplitudes"])
        assert np.allclose(labels[0][10:], ic["frequencies"])

    def test_unknown_task(self):
        with pytest.raises(ArgumentError):
            probe_task("pressure")


def _constant_in_time_fields(count, n_t=48, n_x=64):
    """'Frozen dynamics' surrogate: u(x, t) = u0(x)."""
    rng = np.random.default_rng(99)
    fields = []
    x = np.arange(n_x) * (8.0 / n_x)
    for _ in range(count):
        prof = rng.standard_normal(3) @ np.stack(
            [np.sin(2 * np.pi * x / 8.0), np.cos(2 * np.pi * x / 8.0),
             np.sin(4 * np.pi * x / 8.0)]
        )
        vals = np.tile(prof, (n_t, 1))[None]
        fields.append(
            SolutionField(vals, np.linspace(0, 1, n_t), x,
                          meta={"equation": "kdv", "length": 8.0, "horizon": 1.0})
        )
    return fields


class TestTimestep:
    def test_copy_task_reaches_low_nmse(self):
        fields = _constant_in_time_fields(48)
        cfg = TimestepConfig(t_history=20, t_future=20, epochs=150, lr=5e-3,
                             batch_size=8)
        out = timestep_experiment(fields, None, cfg, seed=0)
        assert out["baseline"].nmse <= 1e-3

    def test_deterministic(self):
        fields = _constant_in_time_fields(24)
        cfg = TimestepConfig(epochs=3, batch_size=8)
        a = timestep_experiment(fields, None, cfg, seed=4)
        b = timestep_experiment(fields, None, cfg, seed=4)
        assert a["baseline"] == b["baseline"]

    def test_history_requirement(self):
        fields = _constant_in_time_fields(4, n_t=16)
        with pytest.raises(ArgumentError):
            timestep_experiment(fields, None, TimestepConfig(), seed=0)
