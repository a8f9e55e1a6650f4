"""Frozen-representation evaluation: metrics, linear probes, time stepping."""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Optional

import numpy as np

from .errors import ArgumentError, MetricError, NumericError, ShapeError
from .fields import SolutionField
from .ssl import autodiff as ad
from .ssl.autodiff import Tensor, backward, zero_grads
from .ssl.nets import Module, _he
from .ssl.optim import AdamW
from .ssl.train import Normalization, encode
from .symmetry.policy import stack_coordinate_channels

_EPS = float(np.finfo(np.float64).eps)


# --------------------------------------------------------------------------
# Metrics (denominators follow the printed definitions: prediction norms).

def _rows(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    return a.reshape(a.shape[0], -1) if a.ndim > 1 else a.reshape(a.shape[0], 1)


def nmse(predictions, targets) -> float:
    """(1/N) sum_k ||pred_k - tgt_k||_2^2 / ||pred_k||_2^2."""
    p, t = _rows(predictions), _rows(targets)
    if p.shape != t.shape:
        raise ShapeError(f"prediction shape {p.shape} != target shape {t.shape}")
    denom = np.sum(p**2, axis=1)
    if np.any(denom == 0.0):
        raise MetricError("zero-norm prediction row makes NMSE undefined")
    return float(np.mean(np.sum((p - t) ** 2, axis=1) / denom))


def relative_error(predictions, targets) -> float:
    """(1/N) sum_k ||pred_k - tgt_k||_1 / ||pred_k||_1."""
    p, t = _rows(predictions), _rows(targets)
    if p.shape != t.shape:
        raise ShapeError(f"prediction shape {p.shape} != target shape {t.shape}")
    denom = np.sum(np.abs(p), axis=1)
    if np.any(denom == 0.0):
        raise MetricError("zero-norm prediction row makes the relative error undefined")
    return float(np.mean(np.sum(np.abs(p - t), axis=1) / denom))


def nmse_target_normalized(predictions, targets) -> float:
    """Variant normalizing by the target norm (distinct name on purpose)."""
    p, t = _rows(predictions), _rows(targets)
    if p.shape != t.shape:
        raise ShapeError(f"prediction shape {p.shape} != target shape {t.shape}")
    denom = np.sum(t**2, axis=1)
    if np.any(denom == 0.0):
        raise MetricError("zero-norm target row makes target-normalized NMSE undefined")
    return float(np.mean(np.sum((p - t) ** 2, axis=1) / denom))


def mse(predictions, targets) -> float:
    p, t = _rows(predictions), _rows(targets)
    return float(np.mean((p - t) ** 2))


@dataclass(frozen=True)
class Metrics:
    nmse: float
    relative_error: float
    mse: float

    def to_dict(self):
        return {"nmse": self.nmse, "relative_error": self.relative_error, "mse": self.mse}


def compute_metrics(predictions, targets) -> Metrics:
    return Metrics(
        nmse=nmse(predictions, targets),
        relative_error=relative_error(predictions, targets),
        mse=mse(predictions, targets),
    )


# --------------------------------------------------------------------------
# Probe tasks

def _viscosity_label(field: SolutionField) -> np.ndarray:
    nu = field.meta.get("viscosity")
    if nu is None:
        raise ArgumentError("field carries no viscosity label")
    return np.array([nu])


def _init_coeffs_label(field: SolutionField) -> np.ndarray:
    ic = field.meta.get("ic")
    if ic is None:
        raise ArgumentError("field carries no initial-condition coefficients")
    return np.concatenate([np.asarray(ic["amplitudes"]), np.asarray(ic["frequencies"])])


@dataclass(frozen=True)
class ProbeTask:
    """Label extractor plus output bounds for the bounded head."""

    task_id: str
    extract: Callable[[SolutionField], np.ndarray]
    bounds: tuple[float, float]

    def labels(self, fields) -> np.ndarray:
        return np.stack([self.extract(f) for f in fields])


_TASKS = {
    "viscosity": ProbeTask("viscosity", _viscosity_label, (0.001, 0.007)),
    "init_coeffs": ProbeTask("init_coeffs", _init_coeffs_label, (-0.5, 2.0 * np.pi)),
}


def probe_task(task_id: str, bounds: Optional[tuple] = None) -> ProbeTask:
    if task_id not in _TASKS:
        raise ArgumentError(f"unknown probe task {task_id!r}")
    base = _TASKS[task_id]
    if bounds is not None:
        lo, hi = float(bounds[0]), float(bounds[1])
        if not lo < hi:
            raise ArgumentError("bounds must satisfy lo < hi")
        return ProbeTask(base.task_id, base.extract, (lo, hi))
    return base


# --------------------------------------------------------------------------
# Linear probes

@dataclass
class ProbeResult:
    weights: np.ndarray
    intercept: np.ndarray
    metrics: Metrics
    mode: str
    predictions: np.ndarray = dataclass_field(repr=False, default=None)
    targets: np.ndarray = dataclass_field(repr=False, default=None)


def _split(n: int, train_fraction: float, seed: int):
    order = np.random.default_rng((seed, 10)).permutation(n)
    n_train = max(1, int(round(n * train_fraction)))
    return order[:n_train], order[n_train:]


def _ridge_fit(x, y, ridge_lambda):
    x_mean = x.mean(axis=0)
    y_mean = y.mean(axis=0)
    xc = x - x_mean
    yc = y - y_mean
    gram = xc.T @ xc + ridge_lambda * np.eye(x.shape[1])
    try:
        w = np.linalg.solve(gram, xc.T @ yc)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"ridge system singular beyond regularization: {exc}") from exc
    return w, y_mean - x_mean @ w


def _sgd_sigmoid_fit(x, y, bounds, seed, epochs=30, lr=1e-2, batch_size=64):
    lo, hi = bounds
    n, d = x.shape
    k = y.shape[1]
    rng = np.random.default_rng((seed, 11))
    w = Tensor(_he(rng, (d, k), d) * 0.1, requires_grad=True)
    b = Tensor(np.zeros(k), requires_grad=True)
    # Adam without decoupled decay, per the probe protocol.
    opt = AdamW([w, b], lr=lr, weight_decay=0.0)
    for epoch in range(epochs):
        order = np.random.default_rng((seed, 12, epoch)).permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            xt = Tensor(x[idx])
            yt = Tensor(y[idx])
            pred = Tensor(lo) + Tensor(hi - lo) * ad.sigmoid(xt @ w + b)
            diff = pred - yt
            loss = ad.tmean(diff * diff)
            zero_grads([w, b])
            backward(loss)
            opt.step()
    return w.value, b.value


def _sigmoid_predict(x, w, b, bounds):
    lo, hi = bounds
    return lo + (hi - lo) / (1.0 + np.exp(-(x @ w + b)))


def linear_probe(
    features: np.ndarray,
    labels: np.ndarray,
    task: ProbeTask,
    mode: str = "ridge_closed_form",
    ridge_lambda: float = 1e-3,
    train_fraction: float = 0.5,
    seed: int = 0,
) -> ProbeResult:
    """Fit a linear head on frozen features; report metrics on the held-out
    split.  ridge_closed_form is deterministic; sgd_sigmoid replicates the
    bounded-head protocol (30 epochs of Adam)."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] != y.shape[0]:
        raise ShapeError("features and labels disagree on sample count")
    if not np.all(np.isfinite(y)):
        raise ArgumentError("labels must be finite")
    train_idx, test_idx = _split(x.shape[0], train_fraction, seed)
    if mode == "ridge_closed_form":
        w, intercept = _ridge_fit(x[train_idx], y[train_idx], ridge_lambda)
        pred = x[test_idx] @ w + intercept
    elif mode == "sgd_sigmoid":
        w, intercept = _sgd_sigmoid_fit(x[train_idx], y[train_idx], task.bounds, seed)
        pred = _sigmoid_predict(x[test_idx], w, intercept, task.bounds)
    else:
        raise ArgumentError(f"unknown probe mode {mode!r}")
    target = y[test_idx]
    return ProbeResult(
        weights=w,
        intercept=intercept,
        metrics=compute_metrics(pred, target),
        mode=mode,
        predictions=pred,
        targets=target,
    )


def probe_fields(
    fields,
    encoder,
    normalization: Normalization,
    task: ProbeTask,
    mode: str = "ridge_closed_form",
    skip_initial_fraction: float = 0.0,
    train_fraction: float = 0.5,
    seed: int = 0,
) -> ProbeResult:
    """Encode fields with a frozen encoder and probe the requested labels.

    skip_initial_fraction drops leading time rows before encoding, so
    inverse-coefficient probes never see the initial transient.
    """
    if skip_initial_fraction > 0.0:
        fields = [
            f.replace(
                values=f.values[:, int(f.n_t * skip_initial_fraction) :],
                t_coords=f.t_coords[int(f.n_t * skip_initial_fraction) :],
            )
            for f in fields
        ]
    feats = encode(fields, encoder, normalization)
    labels = task.labels(fields)
    return linear_probe(
        feats, labels, task, mode=mode, train_fraction=train_fraction, seed=seed
    )


# --------------------------------------------------------------------------
# Representation-conditioned time stepping

@dataclass(frozen=True)
class TimestepConfig:
    t_history: int = 20
    t_future: int = 20
    condition_dim: int = 2
    epochs: int = 20
    lr: float = 1e-4
    batch_size: int = 16
    hidden: int = 64
    kernel: int = 5
    train_fraction: float = 0.8


class _StepperCNN(Module):
    """Small 1D CNN mapping (C_in, n_x) history stacks to T_f future rows."""

    def __init__(self, c_in: int, t_future: int, hidden: int, kernel: int, rng):
        super().__init__()
        k = kernel
        self.pad = k // 2
        self._param("c1.w", _he(rng, (hidden, c_in, k), c_in * k))
        self._param("c1.b", np.zeros(hidden))
        self._param("c2.w", _he(rng, (hidden, hidden, k), hidden * k))
        self._param("c2.b", np.zeros(hidden))
        self._param("c3.w", _he(rng, (t_future, hidden, k), hidden * k))
        self._param("c3.b", np.zeros(t_future))

    def forward(self, x: Tensor) -> Tensor:
        p = self._params
        h = ad.relu(ad.conv1d(x, p["c1.w"], p["c1.b"], padding=self.pad))
        h = ad.relu(ad.conv1d(h, p["c2.w"], p["c2.b"], padding=self.pad))
        return ad.conv1d(h, p["c3.w"], p["c3.b"], padding=self.pad)


class _ConditionedCNN(Module):
    """Same stepper with a learned projection of the frozen representation
    concatenated as extra input channels."""

    def __init__(self, c_in, t_future, hidden, kernel, repr_dim, d, rng):
        super().__init__()
        self.d = d
        self._param("proj.w", _he(rng, (repr_dim, d), repr_dim))
        self._param("proj.b", np.zeros(d))
        self.body = _StepperCNN(c_in + d, t_future, hidden, kernel, rng)
        for name, t in self.body.parameters():
            self._params["body." + name] = t

    def forward(self, x: Tensor, reps: Tensor) -> Tensor:
        cond = reps @ self._params["proj.w"] + self._params["proj.b"]  # (N, d)
        n, d = cond.shape
        n_x = x.shape[2]
        cond_rows = ad.reshape(cond, (n, d, 1)) * Tensor(np.ones((1, 1, n_x)))
        return self.body.forward(ad.concat([x, cond_rows], axis=1))


def _timestep_arrays(fields, cfg: TimestepConfig, u_scale: float):
    xs, ys = [], []
    for f in fields:
        if f.n_t < cfg.t_history + cfg.t_future:
            raise ArgumentError(
                f"field has {f.n_t} frames < T_p + T_f = {cfg.t_history + cfg.t_future}"
            )
        u = f.u / u_scale
        hist = u[: cfg.t_history]
        fut = u[cfg.t_history : cfg.t_history + cfg.t_future]
        dx_row = np.full((1, f.n_x), f.dx)
        dt_row = np.full((1, f.n_x), f.dt)
        xs.append(np.concatenate([hist, dx_row, dt_row], axis=0))
        ys.append(fut)
    return np.stack(xs), np.stack(ys)


def _history_reps(fields, cfg, pretrain_result):
    """Frozen representations of the first T_p rows (with coordinates)."""
    windows = [
        f.replace(values=f.values[:, : cfg.t_history], t_coords=f.t_coords[: cfg.t_history])
        for f in fields
    ]
    return encode(windows, pretrain_result.encoder, pretrain_result.normalization)


def _train_stepper(model, forward, x_train, y_train, cfg, seed):
    params = [t for _, t in model.parameters()]
    opt = AdamW(params, lr=cfg.lr, weight_decay=0.01)
    n = x_train.shape[0]
    for epoch in range(cfg.epochs):
        order = np.random.default_rng((seed, 20, epoch)).permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            pred = forward(idx)
            diff = pred - Tensor(y_train[idx])
            loss = ad.tmean(diff * diff)
            zero_grads(params)
            backward(loss)
            opt.step()


def timestep_experiment(
    fields,
    pretrain_result=None,
    config: TimestepConfig = TimestepConfig(),
    seed: int = 0,
) -> dict[str, Metrics]:
    """Train the history-to-future CNN, optionally conditioned on frozen
    representations of the history window; report held-out block NMSE.

    Returns {"baseline": Metrics} plus {"conditioned": Metrics} when an
    encoder is supplied.  Both models share seeds, splits, and epochs.
    """
    cfg = config
    u_scale = float(np.std(np.concatenate([f.u.ravel() for f in fields]))) or 1.0
    x_all, y_all = _timestep_arrays(fields, cfg, u_scale)
    train_idx, test_idx = _split(len(fields), cfg.train_fraction, seed)
    if train_idx.size == 0 or test_idx.size == 0:
        raise ArgumentError("timestep experiment needs nonempty train and test splits")
    results: dict[str, Metrics] = {}

    rng = np.random.default_rng((seed, 21))
    baseline = _StepperCNN(cfg.t_history + 2, cfg.t_future, cfg.hidden, cfg.kernel, rng)
    x_train, y_train = x_all[train_idx], y_all[train_idx]
    _train_stepper(
        baseline,
        lambda idx: baseline.forward(Tensor(x_train[idx])),
        x_train,
        y_train,
        cfg,
        seed,
    )
    pred = baseline.forward(Tensor(x_all[test_idx])).value
    results["baseline"] = compute_metrics(pred, y_all[test_idx])

    if pretrain_result is not None:
        reps = _history_reps(fields, cfg, pretrain_result)
        rng = np.random.default_rng((seed, 21))  # same init stream as baseline
        model = _ConditionedCNN(
            cfg.t_history + 2,
            cfg.t_future,
            cfg.hidden,
            cfg.kernel,
            reps.shape[1],
            cfg.condition_dim,
            rng,
        )
        reps_train = reps[train_idx]
        _train_stepper(
            model,
            lambda idx: model.forward(Tensor(x_train[idx]), Tensor(reps_train[idx])),
            x_train,
            y_train,
            cfg,
            seed,
        )
        pred_c = model.forward(Tensor(x_all[test_idx]), Tensor(reps[test_idx])).value
        results["conditioned"] = compute_metrics(pred_c, y_all[test_idx])
    return results
