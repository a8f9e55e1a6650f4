"""Encoder and projector: a small strided residual CNN with per-sample
group normalization, sized so pretraining fits a CPU budget."""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from ..errors import ShapeError
from . import autodiff as ad
from .autodiff import Tensor


@dataclass(frozen=True)
class EncoderConfig:
    """3 input channels for 1D problems (u, x, t); 4 for the 2D flow."""

    in_channels: int = 3
    widths: tuple = (16, 32, 64)
    kernel: int = 3
    groups: int = 4

    @property
    def repr_dim(self) -> int:
        return self.widths[-1]

    def to_dict(self):
        return {
            "in_channels": self.in_channels,
            "widths": list(self.widths),
            "kernel": self.kernel,
            "groups": self.groups,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["in_channels"], tuple(d["widths"]), d["kernel"], d["groups"])


@dataclass(frozen=True)
class ProjectorConfig:
    hidden: int = 128
    out_dim: int = 64

    def __post_init__(self):
        if self.out_dim < 2:
            raise ShapeError("projector output dimension must be >= 2")

    def to_dict(self):
        return {"hidden": self.hidden, "out_dim": self.out_dim}

    @classmethod
    def from_dict(cls, d):
        return cls(d["hidden"], d["out_dim"])


class Module:
    """Parameter registry preserving declaration order (checkpoint contract)."""

    def __init__(self):
        self._params: dict[str, Tensor] = {}

    def _param(self, name: str, value: np.ndarray) -> Tensor:
        t = Tensor(value, requires_grad=True)
        self._params[name] = t
        return t

    def parameters(self) -> list[tuple[str, Tensor]]:
        return list(self._params.items())

    def load_values(self, values: dict[str, np.ndarray]) -> None:
        for name, tensor in self._params.items():
            arr = np.asarray(values[name], dtype=np.float64)
            if arr.shape != tensor.value.shape:
                raise ShapeError(
                    f"parameter {name}: checkpoint shape {arr.shape} != {tensor.value.shape}"
                )
            tensor.value = arr.copy()


def _he(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    return rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)


def group_norm(x: Tensor, gamma: Tensor, beta: Tensor, groups: int, eps: float = 1e-5) -> Tensor:
    """Per-sample normalization over channel groups (no batch coupling)."""
    c = x.shape[1]
    normed = ad.normalize_groups(x, groups, eps)
    return normed * ad.reshape(gamma, (1, c, 1, 1)) + ad.reshape(beta, (1, c, 1, 1))


class Encoder(Module):
    """Stem + 3 stride-2 residual stages + global average pool."""

    def __init__(self, config: EncoderConfig, rng: np.random.Generator):
        super().__init__()
        self.config = config
        k = config.kernel
        w0 = config.widths[0]
        self._param("stem.w", _he(rng, (w0, config.in_channels, k, k), config.in_channels * k * k))
        self._param("stem.b", np.zeros(w0))
        self._param("stem.gn_g", np.ones(w0))
        self._param("stem.gn_b", np.zeros(w0))
        c_in = w0
        for i, c_out in enumerate(config.widths):
            p = f"stage{i}."
            self._param(p + "conv1.w", _he(rng, (c_out, c_in, k, k), c_in * k * k))
            self._param(p + "conv1.b", np.zeros(c_out))
            self._param(p + "gn1.g", np.ones(c_out))
            self._param(p + "gn1.b", np.zeros(c_out))
            self._param(p + "conv2.w", _he(rng, (c_out, c_out, k, k), c_out * k * k))
            self._param(p + "conv2.b", np.zeros(c_out))
            self._param(p + "gn2.g", np.ones(c_out))
            self._param(p + "gn2.b", np.zeros(c_out))
            self._param(p + "skip.w", _he(rng, (c_out, c_in, 1, 1), c_in))
            self._param(p + "skip.b", np.zeros(c_out))
            c_in = c_out

    def forward(self, x: Tensor) -> Tensor:
        cfg = self.config
        if x.shape[1] != cfg.in_channels:
            raise ShapeError(
                f"encoder expects {cfg.in_channels} channels, got {x.shape[1]}"
            )
        p = self._params
        h = ad.conv2d(x, p["stem.w"], p["stem.b"], stride=1, padding=1)
        h = ad.relu(group_norm(h, p["stem.gn_g"], p["stem.gn_b"], cfg.groups))
        for i in range(len(cfg.widths)):
            s = f"stage{i}."
            skip = ad.conv2d(h, p[s + "skip.w"], p[s + "skip.b"], stride=2, padding=0)
            y = ad.conv2d(h, p[s + "conv1.w"], p[s + "conv1.b"], stride=2, padding=1)
            y = ad.relu(group_norm(y, p[s + "gn1.g"], p[s + "gn1.b"], cfg.groups))
            y = ad.conv2d(y, p[s + "conv2.w"], p[s + "conv2.b"], stride=1, padding=1)
            y = group_norm(y, p[s + "gn2.g"], p[s + "gn2.b"], cfg.groups)
            h = ad.relu(y + skip)
        return ad.tmean(h, axis=(2, 3))  # (N, repr_dim)


class Projector(Module):
    """Two-layer ReLU MLP from representations to embeddings."""

    def __init__(self, config: ProjectorConfig, repr_dim: int, rng: np.random.Generator):
        super().__init__()
        self.config = config
        self._param("fc1.w", _he(rng, (repr_dim, config.hidden), repr_dim))
        self._param("fc1.b", np.zeros(config.hidden))
        self._param("fc2.w", _he(rng, (config.hidden, config.out_dim), config.hidden))
        self._param("fc2.b", np.zeros(config.out_dim))

    def forward(self, y: Tensor) -> Tensor:
        p = self._params
        h = ad.relu(y @ p["fc1.w"] + p["fc1.b"])
        return h @ p["fc2.w"] + p["fc2.b"]
