"""Joint-embedding pretraining loop over augmented view pairs."""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from ..errors import ArgumentError, DivergenceError
from ..fields import SolutionField
from ..symmetry.policy import AugmentationPolicy, make_views, stack_coordinate_channels
from .autodiff import Tensor, zero_grads
from .nets import Encoder, EncoderConfig, Projector, ProjectorConfig
from .optim import AdamW
from .vicreg import VICRegConfig, vicreg_loss


@dataclass(frozen=True)
class Normalization:
    """Fixed channel scales: per-sample stats would erase the coordinate
    information the augmentations deliberately encode."""

    flow_mean: float
    flow_std: float
    x_scale: float
    t_scale: float
    y_scale: float = 1.0

    @classmethod
    def fit(cls, fields: list[SolutionField]) -> "Normalization":
        flow = np.concatenate([f.values[: 2 if f.y_coords is not None else 1].ravel() for f in fields])
        x_scale = max(float(np.max(np.abs(f.x_coords))) for f in fields) or 1.0
        t_scale = max(float(np.max(np.abs(f.t_coords))) for f in fields) or 1.0
        y_scale = 1.0
        if fields[0].y_coords is not None:
            y_scale = max(float(np.max(np.abs(f.y_coords))) for f in fields) or 1.0
        return cls(
            flow_mean=float(flow.mean()),
            flow_std=float(flow.std()) or 1.0,
            x_scale=x_scale,
            t_scale=t_scale,
            y_scale=y_scale,
        )

    def apply(self, tensor: np.ndarray, is_2d: bool) -> np.ndarray:
        out = np.array(tensor, dtype=np.float64)
        if is_2d:
            out[0:2] = (out[0:2] - self.flow_mean) / self.flow_std
            out[2] /= self.x_scale
            out[3] /= self.y_scale
        else:
            out[0] = (out[0] - self.flow_mean) / self.flow_std
            out[1] /= self.x_scale
            out[2] /= self.t_scale
        return out

    def to_dict(self):
        return {
            "flow_mean": self.flow_mean,
            "flow_std": self.flow_std,
            "x_scale": self.x_scale,
            "t_scale": self.t_scale,
            "y_scale": self.y_scale,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class PretrainResult:
    encoder: Encoder
    projector: Projector
    normalization: Normalization
    loss_trace: list = dataclass_field(default_factory=list)
    config: dict = dataclass_field(default_factory=dict)


def _field_tensor(field: SolutionField, norm: Normalization) -> np.ndarray:
    return norm.apply(stack_coordinate_channels(field), field.y_coords is not None)


def pretrain(
    fields: list[SolutionField],
    policy: AugmentationPolicy,
    epochs: int,
    seed: int,
    encoder_config: EncoderConfig | None = None,
    projector_config: ProjectorConfig | None = None,
    vicreg_config: VICRegConfig | None = None,
    batch_size: int = 32,
    lr: float = 3e-4,
    weight_decay: float = 0.01,
) -> PretrainResult:
    """Shuffle, make view pairs, forward, loss, backward, step; per epoch.

    Bitwise deterministic given the seed: parameter init, shuffles, and the
    per-sample augmentation streams all derive from it, and reductions run
    in a fixed order.
    """
    if not fields:
        raise ArgumentError("pretraining needs a nonempty dataset")
    is_2d = fields[0].y_coords is not None
    if encoder_config is None:
        encoder_config = EncoderConfig(in_channels=4 if is_2d else 3)
    if projector_config is None:
        projector_config = ProjectorConfig(out_dim=encoder_config.repr_dim)
    if vicreg_config is None:
        # Trainer default smooths the variance hinge away from v = 0.
        vicreg_config = VICRegConfig(variance_eps=1e-8)

    init_rng = np.random.default_rng((seed, 0))
    encoder = Encoder(encoder_config, init_rng)
    projector = Projector(projector_config, encoder_config.repr_dim, init_rng)
    norm = Normalization.fit(fields)
    params = [t for _, t in encoder.parameters() + projector.parameters()]
    opt = AdamW(params, lr=lr, weight_decay=weight_decay)

    trace: list[float] = []
    n = len(fields)
    for epoch in range(epochs):
        order = np.random.default_rng((seed, 1, epoch)).permutation(n)
        batch_losses = []
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            if idx.size < 2:
                continue  # covariance needs N >= 2
            a_list, b_list = [], []
            for i in idx:
                view_rng = np.random.default_rng((seed, 2, epoch, int(i)))
                va, vb = make_views(fields[int(i)], policy, view_rng)
                a_list.append(norm.apply(va.tensor, is_2d))
                b_list.append(norm.apply(vb.tensor, is_2d))
            xa = Tensor(np.stack(a_list))
            xb = Tensor(np.stack(b_list))
            za = projector.forward(encoder.forward(xa))
            zb = projector.forward(encoder.forward(xb))
            loss = vicreg_loss(za, zb, vicreg_config)
            value = float(loss.value)
            if not np.isfinite(value):
                raise DivergenceError(
                    f"loss became {value} at epoch {epoch}, batch {start // batch_size}",
                    epoch,
                    start // batch_size,
                )
            zero_grads(params)
            from .autodiff import backward

            backward(loss)
            opt.step()
            batch_losses.append(value)
        trace.append(float(np.mean(batch_losses)))
    return PretrainResult(
        encoder=encoder,
        projector=projector,
        normalization=norm,
        loss_trace=trace,
        config={
            "encoder": encoder_config.to_dict(),
            "projector": projector_config.to_dict(),
            "vicreg": vicreg_config.to_dict(),
            "epochs": epochs,
            "batch_size": batch_size,
            "lr": lr,
            "weight_decay": weight_decay,
            "seed": seed,
        },
    )


def encode(
    fields: list[SolutionField],
    encoder: Encoder,
    norm: Normalization,
    batch_size: int = 64,
) -> np.ndarray:
    """Frozen-encoder representations of whole (unaugmented) fields."""
    feats = []
    for start in range(0, len(fields), batch_size):
        chunk = fields[start : start + batch_size]
        x = Tensor(np.stack([_field_tensor(f, norm) for f in chunk]))
        feats.append(encoder.forward(x).value)
    return np.concatenate(feats, axis=0)


def view_pair_similarity(
    fields: list[SolutionField],
    policy: AugmentationPolicy,
    encoder: Encoder,
    norm: Normalization,
    seed: int,
) -> float:
    """Mean cosine similarity between representations of two views."""
    sims = []
    for i, f in enumerate(fields):
        rng = np.random.default_rng((seed, 3, i))
        va, vb = make_views(f, policy, rng)
        x = Tensor(
            np.stack(
                [
                    norm.apply(va.tensor, f.y_coords is not None),
                    norm.apply(vb.tensor, f.y_coords is not None),
                ]
            )
        )
        y = encoder.forward(x).value
        denom = np.linalg.norm(y[0]) * np.linalg.norm(y[1])
        sims.append(float(y[0] @ y[1] / denom) if denom > 0 else 0.0)
    return float(np.mean(sims))


def embedding_variances(
    fields: list[SolutionField],
    policy: AugmentationPolicy,
    encoder: Encoder,
    projector: Projector,
    norm: Normalization,
    seed: int,
) -> np.ndarray:
    """Per-dimension variance of projector outputs over one view per field."""
    tensors = []
    for i, f in enumerate(fields):
        rng = np.random.default_rng((seed, 4, i))
        va, _ = make_views(f, policy, rng)
        tensors.append(norm.apply(va.tensor, f.y_coords is not None))
    z = projector.forward(encoder.forward(Tensor(np.stack(tensors)))).value
    return z.var(axis=0, ddof=1)
