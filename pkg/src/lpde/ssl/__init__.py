"""Self-supervised pretraining: autodiff, networks, loss, optimizer, loop."""

from . import autodiff
from .autodiff import Tensor, backward, zero_grads
from .checkpoint import load_checkpoint, save_checkpoint
from .nets import Encoder, EncoderConfig, Projector, ProjectorConfig, group_norm
from .optim import AdamW, adamw_step
from .train import (
    Normalization,
    PretrainResult,
    embedding_variances,
    encode,
    pretrain,
    view_pair_similarity,
)
from .vicreg import VICRegConfig, vicreg_loss

__all__ = [
    "AdamW",
    "Encoder",
    "EncoderConfig",
    "Normalization",
    "PretrainResult",
    "Projector",
    "ProjectorConfig",
    "Tensor",
    "VICRegConfig",
    "adamw_step",
    "autodiff",
    "backward",
    "embedding_variances",
    "encode",
    "group_norm",
    "load_checkpoint",
    "pretrain",
    "save_checkpoint",
    "vicreg_loss",
    "view_pair_similarity",
    "zero_grads",
]
