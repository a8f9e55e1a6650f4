"""Lie point symmetry augmentation engine."""

from .apply import apply_closed_form, crop, crop_overlap_fraction
from .catalog import GeneratorSpec, catalog, generator
from .expmap import (
    LieVector,
    TrotterConfig,
    exp_taylor,
    exp_trotter,
    gamma_transform,
    suzuki_coefficient,
)
from .policy import (
    AugmentationPolicy,
    View,
    apply_lie,
    default_policy,
    load_policy,
    make_view,
    make_views,
    place_crop_origin,
    sample_policy,
    save_policy,
    stack_coordinate_channels,
)

__all__ = [
    "AugmentationPolicy",
    "GeneratorSpec",
    "LieVector",
    "TrotterConfig",
    "View",
    "apply_closed_form",
    "apply_lie",
    "catalog",
    "crop",
    "crop_overlap_fraction",
    "default_policy",
    "exp_taylor",
    "exp_trotter",
    "gamma_transform",
    "generator",
    "load_policy",
    "make_view",
    "make_views",
    "place_crop_origin",
    "sample_policy",
    "save_policy",
    "stack_coordinate_channels",
    "suzuki_coefficient",
]
