"""Augmentation policies: strength ranges, crops, sampling, and view pairs.

Policy files are YAML with the schema::

    equation: burgers            # burgers | kdv | ks | ns2d
    task: viscosity              # optional; rejects task-breaking generators
    mode: closed_form_sequential # or trotter_on_sum
    trotter: {order: 2, segments: 2}
    crop: {t: 256, x: 128}       # y: ... for the 2D flow
    strengths:                   # uniform sampling ranges per generator id
      g1: [-2.0, 2.0]
      g3: [-0.2, 0.2]
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
import yaml

from ..errors import AugmentationTooStrongError, ConfigError
from ..fields import SolutionField
from .apply import CropWindow, apply_closed_form, crop, crop_overlap_fraction
from .catalog import catalog, generator
from .expmap import LieVector, TrotterConfig, exp_trotter

MODES = ("closed_form_sequential", "trotter_on_sum")


@dataclass
class AugmentationPolicy:
    """How to draw one augmentation: generator strengths plus a crop."""

    equation: str
    crop: tuple
    strengths: dict[str, tuple[float, float]] = dataclass_field(default_factory=dict)
    mode: str = "closed_form_sequential"
    trotter: TrotterConfig = dataclass_field(default_factory=TrotterConfig)
    task: str | None = None

    def __post_init__(self):
        self.crop = tuple(int(c) for c in self.crop)
        if len(self.crop) not in (2, 3) or any(c < 1 for c in self.crop):
            raise ConfigError(f"crop window must be (t, x[, y]) positive ints: {self.crop}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        cleaned = {}
        for gen_id, rng in self.strengths.items():
            gen = generator(self.equation, gen_id)
            lo, hi = float(rng[0]), float(rng[1])
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ConfigError(f"invalid strength range for {gen_id}: {rng}")
            if self.task is not None and (lo, hi) != (0.0, 0.0):
                if self.task not in gen.preserves:
                    raise ConfigError(
                        f"{gen.qualified_id} does not preserve task {self.task!r} "
                        "but the policy declares it"
                    )
            cleaned[gen_id] = (lo, hi)
        self.strengths = cleaned

    def to_dict(self) -> dict:
        crop_d = dict(zip(("t", "x", "y"), self.crop))
        d = {
            "equation": self.equation,
            "mode": self.mode,
            "crop": crop_d,
            "strengths": {k: list(v) for k, v in self.strengths.items()},
            "trotter": {"order": self.trotter.order, "segments": self.trotter.segments},
        }
        if self.task is not None:
            d["task"] = self.task
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentationPolicy":
        try:
            crop_d = d["crop"]
            window = tuple(crop_d[k] for k in ("t", "x", "y") if k in crop_d)
            trot = d.get("trotter", {})
            return cls(
                equation=d["equation"],
                crop=window,
                strengths={k: tuple(v) for k, v in d.get("strengths", {}).items()},
                mode=d.get("mode", "closed_form_sequential"),
                trotter=TrotterConfig(trot.get("order", 2), trot.get("segments", 1)),
                task=d.get("task"),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed policy document: {exc}") from exc


def save_policy(policy: AugmentationPolicy, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(policy.to_dict(), fh, sort_keys=True)


def load_policy(path) -> AugmentationPolicy:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"policy file {path} is not a mapping")
    return AugmentationPolicy.from_dict(doc)


_DEFAULT_STRENGTHS = {
    "burgers": {"g1": (-2.0, 2.0), "g2": (0.0, 2.0), "g3": (-0.2, 0.2), "g4": (-1.0, 1.0)},
    # Inverse-task-safe set; the remaining generators join for time-stepping.
    "kdv": {"g3": (-0.2, 0.2)},
    "ks": {"g3": (-0.2, 0.2)},
    "ns2d": {
        "g2": (-1.0, 1.0), "g3": (-1.0, 1.0),
        "g4": (-0.1, 0.1), "g5": (-0.1, 0.1),
        "g6": (-0.01, 0.01), "g7": (-0.01, 0.01),
        "g8": (-0.01, 0.01), "g9": (-0.01, 0.01),
    },
}
_TIMESTEP_EXTRA = {
    "kdv": {"g1": (-2.0, 2.0), "g2": (0.0, 2.0), "g4": (-0.1, 0.1)},
    "ks": {"g1": (-2.0, 2.0), "g2": (0.0, 2.0)},
}
_DEFAULT_CROPS = {
    "burgers": (256, 128),
    "kdv": (256, 32),
    "ks": (256, 32),
    "ns2d": (16, 128, 128),
}


def default_policy(
    equation: str,
    task: str | None = None,
    crop_window=None,
    time_stepping: bool = False,
) -> AugmentationPolicy:
    """Default strengths and crop shapes for an equation.

    For KdV/KS the default is the inverse-task-safe set (boost only);
    time_stepping=True adds the full catalog at configured ranges.  The 2D
    flow composes through the order-2, 2-segment product formula.
    """
    strengths = dict(_DEFAULT_STRENGTHS[equation])
    if time_stepping:
        strengths.update(_TIMESTEP_EXTRA.get(equation, {}))
    if task is not None:
        strengths = {
            gid: rng
            for gid, rng in strengths.items()
            if task in generator(equation, gid).preserves
        }
    mode = "trotter_on_sum" if equation == "ns2d" else "closed_form_sequential"
    trotter = TrotterConfig(2, 2) if equation == "ns2d" else TrotterConfig(2, 1)
    return AugmentationPolicy(
        equation=equation,
        crop=crop_window or _DEFAULT_CROPS[equation],
        strengths=strengths,
        mode=mode,
        trotter=trotter,
        task=task,
    )


@dataclass(frozen=True)
class PolicySample:
    """One draw: Lie-algebra coefficients plus a crop placement in [0,1)^d."""

    lie: LieVector
    placement: tuple


def sample_policy(policy: AugmentationPolicy, rng: np.random.Generator) -> PolicySample:
    """Draw eps_i ~ U(lo_i, hi_i) independently plus a uniform crop placement.

    The placement is returned as fractions of the admissible origin range
    (which is only known after the transformations fix the valid region).
    """
    coeffs = {}
    for gen_id in sorted(policy.strengths):
        lo, hi = policy.strengths[gen_id]
        coeffs[gen_id] = float(rng.uniform(lo, hi)) if hi > lo else lo
    placement = tuple(float(v) for v in rng.random(len(policy.crop)))
    return PolicySample(LieVector(policy.equation, coeffs), placement)


def apply_lie(field: SolutionField, lie: LieVector, policy: AugmentationPolicy) -> SolutionField:
    """Apply a sampled algebra element per the policy's composition mode."""
    if policy.mode == "trotter_on_sum":
        return exp_trotter(lie, field, policy.trotter)
    out = field
    for gen, coeff in lie.active():
        out = apply_closed_form(gen, coeff, out)
    return out


def place_crop_origin(field: SolutionField, window, placement) -> tuple:
    """Map placement fractions to an admissible integer crop origin."""
    win = CropWindow.of(window)
    dims = win.dims
    shape = (field.n_t, field.n_x) + ((field.n_y,) if field.y_coords is not None else ())
    periodic = (False, field.x_periodic) + (
        (field.y_periodic,) if field.y_coords is not None else ()
    )
    origin = []
    for frac, w, n, per in zip(placement, dims, shape, periodic):
        # Any origin is admissible on a periodic axis, except that a
        # full-width window stays the identity rather than a wrapped roll.
        admissible = n if (per and w < n) else n - w + 1
        if admissible < 1:
            raise AugmentationTooStrongError(
                f"valid region {shape} cannot contain crop window {dims}"
            )
        origin.append(min(int(frac * admissible), admissible - 1))
    return tuple(origin)


@dataclass
class View:
    """One augmented view: cropped field plus the encoder-ready tensor."""

    field: SolutionField
    tensor: np.ndarray
    coefficients: dict[str, float]
    crop_origin: tuple


def stack_coordinate_channels(field: SolutionField) -> np.ndarray:
    """(u, x, t) channels for 1D fields; (u, v, x, y) for the 2D flow."""
    if field.y_coords is None:
        nt, nx = field.n_t, field.n_x
        x_chan = np.broadcast_to(field.x_coords[None, :], (nt, nx))
        t_chan = np.broadcast_to(field.t_coords[:, None], (nt, nx))
        return np.stack([field.values[0], x_chan, t_chan])
    nt, nx, ny = field.n_t, field.n_x, field.n_y
    x_chan = np.broadcast_to(field.x_coords[None, :, None], (nt, nx, ny))
    y_chan = np.broadcast_to(field.y_coords[None, None, :], (nt, nx, ny))
    return np.stack([field.values[0], field.values[1], x_chan, y_chan])


def make_view(field: SolutionField, policy: AugmentationPolicy, rng: np.random.Generator) -> View:
    sample = sample_policy(policy, rng)
    transformed = apply_lie(field, sample.lie, policy)
    origin = place_crop_origin(transformed, policy.crop, sample.placement)
    cropped = crop(transformed, policy.crop, origin)
    return View(
        field=cropped,
        tensor=stack_coordinate_channels(cropped),
        coefficients=dict(sample.lie.coefficients),
        crop_origin=origin,
    )


def make_views(
    field: SolutionField, policy: AugmentationPolicy, rng: np.random.Generator
) -> tuple[View, View]:
    """Two independent (Lie vector, crop) draws applied to the same input."""
    first = make_view(field, policy, rng)
    second = make_view(field, policy, rng)
    return first, second


__all__ = [
    "AugmentationPolicy",
    "PolicySample",
    "View",
    "apply_lie",
    "crop_overlap_fraction",
    "default_policy",
    "load_policy",
    "make_view",
    "make_views",
    "place_crop_origin",
    "sample_policy",
    "save_policy",
    "stack_coordinate_channels",
]
