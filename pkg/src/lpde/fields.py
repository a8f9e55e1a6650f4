"""Equation descriptors, initial-condition parameters, and solution fields."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Optional

import numpy as np

from .errors import ArgumentError, ShapeError

EQUATIONS_1D = ("burgers", "kdv", "ks")
EQUATIONS = EQUATIONS_1D + ("ns2d",)
_NEEDS_VISCOSITY = ("burgers", "ns2d")


@dataclass(frozen=True)
class EquationSpec:
    """Which PDE, on what domain, over what horizon."""

    equation: str
    length: float
    horizon: float
    viscosity: Optional[float] = None

    def __post_init__(self):
        if self.equation not in EQUATIONS and self.equation != "heat":
            raise ArgumentError(f"unknown equation {self.equation!r}")
        if not (self.length > 0.0 and self.horizon > 0.0):
            raise ArgumentError("length and horizon must be positive")
        needs_nu = self.equation in _NEEDS_VISCOSITY or self.equation == "heat"
        if needs_nu:
            if self.viscosity is None or not self.viscosity > 0.0:
                raise ArgumentError(f"{self.equation} requires viscosity > 0")
            if not 1e-4 <= self.viscosity <= 1.0:
                raise ArgumentError(
                    f"viscosity {self.viscosity} outside accepted range [1e-4, 1]"
                )
        elif self.viscosity is not None:
            raise ArgumentError(f"{self.equation} takes no viscosity")

    def to_dict(self) -> dict:
        d = {"equation": self.equation, "length": self.length, "horizon": self.horizon}
        if self.viscosity is not None:
            d["viscosity"] = self.viscosity
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EquationSpec":
        return cls(d["equation"], d["length"], d["horizon"], d.get("viscosity"))


@dataclass(frozen=True)
class InitialConditionParams:
    """Truncated-sine-series coefficients: u0(x) = sum_k A_k sin(2 pi w_k x / L + p_k)."""

    amplitudes: np.ndarray
    frequencies: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.amplitudes, dtype=np.float64))
        w = np.atleast_1d(np.asarray(self.frequencies, dtype=np.float64))
        p = np.atleast_1d(np.asarray(self.phases, dtype=np.float64))
        if not (a.shape == w.shape == p.shape) or a.ndim != 1 or a.size == 0:
            raise ShapeError("amplitudes, frequencies, phases must be equal-length 1D")
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "phases", p)

    @property
    def n_modes(self) -> int:
        return self.amplitudes.size

    @classmethod
    def sample(
        cls,
        rng: np.random.Generator,
        n_modes: int = 10,
        amplitude_range=(-0.5, 0.5),
        frequency_range=(-0.4, 0.4),
        amplitude_scale: float = 1.0,
        frequency_scale: float = 1.0,
        frequency_offset: float = 0.0,
        integer_frequencies: bool = False,
        canonicalize: bool = True,
    ) -> "InitialConditionParams":
        """Draw coefficients; optional scales shrink/stretch the defaults.

        Canonical form maps (A, w, p) with w < 0 to (-A, -w, -p mod 2 pi),
        which leaves the summand invariant, then sorts modes by frequency so
        the coefficient vector is a well-defined regression target.  A nonzero
        frequency offset pushes |w| away from zero (applied after
        canonicalization, preserving the sign symmetry of the family).
        Integer frequencies give exactly periodic profiles, which the exact
        Burgers pipeline requires (real-valued w leaves a seam whose kink
        the Cole-Hopf exponential amplifies by 1/(2 nu)).
        """
        a = rng.uniform(*amplitude_range, n_modes) * amplitude_scale
        w = rng.uniform(*frequency_range, n_modes) * frequency_scale
        p = rng.uniform(0.0, 2.0 * np.pi, n_modes)
        neg = w < 0
        if canonicalize or frequency_offset or integer_frequencies:
            a = np.where(neg, -a, a)
            p = np.where(neg, (-p) % (2.0 * np.pi), p)
            w = np.abs(w) + frequency_offset
            if integer_frequencies:
                w = np.maximum(np.rint(w), 1.0)
            order = np.argsort(w, kind="stable")
            a, w, p = a[order], w[order], p[order]
        return cls(a, w, p)

    def to_dict(self) -> dict:
        return {
            "amplitudes": self.amplitudes.tolist(),
            "frequencies": self.frequencies.tolist(),
            "phases": self.phases.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InitialConditionParams":
        return cls(
            np.array(d["amplitudes"]), np.array(d["frequencies"]), np.array(d["phases"])
        )


def _check_coords(name: str, coords: np.ndarray, n: int):
    if coords.shape != (n,):
        raise ShapeError(f"{name} length {coords.shape} does not match values axis {n}")
    if n > 1 and not np.all(np.diff(coords) > 0):
        raise ShapeError(f"{name} must be strictly increasing")


def uniform_spacing(coords: np.ndarray, name: str = "coords") -> float:
    """Spacing of a uniform coordinate vector; raises if non-uniform."""
    if coords.size < 2:
        raise ShapeError(f"{name} needs at least 2 entries for a spacing")
    d = np.diff(coords)
    step = d[0]
    if np.max(np.abs(d - step)) > 1e-8 * max(abs(step), 1e-300):
        raise ShapeError(f"{name} is not uniform")
    return float(step)


@dataclass
class SolutionField:
    """Dependent variables on a regular space-time grid plus coordinates.

    values is (channels, n_t, n_x) for 1D equations (channel 0 = u) or
    (channels, n_t, n_x, n_y) for the 2D flow (channels u, v).  Coordinate
    vectors are stored separately; encoder input stacks them as channels.
    """

    values: np.ndarray
    t_coords: np.ndarray
    x_coords: np.ndarray
    y_coords: Optional[np.ndarray] = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.t_coords = np.asarray(self.t_coords, dtype=np.float64)
        self.x_coords = np.asarray(self.x_coords, dtype=np.float64)
        if self.y_coords is not None:
            self.y_coords = np.asarray(self.y_coords, dtype=np.float64)
        expected = 4 if self.y_coords is not None else 3
        if self.values.ndim != expected:
            raise ShapeError(
                f"values must have {expected} axes (channels, t, x{', y' if expected == 4 else ''}), "
                f"got shape {self.values.shape}"
            )
        _check_coords("t_coords", self.t_coords, self.values.shape[1])
        _check_coords("x_coords", self.x_coords, self.values.shape[2])
        if self.y_coords is not None:
            _check_coords("y_coords", self.y_coords, self.values.shape[3])

    @property
    def equation(self) -> str:
        return self.meta.get("equation", "unknown")

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_t(self) -> int:
        return self.values.shape[1]

    @property
    def n_x(self) -> int:
        return self.values.shape[2]

    @property
    def n_y(self) -> Optional[int]:
        return None if self.y_coords is None else self.values.shape[3]

    @property
    def u(self) -> np.ndarray:
        return self.values[0]

    @property
    def dt(self) -> float:
        return uniform_spacing(self.t_coords, "t_coords")

    @property
    def dx(self) -> float:
        return uniform_spacing(self.x_coords, "x_coords")

    @property
    def dy(self) -> float:
        return uniform_spacing(self.y_coords, "y_coords")

    @property
    def x_periodic(self) -> bool:
        return bool(self.meta.get("x_periodic", True))

    @property
    def y_periodic(self) -> bool:
        return bool(self.meta.get("y_periodic", True))

    @property
    def x_period(self) -> float:
        """Period of the x axis implied by the uniform grid (n * dx)."""
        return self.n_x * self.dx

    @property
    def y_period(self) -> float:
        return self.n_y * self.dy

    @property
    def viscosity(self) -> Optional[float]:
        return self.meta.get("viscosity")

    def replace(self, **kwargs) -> "SolutionField":
        base = dict(
            values=self.values,
            t_coords=self.t_coords,
            x_coords=self.x_coords,
            y_coords=self.y_coords,
            meta=dict(self.meta),
        )
        base.update(kwargs)
        return SolutionField(**base)
