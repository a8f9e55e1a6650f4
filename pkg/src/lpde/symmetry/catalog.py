"""Per-equation catalogs of one-parameter point-symmetry generators.

Each entry carries the closed-form group action (dispatched on ``kind`` by
the apply machinery), the infinitesimal action for Taylor exponential maps,
and task-safety tags naming the downstream labels the transformation leaves
unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Optional

from ..errors import CatalogError

# Infinitesimal action  xi d/dx + tau d/dt + (phi0 + phi1 u) d/du  with
# coefficient functions of (x, t) only; every cataloged generator is affine
# in u, which the Taylor map exploits.
@dataclass(frozen=True)
class Infinitesimal1D:
    xi: Callable = lambda x, t: 0.0 * x * t
    tau: Callable = lambda x, t: 0.0 * x * t
    phi0: Callable = lambda x, t: 0.0 * x * t
    phi1: Callable = lambda x, t: 0.0 * x * t


@dataclass(frozen=True)
class GeneratorSpec:
    """One basis generator of an equation's symmetry algebra."""

    gen_id: str
    equation: str
    name: str
    kind: str
    preserves: frozenset[str] = dataclass_field(default_factory=frozenset)
    # kind="scaling": multipliers m in coordinate scalings e^{m eps};
    # 1D order (x, t, u), 2D order (x, y, t, u, v).
    scaling: Optional[tuple] = None
    # kind in {"x_shift","y_shift"}: shift(eps, t) and per-channel value
    # offsets offset_u/offset_v as functions (eps, t).
    shift: Optional[Callable] = None
    offset_u: Optional[Callable] = None
    offset_v: Optional[Callable] = None
    infinitesimal: Optional[Infinitesimal1D] = None

    @property
    def qualified_id(self) -> str:
        return f"{self.equation}.{self.gen_id}"


def _shift_catalog_1d(equation: str, inverse_safe: bool) -> list[GeneratorSpec]:
    """g1..g3 shared by all 1D flow equations."""
    task = {"burgers": "viscosity", "kdv": "init_coeffs", "ks": "init_coeffs"}[equation]
    safe = frozenset({task} | ({"init_coeffs"} if inverse_safe else set()))
    g1 = GeneratorSpec(
        "g1", equation, "space translation", "x_shift",
        preserves=safe,
        shift=lambda eps, t: eps + 0.0 * t,
        infinitesimal=Infinitesimal1D(xi=lambda x, t: 1.0 + 0.0 * x * t),
    )
    g2 = GeneratorSpec(
        "g2", equation, "time translation", "t_shift",
        preserves=frozenset({task} if equation == "burgers" else set()),
        infinitesimal=Infinitesimal1D(tau=lambda x, t: 1.0 + 0.0 * x * t),
    )
    g3 = GeneratorSpec(
        "g3", equation, "Galilean boost", "x_shift",
        preserves=safe,
        shift=lambda eps, t: eps * t,
        offset_u=lambda eps, t: eps + 0.0 * t,
        infinitesimal=Infinitesimal1D(
            xi=lambda x, t: 0.0 * x + t, phi0=lambda x, t: 1.0 + 0.0 * x * t
        ),
    )
    return [g1, g2, g3]


def _build_burgers() -> tuple[GeneratorSpec, ...]:
    gens = _shift_catalog_1d("burgers", inverse_safe=True)
    gens.append(
        GeneratorSpec(
            "g4", "burgers", "scaling", "scaling",
            preserves=frozenset({"viscosity"}),
            scaling=(1.0, 2.0, -1.0),
            infinitesimal=Infinitesimal1D(
                xi=lambda x, t: x + 0.0 * t,
                tau=lambda x, t: 2.0 * t + 0.0 * x,
                phi1=lambda x, t: -1.0 + 0.0 * x * t,
            ),
        )
    )
    gens.append(
        GeneratorSpec(
            "g5", "burgers", "projective", "projective",
            preserves=frozenset({"viscosity"}),
            infinitesimal=Infinitesimal1D(
                xi=lambda x, t: x * t,
                tau=lambda x, t: t**2 + 0.0 * x,
                phi0=lambda x, t: x + 0.0 * t,
                phi1=lambda x, t: -t + 0.0 * x,
            ),
        )
    )
    return tuple(gens)


def _build_kdv() -> tuple[GeneratorSpec, ...]:
    gens = _shift_catalog_1d("kdv", inverse_safe=True)
    gens.append(
        GeneratorSpec(
            "g4", "kdv", "scaling", "scaling",
            preserves=frozenset(),
            scaling=(1.0, 3.0, -2.0),
            infinitesimal=Infinitesimal1D(
                xi=lambda x, t: x + 0.0 * t,
                tau=lambda x, t: 3.0 * t + 0.0 * x,
                phi1=lambda x, t: -2.0 + 0.0 * x * t,
            ),
        )
    )
    return tuple(gens)


def _build_ks() -> tuple[GeneratorSpec, ...]:
    return tuple(_shift_catalog_1d("ks", inverse_safe=True))


def _build_ns2d() -> tuple[GeneratorSpec, ...]:
    buoy = frozenset({"buoyancy"})
    return (
        GeneratorSpec("g1", "ns2d", "time translation", "t_shift", preserves=buoy),
        GeneratorSpec(
            "g2", "ns2d", "x translation", "x_shift", preserves=buoy,
            shift=lambda eps, t: eps + 0.0 * t,
        ),
        GeneratorSpec(
            "g3", "ns2d", "y translation", "y_shift", preserves=buoy,
            shift=lambda eps, t: eps + 0.0 * t,
        ),
        GeneratorSpec(
            "g4", "ns2d", "scaling", "scaling",
            preserves=frozenset(),  # rescales any constant body force
            scaling=(1.0, 1.0, 2.0, -1.0, -1.0),
        ),
        GeneratorSpec("g5", "ns2d", "rotation", "rotation", preserves=buoy),
        GeneratorSpec(
            "g6", "ns2d", "x linear boost", "x_shift", preserves=buoy,
            shift=lambda eps, t: eps * t,
            offset_u=lambda eps, t: eps + 0.0 * t,
        ),
        GeneratorSpec(
            "g7", "ns2d", "y linear boost", "y_shift", preserves=buoy,
            shift=lambda eps, t: eps * t,
            offset_v=lambda eps, t: eps + 0.0 * t,
        ),
        GeneratorSpec(
            "g8", "ns2d", "x quadratic boost", "x_shift",
            preserves=frozenset(),  # shifts a constant force magnitude by 2 eps
            shift=lambda eps, t: eps * t**2,
            offset_u=lambda eps, t: 2.0 * eps * t,
        ),
        GeneratorSpec(
            "g9", "ns2d", "y quadratic boost", "y_shift",
            preserves=frozenset(),
            shift=lambda eps, t: eps * t**2,
            offset_v=lambda eps, t: 2.0 * eps * t,
        ),
    )


_CATALOGS: dict[str, tuple[GeneratorSpec, ...]] = {
    "burgers": _build_burgers(),
    "kdv": _build_kdv(),
    "ks": _build_ks(),
    "ns2d": _build_ns2d(),
}


def catalog(equation: str) -> tuple[GeneratorSpec, ...]:
    """All symmetry generators of an equation, in conventional order."""
    try:
        return _CATALOGS[equation]
    except KeyError:
        raise CatalogError(f"no symmetry catalog for equation {equation!r}") from None


def generator(equation: str, gen_id: str) -> GeneratorSpec:
    for gen in catalog(equation):
        if gen.gen_id == gen_id:
            return gen
    raise CatalogError(f"equation {equation!r} has no generator {gen_id!r}")
