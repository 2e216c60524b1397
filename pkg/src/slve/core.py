"""Shared 1D toolkit: grids, fields, model parameters, and scalings.

The rest of the package works on a reference interval in nondimensional
variables.  With density rho, small-stress shear modulus mu and length scale
L, the scalings are

    x_bar = x / L,   t_bar = (t / L) * sqrt(mu / rho),   T_bar = T / mu,

and the two rate coefficients carry over as

    nu_bar    = (nu / L) * sqrt(mu / rho),
    gamma_bar = (gamma * mu / L) * sqrt(mu / rho).

Downstream modules assume the dimensionless unit form rho = mu = L = 1;
`nondimensionalize` / `dimensionless_params` do the conversion at the
boundary (the CLI), so solver code never mixes unit systems.

Spatial discretization lives here too: second-order centered differences
(periodic wrap, or one-sided second-order stencils at fixed ends) and the
trapezoid rule, which on a periodic uniform grid is the plain spacing-weighted
sum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "Boundary",
    "Variant",
    "Grid1D",
    "Field",
    "ModelParams",
    "NondimScales",
    "nondimensionalize",
    "redimensionalize",
    "dimensionless_params",
    "integrate_field",
    "spatial_derivative",
    "first_derivative",
    "second_derivative",
]


class Boundary(str, enum.Enum):
    """Supported boundary treatments of the truncated interval."""

    PERIODIC = "periodic"
    DIRICHLET_ZERO = "dirichlet_zero"


class Variant(str, enum.Enum):
    """Which constitutive rate term the model carries.

    stress_rate: strain = h(T) - gamma * T_t   (rate acts on the stress)
    strain_rate: strain + nu * strain_t = g(T) (rate acts on the strain)
    elastic:     strain = h(T)                 (no rate term)
    """

    STRESS_RATE = "stress_rate"
    STRAIN_RATE = "strain_rate"
    ELASTIC = "elastic"


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [0, length].

    Periodic grids store one node per cell (the right endpoint duplicates the
    left and is not stored); dirichlet_zero grids store both endpoints.
    """

    length: float
    n_cells: int
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        object.__setattr__(self, "length", _require_finite("length", self.length))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if self.length <= 0.0:
            raise InvalidParameterError(f"length must be positive, got {self.length}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 4:
            raise InvalidParameterError(
                f"n_cells must be an integer >= 4, got {self.n_cells!r}"
            )
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def spacing(self) -> float:
        return self.length / self.n_cells

    @property
    def n_nodes(self) -> int:
        if self.boundary is Boundary.PERIODIC:
            return self.n_cells
        return self.n_cells + 1

    def nodes(self) -> np.ndarray:
        """Node coordinates, matching the storage convention."""
        if self.boundary is Boundary.PERIODIC:
            return self.spacing * np.arange(self.n_cells)
        return np.linspace(0.0, self.length, self.n_cells + 1)


@dataclass(frozen=True)
class Field:
    """Immutable nodal values of one scalar unknown on a grid."""

    values: np.ndarray
    grid: Grid1D

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 1 or values.size != self.grid.n_nodes:
            raise InvalidParameterError(
                f"field needs {self.grid.n_nodes} nodal values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid1D, fn) -> "Field":
        return cls(np.asarray(fn(grid.nodes()), dtype=float), grid)


@dataclass(frozen=True)
class ModelParams:
    """Material and model parameters in dimensional form.

    The variant decides which rate coefficient must be active: stress_rate
    needs gamma > 0, strain_rate needs nu > 0, elastic needs both zero.
    Both coefficients must be nonnegative regardless (a negative gamma or nu
    makes the dissipation rate negative, which the models exclude).
    """

    variant: Variant
    rho: float = 1.0
    mu: float = 1.0
    length_scale: float = 1.0
    nu: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        for name in ("rho", "mu", "length_scale"):
            value = _require_finite(name, getattr(self, name))
            object.__setattr__(self, name, value)
            if value <= 0.0:
                raise InvalidParameterError(f"{name} must be positive, got {value}")
        for name in ("nu", "gamma"):
            value = _require_finite(name, getattr(self, name))
            object.__setattr__(self, name, value)
            if value < 0.0:
                raise InvalidParameterError(
                    f"{name} must be nonnegative (dissipation requires it), got {value}"
                )
        if self.variant is Variant.STRESS_RATE and self.gamma == 0.0:
            raise InvalidParameterError("stress_rate variant requires gamma > 0")
        if self.variant is Variant.STRAIN_RATE and self.nu == 0.0:
            raise InvalidParameterError("strain_rate variant requires nu > 0")
        if self.variant is Variant.ELASTIC and (self.nu != 0.0 or self.gamma != 0.0):
            raise InvalidParameterError("elastic variant requires nu = gamma = 0")

    @property
    def coefficient(self) -> float:
        """The active rate coefficient (0 for the elastic variant)."""
        if self.variant is Variant.STRESS_RATE:
            return self.gamma
        if self.variant is Variant.STRAIN_RATE:
            return self.nu
        return 0.0


@dataclass(frozen=True)
class NondimScales:
    """Scale factors carrying dimensional fields to dimensionless ones."""

    x_scale: float
    t_scale: float
    stress_scale: float
    nu_bar: float
    gamma_bar: float


def nondimensionalize(params: ModelParams) -> NondimScales:
    """Scale factors and dimensionless coefficients for the given material.

    Parameters
    ----------
    params : ModelParams
        Dimensional parameters; rho, mu and length_scale must be positive
        (enforced at construction).

    Returns
    -------
    NondimScales
        x_scale = L, t_scale = L*sqrt(rho/mu), stress_scale = mu, and the
        dimensionless rate coefficients nu_bar, gamma_bar defined in the
        module docstring.
    """
    rho, mu, L = params.rho, params.mu, params.length_scale
    speed = math.sqrt(mu / rho)  # small-stress wave speed
    return NondimScales(
        x_scale=L,
        t_scale=L / speed,
        stress_scale=mu,
        nu_bar=params.nu / L * speed,
        gamma_bar=params.gamma * mu / L * speed,
    )


def redimensionalize(scales: NondimScales, variant: Variant | str) -> ModelParams:
    """Invert `nondimensionalize`: rebuild the dimensional parameters."""
    mu = scales.stress_scale
    L = scales.x_scale
    rho = mu * (scales.t_scale / L) ** 2
    return ModelParams(
        variant=variant,
        rho=rho,
        mu=mu,
        length_scale=L,
        nu=scales.nu_bar * scales.t_scale,
        gamma=scales.gamma_bar * scales.t_scale / mu,
    )


def dimensionless_params(params: ModelParams) -> ModelParams:
    """The same model in the unit form rho = mu = L = 1 used by the solvers."""
    scales = nondimensionalize(params)
    return ModelParams(
        variant=params.variant,
        rho=1.0,
        mu=1.0,
        length_scale=1.0,
        nu=scales.nu_bar,
        gamma=scales.gamma_bar,
    )


def integrate_field(field: Field) -> float:
    """Trapezoid-rule integral of a field over its grid.

    On a periodic grid the two endpoint half-weights merge, so the rule is
    the plain spacing-weighted nodal sum.
    """
    dx = field.grid.spacing
    if field.grid.boundary is Boundary.PERIODIC:
        return float(dx * field.values.sum())
    return float(np.trapezoid(field.values, dx=dx))


def first_derivative(values: np.ndarray, spacing: float, boundary: Boundary) -> np.ndarray:
    """Second-order first derivative on nodal values (array kernel)."""
    if boundary is Boundary.PERIODIC:
        return (np.roll(values, -1) - np.roll(values, 1)) / (2.0 * spacing)
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * spacing)
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * spacing)
    out[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * spacing)
    return out


def second_derivative(values: np.ndarray, spacing: float, boundary: Boundary) -> np.ndarray:
    """Second-order second derivative on nodal values (array kernel)."""
    dx2 = spacing * spacing
    if boundary is Boundary.PERIODIC:
        return (np.roll(values, -1) - 2.0 * values + np.roll(values, 1)) / dx2
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / dx2
    out[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / dx2
    out[-1] = (2.0 * values[-1] - 5.0 * values[-2] + 4.0 * values[-3] - values[-4]) / dx2
    return out


def spatial_derivative(field: Field, order: int = 1) -> Field:
    """First or second spatial derivative of a field.

    Periodic grids use centered stencils with wraparound; dirichlet grids use
    centered stencils inside and one-sided second-order stencils at the two
    endpoints, so the result is second-order accurate everywhere.

    Parameters
    ----------
    field : Field
    order : int
        1 or 2.

    Returns
    -------
    Field on the same grid.
    """
    if order == 1:
        out = first_derivative(field.values, field.grid.spacing, field.grid.boundary)
    elif order == 2:
        out = second_derivative(field.values, field.grid.spacing, field.grid.boundary)
    else:
        raise InvalidParameterError(f"derivative order must be 1 or 2, got {order}")
    return Field(out, field.grid)
