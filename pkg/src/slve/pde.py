"""Method-of-lines solvers for the two models and their energy bookkeeping.

Both models share the kinematics and momentum balance

    v_t = T_x / rho,      eps_t = v_x,

and differ in the constitutive closure.  As first-order systems:

    stress-rate  (unknowns v, eps, T):   T_t = (h(T) - eps) / gamma
    strain-rate  (unknowns v, eps):      T   = g^{-1}(eps + nu * v_x)
                                         eps_t = (g(T) - eps) / nu
    elastic      (unknowns v, T):        T_t = v_x / h'(T),  eps = h(T)

Solvers assume the dimensionless unit form rho = mu = length_scale = 1
produced by core.dimensionless_params (rho is kept explicit in the formulas,
so consistent non-unit systems also integrate correctly).

Space: second-order centered differences, periodic wrap or one-sided
second-order stencils with pinned values at dirichlet_zero ends.  Time:
classical fourth-order Runge-Kutta with a fixed step below the variant's
explicit stability ceiling

    stress-rate:  dt <= min(0.5*dx, 0.5*gamma)
    strain-rate:  dt <= min(0.5*dx, 0.25*dx**2/nu)
    elastic:      dt <= 0.5*dx

(a dt above the ceiling is a configuration error, not a warning).

Energy: with stored density rho*omega = T*eps - H(T) (stress-rate, elastic)
or T*g(T) - G1(T) (strain-rate), total energy obeys

    d/dt int (rho/2) v**2 + rho*omega dx  =  - gamma * int (T_t)**2 dx
                                          =  - (nu/rho) * int (T_x)**2 dx

for the stress-rate / strain-rate model respectively.  The stress-rate
density is not sign-definite (H grows like T**2/2 only near 0), which is why
decaying energy and a growing solution coexist for that model: it is
unstable at every wavenumber even though its dissipation rate is
nonnegative.  Simulations of it are meaningful on short horizons only, and
growth past the configured threshold is reported as blow-up, not treated as
a bug.

The truncation to a periodic or pinned interval of what is naturally a
whole-line problem is a modeling choice made here once: waves that leave a
pinned boundary reflect, and periodic runs must keep features away from the
seam for as long as the comparison window lasts.

The rate coefficients are constants; a stress-dependent gamma(T) would slot
into the same RHS assembly but is deliberately out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .constitutive import ConstitutiveFunction, invert_array
from .core import (
    Boundary,
    Field,
    Grid1D,
    ModelParams,
    Variant,
    first_derivative,
    integrate_field,
)
from .errors import (
    BlowUpError,
    InvalidParameterError,
    InvalidStepError,
    InvalidWindowError,
    OutOfRangeError,
    StrainLimitExceededError,
)

__all__ = [
    "SimState",
    "StateDerivative",
    "SolverConfig",
    "EnergyReport",
    "rhs_stress_rate",
    "rhs_strain_rate",
    "rhs_elastic",
    "step",
    "simulate",
    "stability_ceiling",
    "stored_energy_density",
    "total_energy",
    "energy_report",
    "energy_series",
    "zero_state",
    "gaussian_bump_state",
    "single_mode_state",
    "relax_stress",
]


@dataclass(frozen=True)
class SimState:
    """Snapshot of (velocity, strain, stress) fields at one time."""

    t: float
    v: Field
    eps: Field
    stress: Field

    def __post_init__(self):
        if not (self.v.grid == self.eps.grid == self.stress.grid):
            raise InvalidParameterError("state fields must share one grid")

    @property
    def grid(self) -> Grid1D:
        return self.v.grid


@dataclass(frozen=True)
class StateDerivative:
    """Time derivatives of the evolved fields; None marks a derived field."""

    dv: np.ndarray
    deps: Optional[np.ndarray]
    dstress: Optional[np.ndarray]


@dataclass(frozen=True)
class SolverConfig:
    """Everything a time stepper needs besides the state itself."""

    params: ModelParams
    constitutive: ConstitutiveFunction
    dt: float
    t_final: float
    output_stride: int = 1
    blowup_threshold: float = 1e6

    def __post_init__(self):
        dt = float(self.dt)
        t_final = float(self.t_final)
        if not math.isfinite(dt) or dt <= 0.0:
            raise InvalidStepError(f"dt must be positive, got {dt}")
        if not math.isfinite(t_final) or t_final <= 0.0:
            raise InvalidParameterError(f"t_final must be positive, got {t_final}")
        if dt > t_final:
            raise InvalidStepError(f"dt = {dt} exceeds t_final = {t_final}")
        if int(self.output_stride) != self.output_stride or self.output_stride < 1:
            raise InvalidParameterError(
                f"output_stride must be an integer >= 1, got {self.output_stride!r}"
            )
        if not math.isfinite(self.blowup_threshold) or self.blowup_threshold <= 0.0:
            raise InvalidParameterError(
                f"blowup_threshold must be positive, got {self.blowup_threshold}"
            )
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "t_final", t_final)
        object.__setattr__(self, "output_stride", int(self.output_stride))
        object.__setattr__(self, "blowup_threshold", float(self.blowup_threshold))

    @property
    def variant(self) -> Variant:
        return self.params.variant


def stability_ceiling(variant: Variant, grid: Grid1D, params: ModelParams) -> float:
    """Largest admissible RK4 step for this variant on this grid."""
    dx = grid.spacing
    variant = Variant(variant)
    if variant is Variant.STRESS_RATE:
        return min(0.5 * dx, 0.5 * params.gamma)
    if variant is Variant.STRAIN_RATE:
        return min(0.5 * dx, 0.25 * dx * dx / params.nu)
    return 0.5 * dx


def _check_step(config: SolverConfig, grid: Grid1D) -> None:
    ceiling = stability_ceiling(config.variant, grid, config.params)
    if config.dt > ceiling:
        raise InvalidParameterError(
            f"dt = {config.dt} exceeds the stability ceiling {ceiling:.6g} "
            f"for variant {config.variant.value} on spacing {grid.spacing:.6g}"
        )


def _reconstruct_stress(
    f: ConstitutiveFunction, params: ModelParams, v: np.ndarray, eps: np.ndarray, grid: Grid1D
) -> np.ndarray:
    """Strain-rate stress: T = g^{-1}(eps + nu * v_x), the invertible-range
    check coming first so a limit violation is reported by node."""
    target = eps + params.nu * first_derivative(v, grid.spacing, grid.boundary)
    if f.bound != math.inf:
        bad = np.abs(target) >= f.bound
        if np.any(bad):
            node = int(np.argmax(np.abs(target)))
            raise StrainLimitExceededError(
                f"response argument {target[node]:.6g} at node {node} reached "
                f"the strain limit {f.bound:.6g}",
                node=node,
                value=float(target[node]),
            )
    try:
        return invert_array(f, target)
    except OutOfRangeError as exc:
        raise StrainLimitExceededError(str(exc)) from exc


def _make_rhs(
    variant: Variant, f: ConstitutiveFunction, params: ModelParams, grid: Grid1D
) -> Callable[[np.ndarray], np.ndarray]:
    """RHS on stacked rows: (v, eps, T), (v, eps), or (v, T) by variant."""
    dx = grid.spacing
    bdy = grid.boundary
    rho = params.rho
    pinned = bdy is Boundary.DIRICHLET_ZERO

    if variant is Variant.STRESS_RATE:
        gamma = params.gamma

        def rhs(Y):
            v, eps, T = Y
            out = np.empty_like(Y)
            out[0] = first_derivative(T, dx, bdy) / rho
            out[1] = first_derivative(v, dx, bdy)
            out[2] = (f.value(T) - eps) / gamma
            if pinned:
                out[:, 0] = 0.0
                out[:, -1] = 0.0
            return out

    elif variant is Variant.STRAIN_RATE:
        nu = params.nu

        def rhs(Y):
            v, eps = Y
            vx = first_derivative(v, dx, bdy)
            T = _reconstruct_stress(f, params, v, eps, grid)
            out = np.empty_like(Y)
            out[0] = first_derivative(T, dx, bdy) / rho
            # algebraically (g(T) - eps)/nu; this form keeps the small-nu
            # cancellation confined to the inversion residual
            out[1] = vx + (f.value(T) - eps - nu * vx) / nu
            if pinned:
                out[:, 0] = 0.0
                out[:, -1] = 0.0
            return out

    else:

        def rhs(Y):
            v, T = Y
            out = np.empty_like(Y)
            out[0] = first_derivative(T, dx, bdy) / rho
            out[1] = first_derivative(v, dx, bdy) / f.derivative(T)
            if pinned:
                out[:, 0] = 0.0
                out[:, -1] = 0.0
            return out

    return rhs


def _pack(state: SimState, variant: Variant) -> np.ndarray:
    if variant is Variant.STRESS_RATE:
        rows = (state.v.values, state.eps.values, state.stress.values)
    elif variant is Variant.STRAIN_RATE:
        rows = (state.v.values, state.eps.values)
    else:
        rows = (state.v.values, state.stress.values)
    return np.array(rows, dtype=float)


def _unpack(
    Y: np.ndarray, t: float, grid: Grid1D, variant: Variant,
    f: ConstitutiveFunction, params: ModelParams,
) -> SimState:
    if variant is Variant.STRESS_RATE:
        v, eps, T = Y
    elif variant is Variant.STRAIN_RATE:
        v, eps = Y
        T = _reconstruct_stress(f, params, v, eps, grid)
    else:
        v, T = Y
        eps = np.asarray(f.value(T))
    return SimState(
        t=float(t),
        v=Field(v, grid),
        eps=Field(eps, grid),
        stress=Field(T, grid),
    )


def _check_blowup(Y: np.ndarray, t: float, variant: Variant, threshold: float) -> None:
    if np.all(np.isfinite(Y)) and np.max(np.abs(Y)) <= threshold:
        return
    # stress row for the variants that carry one; largest state entry else
    row = Y if variant is Variant.STRAIN_RATE else Y[-1]
    finite = row[np.isfinite(row)]
    max_abs = float(np.max(np.abs(finite))) if finite.size else math.inf
    raise BlowUpError(t=float(t), max_abs_stress=max_abs)


def _rk4_step(rhs, Y, h):
    k1 = rhs(Y)
    k2 = rhs(Y + 0.5 * h * k1)
    k3 = rhs(Y + 0.5 * h * k2)
    k4 = rhs(Y + h * k3)
    return Y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rhs_stress_rate(state: SimState, params: ModelParams, h: ConstitutiveFunction) -> StateDerivative:
    """Time derivative of a stress-rate state.

    v_t = T_x/rho, eps_t = v_x, T_t = (h(T) - eps)/gamma (the constitutive
    relation rearranged for the stress rate).
    """
    if params.variant is not Variant.STRESS_RATE:
        raise InvalidParameterError(f"params are for variant {params.variant.value}")
    out = _make_rhs(Variant.STRESS_RATE, h, params, state.grid)(_pack(state, Variant.STRESS_RATE))
    return StateDerivative(dv=out[0], deps=out[1], dstress=out[2])


def rhs_strain_rate(state: SimState, params: ModelParams, g: ConstitutiveFunction) -> StateDerivative:
    """Time derivative of a strain-rate state; stress is reconstructed from
    T = g^{-1}(eps + nu*v_x), not evolved, so dstress is None."""
    if params.variant is not Variant.STRAIN_RATE:
        raise InvalidParameterError(f"params are for variant {params.variant.value}")
    out = _make_rhs(Variant.STRAIN_RATE, g, params, state.grid)(_pack(state, Variant.STRAIN_RATE))
    return StateDerivative(dv=out[0], deps=out[1], dstress=None)


def rhs_elastic(state: SimState, params: ModelParams, h: ConstitutiveFunction) -> StateDerivative:
    """Time derivative of an elastic state: T_t = v_x / h'(T); the strain is
    slaved to the stress (eps = h(T)), so deps follows by the chain rule."""
    if params.variant is not Variant.ELASTIC:
        raise InvalidParameterError(f"params are for variant {params.variant.value}")
    out = _make_rhs(Variant.ELASTIC, h, params, state.grid)(_pack(state, Variant.ELASTIC))
    return StateDerivative(dv=out[0], deps=out[1] * np.asarray(h.derivative(state.stress.values)), dstress=out[1])


def step(state: SimState, config: SolverConfig) -> SimState:
    """One RK4 step of length config.dt; validates the stability ceiling."""
    _check_step(config, state.grid)
    variant = config.variant
    rhs = _make_rhs(variant, config.constitutive, config.params, state.grid)
    Y = _rk4_step(rhs, _pack(state, variant), config.dt)
    t_new = state.t + config.dt
    _check_blowup(Y, t_new, variant, config.blowup_threshold)
    return _unpack(Y, t_new, state.grid, variant, config.constitutive, config.params)


def simulate(initial: SimState, config: SolverConfig) -> List[SimState]:
    """March from the initial state to t_final, collecting snapshots.

    Snapshots are the initial state, every output_stride-th step, and the
    final state.  The final step is shortened to land on t0 + t_final
    exactly.  For the strain-rate variant the stress snapshot is always the
    reconstruction from (v, eps); for the elastic variant the strain is
    always h(T).

    Raises
    ------
    BlowUpError
        When the state leaves the finite range or passes the configured
        magnitude threshold; carries the time it happened.
    """
    grid = initial.grid
    _check_step(config, grid)
    variant = config.variant
    f = config.constitutive
    rhs = _make_rhs(variant, f, config.params, grid)
    Y = _pack(initial, variant)
    t0 = initial.t

    q = config.t_final / config.dt
    n_full = int(q)
    if q - n_full > 1.0 - 1e-9:
        n_full += 1
    remainder = config.t_final - n_full * config.dt
    do_remainder = remainder > 1e-12 * config.dt
    n_total = n_full + (1 if do_remainder else 0)

    states = [_unpack(Y, t0, grid, variant, f, config.params)]
    for i in range(n_total):
        h = config.dt if i < n_full else remainder
        t_new = t0 + (config.t_final if i == n_total - 1 else (i + 1) * config.dt)
        Y = _rk4_step(rhs, Y, h)
        try:
            _check_blowup(Y, t_new, variant, config.blowup_threshold)
        except BlowUpError as exc:
            # hand back what was collected so callers can report the run so far
            exc.partial = states
            raise
        is_last = i == n_total - 1
        if is_last or (i + 1) % config.output_stride == 0:
            states.append(_unpack(Y, t_new, grid, variant, f, config.params))
    return states


def stored_energy_density(variant: Variant, f: ConstitutiveFunction, T, eps):
    """Stored energy per unit length, rho*omega.

    stress-rate and elastic: T*eps - H(T) with H the antiderivative of h
    (not sign-definite, and unbounded below in T for bounded h);
    strain-rate: T*g(T) - G1(T), nonnegative for monotone g.
    """
    variant = Variant(variant)
    T = np.asarray(T, dtype=float)
    if variant is Variant.STRAIN_RATE:
        return T * np.asarray(f.value(T)) - np.asarray(f.antiderivative(T))
    eps = np.asarray(eps, dtype=float)
    return T * eps - np.asarray(f.antiderivative(T))


def total_energy(state: SimState, params: ModelParams, f: ConstitutiveFunction) -> float:
    """Kinetic plus stored energy over the grid."""
    ke = 0.5 * params.rho * state.v.values**2
    se = stored_energy_density(params.variant, f, state.stress.values, state.eps.values)
    return float(integrate_field(Field(ke + se, state.grid)))


@dataclass(frozen=True)
class EnergyReport:
    """Energy balance at one sample: d(total)/dt should equal -dissipation."""

    t: float
    kinetic: float
    internal: float
    total: float
    dissipation_rate: float
    balance_residual: float


def _dissipation_rate(state: SimState, params: ModelParams, f: ConstitutiveFunction) -> float:
    if params.variant is Variant.STRESS_RATE:
        T_t = (np.asarray(f.value(state.stress.values)) - state.eps.values) / params.gamma
        return float(integrate_field(Field(params.gamma * T_t * T_t, state.grid)))
    if params.variant is Variant.STRAIN_RATE:
        T_x = first_derivative(state.stress.values, state.grid.spacing, state.grid.boundary)
        return float(integrate_field(Field(T_x * T_x, state.grid))) * params.nu / params.rho
    return 0.0


def energy_report(
    window: Sequence[SimState], params: ModelParams, f: ConstitutiveFunction
) -> EnergyReport:
    """Energy balance check on a uniformly spaced window of >= 3 states.

    The middle state provides the energies and the dissipation rate; its two
    neighbors provide a centered estimate of dE/dt.  balance_residual is
    |dE/dt + dissipation_rate| and would vanish for the exact dynamics.
    """
    if len(window) < 3:
        raise InvalidWindowError(f"energy balance needs >= 3 states, got {len(window)}")
    mid = len(window) // 2
    prev_s, mid_s, next_s = window[mid - 1], window[mid], window[mid + 1]
    if not (prev_s.grid == mid_s.grid == next_s.grid):
        raise InvalidWindowError("window states must share one grid")
    d1 = mid_s.t - prev_s.t
    d2 = next_s.t - mid_s.t
    if d1 <= 0.0 or d2 <= 0.0:
        raise InvalidWindowError("window times must be strictly increasing")
    if abs(d1 - d2) > 1e-9 * max(d1, d2):
        raise InvalidWindowError(f"window spacing differs: {d1!r} vs {d2!r}")

    kinetic = float(integrate_field(Field(0.5 * params.rho * mid_s.v.values**2, mid_s.grid)))
    internal = float(
        integrate_field(
            Field(
                stored_energy_density(params.variant, f, mid_s.stress.values, mid_s.eps.values),
                mid_s.grid,
            )
        )
    )
    e_prev = total_energy(prev_s, params, f)
    e_next = total_energy(next_s, params, f)
    dEdt = (e_next - e_prev) / (d1 + d2)
    dissipation = _dissipation_rate(mid_s, params, f)
    return EnergyReport(
        t=mid_s.t,
        kinetic=kinetic,
        internal=internal,
        total=kinetic + internal,
        dissipation_rate=dissipation,
        balance_residual=abs(dEdt + dissipation),
    )


def energy_series(
    states: Sequence[SimState], params: ModelParams, f: ConstitutiveFunction
) -> List[EnergyReport]:
    """Energy balance at every uniformly spaced interior sample of a run.

    Interior samples whose neighbors are not equally spaced (the shortened
    landing step at the end of a run) have no centered stencil and are
    skipped.
    """
    if len(states) < 3:
        raise InvalidWindowError(f"energy series needs >= 3 states, got {len(states)}")
    reports = []
    for i in range(1, len(states) - 1):
        d1 = states[i].t - states[i - 1].t
        d2 = states[i + 1].t - states[i].t
        if abs(d1 - d2) > 1e-9 * max(d1, d2):
            continue
        reports.append(energy_report(states[i - 1 : i + 2], params, f))
    if not reports:
        raise InvalidWindowError("no uniformly spaced interior sample in the run")
    return reports


def zero_state(grid: Grid1D) -> SimState:
    """The rest state: the equilibrium every variant shares."""
    z = np.zeros(grid.n_nodes)
    return SimState(t=0.0, v=Field(z, grid), eps=Field(z, grid), stress=Field(z, grid))


def _manifold_state(grid: Grid1D, f: ConstitutiveFunction, T0: np.ndarray) -> SimState:
    # v = 0 and eps = f(T0) make t = 0 an exact constitutive equilibrium for
    # every variant, so runs start with zero dissipation transient
    eps0 = np.asarray(f.value(T0))
    return SimState(
        t=0.0,
        v=Field(np.zeros(grid.n_nodes), grid),
        eps=Field(eps0, grid),
        stress=Field(T0, grid),
    )


def gaussian_bump_state(
    grid: Grid1D, f: ConstitutiveFunction, center: float, width: float, amplitude: float
) -> SimState:
    """Stress bump amplitude*exp(-((x-center)/width)**2) on the manifold."""
    if width <= 0.0:
        raise InvalidParameterError(f"width must be positive, got {width}")
    x = grid.nodes()
    T0 = amplitude * np.exp(-(((x - center) / width) ** 2))
    return _manifold_state(grid, f, T0)


def single_mode_state(
    grid: Grid1D, f: ConstitutiveFunction, k: float, amplitude: float
) -> SimState:
    """One spatial mode of the stress on the manifold.

    Periodic grids take cos(k x) and need k*length to be a whole number of
    turns; pinned grids take sin(k x) and need k*length to be a whole number
    of half-turns, so the ends stay at zero.
    """
    x = grid.nodes()
    if grid.boundary is Boundary.PERIODIC:
        turns = k * grid.length / (2.0 * math.pi)
        if abs(turns - round(turns)) > 1e-9 or round(turns) < 1:
            raise InvalidParameterError(
                f"k = {k} does not fit the periodic length {grid.length}"
            )
        T0 = amplitude * np.cos(k * x)
    else:
        half_turns = k * grid.length / math.pi
        if abs(half_turns - round(half_turns)) > 1e-9 or round(half_turns) < 1:
            raise InvalidParameterError(
                f"k = {k} does not vanish at the pinned ends for length {grid.length}"
            )
        T0 = amplitude * np.sin(k * x)
    return _manifold_state(grid, f, T0)


def relax_stress(
    h: ConstitutiveFunction, eps, gamma: float, t_final: float, dt: float, T0=0.0
):
    """Integrate the frozen-strain nodewise ODE T_t = (h(T) - eps)/gamma.

    This is the constitutive relation of the stress-rate model with the
    strain held fixed; the stress-rate dispersion's k = 0 root 1/gamma is
    its linearized rate at the equilibrium h(T*) = eps.  eps and T0 may be
    scalars or arrays (broadcast together).  Returns T at t_final.
    """
    if gamma <= 0.0 or not math.isfinite(float(gamma)):
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    if dt <= 0.0 or dt > t_final:
        raise InvalidStepError(f"need 0 < dt <= t_final, got dt={dt}, t_final={t_final}")
    eps_arr, T = np.broadcast_arrays(np.asarray(eps, dtype=float), np.asarray(T0, dtype=float))
    T = T.copy()
    scalar = T.ndim == 0

    def rhs(Tv):
        return (np.asarray(h.value(Tv)) - eps_arr) / gamma

    q = t_final / dt
    n_full = int(q)
    if q - n_full > 1.0 - 1e-9:
        n_full += 1
    remainder = t_final - n_full * dt
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_full + (1 if remainder > 1e-12 * dt else 0)):
            s = dt if i < n_full else remainder
            k1 = rhs(T)
            k2 = rhs(T + 0.5 * s * k1)
            k3 = rhs(T + 0.5 * s * k2)
            k4 = rhs(T + s * k3)
            T = T + (s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return float(T) if scalar else T
