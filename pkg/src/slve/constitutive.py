"""Monotone stress-to-strain response functions and their potentials.

Both model variants express strain through a response function of stress:
strain = h(T) - gamma*T_t (stress-rate form) or strain + nu*strain_t = g(T)
(strain-rate form).  A response function satisfies h(0) = 0 and dh/dT > 0;
the strain-limiting members of the catalog are bounded, |h| < 1, so strains
stay below a fixed limit no matter how large the stress grows.

The catalog:

    linear      h(T) = beta*T
    saturating  h(T) = beta*T / (1 + (beta*|T|)**a)**(1/a),   bound 1
    arctan      h(T) = (2/pi)*arctan(beta*pi*T/2),             bound 1

all normalized so dh/dT at 0 equals beta.  Each carries its derivative
(the compliance), its antiderivative H(T) = int_0^T h(s) ds (the stored
complementary potential rho*phi_c), and a monotone inverse where one exists
in closed form.

The dissipation audit checks the sign of the rate gamma*(T_t)^2 along a
sampled stress history; it is nonnegative exactly when gamma >= 0, which is
the admissibility condition for the stress-rate coefficient.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .errors import (
    InvalidHistoryError,
    InvalidParameterError,
    NumericalDerivativeError,
    OutOfRangeError,
    SlveError,
)

__all__ = [
    "Kind",
    "ConstitutiveFunction",
    "PotentialPair",
    "DissipationAudit",
    "make_constitutive",
    "custom_constitutive",
    "potential_from_response",
    "response_from_potential",
    "compliance",
    "audit_dissipation",
    "invert",
    "invert_array",
]

# Step scale for one-shot centered differences: eps**(1/3) balances
# truncation against roundoff for second-order stencils.
_FD_STEP = float(np.cbrt(np.finfo(float).eps))


class Kind(str, enum.Enum):
    LINEAR = "linear"
    SATURATING = "saturating"
    ARCTAN = "arctan"
    CUSTOM = "custom"


def _elementwise(fn: Callable[[np.ndarray], np.ndarray]) -> Callable:
    """Make an array function accept scalars and return scalars for them."""

    def wrapped(T):
        arr = np.asarray(T, dtype=float)
        out = np.asarray(fn(arr))
        if arr.ndim == 0:
            return float(out)
        return out

    return wrapped


@dataclass(frozen=True)
class ConstitutiveFunction:
    """A response function bundled with its calculus.

    value, derivative, antiderivative accept scalars or arrays; inverse is
    None when no closed form exists (invert() then falls back to iteration).
    bound is sup |value|, np.inf when unbounded; derivative must be positive
    for the inversion contract to hold (true for the whole catalog).
    """

    kind: Kind
    beta: float
    a: Optional[float]
    value: Callable
    derivative: Callable
    antiderivative: Callable
    inverse: Optional[Callable]
    bound: float

    def __call__(self, T):
        return self.value(T)


def _saturating_callables(beta: float, a: float):
    p = (a + 1.0) / a

    def raw_value(arr):
        u = beta * np.abs(arr)
        out = np.empty_like(u)
        small = u < 1.0
        us = u[small]
        out[small] = us * (1.0 + us**a) ** (-1.0 / a)
        ub = u[~small]
        # rewrite avoids overflow of u**a for large |T|
        out[~small] = (1.0 + ub ** (-a)) ** (-1.0 / a)
        return np.sign(arr) * out

    def raw_deriv(arr):
        u = beta * np.abs(arr)
        out = np.empty_like(u)
        small = u < 1.0
        us = u[small]
        out[small] = (1.0 + us**a) ** (-p)
        ub = u[~small]
        out[~small] = ub ** (-(a + 1.0)) * (1.0 + ub ** (-a)) ** (-p)
        return beta * out

    if a == 1.0:

        def raw_antider(arr):
            u = beta * np.abs(arr)
            return (u - np.log1p(u)) / beta

    elif a == 2.0:

        def raw_antider(arr):
            u = beta * np.abs(arr)
            # sqrt(1+u^2)-1 without cancellation at small u
            return u * u / (1.0 + np.hypot(1.0, u)) / beta

    else:
        scalar_value = _elementwise(raw_value)

        def _h_scalar(t: float) -> float:
            val, _ = quad(scalar_value, 0.0, abs(t), epsabs=1e-13, epsrel=1e-12)
            return val

        _h_vec = np.vectorize(_h_scalar, otypes=[float])

        def raw_antider(arr):
            return _h_vec(arr)

    def raw_inverse(arr):
        w = np.abs(arr)
        return np.sign(arr) * w / (beta * (1.0 - w**a) ** (1.0 / a))

    return raw_value, raw_deriv, raw_antider, raw_inverse


def _arctan_callables(beta: float):
    c = beta * math.pi / 2.0

    def raw_value(arr):
        return (2.0 / math.pi) * np.arctan(c * arr)

    def raw_deriv(arr):
        return beta / (1.0 + (c * arr) ** 2)

    def raw_antider(arr):
        return (2.0 / math.pi) * (arr * np.arctan(c * arr) - np.log1p((c * arr) ** 2) / (2.0 * c))

    def raw_inverse(arr):
        return np.tan(math.pi * arr / 2.0) / c

    return raw_value, raw_deriv, raw_antider, raw_inverse


def make_constitutive(kind: Kind | str, beta: float = 1.0, a: float = 1.0) -> ConstitutiveFunction:
    """Build a catalog response function.

    Parameters
    ----------
    kind : {"linear", "saturating", "arctan"}
    beta : float
        Small-stress slope dh/dT at T = 0; must be positive and finite.
    a : float
        Saturation exponent, used by the saturating kind only; positive.

    Returns
    -------
    ConstitutiveFunction
    """
    try:
        kind = Kind(kind)
    except ValueError:
        known = ", ".join(k.value for k in Kind if k is not Kind.CUSTOM)
        raise InvalidParameterError(
            f"unknown response kind {kind!r}; catalog kinds are {known}"
        ) from None
    beta = float(beta)
    if not math.isfinite(beta) or beta <= 0.0:
        raise InvalidParameterError(f"beta must be positive and finite, got {beta}")
    if kind is Kind.LINEAR:
        return ConstitutiveFunction(
            kind=kind,
            beta=beta,
            a=None,
            value=_elementwise(lambda arr: beta * arr),
            derivative=_elementwise(lambda arr: beta * np.ones_like(arr)),
            antiderivative=_elementwise(lambda arr: 0.5 * beta * arr * arr),
            inverse=_elementwise(lambda arr: arr / beta),
            bound=math.inf,
        )
    if kind is Kind.SATURATING:
        a = float(a)
        if not math.isfinite(a) or a <= 0.0:
            raise InvalidParameterError(f"saturation exponent a must be positive, got {a}")
        val, der, anti, inv = _saturating_callables(beta, a)
        return ConstitutiveFunction(
            kind=kind,
            beta=beta,
            a=a,
            value=_elementwise(val),
            derivative=_elementwise(der),
            antiderivative=_elementwise(anti),
            inverse=_elementwise(inv),
            bound=1.0,
        )
    if kind is Kind.ARCTAN:
        val, der, anti, inv = _arctan_callables(beta)
        return ConstitutiveFunction(
            kind=kind,
            beta=beta,
            a=None,
            value=_elementwise(val),
            derivative=_elementwise(der),
            antiderivative=_elementwise(anti),
            inverse=_elementwise(inv),
            bound=1.0,
        )
    raise InvalidParameterError("use custom_constitutive() for kind='custom'")


def _fd_derivative(value: Callable) -> Callable:
    def raw(arr):
        step = _FD_STEP * np.maximum(1.0, np.abs(arr))
        return (np.asarray(value(arr + step)) - np.asarray(value(arr - step))) / (2.0 * step)

    return raw


def _quad_antiderivative(value: Callable) -> Callable:
    def _scalar(t: float) -> float:
        val, _ = quad(value, 0.0, t, epsabs=1e-13, epsrel=1e-12)
        return val

    vec = np.vectorize(_scalar, otypes=[float])

    def raw(arr):
        return vec(arr)

    return raw


def custom_constitutive(
    value: Callable,
    derivative: Optional[Callable] = None,
    antiderivative: Optional[Callable] = None,
    inverse: Optional[Callable] = None,
    bound: float = math.inf,
) -> ConstitutiveFunction:
    """Wrap a user-supplied response function h.

    h must satisfy h(0) = 0 (checked) and should be strictly increasing for
    inversion to be meaningful (not checkable globally; invert() fails loudly
    on a bad bracket instead).  Missing pieces are filled numerically:
    derivative by centered differences, antiderivative by quadrature from 0.
    """
    value = _elementwise(value)
    v0 = value(0.0)
    if not math.isfinite(v0) or abs(v0) > 1e-12:
        raise InvalidParameterError(f"a response function must vanish at T = 0, got h(0) = {v0}")
    derivative = _elementwise(derivative if derivative is not None else _fd_derivative(value))
    antiderivative = _elementwise(
        antiderivative if antiderivative is not None else _quad_antiderivative(value)
    )
    inverse = _elementwise(inverse) if inverse is not None else None
    return ConstitutiveFunction(
        kind=Kind.CUSTOM,
        beta=float(derivative(0.0)),
        a=None,
        value=value,
        derivative=derivative,
        antiderivative=antiderivative,
        inverse=inverse,
        bound=float(bound),
    )


@dataclass(frozen=True)
class PotentialPair:
    """Complementary potential phi_c and Gibbs potential G, per unit mass.

    In the elastic limit the two carry the same information with opposite
    sign, phi_c = -G, and the response is recovered as h = rho * dphi_c/dT.
    """

    phi_c: Callable
    gibbs: Callable
    rho: float = 1.0
    source: Optional[ConstitutiveFunction] = None


def potential_from_response(f: ConstitutiveFunction, rho: float = 1.0) -> PotentialPair:
    """Potential pair generated by a response function: rho*phi_c = H."""
    if rho <= 0.0 or not math.isfinite(rho):
        raise InvalidParameterError(f"rho must be positive, got {rho}")

    def phi_c(T):
        return f.antiderivative(T) / rho

    def gibbs(T):
        return -f.antiderivative(T) / rho

    return PotentialPair(phi_c=phi_c, gibbs=gibbs, rho=rho, source=f)


def response_from_potential(pair: PotentialPair) -> ConstitutiveFunction:
    """Recover h = rho * dphi_c/dT from a potential pair.

    Pairs built by potential_from_response return their source exactly;
    anything else is differentiated with centered differences, and a
    non-finite difference raises NumericalDerivativeError at call time.
    """
    if pair.source is not None:
        return pair.source
    rho = pair.rho
    phi = pair.phi_c

    def raw_value(arr):
        step = _FD_STEP * np.maximum(1.0, np.abs(arr))
        out = rho * (np.asarray(phi(arr + step)) - np.asarray(phi(arr - step))) / (2.0 * step)
        if not np.all(np.isfinite(out)):
            raise NumericalDerivativeError(
                "potential is not numerically differentiable at a requested sample"
            )
        return out

    def raw_deriv(arr):
        step = np.sqrt(np.sqrt(np.finfo(float).eps)) * np.maximum(1.0, np.abs(arr))
        out = (
            rho
            * (np.asarray(phi(arr + step)) - 2.0 * np.asarray(phi(arr)) + np.asarray(phi(arr - step)))
            / (step * step)
        )
        if not np.all(np.isfinite(out)):
            raise NumericalDerivativeError(
                "potential is not numerically twice differentiable at a requested sample"
            )
        return out

    phi0 = float(phi(0.0))

    def raw_antider(arr):
        return rho * (np.asarray(phi(arr)) - phi0)

    return ConstitutiveFunction(
        kind=Kind.CUSTOM,
        beta=float(_elementwise(raw_deriv)(0.0)),
        a=None,
        value=_elementwise(raw_value),
        derivative=_elementwise(raw_deriv),
        antiderivative=_elementwise(raw_antider),
        inverse=None,
        bound=math.inf,
    )


def compliance(f: ConstitutiveFunction, T):
    """Slope dh/dT: how much strain a unit of extra stress buys."""
    return f.derivative(T)


@dataclass(frozen=True)
class DissipationAudit:
    """Sign check of the dissipation rate gamma*(T_t)^2 along a history."""

    times: np.ndarray
    rates: np.ndarray
    min_rate: float
    total_dissipation: float
    passed: bool


def audit_dissipation(gamma: float, stress_history) -> DissipationAudit:
    """Audit the stress-rate dissipation along a sampled history.

    Parameters
    ----------
    gamma : float
        Stress-rate coefficient; nonnegative values must audit clean.
    stress_history : array-like, shape (n, 2)
        Rows (t, T(t)); n >= 3 and t strictly increasing.

    Returns
    -------
    DissipationAudit
        Nodal rates gamma*(T_t)^2 with T_t from second-order one-sided/
        centered stencils, their minimum, the trapezoid total, and
        passed = (min_rate >= -1e-12).
    """
    if not math.isfinite(gamma) or gamma < 0.0:
        raise InvalidParameterError(
            f"gamma must be nonnegative (dissipation requires it), got {gamma}"
        )
    hist = np.asarray(stress_history, dtype=float)
    if hist.ndim != 2 or hist.shape[1] != 2 or hist.shape[0] < 3:
        raise InvalidHistoryError(
            f"stress history needs shape (n >= 3, 2), got {hist.shape}"
        )
    t, T = hist[:, 0], hist[:, 1]
    if not np.all(np.diff(t) > 0.0):
        raise InvalidHistoryError("history times must be strictly increasing")
    if not math.isfinite(float(gamma)):
        raise InvalidParameterError(f"gamma must be finite, got {gamma}")
    T_t = np.gradient(T, t, edge_order=2)
    rates = float(gamma) * T_t * T_t
    total = float(np.trapezoid(rates, t))
    min_rate = float(rates.min())
    return DissipationAudit(
        times=t.copy(),
        rates=rates,
        min_rate=min_rate,
        total_dissipation=total,
        passed=bool(min_rate >= -1e-12),
    )


def invert(f: ConstitutiveFunction, y: float) -> float:
    """Solve h(T) = y for T.

    Uses the closed-form inverse when the catalog provides one, otherwise
    bracketing bisection refined by safeguarded Newton steps.  The result
    satisfies |h(T) - y| < 1e-12 * max(1, |y|).

    Raises
    ------
    OutOfRangeError
        If |y| meets or exceeds the response bound (strain-limited responses
        never attain their limit at finite stress).
    """
    y = float(y)
    if not math.isfinite(y):
        raise InvalidParameterError(f"target must be finite, got {y}")
    if abs(y) >= f.bound:
        raise OutOfRangeError(
            f"target {y} is outside the attainable range (|h| < {f.bound})"
        )
    tol = 1e-12 * max(1.0, abs(y))
    if f.inverse is not None:
        T = float(f.inverse(y))
        if abs(float(f.value(T)) - y) < tol:
            return T
        # fall through and polish (defensive; the catalog inverses are exact)
    else:
        T = 0.0

    # establish a bracket [lo, hi] with h(lo) <= y <= h(hi)
    scale = max(1.0, abs(y) / max(f.beta, 1e-12))
    lo, hi = -scale, scale
    expansions = 0
    while float(f.value(hi)) < y:
        hi *= 2.0
        expansions += 1
        if expansions > 600 or not math.isfinite(hi):
            raise OutOfRangeError(f"target {y} appears to exceed the attainable range")
    while float(f.value(lo)) > y:
        lo *= 2.0
        expansions += 1
        if expansions > 600 or not math.isfinite(lo):
            raise OutOfRangeError(f"target {y} appears to be below the attainable range")

    if not lo <= T <= hi:
        T = 0.5 * (lo + hi)
    for _ in range(200):
        r = float(f.value(T)) - y
        if abs(r) < tol:
            return T
        if r > 0.0:
            hi = T
        else:
            lo = T
        slope = float(f.derivative(T))
        T_new = T - r / slope if slope > 0.0 else 0.5 * (lo + hi)
        if not (lo < T_new < hi):
            T_new = 0.5 * (lo + hi)
        T = T_new
    raise SlveError(f"inversion did not converge for target {y}")


def invert_array(f: ConstitutiveFunction, y: np.ndarray) -> np.ndarray:
    """Vectorized invert(); the closed-form inverse when available."""
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(y) >= f.bound):
        bad = float(y[np.argmax(np.abs(y))])
        raise OutOfRangeError(
            f"target {bad} is outside the attainable range (|h| < {f.bound})"
        )
    if f.inverse is not None:
        return np.asarray(f.inverse(y), dtype=float)
    flat = np.asarray([invert(f, float(v)) for v in y.ravel()])
    return flat.reshape(y.shape)
