"""Pool state and curve-level operations for the oracle-anchored hybrid AMM.

The pool holds reserves (x, y) of assets X and Y and blends two pricing
regimes through the mix parameter z: at z = 0 it is the constant-product
curve x*y = k, at z = 1 the oracle-pegged line y = k - p*x, and in between
the marginal price is (1-z)*y/x + z*p, which integrates to

    y(x) = k * x**(z-1) - z*p*x / (2-z).

All operations are pure; states are immutable value objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _kernels
from .errors import DomainError, InsolvencyError

__all__ = [
    "PoolState",
    "anchor_k",
    "reserve_y",
    "dy_dx",
    "d2y_dx2",
    "spot_price",
    "max_x_bound",
]

# On-curve residual admitted by PoolState, relative to the curve-term scale.
_ON_CURVE_RTOL = 1e-12


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


def _check_finite_positive(value: float, name: str) -> float:
    value = float(value)
    _require(math.isfinite(value) and value > 0.0, f"{name} must be finite and > 0, got {value!r}")
    return value


def _check_mix(z: float) -> float:
    z = float(z)
    _require(math.isfinite(z) and 0.0 <= z <= 1.0, f"z must lie in [0, 1], got {z!r}")
    return z


@dataclass(frozen=True)
class PoolState:
    """Immutable pool snapshot: reserves, oracle price, mix parameter, curve constant.

    The constructor checks that (x, y) sits on the (k, p, z) curve; use
    :meth:`anchored` to derive k from reserves instead of supplying it.
    """

    x: float
    y: float
    p: float
    z: float
    k: float

    def __post_init__(self):
        object.__setattr__(self, "x", _check_finite_positive(self.x, "x"))
        object.__setattr__(self, "y", _check_finite_positive(self.y, "y"))
        object.__setattr__(self, "p", _check_finite_positive(self.p, "p"))
        object.__setattr__(self, "z", _check_mix(self.z))
        object.__setattr__(self, "k", _check_finite_positive(self.k, "k"))
        residual = _kernels.curve_y(self.k, self.x, self.p, self.z) - self.y
        # scale by the curve terms, not y itself: near the solvency bound y
        # is a cancellation of two much larger quantities
        scale = self.y + self.z * self.p * self.x / (2.0 - self.z)
        if abs(residual) > _ON_CURVE_RTOL * scale:
            raise DomainError(
                f"reserves ({self.x}, {self.y}) do not lie on the (k={self.k}, p={self.p}, "
                f"z={self.z}) curve: residual {residual:.3e}"
            )

    @classmethod
    def anchored(cls, x: float, y: float, p: float, z: float) -> "PoolState":
        """Build a state from reserves, deriving k so the curve passes through (x, y)."""
        return cls(x, y, p, z, anchor_k(x, y, p, z))


def anchor_k(x: float, y: float, p: float, z: float) -> float:
    """Curve constant through reserves (x, y) at oracle price p.

    k = (y + z*p*x/(2-z)) * x**(1-z); reduces to x*y at z = 0 and to
    y + p*x at z = 1.
    """
    x = _check_finite_positive(x, "x")
    y = _check_finite_positive(y, "y")
    p = _check_finite_positive(p, "p")
    z = _check_mix(z)
    return _kernels.curve_anchor(x, y, p, z)


def max_x_bound(k: float, p: float, z: float) -> float:
    """Solvency bound: the x where the Y reserve is exhausted.

    Returns ((2-z)*k/(z*p))**(1/(2-z)) for z > 0 and +inf for z = 0
    (the hyperbola never exhausts Y).
    """
    k = _check_finite_positive(k, "k")
    p = _check_finite_positive(p, "p")
    z = _check_mix(z)
    return _kernels.solvency_bound(k, p, z)


def _check_x_in_domain(k: float, x: float, p: float, z: float) -> None:
    bound = _kernels.solvency_bound(k, p, z)
    if x >= bound:
        raise InsolvencyError(
            f"x={x} is at or past the solvency bound {bound} of the (k={k}, p={p}, z={z}) curve",
            bound=bound,
        )


def reserve_y(k: float, x: float, p: float, z: float) -> float:
    """Y reserve at coordinate x on the (k, p, z) curve.

    y = k * x**(z-1) - z*p*x/(2-z); valid for 0 < x < max_x_bound.
    """
    k = _check_finite_positive(k, "k")
    x = _check_finite_positive(x, "x")
    p = _check_finite_positive(p, "p")
    z = _check_mix(z)
    _check_x_in_domain(k, x, p, z)
    return _kernels.curve_y(k, x, p, z)


def dy_dx(k: float, x: float, p: float, z: float) -> float:
    """Curve slope k*(z-1)*x**(z-2) - z*p/(2-z); negative for z < 1, exactly -p at z = 1."""
    k = _check_finite_positive(k, "k")
    x = _check_finite_positive(x, "x")
    p = _check_finite_positive(p, "p")
    z = _check_mix(z)
    _check_x_in_domain(k, x, p, z)
    return _kernels.curve_dy(k, x, p, z)


def d2y_dx2(k: float, x: float, p: float, z: float) -> float:
    """Curve curvature k*(z-1)*(z-2)*x**(z-3); nonnegative everywhere on [0, 1]."""
    k = _check_finite_positive(k, "k")
    x = _check_finite_positive(x, "x")
    p = _check_finite_positive(p, "p")
    z = _check_mix(z)
    _check_x_in_domain(k, x, p, z)
    return _kernels.curve_d2y(k, x, p, z)


def spot_price(state: PoolState) -> float:
    """Marginal price (1-z)*y/x + z*p quoted by the pool; equals -dy_dx on the curve."""
    return _kernels.blend_spot(state.x, state.y, state.p, state.z)
