"""Numerical kernels shared by the scalar API and the simulator loop.

Every function here is written in nopython-compatible style and compiled with
``numba.njit(cache=True)`` when numba is importable, unless the environment
variable ``HYBRIDAMM_NO_NUMBA`` is set to 1/true/yes/on, in which case the
same functions run as plain Python on numpy scalars.  Kernels never raise:
invalid requests return ``nan`` and the public wrappers turn sentinels into
typed exceptions.  All randomness stays outside this module; stochastic
kernels receive pre-drawn arrays so both backends consume identical streams.

Curve family (mix parameter z in [0, 1], oracle price p, constant k):

    y(x)  = k * x**(z-1) - z*p*x / (2-z)
    y'(x) = k * (z-1) * x**(z-2) - z*p / (2-z)
    y''(x)= k * (z-1) * (z-2) * x**(z-3)

z = 0 is the constant-product curve x*y = k; z = 1 is the line y = k - p*x.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay usable without it
    numba = None

NUMBA_DISABLE_ENV = "HYBRIDAMM_NO_NUMBA"

#: True when kernels are compiled; False on the pure-Python fallback path.
NUMBA_ENABLED = (
    numba is not None
    and os.environ.get(NUMBA_DISABLE_ENV, "").strip().lower() not in ("1", "true", "yes", "on")
)

# Trades moving less than this fraction of the input-side reserve are dust.
DUST_REL = 1e-15
# SellY feasibility floor: the pool never quotes below this fraction of current x.
X_FLOOR_REL = 1e-12


def _maybe_jit(fn):
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(fn)
    return fn


@_maybe_jit
def pow_zm1(x, z):
    """x**(z-1) with the curve-limit cases exact."""
    if z == 0.0:
        return 1.0 / x
    if z == 1.0:
        return 1.0
    return math.exp((z - 1.0) * math.log(x))


@_maybe_jit
def curve_anchor(x, y, p, z):
    """Constant k of the curve through (x, y) at oracle price p."""
    # k = (y + z*p*x/(2-z)) * x**(1-z); dividing by pow_zm1 keeps the
    # anchoring round trip exact apart from two rounding steps.
    return (y + z * p * x / (2.0 - z)) / pow_zm1(x, z)


@_maybe_jit
def curve_y(k, x, p, z):
    return k * pow_zm1(x, z) - z * p * x / (2.0 - z)


@_maybe_jit
def curve_dy(k, x, p, z):
    return k * (z - 1.0) * (pow_zm1(x, z) / x) - z * p / (2.0 - z)


@_maybe_jit
def curve_d2y(k, x, p, z):
    return k * (z - 1.0) * (z - 2.0) * (pow_zm1(x, z) / (x * x))


@_maybe_jit
def blend_spot(x, y, p, z):
    """Marginal price (1-z)*y/x + z*p; equals -curve_dy on the curve."""
    return (1.0 - z) * (y / x) + z * p


@_maybe_jit
def solvency_bound(k, p, z):
    """x where the Y reserve hits zero; +inf for the z = 0 hyperbola."""
    zp = z * p
    # zp == 0 covers z == 0 and subnormal underflow; either way the bound
    # sits beyond double range
    if zp == 0.0:
        return math.inf
    if z == 1.0:
        return k / p
    return math.exp(math.log((2.0 - z) * k / zp) / (2.0 - z))


@_maybe_jit
def arb_target_x(k, p, z):
    """x on the (k, p, z) curve where the marginal price equals p.

    Undefined at z = 1 (price is p everywhere); returns nan.
    """
    if z == 1.0:
        return math.nan
    return math.exp(math.log((2.0 - z) * k / (2.0 * p)) / (2.0 - z))


@_maybe_jit
def invert_curve(k, p, z, y_target, lo, hi):
    """Solve curve_y(k, x, p, z) == y_target for x in [lo, hi].

    Requires a valid bracket: curve_y(lo) >= y_target >= curve_y(hi)
    (the curve is strictly decreasing).  Bisection to a 1e-13 relative
    bracket, then Newton polish clamped inside it.  Returns nan when the
    bracket is invalid or the tolerance is not reached within 200 rounds.

    Wide brackets (near-zero z puts the solvency bound at ~1e76) are
    split geometrically so the round budget holds for any double inputs.
    """
    f_lo = curve_y(k, lo, p, z) - y_target
    f_hi = curve_y(k, hi, p, z) - y_target
    if f_lo < 0.0 or f_hi > 0.0:
        return math.nan
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    a = lo
    b = hi
    converged = False
    for _ in range(200):
        if b > 4.0 * a:
            mid = math.sqrt(a) * math.sqrt(b)
        else:
            mid = 0.5 * (a + b)
        # tight enough that even without the Newton polish the y-residual
        # stays below the PoolState on-curve tolerance
        if b - a <= 1e-13 * mid:
            converged = True
            break
        f_mid = curve_y(k, mid, p, z) - y_target
        if f_mid == 0.0:
            return mid
        if f_mid > 0.0:
            a = mid
        else:
            b = mid
    if not converged:
        return math.nan
    x = 0.5 * (a + b)
    for _ in range(3):
        d = curve_dy(k, x, p, z)
        if d == 0.0 or not math.isfinite(d):
            break
        x_next = x - (curve_y(k, x, p, z) - y_target) / d
        if x_next <= a or x_next >= b:
            break
        x = x_next
    return x


@_maybe_jit
def curve_grid(k, p, z, xs):
    """Vector curve_y over xs; out-of-domain points (x <= 0 or past the bound) map to nan."""
    bound = solvency_bound(k, p, z)
    ys = np.empty_like(xs)
    for i in range(xs.shape[0]):
        x = xs[i]
        if x <= 0.0 or x >= bound:
            ys[i] = math.nan
        else:
            ys[i] = curve_y(k, x, p, z)
    return ys


@_maybe_jit
def run_steps(x0, y0, z, prices, do_arb, noise_frac, noise_dir, trades_per_step,
              max_fraction):
    """Advance one pool through the full scenario; returns per-step metric arrays.

    Per step: oracle update (re-anchor k at fixed reserves), arbitrage to the
    oracle price (skipped at z = 1), then ``trades_per_step`` noise trades.
    ``noise_frac`` holds pre-drawn lognormal size fractions laid out step-major,
    ``noise_dir`` the matching directions (0 sells X, 1 sells Y).  Trades are
    clamped to ``max_fraction`` of the input-side reserve and to 99.9% of the
    solvency headroom; dust and infeasible trades are skipped.  Counters for
    clamped and skipped trades come back with the metric arrays.
    """
    n = prices.shape[0]
    spot_a = np.empty(n)
    x_a = np.empty(n)
    y_a = np.empty(n)
    pool_a = np.empty(n)
    hold_a = np.empty(n)
    il_a = np.empty(n)
    slip_a = np.empty(n)
    vol_a = np.empty(n)

    x = x0
    y = y0
    volume = 0.0
    clamped = 0
    skipped = 0

    for t in range(n):
        p = prices[t]
        k = curve_anchor(x, y, p, z)
        last_slip = 0.0

        if do_arb and z < 1.0:
            x_star = arb_target_x(k, p, z)
            # dead-band absorbs exp/log rounding so already-balanced pools
            # do not trade; a skipped arb leaves |spot - p| ~ 1e-12 * p at worst
            if abs(x_star - x) > 1e-12 * x:
                spot0 = blend_spot(x, y, p, z)
                y_star = curve_y(k, x_star, p, z)
                dx = x_star - x
                dy = y_star - y
                exec_price = abs(dy / dx)
                if dx > 0.0:
                    slip = spot0 - exec_price
                else:
                    slip = exec_price - spot0
                if slip < 0.0:  # rounding guard, trader cost is nonnegative
                    slip = 0.0
                last_slip = slip
                volume += abs(dx)
                x = x_star
                y = y_star

        for j in range(trades_per_step):
            frac = noise_frac[t * trades_per_step + j]
            direction = noise_dir[t * trades_per_step + j]
            if not math.isfinite(frac) or frac <= 0.0:
                skipped += 1
                continue
            if frac > max_fraction:
                frac = max_fraction
                clamped += 1
            if direction == 0:
                amount_in = frac * x
                bound = solvency_bound(k, p, z)
                if math.isfinite(bound):
                    cap = 0.999 * (bound - x)
                    if cap <= 0.0:
                        skipped += 1
                        continue
                    if amount_in > cap:
                        amount_in = cap
                        clamped += 1
                if amount_in < DUST_REL * x:
                    skipped += 1
                    continue
                spot0 = blend_spot(x, y, p, z)
                x_new = x + amount_in
                y_new = curve_y(k, x_new, p, z)
                out = y - y_new
                if out <= 0.0:
                    skipped += 1
                    continue
                slip = spot0 - out / amount_in
                if slip < 0.0:
                    slip = 0.0
                last_slip = slip
                volume += amount_in
                x = x_new
                y = y_new
            else:
                amount_in = frac * y
                x_floor = X_FLOOR_REL * x
                y_cap = curve_y(k, x_floor, p, z)
                cap = 0.999 * (y_cap - y)
                if cap <= 0.0:
                    skipped += 1
                    continue
                if amount_in > cap:
                    amount_in = cap
                    clamped += 1
                if amount_in < DUST_REL * y:
                    skipped += 1
                    continue
                spot0 = blend_spot(x, y, p, z)
                y_new = y + amount_in
                x_new = invert_curve(k, p, z, y_new, x_floor, x)
                if math.isnan(x_new) or x_new >= x:
                    skipped += 1
                    continue
                out = x - x_new
                slip = amount_in / out - spot0
                if slip < 0.0:
                    slip = 0.0
                last_slip = slip
                volume += out
                x = x_new
                y = y_new

        spot_a[t] = blend_spot(x, y, p, z)
        x_a[t] = x
        y_a[t] = y
        pool_a[t] = x + y / p
        hold_a[t] = x0 + y0 / p
        il_a[t] = (hold_a[t] - pool_a[t]) / hold_a[t]
        slip_a[t] = last_slip
        vol_a[t] = volume

    return spot_a, x_a, y_a, pool_a, hold_a, il_a, slip_a, vol_a, clamped, skipped
