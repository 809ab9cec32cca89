"""Stop-time and transmit-energy allocation for a fixed stop selection.

Given which stops the tour visits and how much mission time is left for
communication, this module solves the convex problem of splitting that time
across (user, stop) pairs and choosing transmit energies so every user's
data demand is met at minimum total radiated energy.

The link rate while serving user k from stop m is ``log2(1 + A p)`` with
effective gain ``A = modulation_loss * scatter_efficiency * |g|^2 |h|^2 /
noise``; the bits collected over a stop of length t with energy Q = t*p are
the perspective function ``t * log2(1 + A Q / t)``, jointly concave in
(t, Q) and nondecreasing in t.  Optimality therefore has a water-filling
structure: each served pair transmits at power ``mu/ln2 - 1/A`` for a
per-user demand multiplier mu, all of the available time is used, and it
is never worth serving a user from a stop with a smaller gain than its best
selected one.  The solver exploits this: it concentrates each user on its
best selected stop and finds the scalar price on shared time by a
safeguarded Newton iteration, then reports KKT residuals computed from the
returned matrices as a certificate of global optimality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erfc

from .mobility import validate_selection
from .scenario import Scenario

__all__ = [
    "LN2",
    "FSK_MODULATION_LOSS",
    "KktTolerances",
    "Allocation",
    "KktReport",
    "AllocationResult",
    "effective_gain",
    "link_rate",
    "bits_collected",
    "bits_collected_dt",
    "solve_allocation",
    "fit_ook_modulation_loss",
]

LN2 = math.log(2.0)

# Frequency-shift keying needs no curve fit; its rate loss factor is 1/2.
FSK_MODULATION_LOSS = 0.5

# Beyond this log-SNR the recovered powers overflow double precision.
_MAX_LOG_SNR = 690.0


@dataclass(frozen=True)
class KktTolerances:
    """Acceptance thresholds for the optimality certificate.

    ``qos`` bounds the worst per-user demand shortfall in bit/Hz, ``time_rel``
    bounds |sum(t) - comm_time| relative to comm_time, and ``stationarity``
    bounds the relative violation of the stationarity conditions.
    """

    qos: float = 1e-6
    time_rel: float = 1e-8
    stationarity: float = 1e-5


@dataclass
class Allocation:
    """Per-(user, stop) stop times t (s), energies Q (J), powers p (W).

    Powers are Q/t where t > 0 and zero elsewhere; columns of unselected
    stops are identically zero, and the stop times sum to the available
    communication time.
    """

    stop_time: np.ndarray
    energy: np.ndarray
    power: np.ndarray

    @property
    def total_energy(self) -> float:
        return float(self.energy.sum())

    @property
    def max_power(self) -> float:
        return float(self.power.max()) if self.power.size else 0.0


@dataclass
class KktReport:
    """Residuals and multipliers certifying the allocation solve.

    ``user_multipliers`` are the nonnegative demand multipliers (one per
    user); ``time_multiplier`` is the scalar price on the shared stop-time
    budget.
    """

    qos_residual: float
    time_residual: float
    stationarity_residual: float
    user_multipliers: np.ndarray
    time_multiplier: float

    def within(self, tol: KktTolerances, comm_time: float) -> bool:
        return (
            self.qos_residual <= tol.qos
            and self.time_residual <= tol.time_rel * max(comm_time, 1e-300)
            and self.stationarity_residual <= tol.stationarity
        )


@dataclass
class AllocationResult:
    allocation: Allocation
    kkt: KktReport


# --- rate functions -----------------------------------------------------------

def effective_gain(scenario: Scenario, selection: np.ndarray) -> np.ndarray:
    """Per-(user, stop) SNR per watt; columns of unselected stops are zero."""
    sel = validate_selection(selection)
    p = scenario.params
    A = (p.modulation_loss * p.scatter_efficiency / p.noise_w) * scenario.link_gain
    return A * sel[None, :]


def link_rate(gain, power):
    """Spectral efficiency log2(1 + gain * power), elementwise."""
    gain = np.asarray(gain, dtype=float)
    power = np.asarray(power, dtype=float)
    if np.any(gain < 0) or np.any(power < 0):
        raise ValueError("gain and power must be nonnegative")
    out = np.log2(1.0 + gain * power)
    return float(out) if out.ndim == 0 else out


def bits_collected(stop_time, energy, gain):
    """Bits/Hz gathered in a stop of length t spending energy Q: t*log2(1+A*Q/t).

    Continuously extended to 0 at t = 0 (the limit), elementwise on arrays.
    """
    t = np.asarray(stop_time, dtype=float)
    Q = np.asarray(energy, dtype=float)
    A = np.asarray(gain, dtype=float)
    if np.any(t < 0) or np.any(Q < 0) or np.any(A < 0):
        raise ValueError("stop_time, energy and gain must be nonnegative")
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = t * np.log2(1.0 + A * Q / t)
    out = np.where(t > 0, raw, 0.0)
    return float(out) if out.ndim == 0 else out


def bits_collected_dt(stop_time, energy, gain):
    """Derivative of :func:`bits_collected` in the stop time; nonnegative.

    Equals ``log2(1 + A Q / t) - (A Q / (t + A Q)) / ln 2`` and requires
    t > 0 (the perspective function is not differentiable at t = 0).
    """
    t = np.asarray(stop_time, dtype=float)
    Q = np.asarray(energy, dtype=float)
    A = np.asarray(gain, dtype=float)
    if np.any(t <= 0):
        raise ValueError("stop_time must be strictly positive")
    if np.any(Q < 0) or np.any(A < 0):
        raise ValueError("energy and gain must be nonnegative")
    AQ = A * Q
    out = np.log2(1.0 + AQ / t) - (AQ / (t + AQ)) / LN2
    return float(out) if out.ndim == 0 else out


def _bits_collected_denergy(t, Q, A):
    # derivative of the perspective function in Q, valid for t > 0
    return (A * t / (t + A * Q)) / LN2


# --- dual machinery -----------------------------------------------------------
#
# With SNR x = 1 + A p at a served stop, stationarity in the stop time says
# the marginal value of a second of service equals the time price:
#     nu = (x ln x - x + 1) / A.
# _time_value evaluates e -> (1+e) ln(1+e) - e (increasing, convex) and
# _invert_time_value solves it for e = x - 1 >= 0.


def _time_value(e):
    e = np.asarray(e, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        exact = (1.0 + e) * np.log1p(e) - e
        # series e^2/2 - e^3/6 + e^4/12 - e^5/20 avoids cancellation near zero
        series = e * e * (0.5 + e * (-1.0 / 6.0 + e * (1.0 / 12.0 - e / 20.0)))
    return np.where(e < 1e-4, series, exact)


def _invert_time_value(y):
    # capped so intermediates stay inside double range; values this large
    # only arise while bracketing a hopeless time price
    y = np.minimum(np.asarray(y, dtype=float), 1e302)
    e = np.minimum(np.sqrt(2.0 * y) + y, 1e300)  # starts at or above the root
    bump = _time_value(e) < y
    while np.any(bump):
        e = np.where(bump, np.minimum(2.0 * e + 1.0, 1e300), e)
        bump = (_time_value(e) < y) & (e < 1e300)
    for _ in range(100):
        slope = np.log1p(e)
        step = np.where(slope > 0.0, (_time_value(e) - y) / np.where(slope > 0.0, slope, 1.0), 0.0)
        new = np.maximum(e - step, 0.0)
        if np.all(np.abs(new - e) <= 1e-16 * (1.0 + np.abs(new))):
            e = new
            break
        e = new
    return np.where(y <= 0.0, 0.0, np.minimum(e, 1e300))


def _solve_time_price(demand: np.ndarray, gain: np.ndarray, total_time: float) -> float:
    """Scalar price nu on shared stop time: root of sum_k t_k(nu) = total_time."""
    bit_time = demand * LN2  # per-user gamma * ln 2

    def times(nu: float) -> np.ndarray:
        e = _invert_time_value(nu * gain)
        with np.errstate(divide="ignore"):
            return bit_time / np.log1p(e)

    # seed the bracket from an even time split, then expand
    u0 = min(float(bit_time.sum()) / total_time, _MAX_LOG_SNR)
    y0 = float(_time_value(np.expm1(u0)))
    with np.errstate(over="ignore"):
        seeds = np.minimum(y0 / gain, 1e305)
    lo = float(np.min(seeds))
    hi = float(np.max(seeds))
    for _ in range(600):
        if float(times(lo).sum()) - total_time > 0 or lo < 1e-300:
            break
        lo *= 0.25
    for _ in range(600):
        if float(times(hi).sum()) - total_time < 0 or hi > 1e300:
            break
        hi *= 4.0

    nu = math.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)
    for _ in range(200):
        e = _invert_time_value(nu * gain)
        u = np.log1p(e)
        with np.errstate(divide="ignore"):
            t = bit_time / u
        f = float(t.sum()) - total_time
        if abs(f) <= 1e-12 * max(total_time, 1e-300):
            break
        if f > 0:
            lo = nu
        else:
            hi = nu
        with np.errstate(divide="ignore", over="ignore"):
            slope = -float((bit_time * gain / ((1.0 + e) * u**3)).sum())
        if math.isfinite(slope) and slope < 0:
            trial = nu - f / slope
        else:
            trial = 0.5 * (lo + hi)
        nu = trial if lo < trial < hi else 0.5 * (lo + hi)
    return nu


def _kkt_report(scenario, A, t, Q, mu, nu, comm_time) -> KktReport:
    collected = bits_collected(t, Q, A).sum(axis=1)
    qos_residual = float(np.maximum(scenario.demand - collected, 0.0).max())
    time_residual = abs(float(t.sum()) - comm_time)

    scale = max(1.0, nu)
    worst = 0.0
    mu_col = mu[:, None]
    served = t > 0
    powered = served & (Q > 0)
    if powered.any():
        dt_gap = np.abs(mu_col * bits_collected_dt(np.where(served, t, 1.0), Q, A) - nu)
        worst = max(worst, float(dt_gap[powered].max()) / scale)
        dq = _bits_collected_denergy(t[powered], Q[powered], A[powered])
        worst = max(worst, float(np.abs(1.0 - mu[np.nonzero(powered)[0]] * dq).max()))
    idle_power = served & (Q == 0)
    if idle_power.any():
        worst = max(worst, float(np.maximum(mu_col * A / LN2 - 1.0, 0.0)[idle_power].max()))
    # at unserved stops the marginal value of a second must not beat the price
    unserved = (~served) & (A > 0)
    if unserved.any():
        snr = np.maximum(mu_col * A / LN2 - 1.0, 0.0)
        value = np.where(A > 0, _time_value(snr) / np.where(A > 0, A, 1.0), 0.0)
        worst = max(worst, float(np.maximum(value - nu, 0.0)[unserved].max()) / scale)

    return KktReport(qos_residual, time_residual, worst, mu, nu)


def solve_allocation(scenario: Scenario, selection: np.ndarray, comm_time: float) -> AllocationResult | None:
    """Globally optimal stop times and energies for a fixed selection.

    Returns None when the instance is infeasible: no communication time is
    left (``comm_time <= 0``), some user with positive demand has zero gain
    at every selected stop, or the demanded rates exceed double-precision
    range (the recovered powers would overflow).
    """
    sel = validate_selection(selection)
    if math.isnan(comm_time) or math.isinf(comm_time):
        raise ValueError("comm_time must be finite")
    if comm_time <= 0:
        return None

    A = effective_gain(scenario, sel)
    K, M = A.shape
    t = np.zeros((K, M))
    Q = np.zeros((K, M))
    demand = np.asarray(scenario.demand, dtype=float)
    best_stop = A.argmax(axis=1)
    best_gain = A[np.arange(K), best_stop]
    active = demand > 0
    if np.any(active & (best_gain <= 0)):
        return None

    if not active.any():
        # no demand: park the whole time budget anywhere selected, spend nothing
        t[0, int(np.flatnonzero(sel)[0])] = comm_time
        mu = np.zeros(K)
        nu = 0.0
    else:
        gain_act = best_gain[active]
        demand_act = demand[active]
        # even a user holding the whole budget would need an SNR beyond
        # double range: the instance is outside representable powers
        if float((demand_act * LN2 / comm_time).max()) > _MAX_LOG_SNR:
            return None
        nu = _solve_time_price(demand_act, gain_act, comm_time)
        snr_excess = _invert_time_value(nu * gain_act)  # x - 1 per active user
        with np.errstate(divide="ignore"):
            t_act = demand_act * LN2 / np.log1p(snr_excess)
        p_act = snr_excess / gain_act
        rows = np.flatnonzero(active)
        cols = best_stop[active]
        t[rows, cols] = t_act
        Q[rows, cols] = t_act * p_act
        mu = np.zeros(K)
        mu[rows] = LN2 * (1.0 + snr_excess) / gain_act
        if not np.all(np.isfinite(Q)):
            return None

    with np.errstate(invalid="ignore"):
        power = np.where(t > 0, Q / np.where(t > 0, t, 1.0), 0.0)
    report = _kkt_report(scenario, A, t, Q, mu, nu, comm_time)
    # refuse to hand out an uncertified point (only reachable when the
    # demanded operating range exceeds double precision)
    if not (
        math.isfinite(report.stationarity_residual)
        and report.qos_residual <= 1e-6
        and report.time_residual <= 1e-8 * comm_time
    ):
        return None
    return AllocationResult(Allocation(t, Q, power), report)


# --- modulation-loss fit --------------------------------------------------------

def fit_ook_modulation_loss(grid_max: float = 20.0, grid_points: int = 200) -> float:
    """Rate-loss factor for on-off keying.

    Fits ``log2(1 + beta * x)`` to the OOK detection rate ``1 - Q(sqrt(x))``
    (Q is the Gaussian tail function) by least squares over a uniform SNR
    grid on (0, grid_max], minimizing over beta to 1e-6.
    """
    if not grid_max > 0:
        raise ValueError("grid_max must be positive")
    if grid_points < 10:
        raise ValueError("need at least 10 grid points")
    x = np.linspace(grid_max / grid_points, grid_max, grid_points)
    target = 1.0 - 0.5 * erfc(np.sqrt(0.5 * x))

    def sse(beta: float) -> float:
        return float(((np.log2(1.0 + beta * x) - target) ** 2).sum())

    result = minimize_scalar(sse, bounds=(1e-6, 1.0), method="bounded", options={"xatol": 1e-6})
    return float(result.x)
