"""Problem instances: stopping-point maps, radio links, and mission constants.

A :class:`Scenario` carries everything the planner needs: vehicle stopping
points with pairwise travel distances, user terminal positions, combined
downlink/uplink channel power gains per (user, stop), per-user data demands,
and the physical constants of the vehicle and receiver.

Instances are either generated randomly (uniform positions in a square,
power-law path loss, optional Rayleigh fading) or loaded from a JSON
document.  Generation is a pure function of (seed, configuration), so
scenarios can be produced in parallel and reproduced exactly.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "ScenarioError",
    "PhysicalParams",
    "ChannelConfig",
    "Scenario",
    "dbm_to_watt",
    "watt_to_dbm",
    "pathloss",
    "rayleigh_power_gain",
    "generate_scenario",
    "save_scenario",
    "load_scenario",
]


class ScenarioError(ValueError):
    """A scenario document could not be parsed or violates an invariant."""


def dbm_to_watt(dbm: float) -> float:
    """Convert a power level in dBm to watts."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    """Convert a power in watts to dBm.  Requires watt > 0."""
    if watt <= 0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(watt) + 30.0


@dataclass(frozen=True)
class PhysicalParams:
    """Vehicle and receiver constants.

    The motion model charges ``(motion_power_w / speed_mps +
    motion_energy_per_m) * distance`` joules for a tour of the given length;
    the two coefficients default to the published differential-drive values
    0.29 and 7.4.  ``speed_mps`` defaults to 1.0 m/s and every reported
    energy scales with it, so it is echoed in all output files.
    """

    motion_power_w: float = 0.29
    motion_energy_per_m: float = 7.4
    speed_mps: float = 1.0
    scatter_efficiency: float = 0.78
    modulation_loss: float = 0.5
    noise_w: float = 1e-10
    time_budget_s: float = 50.0

    def __post_init__(self) -> None:
        for name in (
            "motion_power_w",
            "motion_energy_per_m",
            "speed_mps",
            "scatter_efficiency",
            "modulation_loss",
            "noise_w",
            "time_budget_s",
        ):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ScenarioError(f"params.{name} must be a finite positive number, got {value!r}")
        if self.scatter_efficiency > 1.0:
            raise ScenarioError("params.scatter_efficiency must be <= 1")
        if self.modulation_loss > 1.0:
            raise ScenarioError("params.modulation_loss must be <= 1")

    @property
    def motion_energy_rate(self) -> float:
        """Joules spent per metre of travel at the configured speed."""
        return self.motion_power_w / self.speed_mps + self.motion_energy_per_m


@dataclass(frozen=True)
class ChannelConfig:
    """Distance-dependent path-loss model with optional Rayleigh fading.

    The channel power variance at distance ``d`` is
    ``ref_loss * (d / ref_dist_m) ** -exponent``.  With ``fading="none"``
    the squared channel magnitudes equal the variance exactly, which is
    handy for deterministic tests; ``"rayleigh"`` is the simulation default.
    """

    ref_loss: float = 1e-3
    ref_dist_m: float = 1.0
    exponent: float = 2.5
    fading: str = "rayleigh"

    def __post_init__(self) -> None:
        if not self.ref_loss > 0:
            raise ScenarioError("channel.ref_loss must be positive")
        if not self.ref_dist_m > 0:
            raise ScenarioError("channel.ref_dist_m must be positive")
        if not self.exponent > 0:
            raise ScenarioError("channel.exponent must be positive")
        if self.fading not in ("rayleigh", "none"):
            raise ScenarioError(f"channel.fading must be 'rayleigh' or 'none', got {self.fading!r}")


def pathloss(d, cfg: ChannelConfig):
    """Channel power variance at distance ``d`` (scalar or array), metres."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("pathloss requires strictly positive distance")
    out = cfg.ref_loss * (d / cfg.ref_dist_m) ** (-cfg.exponent)
    return float(out) if out.ndim == 0 else out


def rayleigh_power_gain(rng: np.random.Generator, variance, size=None) -> np.ndarray:
    """Draw |g|^2 for g zero-mean complex Gaussian with the given variance.

    Real and imaginary parts are independent N(0, variance/2), so the squared
    magnitude is exponential with mean ``variance``.
    """
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return 0.5 * np.asarray(variance, dtype=float) * (re * re + im * im)


@dataclass
class Scenario:
    """One planning instance.

    Attributes
    ----------
    vertex_xy : (M, 2) stopping-point coordinates in metres; index 0 is the
        depot where every tour starts and ends.
    user_xy : (K, 2) user terminal coordinates in metres.
    distances : (M, M) travel distances; entry [m, j] is the path length from
        stop m to stop j (zero diagonal, ``inf`` for a forbidden move).
        Asymmetric matrices are allowed.
    link_gain : (K, M) combined squared channel magnitudes |g|^2 |h|^2 of the
        downlink/uplink pair between user k and stop m.
    demand : (K,) per-user data targets in bit/Hz.
    """

    vertex_xy: np.ndarray
    user_xy: np.ndarray
    distances: np.ndarray
    link_gain: np.ndarray
    demand: np.ndarray
    params: PhysicalParams
    channel: ChannelConfig | None = None
    seed: object = None

    @property
    def num_vertices(self) -> int:
        return self.distances.shape[0]

    @property
    def num_users(self) -> int:
        return self.link_gain.shape[0]

    def with_noise(self, noise_w: float) -> "Scenario":
        """Copy of this scenario with a different receiver noise power."""
        return dataclasses.replace(self, params=dataclasses.replace(self.params, noise_w=noise_w))

    def validate(self) -> None:
        """Raise :class:`ScenarioError` naming the first violated invariant."""
        M = self.distances.shape[0]
        K = self.link_gain.shape[0] if self.link_gain.ndim == 2 else -1
        if self.distances.ndim != 2 or self.distances.shape != (M, M):
            raise ScenarioError("distances must be a square matrix")
        if M < 1:
            raise ScenarioError("distances must contain at least the depot vertex")
        if self.vertex_xy.shape != (M, 2):
            raise ScenarioError(f"vertex_xy must have shape ({M}, 2), got {self.vertex_xy.shape}")
        if K < 1 or self.link_gain.shape != (K, M):
            raise ScenarioError("link_gain must be a (num_users, num_vertices) matrix")
        if self.user_xy.shape != (K, 2):
            raise ScenarioError(f"user_xy must have shape ({K}, 2), got {self.user_xy.shape}")
        if self.demand.shape != (K,):
            raise ScenarioError(f"demand must have shape ({K},), got {self.demand.shape}")
        if np.any(np.isnan(self.distances)):
            raise ScenarioError("distances contains NaN")
        if np.any(self.distances < 0):
            raise ScenarioError("distances must be nonnegative")
        if np.any(np.diagonal(self.distances) != 0.0):
            raise ScenarioError("distances diagonal must be exactly zero")
        if not np.all(np.isfinite(self.link_gain)) or np.any(self.link_gain < 0):
            raise ScenarioError("link_gain entries must be finite and nonnegative")
        if not np.all(np.isfinite(self.demand)) or np.any(self.demand <= 0):
            raise ScenarioError("demand entries must be finite and positive")


def _seed_record(seed):
    """JSON-friendly echo of the seed a scenario was drawn from."""
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy
        return list(entropy) if isinstance(entropy, (list, tuple)) else entropy
    if seed is None or isinstance(seed, int):
        return seed
    return [int(x) for x in seed]


def generate_scenario(
    seed,
    num_vertices: int,
    num_users: int,
    area_side: float,
    channel: ChannelConfig | None = None,
    params: PhysicalParams | None = None,
    demand_range: tuple[float, float] = (2.0, 4.0),
) -> Scenario:
    """Draw a random instance on a square map.

    Stops and users are i.i.d. uniform over ``[0, area_side]^2``; the travel
    graph is the complete digraph with Euclidean distances; channel gains
    follow the path-loss model in ``channel`` (per-draw Rayleigh fading
    unless disabled); demands are uniform over ``demand_range``.

    The draw order is fixed (vertex positions, user positions, downlink
    magnitudes, uplink magnitudes, demands) so a given seed always yields
    the identical scenario.
    """
    if num_vertices < 1 or num_users < 1:
        raise ValueError("need at least one vertex and one user")
    if not area_side > 0:
        raise ValueError("area_side must be positive")
    lo, hi = demand_range
    if not (0 < lo <= hi):
        raise ValueError("demand_range must satisfy 0 < low <= high")
    channel = channel or ChannelConfig()
    params = params or PhysicalParams()

    rng = np.random.default_rng(seed)
    vertex_xy = rng.uniform(0.0, area_side, size=(num_vertices, 2))
    user_xy = rng.uniform(0.0, area_side, size=(num_users, 2))

    diff = vertex_xy[:, None, :] - vertex_xy[None, :, :]
    distances = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(distances, 0.0)

    d_user = np.hypot(
        user_xy[:, None, 0] - vertex_xy[None, :, 0],
        user_xy[:, None, 1] - vertex_xy[None, :, 1],
    )
    variance = pathloss(d_user, channel)
    if channel.fading == "rayleigh":
        down = rayleigh_power_gain(rng, variance, size=d_user.shape)
        up = rayleigh_power_gain(rng, variance, size=d_user.shape)
        link_gain = down * up
    else:
        link_gain = variance * variance

    demand = rng.uniform(lo, hi, size=num_users)

    scen = Scenario(
        vertex_xy=vertex_xy,
        user_xy=user_xy,
        distances=distances,
        link_gain=link_gain,
        demand=demand,
        params=params,
        channel=channel,
        seed=_seed_record(seed),
    )
    scen.validate()
    return scen


# --- persistence ------------------------------------------------------------

def _encode_matrix(a: np.ndarray) -> list:
    """Nested lists with non-finite floats as strings, safe for strict JSON."""
    out = []
    for row in np.atleast_2d(a):
        out.append([x if math.isfinite(x) else repr(float(x)) for x in map(float, row)])
    return out


def _decode_float(x, field: str) -> float:
    if isinstance(x, str):
        try:
            return float(x)
        except ValueError:
            raise ScenarioError(f"field {field!r} contains a non-numeric entry: {x!r}") from None
    if isinstance(x, (int, float)):
        return float(x)
    raise ScenarioError(f"field {field!r} contains a non-numeric entry: {x!r}")


def _decode_matrix(raw, field: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw or not all(isinstance(r, list) for r in raw):
        raise ScenarioError(f"field {field!r} must be a non-empty list of rows")
    width = len(raw[0])
    for r in raw:
        if len(r) != width:
            raise ScenarioError(f"field {field!r} has ragged rows")
    return np.array([[_decode_float(x, field) for x in row] for row in raw], dtype=float)


def save_scenario(scen: Scenario, path) -> None:
    """Write the scenario as a JSON document (schema version 1).

    Floats are written with full ``repr`` precision so a save/load round
    trip reproduces every value exactly.  The noise power is echoed in dBm
    for readability; travel distances of ``inf`` become the string "inf".
    """
    scen.validate()
    p = scen.params
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": scen.seed,
        "params": {
            "motion_power_w": p.motion_power_w,
            "motion_energy_per_m": p.motion_energy_per_m,
            "speed_mps": p.speed_mps,
            "scatter_efficiency": p.scatter_efficiency,
            "modulation_loss": p.modulation_loss,
            "noise_w": p.noise_w,
            "noise_dbm": watt_to_dbm(p.noise_w),
            "time_budget_s": p.time_budget_s,
        },
        "channel": None
        if scen.channel is None
        else {
            "ref_loss": scen.channel.ref_loss,
            "ref_dist_m": scen.channel.ref_dist_m,
            "exponent": scen.channel.exponent,
            "fading": scen.channel.fading,
        },
        "vertex_xy": _encode_matrix(scen.vertex_xy),
        "user_xy": _encode_matrix(scen.user_xy),
        "distances": _encode_matrix(scen.distances),
        "link_gain": _encode_matrix(scen.link_gain),
        "demand": [float(x) for x in scen.demand],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def _require(doc: dict, field: str):
    if field not in doc:
        raise ScenarioError(f"missing field {field!r}")
    return doc[field]


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario document written by :func:`save_scenario`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file: {e}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")

    version = _require(doc, "schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")

    raw_params = _require(doc, "params")
    if not isinstance(raw_params, dict):
        raise ScenarioError("field 'params' must be an object")
    try:
        params = PhysicalParams(
            motion_power_w=_decode_float(_require(raw_params, "motion_power_w"), "params.motion_power_w"),
            motion_energy_per_m=_decode_float(
                _require(raw_params, "motion_energy_per_m"), "params.motion_energy_per_m"
            ),
            speed_mps=_decode_float(_require(raw_params, "speed_mps"), "params.speed_mps"),
            scatter_efficiency=_decode_float(
                _require(raw_params, "scatter_efficiency"), "params.scatter_efficiency"
            ),
            modulation_loss=_decode_float(_require(raw_params, "modulation_loss"), "params.modulation_loss"),
            noise_w=_decode_float(_require(raw_params, "noise_w"), "params.noise_w"),
            time_budget_s=_decode_float(_require(raw_params, "time_budget_s"), "params.time_budget_s"),
        )
    except ScenarioError:
        raise
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"bad params block: {e}") from None

    raw_channel = doc.get("channel")
    channel = None
    if raw_channel is not None:
        if not isinstance(raw_channel, dict):
            raise ScenarioError("field 'channel' must be an object or null")
        channel = ChannelConfig(
            ref_loss=_decode_float(_require(raw_channel, "ref_loss"), "channel.ref_loss"),
            ref_dist_m=_decode_float(_require(raw_channel, "ref_dist_m"), "channel.ref_dist_m"),
            exponent=_decode_float(_require(raw_channel, "exponent"), "channel.exponent"),
            fading=raw_channel.get("fading", "rayleigh"),
        )

    demand_raw = _require(doc, "demand")
    if not isinstance(demand_raw, list) or not demand_raw:
        raise ScenarioError("field 'demand' must be a non-empty list")
    scen = Scenario(
        vertex_xy=_decode_matrix(_require(doc, "vertex_xy"), "vertex_xy"),
        user_xy=_decode_matrix(_require(doc, "user_xy"), "user_xy"),
        distances=_decode_matrix(_require(doc, "distances"), "distances"),
        link_gain=_decode_matrix(_require(doc, "link_gain"), "link_gain"),
        demand=np.array([_decode_float(x, "demand") for x in demand_raw], dtype=float),
        params=params,
        channel=channel,
        seed=doc.get("seed"),
    )
    scen.validate()
    return scen
