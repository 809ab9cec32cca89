import json
import math

import numpy as np
import pytest

from ugv_backscatter import (
    ChannelConfig,
    PhysicalParams,
    ScenarioError,
    dbm_to_watt,
    generate_scenario,
    load_scenario,
    pathloss,
    save_scenario,
    watt_to_dbm,
)
from ugv_backscatter.scenario import rayleigh_power_gain


def test_dbm_watt_roundtrip():
    assert dbm_to_watt(30.0) == 1.0
    assert dbm_to_watt(-120.0) == pytest.approx(1e-15)
    for dbm in (-120.0, -70.0, 0.0, 30.0):
        assert watt_to_dbm(dbm_to_watt(dbm)) == pytest.approx(dbm)
    with pytest.raises(ValueError):
        watt_to_dbm(0.0)


def test_pathloss_reference_values():
    cfg = ChannelConfig(ref_loss=1e-3, ref_dist_m=1.0, exponent=2.5)
    assert pathloss(1.0, cfg) == 1e-3
    assert pathloss(cfg.ref_dist_m, cfg) == cfg.ref_loss
    # 4^2.5 = 32, so the variance at 4 m is 1e-3 / 32
    assert pathloss(4.0, cfg) == pytest.approx(3.125e-5, rel=1e-12)
    with pytest.raises(ValueError):
        pathloss(0.0, cfg)
    with pytest.raises(ValueError):
        pathloss(-1.0, cfg)


def test_params_validation():
    with pytest.raises(ScenarioError):
        PhysicalParams(speed_mps=0.0)
    with pytest.raises(ScenarioError):
        PhysicalParams(scatter_efficiency=1.2)
    with pytest.raises(ScenarioError):
        PhysicalParams(modulation_loss=0.0)
    with pytest.raises(ScenarioError):
        ChannelConfig(fading="rician")


def test_generate_matches_setup():
    scen = generate_scenario(11, 15, 10, 20.0)
    assert scen.num_vertices == 15
    assert scen.num_users == 10
    assert np.all(scen.vertex_xy >= 0) and np.all(scen.vertex_xy <= 20.0)
    assert np.all(np.diagonal(scen.distances) == 0.0)
    assert np.allclose(scen.distances, scen.distances.T)  # Euclidean map is symmetric
    assert np.all(scen.link_gain >= 0)
    assert np.all((scen.demand > 2.0) & (scen.demand < 4.0))
    scen.validate()


def test_generate_single_vertex():
    scen = generate_scenario(0, 1, 1, 5.0)
    assert scen.distances.shape == (1, 1)
    assert scen.distances[0, 0] == 0.0


def test_generate_deterministic():
    a = generate_scenario(123, 9, 4, 20.0)
    b = generate_scenario(123, 9, 4, 20.0)
    for field in ("vertex_xy", "user_xy", "distances", "link_gain", "demand"):
        assert getattr(a, field).tobytes() == getattr(b, field).tobytes()
    c = generate_scenario(124, 9, 4, 20.0)
    assert a.link_gain.tobytes() != c.link_gain.tobytes()


def test_fading_none_squares_the_pathloss():
    cfg = ChannelConfig(fading="none")
    scen = generate_scenario(5, 4, 3, 10.0, channel=cfg)
    d = np.hypot(
        scen.user_xy[:, None, 0] - scen.vertex_xy[None, :, 0],
        scen.user_xy[:, None, 1] - scen.vertex_xy[None, :, 1],
    )
    rho = pathloss(d, cfg)
    assert np.allclose(scen.link_gain, rho * rho, rtol=1e-12)


def test_rayleigh_gain_statistics(rng):
    # |g|^2 is exponential with mean equal to the path-loss variance
    variance = 3.7e-4
    draws = rayleigh_power_gain(rng, variance, size=200_000)
    assert abs(draws.mean() - variance) <= 0.03 * variance


def test_io_roundtrip_exact(tmp_path):
    scen = generate_scenario(42, 7, 3, 20.0)
    path = tmp_path / "scen.json"
    save_scenario(scen, path)
    back = load_scenario(path)
    for field in ("vertex_xy", "user_xy", "distances", "link_gain", "demand"):
        assert getattr(scen, field).tobytes() == getattr(back, field).tobytes()
    assert back.params == scen.params
    assert back.channel == scen.channel
    assert back.seed == 42


def test_io_forbidden_edges_roundtrip(tmp_path):
    scen = generate_scenario(1, 4, 2, 10.0)
    scen.distances[1, 2] = math.inf  # forbidden move, may be asymmetric
    path = tmp_path / "scen.json"
    save_scenario(scen, path)
    back = load_scenario(path)
    assert back.distances[1, 2] == math.inf
    assert back.distances[2, 1] < math.inf
    text = path.read_text()
    json.loads(text)  # strict JSON despite the infinity


def test_load_rejects_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ScenarioError, match="JSON"):
        load_scenario(path)


def _valid_doc():
    scen = generate_scenario(9, 3, 2, 10.0)
    return scen


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d.pop("demand"), "demand"),
        (lambda d: d.__setitem__("schema_version", 99), "schema_version"),
        (lambda d: d["demand"].__setitem__(0, -1.0), "demand"),
        (lambda d: d["demand"].__setitem__(0, 0.0), "demand"),
        (lambda d: d["distances"][0].__setitem__(0, 2.0), "diagonal"),
        (lambda d: d["distances"][1].__setitem__(0, -3.0), "nonnegative"),
        (lambda d: d["link_gain"][0].__setitem__(0, -1e-9), "link_gain"),
        (lambda d: d["params"].pop("noise_w"), "noise_w"),
        (lambda d: d["vertex_xy"].__setitem__(0, ["a", "b"]), "vertex_xy"),
    ],
)
def test_load_names_offending_field(tmp_path, mutate, message):
    scen = _valid_doc()
    path = tmp_path / "scen.json"
    save_scenario(scen, path)
    doc = json.loads(path.read_text())
    mutate(doc)
    path.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match=message):
        load_scenario(path)


def test_load_accepts_asymmetric_distances(tmp_path):
    scen = generate_scenario(2, 4, 2, 10.0)
    scen.distances[1, 2] = 99.0  # detour one way only
    path = tmp_path / "scen.json"
    save_scenario(scen, path)
    back = load_scenario(path)
    assert back.distances[1, 2] == 99.0
    assert back.distances[2, 1] != 99.0


def test_with_noise_keeps_channels():
    scen = generate_scenario(3, 5, 2, 10.0)
    other = scen.with_noise(1e-9)
    assert other.params.noise_w == 1e-9
    assert other.link_gain is scen.link_gain
    assert scen.params.noise_w != 1e-9
