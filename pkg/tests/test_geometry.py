import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from threelines import geometry
from threelines.geometry import (DegenerateTripleError, OrientedLine, TripleConfig, classify_triple,
                                 frame_angles, in_K, lines_from_config, measured_frame_angles)
from threelines.verify import random_config, roundtrip_error


@st.composite
def configs(draw):
    return random_config(np.random.default_rng(draw(st.integers(0, 2 ** 31))))[0]


@given(configs())
@settings(max_examples=200, deadline=None)
def test_roundtrip(cfg):
    assert roundtrip_error(cfg) < 1e-9


@given(configs())
@settings(max_examples=50, deadline=None)
def test_normalized_position(cfg):
    L1, L2, L3 = lines_from_config(cfg)
    assert np.allclose(L2.u, [-1, 0, 0]) and np.allclose(L2.p, 0)
    assert np.allclose(L1.p, [0, 0, -cfg.A])
    # associated vector of (D1, D2) is -e3
    assert np.allclose(geometry.associated_vector(L1, L2), [0, 0, -1], atol=1e-12)


@given(configs())
@settings(max_examples=50, deadline=None)
def test_invariant_under_direct_isometry(cfg):
    rng = np.random.default_rng(abs(hash(cfg)) % 2 ** 32)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    t = rng.normal(size=3)
    lines = [OrientedLine(q @ L.p + t, q @ L.u) for L in lines_from_config(cfg)]
    back = classify_triple(*lines)
    assert np.allclose(back.invariants(), cfg.invariants(), atol=1e-9)


def test_mirror_image_flips_eps0():
    cfg = TripleConfig(0.6, 0.5, 0.7, 1.0, -0.5, 2.0, 1)
    R = np.diag([1.0, 1.0, -1.0])
    lines = [OrientedLine(R @ L.p, R @ L.u) for L in lines_from_config(cfg)]
    back = classify_triple(*lines)
    assert back.eps0 == -1
    # lengths change sign under an indirect isometry
    assert back.A == pytest.approx(-cfg.A)


def test_dual_directions_mirror_symmetric():
    cfg = TripleConfig(0.6, 0.5, 0.7, 1.0, 1.0, 1.0, 1)
    a, d = lines_from_config(cfg), lines_from_config(cfg.dual())
    for L, M in zip(a, d):
        assert np.allclose(L.u * [1, 1, -1], M.u)


def test_symmetric_theta_equals_theta_hat():
    fr = frame_angles(TripleConfig(0.6, 0.6, 0.6, 1, 1, 1, 1))
    assert fr.theta == pytest.approx(fr.theta_hat)
    assert fr.t == pytest.approx(math.tan(fr.theta / 2))


@given(configs())
@settings(max_examples=50, deadline=None)
def test_frame_angles_match_measurement(cfg):
    fr = frame_angles(cfg)
    th, thh = measured_frame_angles(*lines_from_config(cfg))
    assert math.tan(th / 2) == pytest.approx(fr.t, rel=1e-9, abs=1e-12)
    assert math.tan(thh / 2) == pytest.approx(fr.t_hat, rel=1e-9, abs=1e-12)
    assert np.sign(fr.t) == np.sign(fr.t_hat) == cfg.eps0


def test_frame_angles_from_lifts():
    cfg = TripleConfig(0.6, 0.5, 0.7, 1, 1, 1, -1)
    a = frame_angles(cfg)
    b = frame_angles(cfg, (2.6, -1.3, 0.5))
    assert a.t == pytest.approx(b.t, rel=1e-12)
    with pytest.raises(ValueError):
        frame_angles(cfg, (0.6, 0.7, 1.0))


@pytest.mark.parametrize("lines,test", [
    ([((0, 0, 0), (1, 0, 0)), ((0, 0, 1), (1, 0, 0)), ((0, 1, 0), (0, 0, 1))], "parallel"),
    ([((0, 0, 0), (1, 0, 0)), ((0, 0, 1), (0, 1, 0)), ((0, 0, 2), (1, 1, 0))], "parallel_planes"),
    ([((0, 0, 0), (1, 0, 0)), ((0, 0, 0), (0, 1, 0)), ((0, 1, 3), (0, 1, 1))], "concurrent"),
])
def test_degenerate_triples(lines, test):
    with pytest.raises(DegenerateTripleError) as exc:
        classify_triple(*(OrientedLine(p, u) for p, u in lines))
    assert exc.value.test == test


@pytest.mark.parametrize("x,y,z,inside", [(0.6, 0.6, 0.6, True), (0.1, 0.1, 0.1, False),
                                           (0.9, 0.05, 0.05, False), (0.5, 0.5, 0.5, True),
                                           (0.2, 0.9, 0.8, False)])
def test_in_K(x, y, z, inside):
    assert in_K(x, y, z) == inside


def test_config_validation():
    with pytest.raises(ValueError):
        TripleConfig(0.1, 0.1, 0.1, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        TripleConfig(0.6, 0.6, 0.6, 0, 1, 1, 1)
    with pytest.raises(ValueError):
        TripleConfig(0.6, 0.6, 0.6, 1, 1, 1, 0)


def test_json_roundtrip(tmp_path):
    cfg = TripleConfig(0.6, 0.5, 0.7, 1.0, -0.5, 2.0, -1)
    assert TripleConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg
    lines = lines_from_config(cfg)
    path = tmp_path / "lines.json"
    path.write_text(json.dumps({"lines": geometry.lines_to_json(lines)}))
    loaded = geometry.load_lines(path)
    assert all(np.allclose(a.p, b.p) and np.allclose(a.u, b.u) for a, b in zip(lines, loaded))


def test_signed_distance_antisymmetric_sign():
    L1 = OrientedLine((0, 0, 0), (1, 0, 0))
    L2 = OrientedLine((0, 0, 2), (0, 1, 0))
    d = geometry.signed_distance(L1, L2)
    assert abs(d) == pytest.approx(2)
    # reversing one orientation flips the associated vector and the sign
    assert geometry.signed_distance(L1, OrientedLine((0, 0, 2), (0, -1, 0))) == pytest.approx(-d)
