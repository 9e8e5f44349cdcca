import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from threelines import solver, trinoid
from threelines.geometry import in_K
from threelines.trinoid import TrinoidSpec
from threelines.verify import predicted_embedded_ends, same_set_mod_sign, trinoid_real_closed_forms

SPECS = [(0.6, 0.6, 0.6), (0.7, 0.5, 0.65), (1.4, 0.6, 1.1), (2.3, 1.6, 0.5)]


@pytest.mark.parametrize("r,expected", [(0.3, 0.3), (1.0, 1.0), (-1.0, 1.0), (1.4, -0.6), (2.3, 0.3),
                                        (-2.6, -0.6), (3.0, 1.0)])
def test_bracket(r, expected):
    assert trinoid.bracket(r) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("mus", [(1.0, 0.5, 0.5), (0.5, -0.2, 0.5), (0.5, 0.5, 0.0)])
def test_spec_validation(mus):
    with pytest.raises(ValueError):
        TrinoidSpec(*mus)


@pytest.mark.parametrize("mus", SPECS)
def test_lifts_and_rhs(mus):
    spec = TrinoidSpec(*mus)
    lifts = spec.lifts()
    base = spec.base_angles
    for lift, b in zip(lifts, (base[0], base[2], base[1])):
        assert (lift - b) / 2 == pytest.approx(round((lift - b) / 2), abs=1e-12)
    ends = trinoid.trinoid_rhs(spec)
    for A, a in ((ends.A, ends.alpha), (ends.B, ends.beta), (ends.C, ends.gamma)):
        assert A * a / (2 * math.pi) == pytest.approx((a * a - 1) / 4, rel=1e-14)


@pytest.mark.parametrize("mus", SPECS)
def test_trinoid_pqr_is_closed_form(mus):
    spec = TrinoidSpec(*mus)
    sol = trinoid.trinoid_pqr(spec)
    ends = trinoid.trinoid_rhs(spec)
    assert np.max(np.abs(solver.pqr_residuals(*sol.pqr, ends, sol.eps))) < 1e-12
    assert "trinoid_admissible" in sol.flags
    assert same_set_mod_sign([sol.pqr], trinoid_real_closed_forms(spec, sol.eps)[-1:], 1e-12)
    # admissible means Lambda-hat vanishes identically
    assert max(map(abs, solver.hat_lambda_values(sol, ends.lifted))) < 1e-12


@pytest.mark.parametrize("mus", SPECS)
def test_half_solutions_solve_parabolic_system(mus):
    spec = TrinoidSpec(*mus)
    ends = trinoid.trinoid_rhs(spec)
    for sol in trinoid.half_solutions(spec):
        assert np.max(np.abs(solver.pqr_residuals(*sol.pqr, ends, -1))) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(1e-3, 1e3))
def test_halfspace_roundtrip(x, y, y3):
    w = complex(x, y)
    M = trinoid.hermitian_from_halfspace(w, y3)
    # det cancels terms of size |M|^2
    assert abs(np.linalg.det(M) - 1) < 1e-8 + 1e-14 * np.abs(M).max() ** 2
    w2, t2 = trinoid.halfspace_from_hermitian(M)
    assert abs(w2 - w) <= 1e-10 * (1 + abs(w)) and t2 == pytest.approx(y3, rel=1e-12)
    X = trinoid.minkowski_from_hermitian(M)
    assert np.allclose(trinoid.hermitian_from_minkowski(X), M, rtol=1e-12, atol=1e-12 * np.abs(M).max())


def test_hyperboloid_and_ball(rng):
    F = rng.normal(size=(50, 2, 2)) + 1j * rng.normal(size=(50, 2, 2))
    F /= np.sqrt(np.linalg.det(F))[:, None, None]
    X = trinoid.minkowski_from_hermitian(trinoid.hermitian(F))
    assert np.allclose(trinoid.mink(X, X), -1, atol=1e-9 * np.abs(X).max() ** 2)
    assert np.all(X[:, 0] > 0)
    assert np.all(np.linalg.norm(trinoid.ball_from_minkowski(X), axis=1) < 1)
    with pytest.raises(ValueError):
        trinoid.halfspace_from_hermitian(-np.eye(2))


def test_frame_determinant_and_coefficient(trinoid06):
    mesh, ev = trinoid06
    assert mesh.det_drift < 1e-8
    # F^-1 dF is trace free and nilpotent
    C = trinoid.bryant_coefficient(ev)(np.array([0.4 + 0.6j, -1 + 2j]))
    assert np.allclose(np.trace(C, axis1=1, axis2=2), 0)
    assert np.allclose(C @ C, 0, atol=1e-12 * np.abs(C).max() ** 2)


def test_frame_path_independence(trinoid06):
    _, ev = trinoid06
    a = trinoid.integrate_bryant(ev, [2 + 1j]).F
    b = trinoid.integrate_bryant(ev, [-1 + 1j, -1 + 3j, 2 + 3j, 2 + 1j]).F
    assert np.allclose(a, b, atol=1e-9)


def test_boundary_planes(trinoid06):
    mesh, _ = trinoid06
    fits, allfit, dists = trinoid.segment_planes(mesh)
    assert max(dists) < 1e-4
    assert allfit.residual < 1e-6
    X = mesh.minkowski
    Xr = trinoid.reflect(X, allfit.normal)
    assert np.allclose(trinoid.mink(Xr, Xr), -1, atol=1e-8 * np.abs(X).max() ** 2)
    B = X[mesh.tags > 0]
    assert np.allclose(trinoid.reflect(B, allfit.normal), B, atol=1e-6 * np.abs(B).max())


def test_doubled_mesh(trinoid06):
    mesh, _ = trinoid06
    _, allfit, _ = trinoid.segment_planes(mesh)
    d = mesh.doubled(allfit)
    n = len(mesh.z)
    assert len(d.z) == 2 * n and len(d.faces) == 2 * len(mesh.faces)
    assert d.faces.max() < 2 * n
    # boundary vertices are fixed by the reflection, so the halves meet
    b = np.nonzero(mesh.tags > 0)[0]
    assert np.allclose(d.halfspace[b], d.halfspace[b + n], atol=1e-6)


def test_mesh_outside_K_rejected():
    with pytest.raises(ValueError):
        trinoid.trinoid_mesh(TrinoidSpec(0.2, 0.2, 0.2), 8)


def test_embedded_at_every_end(trinoid06):
    _, ev = trinoid06
    for end in ("0", "1", "inf"):
        assert trinoid.embeddedness_check(ev, end).embedded


@pytest.mark.parametrize("mus", [(0.6, 0.6, 0.6), (0.7, 0.5, 0.65)])
def test_half_solutions_fail_at_predicted_ends(mus):
    spec = TrinoidSpec(*mus)
    for sol in trinoid.half_solutions(spec):
        ev = trinoid.cousin_evaluator(spec, sol)
        pred = predicted_embedded_ends(sol, ev.lifted)
        assert not all(pred.values())
        for end, ok in pred.items():
            assert trinoid.embeddedness_check(ev, end).embedded == ok


@pytest.mark.parametrize("mus", [(0.6, 0.6, 0.6), (0.7, 0.5, 0.65)])
def test_growth_readoff(mus):
    spec = TrinoidSpec(*mus)
    ev = trinoid.cousin_evaluator(spec)
    for end, g in zip(("0", "1", "inf"), spec.growths):
        assert trinoid.growth_readoff(ev, end)[0] == pytest.approx(g, abs=1e-8)


def test_hyperbolic_gauss_end_values(trinoid06):
    # G(z) = z + (a1-a2)^2 / (2(2z - a1 - a2)) at the ends
    _, ev = trinoid06
    G = trinoid.gauss_end_values(ev.phi)
    assert trinoid.chordal(G[0], trinoid.as_homogeneous(trinoid.hyperbolic_gauss(0.0, ev.phi))) < 1e-12
    assert trinoid.chordal(G[1], trinoid.as_homogeneous(trinoid.hyperbolic_gauss(1.0, ev.phi))) < 1e-12
    assert trinoid.hyperbolic_gauss(np.inf, ev.phi) == complex("inf")


def test_mobius_fit_roundtrip(rng):
    T = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    src = rng.normal(size=3) + 1j * rng.normal(size=3)
    dst = [(T[0, 0] * s + T[0, 1]) / (T[1, 0] * s + T[1, 1]) for s in src]
    T2 = trinoid.fit_mobius(src, dst)
    s = 0.3 - 0.8j
    a, b = trinoid.apply_mobius(T2, (s, 1))
    assert a / b == pytest.approx((T[0, 0] * s + T[0, 1]) / (T[1, 0] * s + T[1, 1]), rel=1e-10)


def test_distinctness_collision():
    # 1 - mu0^2 - mu1^2 + mui^2 = 0: the ends 0 and 1 share their boundary point
    spec = TrinoidSpec(1.4, 0.6, math.sqrt(1.32))
    res = trinoid.boundary_distinctness(spec)
    assert res["distinct"] == [False, True, True]
    assert res["agree"]
    generic = trinoid.boundary_distinctness(TrinoidSpec(0.7, 0.5, 0.65))
    assert generic["distinct"] == [True, True, True] and generic["agree"]


@settings(max_examples=200, deadline=None)
@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(-4, 4))
def test_uvw_sum_is_discriminant(a, b, c):
    U, V, W = trinoid.uvw(a, b, c)
    assert abs(U + V + W + 4 * trinoid.phi_cap_discriminant(a, b, c)) <= 1e-12 * (1 + abs(U) + abs(V) + abs(W))


@settings(max_examples=300, deadline=None)
@given(st.floats(0.01, 3.99), st.floats(0.01, 3.99), st.floats(0.01, 3.99))
def test_umehara_equivalent_to_K(m0, m1, mi):
    if min(abs(v - round(v)) for v in (m0, m1, mi)) < 1e-9:
        return
    spec = TrinoidSpec(m0, m1, mi)
    x, y, z = spec.base_angles
    # skip draws where either predicate is within rounding of its boundary; near the
    # vertices of K the cosine form cancels to second order
    margins = (x + y + z - 1, 1 + x - y - z, 1 - x + y - z, 1 - x - y + z)
    c = [math.cos(math.pi * m) for m in (m0, m1, mi)]
    if min(abs(v) for v in margins) < 1e-9 or abs(sum(v * v for v in c) + 2 * math.prod(c) - 1) < 1e-9:
        return
    assert in_K(x, y, z) == trinoid.umehara_condition(m0, m1, mi)


def test_diagnostics(spec06, trinoid06):
    mesh, ev = trinoid06
    d = trinoid.trinoid_diagnostics(spec06, mesh, ev)
    for key in ("growths", "in_K", "nondegenerate", "boundary_points", "distinct", "det_drift",
                "plane_residual"):
        assert key in d
    assert d["in_K"] and d["nondegenerate"] and all(d["distinct"])
    assert d["growths"] == pytest.approx([0.4] * 3)
    assert d["boundary_points"][2] is None
    assert d["mobius_check"] < 1e-8
    assert max(d["end_approach"].values()) < 1e-4
    assert all(d["embedded_ends"].values())
