import math
import time

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from threelines import specfun
from threelines._exact import cospi, s_terms, sinpi
from threelines.specfun import (EvalRegion, ExponentSet, GammaPoleError, SeriesAccuracyWarning,
                                SingularPointError)
from threelines.verify import (connection_identity_errors, overlap_error, random_config,
                               sample_half_plane, wronskian_error, wronskian_reference)
from threelines.geometry import TripleConfig

mpmath.mp.dps = 30

E06 = ExponentSet(0.6, 0.6, 0.6)


# exact trig ---------------------------------------------------------------

def test_sinpi_keeps_relative_accuracy_near_integers():
    # (1 - a - b - c)/2 with a + b + c = 1 + 1e-13: the sum itself rounds badly
    a, b = 0.3, 0.4
    c = 0.3 + 1e-13
    s = sinpi(s_terms(a, b, c, -1, -1, -1))
    exact = float(mpmath.sinpi((1 - mpmath.mpf(a) - mpmath.mpf(b) - mpmath.mpf(c)) / 2))
    assert s == pytest.approx(exact, rel=1e-3)


@pytest.mark.parametrize("x", [0.0, 0.25, 0.5, 1.0, 1.5, -2.25, 7.125])
def test_sinpi_cospi_match_math(x):
    assert sinpi([x]) == pytest.approx(float(mpmath.sinpi(x)), abs=2e-16)
    assert cospi([x]) == pytest.approx(float(mpmath.cospi(x)), abs=2e-16)


# Gamma ----------------------------------------------------------------------

@pytest.mark.parametrize("z", [0.5, 1.0, 2.5, 7.3, 0.1 + 3j, -2.5 + 0.5j, -0.999999, 12.0 - 4j, 1e-6])
def test_gamma_against_mpmath(z):
    ref = complex(mpmath.gamma(z))
    assert abs(specfun.gamma_fn(z) - ref) <= 1e-13 * abs(ref)


@pytest.mark.parametrize("n", [0, -1, -5])
def test_gamma_poles_raise(n):
    with pytest.raises(GammaPoleError):
        specfun.gamma_fn(n)


@given(st.floats(0.05, 0.95), st.floats(-3, 3))
@settings(max_examples=60, deadline=None)
def test_gamma_reflection(x, y):
    z = complex(x, y)
    lhs = specfun.gamma_fn(z) * specfun.gamma_fn(1 - z)
    rhs = math.pi / complex(mpmath.sin(mpmath.pi * z))
    assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


# branches -------------------------------------------------------------------

def test_branch_pow_upper_half_plane_limits():
    # on the negative axis z^k takes arg pi, on (1, inf) (1-z)^k takes arg -pi
    assert specfun.branch_pow(-2.0, 0.5) == pytest.approx(1j * math.sqrt(2))
    assert specfun.branch_pow(3.0, 0.5, "pow_1_minus_z") == pytest.approx(-1j * math.sqrt(2))
    assert specfun.branch_pow(0.5, 0.5, "pow_1_minus_z") == pytest.approx(math.sqrt(0.5))
    # continuity from the upper half-plane
    for z, conv in ((-2.0, "log_at_0"), (3.0, "pow_1_minus_z"), (3.0, "pow_z_minus_1")):
        a = specfun.branch_pow(z, 0.37, conv)
        b = specfun.branch_pow(z + 1e-12j, 0.37, conv)
        assert abs(a - b) < 1e-10


def test_branch_pow_singular_point():
    with pytest.raises(SingularPointError):
        specfun.branch_pow(1.0, -0.5, "pow_z_minus_1")
    with pytest.raises(ValueError):
        specfun.branch_pow(1.0, 0.5, "bogus")


# 2F1 series -------------------------------------------------------------------

@pytest.mark.parametrize("s1,s2,s3", [(0.3, -0.7, 1.4), (1.2, 0.5, 0.6), (-1.3, 2.1, -0.4), (0.2, 0.2, 1.0)])
@pytest.mark.parametrize("x", [0.1, -0.5 + 0.3j, 0.85j, 0.9 + 0.1j, -0.95])
def test_hyp2f1_against_mpmath(s1, s2, s3, x):
    F, dF, info = specfun.hyp2f1_series(s1, s2, s3, np.array([x]))
    ref = complex(mpmath.hyp2f1(s1, s2, s3, x))
    dref = complex(mpmath.diff(lambda t: mpmath.hyp2f1(s1, s2, s3, t), x))
    assert info["converged"].all()
    assert abs(F[0] - ref) <= 1e-13 * max(1, abs(ref))
    assert abs(dF[0] - dref) <= 1e-12 * max(1, abs(dref))


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 3), st.complex_numbers(max_magnitude=0.9))
@settings(max_examples=50, deadline=None)
def test_hyp2f1_symmetric_in_first_two(s1, s2, s3, x):
    a = specfun.hyp2f1(s1, s2, s3, x)
    b = specfun.hyp2f1(s2, s1, s3, x)
    assert abs(a - b) <= 1e-12 * max(1, abs(a))


def test_hyp2f1_rejects_divergent_and_flags_cap():
    with pytest.raises(ValueError):
        specfun.hyp2f1_series(0.5, 0.5, 1.5, np.array([1.0]))
    with pytest.raises(ValueError):
        specfun.hyp2f1_series(0.5, 0.5, -2.0, np.array([0.1]))
    _, _, info = specfun.hyp2f1_series(0.5, 0.5, 1.5, np.array([0.9999]), max_terms=32)
    assert not info["converged"].any()


def test_hyp2f1_warns_at_term_cap(monkeypatch):
    monkeypatch.setattr(specfun, "MAX_TERMS", 32)
    monkeypatch.setattr(specfun.hyp2f1_series, "__defaults__", (specfun.SERIES_TOL, 32))
    with pytest.warns(SeriesAccuracyWarning):
        specfun.hyp2f1(0.5, 0.5, 1.5, 0.9999)


# exponents and regions ---------------------------------------------------------

def test_exponent_set_validation():
    with pytest.raises(ValueError):
        ExponentSet(1.0, 0.5, 0.5)
    with pytest.raises(ValueError):
        ExponentSet(0.5, 0.25, 0.25)   # s_mmm = 0
    e = ExponentSet(0.6, 0.7, 0.8)
    assert e.s_ppp == pytest.approx(1.55)
    assert e.ab == pytest.approx(e.s_mmm * e.s_mpm)
    assert set(e.s_values()) == {"ppp", "ppm", "pmp", "pmm", "mpp", "mpm", "mmp", "mmm"}


@pytest.mark.parametrize("z,tag", [(0.1j, EvalRegion.NEAR0), (1.05 + 0.1j, EvalRegion.NEAR1),
                                   (20 + 3j, EvalRegion.NEARINF), (np.exp(1j * np.pi / 3), "lens"),
                                   (-40 + 0j, EvalRegion.NEARINF), (0.5 + 0j, EvalRegion.NEAR1)])
def test_select_region(z, tag):
    assert specfun.select_region(np.array([z]))[0] == tag


@pytest.mark.parametrize("region,z", [(EvalRegion.NEAR0, 0.3 + 0.4j), (EvalRegion.NEAR0, -3 + 1j),
                                      (EvalRegion.NEAR1, 1.4 + 0.3j), (EvalRegion.NEARINF, 5 + 2j)])
def test_local_basis_solves_equation(region, z):
    w1, w2, d1, d2 = specfun.basis_at(region, E06, np.array([z]))
    h = 1e-4
    # second derivative from the equation, first derivative against a difference quotient
    for k in range(2):
        f = lambda t: specfun.basis_at(region, E06, np.array([t]))[k][0]
        fd = (f(z + h) - f(z - h)) / (2 * h)
        assert abs(fd - (d1, d2)[k][0]) < 1e-7 * max(1, abs(fd))
        d2w = specfun._second_derivative(E06, z, (w1, w2)[k][0], (d1, d2)[k][0])
        fdd = (f(z + h) - 2 * f(z) + f(z - h)) / h ** 2
        assert abs(fdd - d2w) < 1e-5 * max(1, abs(fdd))


def test_basis_outside_domain_raises():
    with pytest.raises(ValueError):
        specfun.basis_at(EvalRegion.NEAR1, E06, np.array([3 + 3j]))


# connection matrices ----------------------------------------------------------------

def test_nu_entries_real_and_nu_hat_phases():
    m = specfun.connection_matrices(E06)
    assert np.all(np.abs(m.nu.imag) == 0)
    # nu_hat carries the phase exp(i pi s_---) in its (1,1) entry, and the rest is real
    ph = np.exp(1j * np.pi * E06.s_mmm)
    assert abs((m.nu_hat[0, 0] / ph).imag) < 1e-14 * abs(m.nu_hat[0, 0])


def test_nu_against_mpmath_connection():
    # sigma on |z|<1 equals nu times the basis at 1: check at a point of the overlap
    e = ExponentSet(0.35, 0.55, 0.45)
    z = 0.6 + 0.2j
    s1, s2, _, _ = specfun.sigma_route(e, np.array([z]), EvalRegion.NEAR0)
    a, g = e.alpha, e.gamma
    ref1 = complex(mpmath.hyp2f1(e.s_mmm, e.s_mpm, 1 - a, z))
    assert abs(s1[0] - ref1) < 1e-13


@pytest.mark.parametrize("lifted", [(0.6, 0.6, 0.6), (0.6, -1.4, 0.6), (2.6, 0.6, -1.4), (0.3, 0.45, 0.8)])
def test_connection_identities(lifted):
    base = tuple(v - 2 * math.floor(v / 2) for v in lifted)
    cfg = TripleConfig(base[0], base[2], base[1], 1.0, 1.0, 1.0, 1)
    e1, e2, e3 = connection_identity_errors(cfg, lifted)
    assert max(e1, e2, e3) < 1e-12


def test_gamma_ratio_pole_and_zero():
    with pytest.raises(GammaPoleError):
        specfun._gamma_ratio(([1.0, -2.0],), ())
    # a pole in the denominator gives an exact zero
    assert specfun._gamma_ratio(([0.5],), ([0.25, -1.25],)) == 0.0


# global continuation --------------------------------------------------------------

def test_wronskian_fixed_point():
    z = 0.3 + 0.4j
    s1, s2, d1, d2 = specfun.sigma_global(E06, z)
    W = s1 * d2 - s2 * d1
    ref = 0.6 * z ** (-0.4) * (1 - z) ** (-0.4)
    assert abs(W - ref) < 1e-13 * abs(ref)


@given(st.integers(0, 2 ** 31))
@settings(max_examples=15, deadline=None)
def test_wronskian_property(seed):
    rng = np.random.default_rng(seed)
    cfg, lifted = random_config(rng, lifts=True)
    e = ExponentSet(*lifted)
    assert wronskian_error(e, sample_half_plane(rng, 100)) < 1e-9


def test_direct_wronskian_within_conditioning(rng):
    # the direct difference is accurate up to its condition number
    for _ in range(5):
        _, lifted = random_config(rng, lifts=True)
        e = ExponentSet(*lifted)
        z = sample_half_plane(rng, 200)
        s1, s2, d1, d2 = specfun.sigma_global(e, z)
        W = s1 * d2 - s2 * d1
        ref = wronskian_reference(e, z)
        cond = (np.abs(s1 * d2) + np.abs(s2 * d1)) / np.abs(ref)
        assert np.all(np.abs(W - ref) / np.abs(ref) <= 1e-13 * cond + 1e-13)


def test_overlaps_agree(rng):
    for lifted in ((0.6, 0.6, 0.6), (0.7, 0.2, 0.65), (2.6, -1.4, 0.6)):
        assert overlap_error(ExponentSet(*lifted), rng, n=20) < 1e-10


def test_sigma_second_solves_equation():
    z = np.array([0.2 + 0.9j, 2.5 + 0.1j, -3 + 0j])
    s1, s2, d1, d2 = specfun.sigma_global(E06, z)
    dd = specfun.sigma_second(E06, z, s1, d1)
    res = specfun.hypergeometric_residual(E06, z, s1, d1, dd)
    assert np.max(np.abs(res)) < 1e-12 * np.max(np.abs(s1))


def test_sigma_continuous_across_real_axis_segments():
    # values on (1, inf) are limits from the upper half-plane
    for x in (-2.0, 0.5, 3.0):
        a = np.array(specfun.sigma_global(E06, x))
        b = np.array(specfun.sigma_global(E06, x + 1e-10j))
        assert np.max(np.abs(a - b)) < 1e-8 * np.max(np.abs(a))


def test_vectorized_runtime():
    z = sample_half_plane(np.random.default_rng(0), 5000)
    t = time.perf_counter()
    specfun.sigma_global(ExponentSet(0.37, 0.58, 0.71), z)
    assert time.perf_counter() - t < 5
