"""Special functions on the closed upper half-plane.

Complex Gamma, branch-aware powers, the Gauss hypergeometric series and the
local solution bases of the hypergeometric equation

    w'' + ((1-alpha)/z + (1-gamma)/(z-1)) w' + s_mmm s_mpm w / (z(z-1)) = 0

together with their continuation sigma_1, sigma_2 over the whole half-plane.

All branches follow one convention: for z in the closed upper half-plane,
z**k = |z|**k exp(i k arg z) with arg z in [0, pi]; (z-1)**k is defined the
same way, and (1-z)**k = exp(-i pi k) (z-1)**k, which is real for real z < 1.
"""

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from ._exact import cospi, s_terms, sinpi

__all__ = [
    "GammaPoleError", "SingularPointError", "SeriesAccuracyWarning",
    "gamma_fn", "branch_pow", "hyp2f1", "hyp2f1_series",
    "ExponentSet", "EvalRegion", "select_region", "basis_at",
    "ConnectionMatrices", "connection_matrices", "sigma_global", "sigma_route",
    "hypergeometric_residual", "sigma_second",
]

SINGULAR_RADIUS = 1e-8
LENS_RADIUS = 0.8        # worst admissible local-variable modulus for a series route
SERIES_TOL = 1e-16
MAX_TERMS = 10_000
_CHUNK = 16


class GammaPoleError(ValueError):
    """Gamma evaluated at a non-positive integer."""


class SingularPointError(ValueError):
    """Evaluation requested at (or too close to) a regular singular point."""


class SeriesAccuracyWarning(RuntimeWarning):
    """Series summation hit the term cap before reaching the target tolerance."""


# ---------------------------------------------------------------- Gamma

# Lanczos coefficients for g = 607/128, 15 terms (Godfrey's set).
_LANCZOS_G = 607.0 / 128.0
_LANCZOS = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def gamma_fn(z):
    """Complex Gamma function (Lanczos, with reflection for Re z < 1/2)."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise GammaPoleError(f"Gamma has a pole at {z.real:g}")
    if z.real < 0.5:
        n = round(z.real)  # exact reduction keeps sin(pi z) accurate near poles
        s = cmath.sin(math.pi * complex(z.real - n, z.imag)) * (-1 if n % 2 else 1)
        if s == 0:
            raise GammaPoleError(f"Gamma has a pole at {z}")
        return math.pi / (s * gamma_fn(1.0 - z))
    z -= 1.0
    x = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        x += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


# ---------------------------------------------------------------- branches

_CONVENTIONS = ("log_at_0", "pow_z_minus_1", "pow_1_minus_z")


def _upper_pow(w, kappa):
    # arg in [0, pi]; tiny negative imaginary parts from rounding count as real
    w = np.asarray(w, dtype=complex)
    theta = np.arctan2(np.maximum(w.imag, 0.0), w.real)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.abs(w) ** kappa * np.exp(1j * kappa * theta)


def branch_pow(z, kappa, convention="log_at_0"):
    """Power of z, z-1 or 1-z with the upper half-plane branch convention.

    ``log_at_0`` gives z**kappa, ``pow_z_minus_1`` gives (z-1)**kappa and
    ``pow_1_minus_z`` gives (1-z)**kappa = exp(-i pi kappa) (z-1)**kappa.
    Works on scalars and arrays.
    """
    if convention not in _CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    zz = np.asarray(z, dtype=complex)
    base = zz if convention == "log_at_0" else zz - 1.0
    if float(kappa) != int(kappa) or kappa < 0:
        if np.any(base == 0):
            where = "0" if convention == "log_at_0" else "1"
            raise SingularPointError(f"non-integer or negative power at z = {where}")
    out = _upper_pow(base, kappa)
    if convention == "pow_1_minus_z":
        out = out * cmath.exp(-1j * math.pi * kappa)
    return out if np.ndim(z) else complex(out)


# ---------------------------------------------------------------- 2F1

def hyp2f1_series(s1, s2, s3, x, tol=SERIES_TOL, max_terms=MAX_TERMS):
    """Sum 2F1(s1, s2; s3; x) and its derivative for |x| < 1.

    The derivative series is (s1 s2 / s3) 2F1(s1+1, s2+1; s3+1; x), summed in
    the same loop.  Returns ``(F, dF, info)`` where ``info`` holds the number
    of terms used and a boolean array ``converged``; points that hit the cap
    keep their partial sums and are flagged rather than raising.
    """
    if s3 <= 0 and float(s3) == int(s3):
        raise ValueError("s3 must not be a non-positive integer")
    x = np.asarray(x, dtype=complex)
    shape = x.shape
    x = x.ravel()
    if np.any(np.abs(x) >= 1.0):
        raise ValueError("hypergeometric series diverges for |x| >= 1")

    F = np.ones(x.size, dtype=complex)
    dF = np.full(x.size, s1 * s2 / s3, dtype=complex)
    converged = np.zeros(x.size, dtype=bool)
    terms = np.zeros(x.size, dtype=int)

    idx = np.arange(x.size)
    xa, ax = x.copy(), np.abs(x)
    t = np.ones(x.size, dtype=complex)
    d = dF.copy()
    Sa, Da = F.copy(), dF.copy()
    n_min = max(abs(s1), abs(s2), abs(s3)) + 2
    n = 0
    # terms are generated CHUNK at a time by cumulative products of the ratios
    while idx.size and n < max_terms:
        m = np.arange(n, n + _CHUNK, dtype=float)
        r = (s1 + m) * (s2 + m) / ((s3 + m) * (m + 1))
        rd = (s1 + 1 + m) * (s2 + 1 + m) / ((s3 + 1 + m) * (m + 1))
        T = t[:, None] * np.cumprod(r[None, :] * xa[:, None], axis=1)
        D = d[:, None] * np.cumprod(rd[None, :] * xa[:, None], axis=1)
        Sa = Sa + T.sum(axis=1)
        Da = Da + D.sum(axis=1)
        t, d = T[:, -1], D[:, -1]
        n += _CHUNK
        if n < n_min:
            continue
        # bound on the ratio of every later term, for both series
        f = abs((s1 + n) * (s2 + n) / ((s3 + n) * (n + 1)))
        fd = abs((s1 + 1 + n) * (s2 + 1 + n) / ((s3 + 1 + n) * (n + 1)))
        q = max(f, fd, 1.0) * ax
        with np.errstate(divide="ignore", invalid="ignore"):
            slack = tol * (1.0 - q)
            done = (q < 1.0) & (np.abs(t) * q <= slack * np.abs(Sa)) \
                & (np.abs(d) * q <= slack * np.abs(Da))
        if done.any():
            j = idx[done]
            F[j], dF[j], converged[j], terms[j] = Sa[done], Da[done], True, n
            keep = ~done
            idx, xa, ax, t, d, Sa, Da = idx[keep], xa[keep], ax[keep], t[keep], d[keep], Sa[keep], Da[keep]
    if idx.size:
        F[idx], dF[idx], terms[idx] = Sa, Da, n
    info = {"terms": terms.reshape(shape), "converged": converged.reshape(shape)}
    return F.reshape(shape), dF.reshape(shape), info


def hyp2f1(s1, s2, s3, z):
    """Gauss hypergeometric series 2F1(s1, s2; s3; z) inside the unit disk.

    Emits a :class:`SeriesAccuracyWarning` if the term cap was reached.
    """
    F, _, info = hyp2f1_series(s1, s2, s3, z)
    if not np.all(info["converged"]):
        warnings.warn(f"2F1 series hit the {MAX_TERMS}-term cap", SeriesAccuracyWarning, stacklevel=2)
    return F if np.ndim(z) else complex(F)


# ---------------------------------------------------------------- exponents

@dataclass(frozen=True)
class ExponentSet:
    """Exponents (alpha, beta, gamma) at 0, infinity and 1, in units of pi."""
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if v == round(v):
                raise ValueError(f"{name} must be non-integer, got {v}")
        for signs, val in self.s_values().items():
            if abs(val - round(val)) < 1e-12:
                raise ValueError(f"exponent s_{signs} = {val} is an integer")

    def s(self, sa, sb, sg):
        """s with signs given as +1/-1 for alpha, beta, gamma."""
        return (1 + sa * self.alpha + sb * self.beta + sg * self.gamma) / 2

    def s_values(self):
        out = {}
        for sa, sb, sg in product((1, -1), repeat=3):
            key = "".join("p" if v > 0 else "m" for v in (sa, sb, sg))
            out[key] = self.s(sa, sb, sg)
        return out

    # named accessors s_ppp ... s_mmm
    s_ppp = property(lambda self: self.s(1, 1, 1))
    s_ppm = property(lambda self: self.s(1, 1, -1))
    s_pmp = property(lambda self: self.s(1, -1, 1))
    s_pmm = property(lambda self: self.s(1, -1, -1))
    s_mpp = property(lambda self: self.s(-1, 1, 1))
    s_mpm = property(lambda self: self.s(-1, 1, -1))
    s_mmp = property(lambda self: self.s(-1, -1, 1))
    s_mmm = property(lambda self: self.s(-1, -1, -1))

    @property
    def Pi_product(self):
        return float(np.prod([2 * v for v in self.s_values().values()]))

    @property
    def ab(self):
        """Constant coefficient s_mmm * s_mpm of the equation."""
        return self.s_mmm * self.s_mpm


def hypergeometric_residual(exps, z, w, dw, d2w):
    """Residual of the hypergeometric equation, scaled by z(z-1)."""
    a, g = exps.alpha, exps.gamma
    z = np.asarray(z, dtype=complex)
    return z * (z - 1) * d2w + ((2 - a - g) * z - (1 - a)) * dw + exps.ab * w


def _second_derivative(exps, z, w, dw):
    a, g = exps.alpha, exps.gamma
    return -(((2 - a - g) * z - (1 - a)) * dw + exps.ab * w) / (z * (z - 1))


# ---------------------------------------------------------------- regions

class EvalRegion:
    """Tags of the three local expansions and their applicability."""
    NEAR0 = "near0"
    NEAR1 = "near1"
    NEARINF = "nearInf"
    ALL = (NEAR0, NEAR1, NEARINF)

    @staticmethod
    def applies(tag, z):
        z = np.asarray(z, dtype=complex)
        if tag == EvalRegion.NEAR0:
            # direct series for |z| < 1, Pfaff variable z/(z-1) for Re z < 1/2
            return (np.abs(z) < 1) | (z.real < 0.5)
        if tag == EvalRegion.NEAR1:
            return np.abs(z - 1) < 1
        if tag == EvalRegion.NEARINF:
            return np.abs(z) > 1
        raise ValueError(f"unknown region {tag!r}")


def _local_moduli(z):
    az = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        r0 = np.minimum(az, az / np.abs(z - 1))
        rinf = 1.0 / az
    return r0, np.abs(z - 1), rinf


def select_region(z):
    """Nearest expansion for each point; 'lens' where none converges fast.

    Ties go to near1.  The lens is the neighbourhood of exp(i pi/3) where
    every local variable has modulus above ``LENS_RADIUS``.
    """
    z = np.asarray(z, dtype=complex)
    r0, r1, rinf = _local_moduli(z)
    tag = np.where(r1 <= np.minimum(r0, rinf), EvalRegion.NEAR1,
                   np.where(r0 <= rinf, EvalRegion.NEAR0, EvalRegion.NEARINF)).astype(object)
    best = np.minimum(np.minimum(r0, r1), rinf)
    tag[best > LENS_RADIUS] = "lens"
    return tag


def _check_series(info, what):
    if not np.all(info["converged"]):
        warnings.warn(f"{what}: series hit the term cap", SeriesAccuracyWarning, stacklevel=3)


def _basis_near0(e, z):
    a, b = e.s_mmm, e.s_mpm
    alpha = e.alpha
    za = branch_pow(z, alpha)
    w1 = np.empty_like(z)
    w2, d1, d2 = w1.copy(), w1.copy(), w1.copy()
    pfaff = np.abs(z) > np.abs(z / (z - 1))
    direct = ~pfaff
    if direct.any():
        x = z[direct]
        F1, G1, i1 = hyp2f1_series(a, b, 1 - alpha, x)
        F2, G2, i2 = hyp2f1_series(e.s_pmm, e.s_ppm, 1 + alpha, x)
        _check_series(i1, "near0")
        _check_series(i2, "near0")
        zx = za[direct]
        w1[direct], d1[direct] = F1, G1
        w2[direct] = zx * F2
        d2[direct] = alpha * zx / x * F2 + zx * G2
    if pfaff.any():
        x = z[pfaff]
        u = x / (x - 1)
        du = -1.0 / (x - 1) ** 2
        F1, G1, i1 = hyp2f1_series(a, e.s_mmp, 1 - alpha, u)
        F2, G2, i2 = hyp2f1_series(e.s_pmm, e.s_pmp, 1 + alpha, u)
        _check_series(i1, "near0/pfaff")
        _check_series(i2, "near0/pfaff")
        p1 = branch_pow(x, -a, "pow_1_minus_z")
        p2 = branch_pow(x, -e.s_pmm, "pow_1_minus_z")
        zx = za[pfaff]
        w1[pfaff] = p1 * F1
        d1[pfaff] = p1 * (a / (1 - x) * F1 + G1 * du)
        w2[pfaff] = zx * p2 * F2
        d2[pfaff] = w2[pfaff] * (alpha / x + e.s_pmm / (1 - x)) + zx * p2 * G2 * du
    return w1, w2, d1, d2


def _basis_near1(e, z):
    g = e.gamma
    x = 1 - z
    F1, G1, i1 = hyp2f1_series(e.s_mmm, e.s_mpm, 1 - g, x)
    F2, G2, i2 = hyp2f1_series(e.s_mmp, e.s_mpp, 1 + g, x)
    _check_series(i1, "near1")
    _check_series(i2, "near1")
    pg = branch_pow(z, g, "pow_1_minus_z")
    w1, d1 = F1, -G1
    w2 = pg * F2
    d2 = -g * pg / x * F2 - pg * G2
    return w1, w2, d1, d2


def _basis_nearinf(e, z):
    a, b = e.s_mmm, e.s_mpm
    x = 1 / z
    F1, G1, i1 = hyp2f1_series(a, e.s_pmm, 1 - e.beta, x)
    F2, G2, i2 = hyp2f1_series(b, e.s_ppm, 1 + e.beta, x)
    _check_series(i1, "nearInf")
    _check_series(i2, "nearInf")
    pa = branch_pow(z, -a)
    pb = branch_pow(z, -b)
    w1 = pa * F1
    w2 = pb * F2
    d1 = -a * pa * x * F1 - pa * G1 * x * x
    d2 = -b * pb * x * F2 - pb * G2 * x * x
    return w1, w2, d1, d2


_BASES = {EvalRegion.NEAR0: _basis_near0, EvalRegion.NEAR1: _basis_near1,
          EvalRegion.NEARINF: _basis_nearinf}


def _as_points(z):
    zz = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if np.any(zz.imag < -1e-12):
        raise ValueError("points must lie in the closed upper half-plane")
    # rounding noise below the real axis is read as a boundary value from above
    zz = np.where(zz.imag < 0, zz.real + 0j, zz)
    if np.any(np.abs(zz) < SINGULAR_RADIUS) or np.any(np.abs(zz - 1) < SINGULAR_RADIUS):
        raise SingularPointError("evaluation too close to z = 0 or z = 1")
    return zz


def _reshape(z, arrays):
    if np.ndim(z) == 0:
        return tuple(complex(a[0]) for a in arrays)
    shape = np.shape(z)
    return tuple(a.reshape(shape) for a in arrays)


def basis_at(region, exps, z):
    """Local basis (w1, w2) of one region and its z-derivatives."""
    zz = _as_points(z)
    if not np.all(EvalRegion.applies(region, zz)):
        raise ValueError(f"point outside the {region} expansion domain")
    return _reshape(z, _BASES[region](exps, zz))


# ---------------------------------------------------------------- connection

@dataclass(frozen=True)
class ConnectionMatrices:
    """w^(0) = nu w^(1) and w^(0) = nu_hat w^(inf), as 2x2 complex arrays."""
    nu: np.ndarray
    nu_hat: np.ndarray

    def __hash__(self):
        return hash((self.nu.tobytes(), self.nu_hat.tobytes()))

    def __eq__(self, other):
        return np.array_equal(self.nu, other.nu) and np.array_equal(self.nu_hat, other.nu_hat)


def _gamma_terms(terms):
    """Gamma(sum(terms)) and 1/Gamma(sum(terms)) for a real argument.

    Near the poles the reflection formula is evaluated with sin(pi x) from
    the exact summands, so the reciprocal keeps full relative accuracy.
    """
    x = math.fsum(terms)
    if x < 0.5:
        s = sinpi(terms)
        g1 = gamma_fn(math.fsum([1.0] + [-t for t in terms])).real
        if s == 0:
            return None, 0.0
        return math.pi / (s * g1), s * g1 / math.pi
    g = gamma_fn(x).real
    return g, 1.0 / g


def _gamma_ratio(num, den):
    out = 1.0
    for terms in num:
        g, _ = _gamma_terms(terms)
        if g is None:
            raise GammaPoleError(f"Gamma pole at {math.fsum(terms):g}")
        out *= g
    for terms in den:
        out *= _gamma_terms(terms)[1]
    return out


@lru_cache(maxsize=256)
def connection_matrices(exps):
    """Connection matrices between the local bases at 0, 1 and infinity."""
    a, b, g = exps.alpha, exps.beta, exps.gamma
    s = lambda sa, sb, sg: s_terms(a, b, g, sa, sb, sg)
    one_m_a, one_p_a = [1.0, -a], [1.0, a]
    nu = np.array([
        [_gamma_ratio((one_m_a, [g]), (s(-1, -1, 1), s(-1, 1, 1))),
         _gamma_ratio((one_m_a, [-g]), (s(-1, -1, -1), s(-1, 1, -1)))],
        [_gamma_ratio((one_p_a, [g]), (s(1, -1, 1), s(1, 1, 1))),
         _gamma_ratio((one_p_a, [-g]), (s(1, -1, -1), s(1, 1, -1)))],
    ], dtype=complex)
    ph = lambda t: complex(cospi(t), sinpi(t))
    nu_hat = np.array([
        [ph(s(-1, -1, -1)) * _gamma_ratio((one_m_a, [b]), (s(-1, 1, -1), s(-1, 1, 1))),
         ph(s(-1, 1, -1)) * _gamma_ratio((one_m_a, [-b]), (s(-1, -1, -1), s(-1, -1, 1)))],
        [ph(s(1, -1, -1)) * _gamma_ratio((one_p_a, [b]), (s(1, 1, -1), s(1, 1, 1))),
         ph(s(1, 1, -1)) * _gamma_ratio((one_p_a, [-b]), (s(1, -1, -1), s(1, -1, 1)))],
    ])
    nu.setflags(write=False)
    nu_hat.setflags(write=False)
    return ConnectionMatrices(nu=nu, nu_hat=nu_hat)


# ---------------------------------------------------------------- sigma

def _route(exps, region, z):
    w1, w2, d1, d2 = _BASES[region](exps, z)
    if region == EvalRegion.NEAR0:
        return w1, w2, d1, d2
    m = connection_matrices(exps)
    M = m.nu if region == EvalRegion.NEAR1 else m.nu_hat
    return (M[0, 0] * w1 + M[0, 1] * w2, M[1, 0] * w1 + M[1, 1] * w2,
            M[0, 0] * d1 + M[0, 1] * d2, M[1, 0] * d1 + M[1, 1] * d2)


def _taylor_coefficients(exps, zc, w, dw, radius, nmax=2000):
    """Taylor coefficients at zc of the solution with value w and slope dw."""
    a, g = exps.alpha, exps.gamma
    p20, p21 = zc * (zc - 1), 2 * zc - 1
    p10, p11 = (2 - a - g) * zc - (1 - a), 2 - a - g
    ab = exps.ab
    c = [complex(w), complex(dw)]
    small = 0
    n = 0
    while n < nmax:
        nxt = -((p21 * n + p10) * (n + 1) * c[n + 1]
                + (n * (n - 1) + p11 * n + ab) * c[n]) / (p20 * (n + 2) * (n + 1))
        c.append(nxt)
        n += 1
        scale = max(abs(v) * radius ** k for k, v in enumerate(c))
        small = small + 1 if abs(nxt) * radius ** (n + 1) < 1e-18 * scale else 0
        if small >= 4:
            break
    return np.array(c)


def _taylor_eval(coef, h):
    h = np.asarray(h, dtype=complex)
    val = np.zeros_like(h)
    der = np.zeros_like(h)
    for k in range(len(coef) - 1, -1, -1):
        der = der * h + val
        val = val * h + coef[k]
    return val, der


_LENS_CENTER = cmath.exp(1j * math.pi / 3)
_LENS_ANCHOR = 0.5 + 0.5j


@lru_cache(maxsize=256)
def _lens_expansion(exps):
    # two-step continuation: near0 series at the anchor, Taylor to the lens centre
    s1, s2, d1, d2 = _route(exps, EvalRegion.NEAR0, np.array([_LENS_ANCHOR]))
    step = _LENS_CENTER - _LENS_ANCHOR
    rad_anchor = abs(_LENS_ANCHOR)
    out = []
    for w, dw in ((s1[0], d1[0]), (s2[0], d2[0])):
        coef = _taylor_coefficients(exps, _LENS_ANCHOR, w, dw, abs(step))
        v, dv = _taylor_eval(coef, step)
        assert abs(step) < rad_anchor
        out.append(_taylor_coefficients(exps, _LENS_CENTER, v, dv, 0.45))
    return tuple(out)


def _lens(exps, z):
    c1, c2 = _lens_expansion(exps)
    h = z - _LENS_CENTER
    if np.any(np.abs(h) > 0.6):
        raise ValueError("lens continuation requested too far from its centre")
    s1, d1 = _taylor_eval(c1, h)
    s2, d2 = _taylor_eval(c2, h)
    return s1, s2, d1, d2


def sigma_route(exps, z, route):
    """sigma_1, sigma_2 and derivatives computed through one named route.

    ``route`` is near0, near1, nearInf or lens.  Used to cross-check the
    continuation on region overlaps.
    """
    zz = _as_points(z)
    if route == "lens":
        return _reshape(z, _lens(exps, zz))
    if not np.all(EvalRegion.applies(route, zz)):
        raise ValueError(f"point outside the {route} expansion domain")
    return _reshape(z, _route(exps, route, zz))


def sigma_global(exps, z):
    """sigma_1, sigma_2 and their derivatives anywhere in the closed half-plane.

    sigma equals the basis at 0 on |z| < 1 and is continued to the other
    regions through nu and nu_hat.  Vectorized over z.
    """
    zz = _as_points(z)
    tags = select_region(zz)
    out = [np.empty(zz.shape, dtype=complex) for _ in range(4)]
    for tag in (EvalRegion.NEAR0, EvalRegion.NEAR1, EvalRegion.NEARINF, "lens"):
        m = tags == tag
        if not m.any():
            continue
        vals = _lens(exps, zz[m]) if tag == "lens" else _route(exps, tag, zz[m])
        for o, v in zip(out, vals):
            o[m] = v
    return _reshape(z, out)


def sigma_wronskian(exps, z):
    """sigma1 sigma2' - sigma1' sigma2, evaluated without cancellation.

    Far from 0 both sigma_j are dominated by the same local solution, so the
    direct difference loses digits; here each point uses the Wronskian of
    its local basis times the determinant of the connection matrix.
    """
    zz = _as_points(z)
    tags = select_region(zz)
    W = np.empty(zz.shape, dtype=complex)
    m = connection_matrices(exps)
    det = {EvalRegion.NEAR0: 1.0, EvalRegion.NEAR1: np.linalg.det(m.nu),
           EvalRegion.NEARINF: np.linalg.det(m.nu_hat)}
    for tag in (EvalRegion.NEAR0, EvalRegion.NEAR1, EvalRegion.NEARINF, "lens"):
        sel = tags == tag
        if not sel.any():
            continue
        if tag == "lens":
            w1, w2, d1, d2 = _lens(exps, zz[sel])
            W[sel] = w1 * d2 - w2 * d1
        else:
            w1, w2, d1, d2 = _BASES[tag](exps, zz[sel])
            W[sel] = det[tag] * (w1 * d2 - w2 * d1)
    return W if np.ndim(z) else complex(W[0])


def sigma_second(exps, z, s, ds):
    """Second derivative of a solution from the equation itself."""
    return _second_derivative(exps, np.asarray(z, dtype=complex), s, ds)
