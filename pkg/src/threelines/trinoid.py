"""CMC-1 trinoids in hyperbolic space as conjugate cousins of the minimal disks.

The cousin has Weierstrass data (g, i omega); its Bryant frame solves
F^-1 dF = [[g, -g^2], [1, -g]] i omega, and the surface is F F^* in the
Hermitian model of H^3.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import TripleConfig, in_K
from .ode import propagate, propagate_path
from .solver import (EndParameters, PqrSolution, build_phi, construct, hat_lambda_values,
                     pqr_residuals)
from .specfun import ExponentSet, connection_matrices
from .surface import (WeierstrassEvaluator, build_grid, check_path, segment_tag)

DET_TOL = 1e-8
EMBED_TOL = 1e-5


def bracket(r):
    """[r]: the number in (-1, 1] with r - [r] in 2Z."""
    v = r - 2.0 * math.floor((r + 1.0) / 2.0)
    return 1.0 if v == -1.0 else v


def _is_integer(x, tol=1e-12):
    return abs(x - round(x)) < tol


@dataclass(frozen=True)
class TrinoidSpec:
    """End data mu0, mu1, mu_inf; the growths are 1 - mu."""
    mu0: float
    mu1: float
    mu_inf: float

    def __post_init__(self):
        for k in ("mu0", "mu1", "mu_inf"):
            v = float(getattr(self, k))
            object.__setattr__(self, k, v)
            if not v > 0:
                raise ValueError(f"{k} must be positive")
            if _is_integer(v):
                raise ValueError(f"{k} = {v} is an integer")

    @property
    def mus(self):
        return (self.mu0, self.mu1, self.mu_inf)

    @property
    def growths(self):
        return tuple(1 - m for m in self.mus)

    @property
    def base_angles(self):
        """(|[mu0]|, |[mu1]|, |[mu_inf]|)."""
        return tuple(abs(bracket(m)) for m in self.mus)

    def lifts(self):
        """(alpha, beta, gamma) = (+-mu0, +-mu_inf, +-mu1), each congruent to |[mu]| mod 2."""
        out = []
        for m in (self.mu0, self.mu_inf, self.mu1):
            b = abs(bracket(m))
            out.append(m if _is_integer((m - b) / 2, 1e-9) else -m)
        return tuple(out)


def trinoid_rhs(spec, lifts=None):
    """End parameters with A alpha / 2pi = (alpha^2 - 1)/4 and likewise for B, C."""
    al, be, ga = lifts if lifts is not None else spec.lifts()
    A, B, C = (2 * math.pi * (v * v - 1) / (4 * v) for v in (al, be, ga))
    return EndParameters(A, al, B, be, C, ga)


def nondegeneracy_value(mu0, mu1, mui):
    a, b, c = mu0 ** 2, mu1 ** 2, mui ** 2
    return a * a + b * b + c * c - 2 * a * b - 2 * a * c - 2 * b * c + 2 * a + 2 * b + 2 * c - 3


def umehara_condition(mu0, mu1, mui):
    c0, c1, ci = (math.cos(math.pi * m) for m in (mu0, mu1, mui))
    return c0 * c0 + c1 * c1 + ci * ci + 2 * c0 * c1 * ci < 1


def growth_check(spec):
    x, y, z = spec.base_angles
    k = in_K(x, y, z)
    u = umehara_condition(*spec.mus)
    d = nondegeneracy_value(*spec.mus)
    return {"in_K": bool(k), "nondegenerate": bool(d != 0), "nondegeneracy_value": d,
            "umehara": bool(u), "umehara_equivalent": bool(k == u)}


def uvw(alpha, beta, gamma):
    a, b, c = alpha ** 2, beta ** 2, gamma ** 2

    def one(x, y, z):
        return -3 * x * x + 2 * (1 + y + z) * x + y * y + z * z - 2 * (y + z + y * z) + 1

    return one(a, b, c), one(b, a, c), one(c, a, b)


def pi_product(alpha, beta, gamma):
    return math.prod(1 + sa * alpha + sb * beta + sg * gamma
                     for sa in (1, -1) for sb in (1, -1) for sg in (1, -1))


def phi_cap_discriminant(alpha, beta, gamma):
    """Discriminant of Phi = (1-b^2)/2 z(z-1) - (1-a^2)/2 (z-1) + (1-g^2)/2 z."""
    c2 = (1 - beta ** 2) / 2
    c1 = -(1 - beta ** 2) / 2 - (1 - alpha ** 2) / 2 + (1 - gamma ** 2) / 2
    c0 = (1 - alpha ** 2) / 2
    return c1 * c1 - 4 * c2 * c0


def trinoid_pqr(spec, lifts=None, tol=1e-10):
    """The admissible solution +-(U d, V d, W d) (d real) or +-(iU d, iV d, iW d).

    Real d = 1/(2 sqrt(-Pi)) solves the system with eps = +1, imaginary d the
    system with eps = -1.
    """
    ends = trinoid_rhs(spec, lifts)
    al, be, ga = ends.lifted
    P = pi_product(al, be, ga)
    if P == 0:
        raise ValueError("Pi vanishes: integer-sum degeneracy")
    U, V, W = uvw(al, be, ga)
    if P < 0:
        eps, d = 1, 1.0 / (2 * math.sqrt(-P))
    else:
        eps, d = -1, -1.0 / (2 * math.sqrt(P))   # i * (i / (2 sqrt Pi)) = -1/(2 sqrt Pi)
    p, q, r = U * d, V * d, W * d
    flags = ["trinoid_admissible"]
    if nondegeneracy_value(*spec.mus) == 0:
        flags.append("singular")
    sol = PqrSolution(p, q, r, eps, tuple(1 if v >= 0 else -1 for v in (p, q, r)), p + q + r,
                      tuple(flags))
    res = pqr_residuals(p, q, r, ends, eps)
    if np.max(np.abs(res)) > tol:
        raise ArithmeticError(f"closed-form trinoid solution has residual {np.max(np.abs(res)):.3g}")
    return sol


def half_solutions(spec, lifts=None):
    """The three (+-1/2, +-1/2, +-1/2) solutions of the eps = -1 system."""
    return [PqrSolution(*v, -1, tuple(1 if x > 0 else -1 for x in v), sum(v), ("parabolic",))
            for v in ((0.5, 0.5, -0.5), (0.5, -0.5, 0.5), (-0.5, 0.5, 0.5))]


def trinoid_config(spec, eps, lifts=None):
    """A line triple realizing the trinoid end data with the requested eps."""
    ends = trinoid_rhs(spec, lifts)
    nu = connection_matrices(ExponentSet(*ends.lifted)).nu
    s = 1 if nu[0, 0].real / (ends.alpha * nu[1, 0].real) > 0 else -1
    x, y, z = spec.base_angles
    return TripleConfig(alpha0=x, gamma0=y, beta0=z, A=ends.A, B=ends.B, C=ends.C, eps0=eps * s)


def trinoid_construction(spec, solution=None, lifts=None):
    """Spinor data of the minimal disk whose cousin is the trinoid (or a given solution)."""
    sol = trinoid_pqr(spec, lifts) if solution is None else solution
    cfg = trinoid_config(spec, sol.eps, lifts)
    return construct(cfg, trinoid_rhs(spec, lifts).lifted, solution=sol)


def cousin_evaluator(spec, solution=None, lifts=None, z0=1j):
    return WeierstrassEvaluator(trinoid_construction(spec, solution, lifts), z0=z0)


# Bryant frame ------------------------------------------------------------

@dataclass(frozen=True)
class BryantFrame:
    F: np.ndarray
    z: complex

    @property
    def det(self):
        return complex(np.linalg.det(self.F))


def bryant_coefficient(ev):
    """z -> (n, 2, 2) array of F^-1 dF/dz for the cousin data (g, i omega)."""
    lam, mu = ev.abc.lam, ev.abc.mu

    def coef(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        jet = ev.spinor_jet(z, 0)
        k1, k2 = jet[0, 0] / lam, mu * jet[0, 1]
        f = 1j / (z ** 2 * (z - 1) ** 2)
        out = np.empty((z.size, 2, 2), dtype=complex)
        out[:, 0, 0] = f * k1 * k2
        out[:, 0, 1] = -f * k2 * k2
        out[:, 1, 0] = f * k1 * k1
        out[:, 1, 1] = -f * k1 * k2
        return out

    return coef


def integrate_bryant(ev, path, rtol=1e-11, F0=None):
    """Frame at the end of a polyline starting at z0 with F(z0) = identity."""
    path = [complex(p) for p in path]
    if not path or path[0] != ev.z0:
        path = [ev.z0] + path
    if len(path) == 1:
        return BryantFrame(np.eye(2, dtype=complex), path[0])
    check_path(path)
    F = propagate_path(bryant_coefficient(ev), path, F0=F0, rtol=rtol)
    return BryantFrame(F, path[-1])


# models of H^3 ----------------------------------------------------------

@dataclass(frozen=True)
class HyperbolicPoint:
    w: complex
    y3: float

    def __post_init__(self):
        if not self.y3 > 0:
            raise ValueError("y3 must be positive")


def hermitian(F):
    F = np.asarray(F)
    return F @ np.conj(np.swapaxes(F, -1, -2))


def halfspace_from_hermitian(M):
    """(w, y3) with y3 = 1/M11 and w = M21/M11."""
    M = np.asarray(M)
    m11 = M[..., 0, 0].real
    if np.any(m11 <= 0):
        raise ValueError("Hermitian matrix is not positive definite")
    return M[..., 1, 0] / m11, 1.0 / m11


def hermitian_from_halfspace(w, y3):
    """Inverse of :func:`halfspace_from_hermitian` on det-one matrices."""
    w = np.asarray(w, dtype=complex)
    y3 = np.asarray(y3, dtype=float)
    M = np.empty(w.shape + (2, 2), dtype=complex)
    M[..., 0, 0] = 1 / y3
    M[..., 0, 1] = np.conj(w) / y3
    M[..., 1, 0] = w / y3
    M[..., 1, 1] = (y3 ** 2 + np.abs(w) ** 2) / y3
    return M


def cousin_point(frame):
    F = frame.F if isinstance(frame, BryantFrame) else np.asarray(frame)
    w, y3 = halfspace_from_hermitian(hermitian(F))
    return HyperbolicPoint(complex(w), float(y3))


def minkowski_from_hermitian(M):
    """(x0, x1, x2, x3) with x0 = (M11+M22)/2, x3 = (M11-M22)/2, x1 + i x2 = M21."""
    M = np.asarray(M)
    a, d, c = M[..., 0, 0].real, M[..., 1, 1].real, M[..., 1, 0]
    return np.stack([(a + d) / 2, c.real, c.imag, (a - d) / 2], axis=-1)


def hermitian_from_minkowski(X):
    X = np.asarray(X, dtype=float)
    M = np.empty(X.shape[:-1] + (2, 2), dtype=complex)
    M[..., 0, 0] = X[..., 0] + X[..., 3]
    M[..., 1, 1] = X[..., 0] - X[..., 3]
    M[..., 1, 0] = X[..., 1] + 1j * X[..., 2]
    M[..., 0, 1] = X[..., 1] - 1j * X[..., 2]
    return M


def ball_from_minkowski(X):
    X = np.asarray(X)
    return X[..., 1:] / (1 + X[..., :1])


def halfspace_xyz(M):
    w, y3 = halfspace_from_hermitian(M)
    return np.stack([np.real(w), np.imag(w), y3], axis=-1)


ETA = np.diag([-1.0, 1.0, 1.0, 1.0])


def mink(X, Y):
    return np.einsum("...i,i,...i->...", X, np.diag(ETA), Y)


@dataclass(frozen=True)
class PlaneFit:
    normal: np.ndarray     # unit spacelike Minkowski vector
    residual: float        # largest hyperbolic distance of a sample to the plane

    def distance_to(self, other):
        """Euclidean distance of the normalized normals, up to sign."""
        a = self.normal / np.linalg.norm(self.normal)
        b = other.normal / np.linalg.norm(other.normal)
        return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def fit_plane(X):
    """Geodesic plane {<X, N> = 0} best fitting points on the hyperboloid."""
    X = np.asarray(X, dtype=float)
    Y = X / np.linalg.norm(X, axis=1)[:, None]
    _, _, vt = np.linalg.svd(Y)
    N = ETA @ vt[-1]
    nn = mink(N, N)
    if nn <= 0:
        raise ValueError("fitted normal is not spacelike")
    N = N / math.sqrt(nn)
    res = float(np.max(np.arcsinh(np.abs(mink(X, N[None, :])))))
    return PlaneFit(N, res)


def reflect(X, N):
    """Reflection of hyperboloid points in the plane with unit normal N."""
    X = np.asarray(X)
    return X - 2 * mink(X, N[None, :])[:, None] * N[None, :]


# hyperbolic Gauss map ---------------------------------------------------

def hyperbolic_gauss(z, phi):
    """G(z) = z + (a1-a2)^2 / (2(2z - a1 - a2)); z may be inf."""
    a1, a2 = phi.a1, phi.a2
    if z is None or (np.isscalar(z) and np.isinf(z)):
        return complex("inf")
    den = 2 * (2 * z - a1 - a2)
    num = (a1 - a2) ** 2
    if den == 0:
        if num == 0:
            return complex(z)
        raise ZeroDivisionError("pole of the hyperbolic Gauss map")
    return z + num / den


def gauss_end_values(phi):
    """(G(0), G(1), G(inf)) in homogeneous form [numerator, denominator]."""
    a1, a2 = phi.a1, phi.a2
    d2 = (a1 - a2) ** 2
    return [(-d2, 2 * (a1 + a2)), (2 * (2 - a1 - a2) + d2, 2 * (2 - a1 - a2)), (1.0 + 0j, 0.0 + 0j)]


def chordal(p, q):
    """Chordal distance of two homogeneous points (num, den) of the Riemann sphere."""
    (a, b), (c, d) = p, q
    return 2 * abs(a * d - b * c) / math.sqrt((abs(a) ** 2 + abs(b) ** 2) * (abs(c) ** 2 + abs(d) ** 2))


def as_homogeneous(v):
    return (1.0 + 0j, 0j) if np.isinf(v) else (complex(v), 1.0 + 0j)


PAIRS = (("0", "1"), ("0", "inf"), ("1", "inf"))


def collision_values(mu0, mu1, mui):
    """1-m0^2-m1^2+mi^2, 1-m0^2+m1^2-mi^2, 1+m0^2-m1^2-mi^2 for the pairs (0,1), (0,inf), (1,inf)."""
    a, b, c = mu0 ** 2, mu1 ** 2, mui ** 2
    return (1 - a - b + c, 1 - a + b - c, 1 + a - b - c)


def boundary_distinctness(spec, tol=1e-9):
    """Pairwise distinctness of the asymptotic boundary points, by both routes."""
    vals = collision_values(*spec.mus)
    verdict_poly = [abs(v) > tol for v in vals]
    if not any(verdict_poly):
        raise AssertionError("all three ends share a boundary point")
    phi = build_phi(trinoid_rhs(spec))
    G = dict(zip(("0", "1", "inf"), gauss_end_values(phi)))
    dist = [chordal(G[a], G[b]) for a, b in PAIRS]
    verdict_gauss = [d > tol for d in dist]
    return {"pairs": [f"{a}-{b}" for a, b in PAIRS], "values": list(vals),
            "distinct": verdict_poly, "gauss_chordal": dist, "distinct_gauss": verdict_gauss,
            "agree": verdict_poly == verdict_gauss}


def numeric_hyperbolic_gauss(ev, F, z):
    """dF11/dF21-type ratio (F21 k2 + F22 k1)/(F11 k2 + F12 k1) for frames F at z."""
    k1, k2, _, _ = ev.spinors(np.atleast_1d(z))
    F = np.asarray(F).reshape(-1, 2, 2)
    return (F[:, 1, 0] * k2 + F[:, 1, 1] * k1) / (F[:, 0, 0] * k2 + F[:, 0, 1] * k1)


def fit_mobius(src, dst):
    """2x2 matrix T with T(src_k) = dst_k for three pairs (finite values)."""
    rows = [[s, 1, -d * s, -d] for s, d in zip(src, dst)]
    _, _, vt = np.linalg.svd(np.array(rows, dtype=complex))
    return np.conj(vt[-1]).reshape(2, 2)


def apply_mobius(T, h):
    """T applied to a homogeneous point (num, den)."""
    a, b = h
    return (T[0, 0] * a + T[0, 1] * b, T[1, 0] * a + T[1, 1] * b)


# Schwarzian and ends ----------------------------------------------------

def _end_chart(end):
    if end == "0":
        return lambda w: w
    if end == "1":
        return lambda w: 1 + w
    if end == "inf":
        return lambda w: -1 / w
    raise ValueError("end must be '0', '1' or 'inf'")


def laurent_head(fz, end, radius, n=64):
    """Taylor coefficients of h(w) = w^2 f(z(w)) dz^2/dw^2 in the end chart.

    f is a quadratic differential real on the real axis, sampled on the
    upper half-circle; the lower half follows from f(conj z) = conj f(z).
    """
    chart = _end_chart(end)
    k = np.arange(n // 2 + 1)
    w = radius * np.exp(2j * np.pi * k / n)
    z = chart(w)
    z = np.where(np.abs(z.imag) < 1e-15, z.real + 0j, z)
    jac2 = z ** 4 if end == "inf" else 1.0     # (dz/dw)^2
    h_up = w ** 2 * fz(z) * jac2
    h = np.empty(n, dtype=complex)
    h[: n // 2 + 1] = h_up
    h[n // 2 + 1:] = np.conj(h_up[1:n // 2][::-1])
    c = np.fft.fft(h) / n
    return c / radius ** np.arange(n)


def _end_radius(ev, end):
    pts = [p for p in (ev.phi.a1, ev.phi.a2) if np.isfinite(p)]
    chart_inv = {"0": lambda z: z, "1": lambda z: z - 1, "inf": lambda z: -1 / z}[end]
    others = {"0": [1.0], "1": [-1.0], "inf": [-1.0]}[end]   # images of the other ends
    d = [abs(chart_inv(p)) for p in pts if p != 0] + [abs(o) for o in others]
    return 0.3 * min(d)


@dataclass(frozen=True)
class EndCoefficients:
    end: str
    c_minus2: complex
    c_minus1: complex
    embedded: bool


def cousin_hopf(ev, z):
    """Q of the cousin: i Q of the minimal immersion."""
    return 1j * ev.weierstrass_at(z)[2]


def embeddedness_check(ev, end, tol=EMBED_TOL, n=64):
    """Order -2 and -1 coefficients of S_z g - 2 Q of the cousin at one end."""
    f = lambda z: ev.schwarzian_g(z) - 2 * cousin_hopf(ev, z)
    c = laurent_head(f, end, _end_radius(ev, end), n)
    ok = abs(c[0]) < tol and abs(c[1]) < tol
    return EndCoefficients(end, complex(c[0]), complex(c[1]), bool(ok))


def growth_readoff(ev, end, n=64):
    """1 - mu from the order -2 coefficient q of the cousin Q: mu^2 = 1 - 4q."""
    c = laurent_head(lambda z: cousin_hopf(ev, z), end, _end_radius(ev, end), n)
    q = c[0].real
    return 1 - math.sqrt(1 - 4 * q), complex(c[0])


# mesh --------------------------------------------------------------------

@dataclass
class TrinoidMesh:
    z: np.ndarray
    hermitian: np.ndarray      # (n, 2, 2)
    faces: np.ndarray
    tags: np.ndarray
    det_drift: float
    meta: dict = field(default_factory=dict)

    @property
    def minkowski(self):
        return minkowski_from_hermitian(self.hermitian)

    @property
    def halfspace(self):
        return halfspace_xyz(self.hermitian)

    @property
    def ball(self):
        return ball_from_minkowski(self.minkowski)

    def doubled(self, plane):
        """Fundamental piece together with its mirror image in ``plane``."""
        X = self.minkowski
        Xr = reflect(X, plane.normal)
        n = len(self.z)
        M = np.concatenate([self.hermitian, hermitian_from_minkowski(Xr)])
        faces = np.concatenate([self.faces, self.faces[:, ::-1] + n])
        return TrinoidMesh(np.concatenate([self.z, np.conj(self.z)]), M, faces,
                           np.concatenate([self.tags, self.tags]), self.det_drift,
                           dict(self.meta, doubled=True))


def trinoid_frames(ev, grid, rtol=1e-11):
    """Frames at every kept grid node, by products of edge propagators along the tree."""
    coef = bryant_coefficient(ev)
    Froot = integrate_bryant(ev, [grid.Z[grid.root]], rtol=rtol).F
    za, zb = grid.edge_points()
    P, _ = propagate(coef, za, zb, rtol=rtol)
    F = np.full(grid.shape + (2, 2), np.nan, dtype=complex)
    F[grid.root] = Froot
    for (pa, pb), Pe in zip(grid.tree, P):
        F[pb] = F[pa] @ Pe
    return F


def trinoid_mesh(spec, resolution=32, window=(-2.0, 3.0, 0.0, 2.5), r_excl=0.05,
                 solution=None, lifts=None, rtol=1e-11, ev=None):
    """Fundamental piece of the cousin over a grid of the half-plane."""
    chk = growth_check(spec)
    if not chk["in_K"]:
        raise ValueError("growths violate the K condition")
    if ev is None:
        ev = cousin_evaluator(spec, solution, lifts)
    grid = build_grid(ev.z0, resolution, window, r_excl)
    F = trinoid_frames(ev, grid, rtol)
    ids, rr, cc = grid.vertex_ids()
    Fv = F[rr, cc]
    det = np.linalg.det(Fv)
    zv = grid.Z[rr, cc]
    mesh = TrinoidMesh(zv, hermitian(Fv), grid.faces(), segment_tag(zv),
                       float(np.max(np.abs(det - 1))),
                       {"resolution": resolution, "window": list(window), "r_excl": r_excl})
    mesh.meta["frames"] = Fv
    return mesh, ev


def segment_planes(mesh):
    """Plane fits of the three boundary segments and of their union."""
    X = mesh.minkowski
    fits = [fit_plane(X[mesh.tags == k]) for k in (1, 2, 3)]
    allfit = fit_plane(X[mesh.tags > 0])
    d = [fits[i].distance_to(fits[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
    return fits, allfit, d


def end_probe_path(ev, end, r):
    """Path from z0 to the point at distance r from an end (or |z| = 1/r)."""
    if end == "0":
        return [ev.z0, 1j * r] if ev.z0 == 1j else [ev.z0, 1j, 1j * r]
    if end == "1":
        return [ev.z0, 1 + 1j, 1 + 1j * r]
    pts = [ev.z0]
    m = 10.0
    while m < 1 / r:
        pts.append(1j * m)
        m *= 10
    pts.append(1j / r)
    return pts


def frames_along(ev, paths, rtol=1e-12, clearance=1e-3):
    """Frames at the ends of several polylines from z0, with one batched solve."""
    segs, owner = [], []
    for k, path in enumerate(paths):
        path = [complex(p) for p in path]
        if path[0] != ev.z0:
            path = [ev.z0] + path
        check_path(path, clearance)
        segs += list(zip(path[:-1], path[1:]))
        owner += [k] * (len(path) - 1)
    P, _ = propagate(bryant_coefficient(ev), [a for a, _ in segs], [b for _, b in segs], rtol=rtol)
    out = np.broadcast_to(np.eye(2, dtype=complex), (len(paths), 2, 2)).copy()
    for k, Pe in zip(owner, P):
        out[k] = out[k] @ Pe
    return out


def asymptotic_points(ev, radii=(1e-3, 1e-4),
                      samples=(0.5 + 1j, -0.5 + 0.7j, 2 + 0.5j, 0.3 + 1.8j), rtol=1e-12):
    """Compare end points w(z_end) with the closed-form Gauss map up to a Mobius map.

    T is fitted so that the frame-derived Gauss map equals T o G at the first
    three sample points; the fourth sample checks the fit.  Each end is
    probed at the given radii; w approaches its limit linearly in r, so the
    two probes are also combined by Richardson extrapolation.
    """
    ends = ("0", "1", "inf")
    paths = [[ev.z0, s] for s in samples] + [end_probe_path(ev, e, r) for e in ends for r in radii]
    F = frames_along(ev, paths, rtol, clearance=0.5 * min(radii))
    ns = len(samples)
    Gw = numeric_hyperbolic_gauss(ev, F[:ns], np.array(samples))
    Gc = np.array([hyperbolic_gauss(s, ev.phi) for s in samples])
    T = fit_mobius(Gc[:3], Gw[:3])
    check = chordal(apply_mobius(T, (Gc[3], 1)), (Gw[3], 1))
    w, _ = halfspace_from_hermitian(hermitian(F[ns:]))
    w = w.reshape(len(ends), len(radii))
    r1, r2 = radii[0], radii[-1]
    out = {}
    for k, (end, h) in enumerate(zip(ends, gauss_end_values(ev.phi))):
        target = apply_mobius(T, h)
        rich = (r1 * w[k, -1] - r2 * w[k, 0]) / (r1 - r2)
        out[end] = {"w": [complex(v) for v in w[k]], "predicted": target,
                    "chordal_raw": [chordal((complex(v), 1), target) for v in w[k]],
                    "chordal": chordal((complex(rich), 1), target)}
    return {"mobius_check": check, "ends": out, "T": T, "radii": list(radii)}


def trinoid_diagnostics(spec, mesh, ev, radii=(1e-3, 1e-4)):
    fits, allfit, dists = segment_planes(mesh)
    dist = boundary_distinctness(spec)
    asym = asymptotic_points(ev, radii)
    L0, L1 = hat_lambda_values(ev.construction.solution, ev.lifted)
    emb = {e: embeddedness_check(ev, e) for e in ("0", "1", "inf")}

    def hom(h):
        a, b = h
        return None if b == 0 else [complex(a / b).real, complex(a / b).imag]

    return {
        "growths": list(spec.growths),
        **{k: v for k, v in growth_check(spec).items()},
        "boundary_points": [hom(h) for h in gauss_end_values(ev.phi)],
        "distinct": dist["distinct"],
        "distinct_gauss": dist["distinct_gauss"],
        "det_drift": mesh.det_drift,
        "plane_residual": allfit.residual,
        "segment_plane_residuals": [f.residual for f in fits],
        "segment_plane_distances": dists,
        "hat_lambda": [L0, L1],
        "embedded_ends": {e: r.embedded for e, r in emb.items()},
        "end_coefficients": {e: [abs(r.c_minus2), abs(r.c_minus1)] for e, r in emb.items()},
        "end_approach": {e: v["chordal"] for e, v in asym["ends"].items()},
        "end_approach_raw": {e: v["chordal_raw"] for e, v in asym["ends"].items()},
        "mobius_check": asym["mobius_check"],
    }
