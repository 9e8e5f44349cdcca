"""Weierstrass data of the minimal disk, its immersion and a conformal mesh.

Spinors: K_j = z^((1-alpha)/2) (1-z)^((1-gamma)/2) ((a+bz) sigma_j + c z(1-z) sigma_j'),
k1 = K1 / lambda, k2 = mu K2, g = k2/k1, omega = z^-2 (z-1)^-2 k1^2 dz.
The immersion integrand is built from (k1, k2) directly, so poles of g
need no special treatment.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import OrientedLine, classify_triple, signed_distance
from .quadrature import integrate_path, integrate_segments
from .specfun import ExponentSet, branch_pow, sigma_global

PATH_CLEARANCE = 1e-3
QUAD_TOL = 1e-12


class SingularPointWarning(RuntimeWarning):
    pass


def _pts(z):
    return np.atleast_1d(np.asarray(z, dtype=complex))


def _out(z, arr):
    return arr[..., 0] if np.ndim(z) == 0 else arr


class WeierstrassEvaluator:
    """Pointwise (K, k, g, omega, Q) and the immersion for one construction."""

    def __init__(self, construction, z0=1j, x0=(0.0, 0.0, 0.0)):
        self.construction = construction
        self.abc = construction.abc
        self.lifted = construction.ends.lifted
        self.exps = ExponentSet(*self.lifted)
        self.eps = construction.eps
        self.phi = construction.phi
        self.z0 = complex(z0)
        self.x0 = np.array(x0, dtype=float)
        if self.phi.root_class == "double_real":
            warnings.warn(f"double root of phi at {self.phi.a1.real:.6g}: singular point",
                          SingularPointWarning, stacklevel=2)

    def _E_log_derivs(self, z):
        al, _, ga = self.lifted
        e = (1 - al) / (2 * z) - (1 - ga) / (2 * (1 - z))
        de = -(1 - al) / (2 * z ** 2) - (1 - ga) / (2 * (1 - z) ** 2)
        dde = (1 - al) / z ** 3 - (1 - ga) / (1 - z) ** 3
        return e, de, dde

    def spinor_jet(self, z, order=1):
        """K_j and derivatives up to ``order`` (<= 3); shape (order+1, 2, n)."""
        z = _pts(z)
        al, _, ga = self.lifted
        a, b, c = self.abc.a, self.abc.b, self.abc.c
        hs = self.exps.ab
        s1, s2, d1, d2 = sigma_global(self.exps, z)
        s = np.array([s1, s2])
        ds = np.array([d1, d2])
        zz = z * (z - 1)
        P1 = (2 - al - ga) * z - (1 - al)
        dP1 = 2 - al - ga
        d2s = -(P1 * ds + hs * s) / zz
        d3s = -(dP1 * ds + P1 * d2s + hs * ds + (2 * z - 1) * d2s) / zz
        # L = (a+bz) s + cz(1-z) s' ; using the equation, L' = U s + V s'
        U = b + c * hs
        V = a + b * z + c * (1 - 2 * z) + c * P1
        dV = b - 2 * c + c * dP1
        L = [(a + b * z) * s + c * z * (1 - z) * ds,
             U * s + V * ds,
             U * ds + dV * ds + V * d2s,
             U * d2s + 2 * dV * d2s + V * d3s]
        E = branch_pow(z, (1 - al) / 2, "log_at_0") * branch_pow(z, (1 - ga) / 2, "pow_1_minus_z")
        e, de, dde = self._E_log_derivs(z)
        # derivatives of E/E: E'/E = e, E''/E = e' + e^2, E'''/E = e'' + 3 e e' + e^3
        Ek = [1.0, e, de + e * e, dde + 3 * e * de + e ** 3]
        binom = [[1], [1, 1], [1, 2, 1], [1, 3, 3, 1]]
        out = np.empty((order + 1, 2, z.size), dtype=complex)
        for n in range(order + 1):
            acc = sum(binom[n][k] * Ek[k] * L[n - k] for k in range(n + 1))
            out[n] = E * acc
        return out

    def spinor_K(self, z):
        """(K1, K2, K1', K2')."""
        jet = self.spinor_jet(z, 1)
        return tuple(_out(z, v) for v in (jet[0, 0], jet[0, 1], jet[1, 0], jet[1, 1]))

    def spinors(self, z):
        """(k1, k2, k1', k2') with k1 = K1/lambda, k2 = mu K2."""
        jet = self.spinor_jet(z, 1)
        lam, mu = self.abc.lam, self.abc.mu
        return (jet[0, 0] / lam, mu * jet[0, 1], jet[1, 0] / lam, mu * jet[1, 1])

    def weierstrass_at(self, z):
        """(g, omega/dz, Q/dz^2); g is inf where k1 vanishes."""
        zp = _pts(z)
        k1, k2, dk1, dk2 = self.spinors(zp)
        f = 1.0 / (zp ** 2 * (zp - 1) ** 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(k1 == 0, np.inf, k2 / k1)
        omega = f * k1 ** 2
        Q = f * (k1 * dk2 - dk1 * k2)
        return _out(z, g), _out(z, omega), _out(z, Q)

    def integrand(self, z):
        """(k1^2 - k2^2, i(k1^2 + k2^2), 2 k1 k2) z^-2 (z-1)^-2, shape (3, n)."""
        z = _pts(z)
        jet = self.spinor_jet(z, 0)
        k1 = jet[0, 0] / self.abc.lam
        k2 = self.abc.mu * jet[0, 1]
        f = 1.0 / (z ** 2 * (z - 1) ** 2)
        return np.array([(k1 * k1 - k2 * k2) * f, 1j * (k1 * k1 + k2 * k2) * f, 2 * k1 * k2 * f])

    def gauss_map(self, z):
        """Unit normal from the projective Gauss map (k1 : k2)."""
        k1, k2, _, _ = self.spinors(_pts(z))
        n2 = np.abs(k1) ** 2 + np.abs(k2) ** 2
        w = 2 * k2 * np.conj(k1)
        N = np.array([w.real, w.imag, np.abs(k2) ** 2 - np.abs(k1) ** 2]) / n2
        return N[:, 0] if np.ndim(z) == 0 else N.T

    def first_second_forms(self, z):
        """Conformal factor of I in |dz|^2 and II as a 2x2 matrix in (u, v).

        I = (|k1|^2 + |k2|^2)^2 |z^-2 (z-1)^-2|^2; II = -2 Re(Q dz^2).
        """
        zp = _pts(z)
        k1, k2, dk1, dk2 = self.spinors(zp)
        f = 1.0 / (zp ** 2 * (zp - 1) ** 2)
        I = ((np.abs(k1) ** 2 + np.abs(k2) ** 2) * np.abs(f)) ** 2
        Q = f * (k1 * dk2 - dk1 * k2)
        II = np.empty((zp.size, 2, 2))
        II[:, 0, 0] = -2 * Q.real
        II[:, 1, 1] = 2 * Q.real
        II[:, 0, 1] = II[:, 1, 0] = 2 * Q.imag
        if np.ndim(z) == 0:
            return float(I[0]), II[0]
        return I, II

    def mean_curvature(self, z):
        """H = tr(I^-1 II)/2 from the two forms; zero for a minimal immersion."""
        I, II = self.first_second_forms(_pts(z))
        H = (II[:, 0, 0] + II[:, 1, 1]) / (2 * I)
        return _out(z, H)

    def schwarzian_g(self, z):
        """S_z g = (g''/g')' - (g''/g')^2 / 2, exactly from the spinor jets.

        With W = K1 K2' - K1' K2 and h = K2/K1 (or K1/K2, same Schwarzian),
        h''/h' = W'/W - 2 K_j'/K_j; j is the larger spinor at each point.
        """
        jet = self.spinor_jet(z, 3)
        K, dK, d2K, d3K = jet
        W = K[0] * dK[1] - dK[0] * K[1]
        dW = K[0] * d2K[1] - d2K[0] * K[1]
        d2W = dK[0] * d2K[1] + K[0] * d3K[1] - d3K[0] * K[1] - d2K[0] * dK[1]
        j = (np.abs(K[1]) > np.abs(K[0])).astype(int)
        pick = lambda A: np.take_along_axis(A, j[None, :], axis=0)[0]
        Kj, dKj, d2Kj = pick(K), pick(dK), pick(d2K)
        r = dKj / Kj
        T = dW / W - 2 * r
        dT = d2W / W - (dW / W) ** 2 - 2 * d2Kj / Kj + 2 * r * r
        return _out(z, dT - 0.5 * T * T)

    # immersion ---------------------------------------------------------

    def default_path(self, z):
        """z0 -> Re z + i Im z0 -> z: horizontal then vertical."""
        z = complex(z)
        corner = complex(z.real, self.z0.imag)
        pts = [self.z0]
        if corner != self.z0:
            pts.append(corner)
        if z != corner:
            pts.append(z)
        return pts

    def immerse(self, z, path_hint=None, tol=QUAD_TOL, return_error=False):
        """x(z) = x(z0) + Re of the integral along a polyline from z0."""
        path = list(path_hint) if path_hint is not None else self.default_path(z)
        if path[0] != self.z0:
            path = [self.z0] + path
        if path[-1] != complex(z):
            path = path + [complex(z)]
        check_path(path)
        val, err = integrate_path(self.integrand, path, tol=tol)
        x = self.x0 + val.real
        return (x, err) if return_error else x


def _segment_distance(a, b, p):
    d = b - a
    if d == 0:
        return abs(p - a)
    t = min(1.0, max(0.0, ((p - a) * d.conjugate()).real / abs(d) ** 2))
    return abs(a + t * d - p)


def check_path(path, clearance=PATH_CLEARANCE):
    """Raise unless the polyline stays in the closed upper half-plane, clear of 0 and 1."""
    for a, b in zip(path[:-1], path[1:]):
        if min(a.imag, b.imag) < -1e-14:
            raise ValueError("path leaves the upper half-plane")
        for s in (0.0, 1.0):
            if _segment_distance(a, b, s) < clearance:
                raise ValueError(f"path passes within {clearance} of z={s:g}")
    return True


# ends ------------------------------------------------------------------

@dataclass(frozen=True)
class EndAsymptotics:
    end: str
    A_fit: float
    alpha: float
    residual: float
    raw: tuple = field(default_factory=tuple)   # (value at r1, value at r2)
    radii: tuple = (1e-3, 1e-4)

    def to_json(self):
        return {"end": self.end, "A_fit": self.A_fit, "alpha": self.alpha,
                "residual": self.residual, "raw": [list(map(float, (v.real, v.imag))) for v in self.raw],
                "radii": list(self.radii)}


def _end_point(end, r):
    if end == "0":
        return 1j * r, r * r
    if end == "1":
        return 1 + 1j * r, r * r
    return 1j / r, None


def fit_end_asymptotics(ev, end, radii=(1e-3, 1e-4)):
    """Recover (A, alpha) of an end from Q (local coordinate)^2 2pi/(i alpha).

    The two radii give a Richardson extrapolation for the O(r) remainder.
    ``end`` is '0', '1' or 'inf' (the last uses zeta = -1/z).
    """
    end = str(end)
    al, be, ga = ev.lifted
    expo = {"0": al, "1": ga, "inf": be}
    if end not in expo:
        raise ValueError("end must be '0', '1' or 'inf'")
    target = {"0": ev.construction.ends.A, "1": ev.construction.ends.C,
              "inf": ev.construction.ends.B}[end]
    vals = []
    for r in radii:
        z = {"0": 1j * r, "1": 1 + 1j * r, "inf": 1j / r}[end]
        _, _, Q = ev.weierstrass_at(z)
        loc2 = {"0": z * z, "1": (z - 1) ** 2, "inf": z * z}[end]
        vals.append(Q * loc2 * 2 * math.pi / (1j * expo[end]))
    r1, r2 = radii
    rich = (r1 * vals[1] - r2 * vals[0]) / (r1 - r2)
    if not np.isfinite(rich):
        raise RuntimeError(f"end fit at {end} did not converge")
    return EndAsymptotics(end, float(rich.real), expo[end], float(abs(rich - target)),
                          tuple(complex(v) for v in vals), tuple(radii))


# mesh ------------------------------------------------------------------

SEGMENTS = {1: "(-inf,0)", 2: "(0,1)", 3: "(1,inf)"}


@dataclass
class SurfaceMesh:
    z: np.ndarray            # (n,) complex
    x: np.ndarray            # (n, 3)
    normals: np.ndarray      # (n, 3)
    faces: np.ndarray        # (m, 3) int
    tags: np.ndarray         # (n,) int, 0 interior, 1..3 boundary segment
    grid_index: np.ndarray   # (n, 2) (row, col) of each vertex
    h: float
    shape: tuple             # (rows, cols) of the full grid
    meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self):
        return len(self.z)

    def segment(self, k):
        return np.nonzero(self.tags == k)[0]

    def grid_lookup(self):
        """(rows, cols) array of vertex ids, -1 for excluded grid nodes."""
        lut = -np.ones(self.shape, dtype=int)
        lut[self.grid_index[:, 0], self.grid_index[:, 1]] = np.arange(self.n_vertices)
        return lut

    def translate(self, t):
        self.x = self.x + np.asarray(t)[None, :]
        return self


def segment_tag(z):
    z = np.asarray(z, dtype=complex)
    tags = np.zeros(z.shape, dtype=int)
    real = z.imag == 0
    tags[real & (z.real < 0)] = 1
    tags[real & (z.real > 0) & (z.real < 1)] = 2
    tags[real & (z.real > 1)] = 3
    return tags


@dataclass
class Grid:
    """Square grid on a window of the half-plane with a spanning tree.

    ``tree`` lists (parent, child) node pairs, each parent resolved before
    its child: the row nearest z0 outward from the root, then every column
    up and down from that row.
    """
    Z: np.ndarray
    keep: np.ndarray
    root: tuple
    tree: list
    h: float

    @property
    def shape(self):
        return self.Z.shape

    def vertex_ids(self):
        ids = -np.ones(self.shape, dtype=int)
        rr, cc = np.nonzero(self.keep)
        ids[rr, cc] = np.arange(rr.size)
        return ids, rr, cc

    def faces(self):
        ids, _, _ = self.vertex_ids()
        nrow, ncol = self.shape
        q0, q1 = ids[:-1, :-1], ids[:-1, 1:]
        q2, q3 = ids[1:, 1:], ids[1:, :-1]
        ok = (q0 >= 0) & (q1 >= 0) & (q2 >= 0) & (q3 >= 0)
        a, b, c, d = (q[ok] for q in (q0, q1, q2, q3))
        # counterclockwise in the z-chart
        tri = np.empty((2 * a.size, 3), dtype=int)
        tri[0::2] = np.stack([a, b, c], axis=1)
        tri[1::2] = np.stack([a, c, d], axis=1)
        return tri

    def edge_points(self):
        za = np.array([self.Z[p] for p, _ in self.tree])
        zb = np.array([self.Z[c] for _, c in self.tree])
        return za, zb


def build_grid(z0, resolution, window, r_excl):
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    x0, x1, y0, y1 = window
    if not (x0 < z0.real < x1 and y0 < z0.imag < y1):
        raise ValueError("window does not contain the basepoint z0")
    if y0 < 0:
        raise ValueError("window must lie in the closed upper half-plane")
    h = (x1 - x0) / resolution
    ncol = resolution + 1
    nrow = int(math.floor((y1 - y0) / h + 1e-9)) + 1
    xs = x0 + h * np.arange(ncol)
    ys = y0 + h * np.arange(nrow)
    Z = xs[None, :] + 1j * ys[:, None]
    keep = (np.abs(Z) >= r_excl) & (np.abs(Z - 1) >= r_excl)
    r0 = int(np.argmin(np.abs(ys - z0.imag)))
    c0 = int(np.argmin(np.abs(xs - z0.real)))
    if not keep[r0].all():
        raise ValueError("row through the basepoint meets an exclusion disk")
    for c in range(ncol):
        col = keep[:, c]
        # excluded nodes must form a bottom block so columns stay connected
        if not col[np.argmax(col):].all():
            raise ValueError("exclusion disks disconnect a grid column")
    tree = []
    for c in list(range(c0 + 1, ncol)) + list(range(c0 - 1, -1, -1)):
        tree.append(((r0, c - 1 if c > c0 else c + 1), (r0, c)))
    for c in range(ncol):
        for r in range(r0 + 1, nrow):
            tree.append(((r - 1, c), (r, c)))
        for r in range(r0 - 1, -1, -1):
            if keep[r, c]:
                tree.append(((r + 1, c), (r, c)))
    return Grid(Z, keep, (r0, c0), tree, h)


def generate_mesh(ev, resolution=64, window=(-2.0, 3.0, 0.0, 2.5), r_excl=0.05, tol=QUAD_TOL):
    """Square grid on the window minus disks of radius r_excl at 0 and 1.

    Cell size is h = width / resolution.  Positions are obtained by
    integrating every spanning-tree edge with adaptive Gauss-Kronrod and
    accumulating from the root node.
    """
    grid = build_grid(ev.z0, resolution, window, r_excl)
    X = np.full(grid.shape + (3,), np.nan)
    X[grid.root] = ev.immerse(grid.Z[grid.root], tol=tol)
    za, zb = grid.edge_points()
    vals, err = integrate_segments(ev.integrand, za, zb, tol=tol)
    incr = vals.real.T
    for (pa, pb), d in zip(grid.tree, incr):
        X[pb] = X[pa] + d
    ids, rr, cc = grid.vertex_ids()
    zv = grid.Z[rr, cc]
    return SurfaceMesh(z=zv, x=X[rr, cc], normals=ev.gauss_map(zv), faces=grid.faces(),
                       tags=segment_tag(zv), grid_index=np.stack([rr, cc], axis=1), h=grid.h,
                       shape=grid.shape,
                       meta={"resolution": resolution, "window": list(window), "r_excl": r_excl,
                             "z0": [ev.z0.real, ev.z0.imag], "quadrature_error": float(np.sum(err))})


# boundary lines ----------------------------------------------------------

@dataclass(frozen=True)
class LineFit:
    line: OrientedLine
    residual: float          # largest orthogonal distance of a sample to the line
    scale: float             # extent of the samples along the line
    sv_ratio: float          # smallest / largest singular value


def fit_line(points, z=None):
    """PCA line through points; oriented along increasing z when given."""
    P = np.asarray(points, dtype=float)
    c = P.mean(axis=0)
    _, s, vt = np.linalg.svd(P - c)
    d = vt[0]
    if z is not None:
        order = np.argsort(np.asarray(z).real)
        if np.dot(P[order[-1]] - P[order[0]], d) < 0:
            d = -d
    proj = (P - c) @ d
    resid = np.linalg.norm((P - c) - proj[:, None] * d[None, :], axis=1)
    return LineFit(OrientedLine(c, d), float(resid.max()), float(np.ptp(proj)),
                   float(s[-1] / s[0]) if s[0] > 0 else 0.0)


def boundary_lines(mesh):
    """Fitted (D1, D2, D3) from the tagged boundary vertices."""
    fits = []
    for k in (1, 2, 3):
        idx = mesh.segment(k)
        if idx.size < 3:
            raise ValueError(f"segment {k} has too few boundary vertices")
        fits.append(fit_line(mesh.x[idx], mesh.z[idx]))
    return fits


def translation_to_axis(fit_D2):
    """Translation putting the fitted D2 through the origin."""
    p, u = fit_D2.line.p, fit_D2.line.u
    return -(p - np.dot(p, u) * u)


def normalize_translation(mesh):
    fits = boundary_lines(mesh)
    t = translation_to_axis(fits[1])
    mesh.translate(t)
    mesh.meta["translation"] = t.tolist()
    return mesh


def boundary_report(mesh, cfg):
    """Collinearity of each segment and invariants of the fitted triple."""
    fits = boundary_lines(mesh)
    L1, L2, L3 = (f.line for f in fits)
    d12, d23, d31 = signed_distance(L1, L2), signed_distance(L2, L3), signed_distance(L3, L1)
    measured = {"A": -d12, "B": -d31, "C": -d23}
    rel = {k: abs(measured[k] - getattr(cfg, k)) / abs(getattr(cfg, k)) for k in measured}
    return {"collinearity": [f.residual / max(f.scale, 1e-300) for f in fits],
            "sv_ratio": [f.sv_ratio for f in fits],
            "measured": measured, "relative_error": rel,
            "classified": classify_triple(L1, L2, L3).to_json(),
            "lines": [f.line.to_json() for f in fits]}


INTERIOR_BOX = (-1.5, 2.5, 0.25, 2.0)
INTERIOR_CLEARANCE = 0.75


def interior_mask(z, box=INTERIOR_BOX, clearance=INTERIOR_CLEARANCE):
    """Fixed z-region, away from the ends, used for curvature diagnostics."""
    z = np.asarray(z)
    return ((z.real >= box[0]) & (z.real <= box[1]) & (z.imag >= box[2]) & (z.imag <= box[3])
            & (np.abs(z) >= clearance) & (np.abs(z - 1) >= clearance))


def _grid_field(mesh, values, fill=np.nan):
    out = np.full(mesh.shape + values.shape[1:], fill, dtype=values.dtype)
    out[mesh.grid_index[:, 0], mesh.grid_index[:, 1]] = values
    return out


def fd_mean_curvature(mesh, order=4, mask=interior_mask):
    """Mean curvature from finite differences of the mesh positions only.

    For a conformal parametrization Delta x = 2 H |x_u| |x_v| N.  The
    Laplacian and the tangents use central stencils of the given order
    (2 or 4); N is the normalized x_u x x_v.  Returns (z, H) on the nodes
    where the stencil is complete and ``mask`` holds.
    """
    X = _grid_field(mesh, mesh.x)
    Zg = _grid_field(mesh, mesh.z.astype(complex), np.nan + 0j)
    k = 1 if order == 2 else 2
    if order == 2:
        d2w, d1w = {-1: 1.0, 0: -2.0, 1: 1.0}, {-1: -0.5, 1: 0.5}
    elif order == 4:
        d2w = {-2: -1 / 12, -1: 16 / 12, 0: -30 / 12, 1: 16 / 12, 2: -1 / 12}
        d1w = {-2: 1 / 12, -1: -8 / 12, 1: 8 / 12, 2: -1 / 12}
    else:
        raise ValueError("order must be 2 or 4")
    nr, nc = mesh.shape

    def shifted(dr, dc):
        return X[k + dr:nr - k + dr, k + dc:nc - k + dc]

    lap = sum(w * (shifted(0, o) + shifted(o, 0)) for o, w in d2w.items())
    xu = sum(w * shifted(0, o) for o, w in d1w.items())
    xv = sum(w * shifted(o, 0) for o, w in d1w.items())
    n = np.cross(xu, xv)
    nn = np.linalg.norm(n, axis=-1)
    H = np.einsum("ijk,ijk->ij", lap, n) / (2 * nn * np.linalg.norm(xu, axis=-1) * np.linalg.norm(xv, axis=-1))
    zc = Zg[k:nr - k, k:nc - k]
    m = np.isfinite(H) & mask(zc)
    return zc[m], H[m]


def reflect_x3(mesh):
    """Image under the reflection about the x3-axis."""
    R = np.diag([-1.0, -1.0, 1.0])
    return SurfaceMesh(mesh.z, mesh.x @ R, mesh.normals @ R, mesh.faces, mesh.tags,
                       mesh.grid_index, mesh.h, mesh.shape, dict(mesh.meta, flipped=True))
