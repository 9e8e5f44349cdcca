"""Oriented lines in R^3 and the invariants of a triple in generic position.

A triple (D1, D2, D3) is described up to direct isometry by seven numbers:
the angles pi*alpha0 between (u1, -u2), pi*beta0 between (u3, -u1) and
pi*gamma0 between (u2, -u3), the lengths A = -D(D1, D2), B = -D(D3, D1),
C = -D(D2, D3) built from signed distances, and eps0 = sign det(u1, u2, u3).
"""

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from ._exact import s_terms, sinpi

PARALLEL_TOL = 1e-10
CONCURRENT_TOL = 1e-10
COPLANAR_TOL = 1e-10


class DegenerateTripleError(ValueError):
    """A pair of lines is parallel or concurrent, or the directions are coplanar."""

    def __init__(self, test, detail=""):
        self.test = test
        super().__init__(f"degenerate configuration ({test}){': ' + detail if detail else ''}")


@dataclass(frozen=True)
class OrientedLine:
    point: tuple
    direction: tuple

    def __post_init__(self):
        p = np.asarray(self.point, dtype=float).reshape(3)
        d = np.asarray(self.direction, dtype=float).reshape(3)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("direction must be nonzero")
        object.__setattr__(self, "point", tuple(p))
        object.__setattr__(self, "direction", tuple(d / n))

    @property
    def p(self):
        return np.array(self.point)

    @property
    def u(self):
        return np.array(self.direction)

    def to_json(self):
        return {"point": list(self.point), "direction": list(self.direction)}

    @classmethod
    def from_json(cls, d):
        return cls(d["point"], d["direction"])


def in_K(x, y, z):
    """The four strict inequalities defining the open tetrahedron K."""
    return (x + y + z > 1) and (-x + y + z < 1) and (x - y + z < 1) and (x + y - z < 1)


@dataclass(frozen=True)
class TripleConfig:
    """Direct-isometry invariants of a generic line triple."""
    alpha0: float
    gamma0: float
    beta0: float
    A: float
    B: float
    C: float
    eps0: int

    def __post_init__(self):
        for k in ("alpha0", "gamma0", "beta0", "A", "B", "C"):
            object.__setattr__(self, k, float(getattr(self, k)))
        object.__setattr__(self, "eps0", int(self.eps0))
        if self.eps0 not in (1, -1):
            raise ValueError("eps0 must be +1 or -1")
        if min(abs(self.A), abs(self.B), abs(self.C)) == 0:
            raise ValueError("A, B, C must be nonzero")
        if not in_K(self.alpha0, self.gamma0, self.beta0):
            raise ValueError("angles (alpha0, gamma0, beta0) violate the spherical-triangle inequalities")

    @property
    def angles(self):
        return (self.alpha0, self.beta0, self.gamma0)

    def dual(self):
        return TripleConfig(self.alpha0, self.gamma0, self.beta0, self.A, self.B, self.C, -self.eps0)

    def invariants(self):
        """The seven numbers in the order (alpha0, gamma0, beta0, -A, -C, -B, eps0)."""
        return (self.alpha0, self.gamma0, self.beta0, -self.A, -self.C, -self.B, self.eps0)

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, d):
        return cls(**{k: d[k] for k in ("alpha0", "gamma0", "beta0", "A", "B", "C", "eps0")})


@dataclass(frozen=True)
class FrameAngles:
    theta: float
    theta_hat: float
    t: float
    t_hat: float


def associated_vector(L1, L2):
    """Unit vector u1 x (-u2) / |u1 x u2| attached to an ordered pair."""
    c = np.cross(L1.u, -L2.u)
    n = np.linalg.norm(c)
    if n < PARALLEL_TOL:
        raise DegenerateTripleError("parallel", "directions are parallel")
    return c / n


def signed_distance(L1, L2):
    """Signed distance <p1p2, v> with v the associated vector."""
    v = associated_vector(L1, L2)
    return float(np.dot(L2.p - L1.p, v))


def _angle(u, v):
    # atan2 of |u x v| and <u, v>, in units of pi
    return math.atan2(np.linalg.norm(np.cross(u, v)), float(np.clip(np.dot(u, v), -1, 1))) / math.pi


def classify_triple(L1, L2, L3):
    """Invariants of a generic triple of oriented lines."""
    pairs = ((L1, L2), (L2, L3), (L3, L1))
    for a, b in pairs:
        if np.linalg.norm(np.cross(a.u, b.u)) < PARALLEL_TOL:
            raise DegenerateTripleError("parallel")
    det = float(np.linalg.det(np.array([L1.u, L2.u, L3.u])))
    if abs(det) < COPLANAR_TOL:
        raise DegenerateTripleError("parallel_planes", f"det(u1,u2,u3) = {det:.3g}")
    d12, d23, d31 = signed_distance(L1, L2), signed_distance(L2, L3), signed_distance(L3, L1)
    for name, d in (("D1,D2", d12), ("D2,D3", d23), ("D3,D1", d31)):
        if abs(d) < CONCURRENT_TOL:
            raise DegenerateTripleError("concurrent", name)
    alpha0 = _angle(L1.u, -L2.u)
    beta0 = _angle(L3.u, -L1.u)
    gamma0 = _angle(L2.u, -L3.u)
    return TripleConfig(alpha0=alpha0, gamma0=gamma0, beta0=beta0,
                        A=-d12, B=-d31, C=-d23, eps0=1 if det > 0 else -1)


def lines_from_config(cfg):
    """Representative triple: D2 is the x1-axis oriented by -e1, v0 = -e3.

    D1 passes through (0, 0, -A) with direction (cos pi alpha0, sin pi alpha0, 0);
    D3 is then placed so that D(D3, D1) = -B and D(D2, D3) = -C.
    """
    a0, b0, g0 = cfg.alpha0, cfg.beta0, cfg.gamma0
    if not in_K(a0, g0, b0):
        raise ValueError("angles violate the spherical-triangle inequalities")
    pa = math.pi * a0
    u1 = np.array([math.cos(pa), math.sin(pa), 0.0])
    u2 = np.array([-1.0, 0.0, 0.0])
    # u3 = (cos(pi g') sin k, -sin(pi g') sin k, cos k)
    x = math.cos(math.pi * g0)
    y = (math.cos(math.pi * b0) + math.cos(pa) * x) / math.sin(pa)
    h = 1.0 - x * x - y * y
    if h <= 0:
        raise ValueError("angles do not form a spherical triangle")
    u3 = np.array([x, -y, cfg.eps0 * math.sqrt(h)])
    L1 = OrientedLine((0.0, 0.0, -cfg.A), u1)
    L2 = OrientedLine((0.0, 0.0, 0.0), u2)
    v31 = np.cross(u3, -u1)
    v31 /= np.linalg.norm(v31)
    v23 = np.cross(u2, -u3)
    v23 /= np.linalg.norm(v23)
    # <p1 - p3, v31> = -B, <p3 - p2, v23> = -C, <p3, u3> = 0
    M = np.array([v31, v23, u3])
    rhs = np.array([np.dot(L1.p, v31) + cfg.B, -cfg.C, 0.0])
    p3 = np.linalg.solve(M, rhs)
    return L1, L2, OrientedLine(p3, u3)


def check_lifts(cfg, lifted, tol=1e-9):
    """Raise unless each lifted angle is congruent to its base angle mod 2."""
    for base, lift, name in zip(cfg.angles, lifted, ("alpha", "beta", "gamma")):
        k = (lift - base) / 2
        if abs(k - round(k)) > tol:
            raise ValueError(f"{name} = {lift} is not congruent to {base} mod 2")


def frame_angles(cfg, lifted=None):
    """Rotation angles theta, theta_hat and their half-angle tangents.

    cos(theta) and cos(theta_hat) come from the spherical cosine formulas;
    the signs of sin(theta), sin(theta_hat) are eps0.
    """
    if lifted is not None:
        check_lifts(cfg, lifted)
    ca, cb, cg = (math.cos(math.pi * v) for v in (cfg.alpha0, cfg.beta0, cfg.gamma0))
    sa, sb, sg = (math.sin(math.pi * v) for v in (cfg.alpha0, cfg.beta0, cfg.gamma0))
    c = (cb + ca * cg) / (sa * sg)
    ch = (cg + ca * cb) / (sa * sb)
    for v in (c, ch):
        if abs(v) > 1 + 1e-10:
            raise ValueError(f"inconsistent configuration: |cos| = {abs(v):.3g} > 1")
    # tan^2(theta/2) = (1 - cos)/(1 + cos) written as products of sines of the
    # exponents s = (1 +- alpha +- beta +- gamma)/2: no cancellation near the
    # faces of K, and consistent with the lifted angles when those are given.
    a, b, g = lifted if lifted is not None else cfg.angles
    sv = lambda sa, sb, sg: sinpi(s_terms(a, b, g, sa, sb, sg))
    mmm, mpm, mmp, mpp = sv(-1, -1, -1), sv(-1, 1, -1), sv(-1, -1, 1), sv(-1, 1, 1)
    t = cfg.eps0 * math.sqrt(max(0.0, -mmm * mpm / (mmp * mpp)))
    th = cfg.eps0 * math.sqrt(max(0.0, -mmm * mmp / (mpm * mpp)))
    return FrameAngles(theta=2 * math.atan(t), theta_hat=2 * math.atan(th), t=t, t_hat=th)


def measured_frame_angles(L1, L2, L3):
    """theta and theta_hat read off a triple in the normalized position.

    theta rotates v1 = -(u2 x u3)/|.| onto -e3 about the oriented x1-axis;
    theta_hat rotates v_inf = -(u3 x u1)/|.| onto -e3 about D1.
    """
    e3 = np.array([0.0, 0.0, 1.0])
    v1 = associated_vector(L2, L3)
    vi = associated_vector(L3, L1)
    th = math.atan2(np.dot(np.cross(v1, -e3), np.array([1.0, 0, 0])), np.dot(v1, -e3))
    thh = math.atan2(np.dot(np.cross(vi, -e3), L1.u), np.dot(vi, -e3))
    return th, thh


def lines_to_json(lines):
    return [L.to_json() for L in lines]


def load_lines(path):
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data["lines"]
    if len(data) != 3:
        raise ValueError("expected three lines")
    return tuple(OrientedLine.from_json(d) for d in data)
