"""Quadratic data of the problem: the Hopf polynomial phi, the system in
(p, q, r) and the resulting spinor coefficients (a, b, c, lambda, mu).

With P = eps A alpha / 2pi, Q = eps B beta / 2pi, R = eps C gamma / 2pi the
system reads

    p^2 - alpha^2 (p+q+r)^2 = P
    q^2 - beta^2  (p+q+r)^2 = Q
    r^2 - gamma^2 (p+q+r)^2 = R

Writing y = p+q+r and p(y) = sqrt(P + alpha^2 y^2) (same for q, r), every
real solution is a root of one of the eight scalar functions
F(y) = +-p(y) +- q(y) +- r(y) - y.
"""

import math
from dataclasses import dataclass, field, asdict
from itertools import product

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .geometry import check_lifts

TWO_PI = 2.0 * math.pi
RESIDUAL_TOL = 1e-10
N_GRID = 4096


@dataclass(frozen=True)
class EndParameters:
    """Helicoidal end data (A, alpha) at 0, (B, beta) at infinity, (C, gamma) at 1."""
    A: float
    alpha: float
    B: float
    beta: float
    C: float
    gamma: float

    def __post_init__(self):
        for k in ("A", "alpha", "B", "beta", "C", "gamma"):
            object.__setattr__(self, k, float(getattr(self, k)))
        if min(abs(self.A), abs(self.B), abs(self.C)) == 0:
            raise ValueError("A, B, C must be nonzero")
        for k in ("alpha", "beta", "gamma"):
            v = getattr(self, k)
            if v == round(v):
                raise ValueError(f"{k} must be non-integer")

    @classmethod
    def from_config(cls, cfg, lifted=None):
        if lifted is None:
            lifted = cfg.angles
        check_lifts(cfg, lifted)
        a, b, g = lifted
        return cls(cfg.A, a, cfg.B, b, cfg.C, g)

    @property
    def lifted(self):
        return (self.alpha, self.beta, self.gamma)

    def rhs(self, eps=1):
        """(eps A alpha, eps B beta, eps C gamma) / 2pi."""
        return (eps * self.A * self.alpha / TWO_PI,
                eps * self.B * self.beta / TWO_PI,
                eps * self.C * self.gamma / TWO_PI)


@dataclass(frozen=True)
class PhiPolynomial:
    """phi(z) = c2 z^2 + c1 z + c0 with its roots and their type."""
    c2: float
    c1: float
    c0: float
    a1: complex
    a2: complex
    root_class: str
    discriminant: float   # A^2 alpha^2 + ... - 2 B C beta gamma (4 pi^2 times b^2 - 4ac)

    def __call__(self, z):
        return (self.c2 * z + self.c1) * z + self.c0

    def deriv(self, z, order=1):
        if order == 1:
            return 2 * self.c2 * z + self.c1
        if order == 2:
            return 2 * self.c2 + 0 * z
        return 0 * z


def build_phi(ends, double_tol=1e-12):
    A, B, C = ends.A * ends.alpha, ends.B * ends.beta, ends.C * ends.gamma
    c2 = B / TWO_PI
    c1 = (C - A - B) / TWO_PI
    c0 = A / TWO_PI
    delta = A * A + B * B + C * C - 2 * A * B - 2 * A * C - 2 * B * C
    scale = A * A + B * B + C * C
    if abs(delta) <= double_tol * scale:
        cls = "double_real"
        a1 = a2 = complex(-c1 / (2 * c2))
    elif delta < 0:
        cls = "conjugate_pair"
        sq = math.sqrt(-delta) / TWO_PI
        a1 = complex(-c1, sq) / (2 * c2)
        a2 = a1.conjugate()
        if a1.imag < 0:
            a1, a2 = a2, a1
    else:
        cls = "distinct_real"
        sq = math.sqrt(delta) / TWO_PI
        # numerically stable pair
        qv = -0.5 * (c1 + math.copysign(sq, c1))
        r1, r2 = qv / c2, c0 / qv
        a1, a2 = complex(min(r1, r2)), complex(max(r1, r2))
    return PhiPolynomial(c2, c1, c0, a1, a2, cls, delta)


def epsilon_sign(cfg, lifted, matrices, frame=None):
    """eps = sign(eps0 nu11 / (alpha nu21))."""
    nu = matrices.nu
    if abs(nu[1, 0]) < 1e-14:
        raise ValueError("nu21 vanishes: Gamma pole proximity")
    v = cfg.eps0 * nu[0, 0].real / (lifted[0] * nu[1, 0].real)
    return 1 if v > 0 else -1


@dataclass(frozen=True)
class PqrSolution:
    p: float
    q: float
    r: float
    eps: int
    branch: tuple
    y: float
    flags: tuple = field(default_factory=tuple)

    @property
    def pqr(self):
        return np.array([self.p, self.q, self.r])

    def negated(self):
        return PqrSolution(-self.p, -self.q, -self.r, self.eps,
                           tuple(-s for s in self.branch), -self.y, self.flags)

    def with_flags(self, *flags):
        return PqrSolution(self.p, self.q, self.r, self.eps, self.branch, self.y,
                           tuple(sorted(set(self.flags) | set(flags))))


def pqr_residuals(p, q, r, ends, eps):
    P, Q, R = ends.rhs(eps)
    y = p + q + r
    return np.array([p * p - ends.alpha ** 2 * y * y - P,
                     q * q - ends.beta ** 2 * y * y - Q,
                     r * r - ends.gamma ** 2 * y * y - R])


def _branch_function(ends, eps, signs):
    rhs = ends.rhs(eps)
    coef = np.array(ends.lifted) ** 2
    s = np.array(signs, dtype=float)

    def radicals(y):
        y = np.asarray(y, dtype=float)
        rad = np.array(rhs)[:, None] + coef[:, None] * np.atleast_1d(y)[None, :] ** 2
        return np.sqrt(np.maximum(rad, 0.0))

    def F(y):
        val = s @ radicals(y) - y
        return val if np.ndim(y) else float(val[0])

    return F, radicals


def _scan_window(ends, eps, signs):
    rhs = ends.rhs(eps)
    a = np.abs(ends.lifted)
    y0 = max(math.sqrt(max(-v, 0.0)) / ai for v, ai in zip(rhs, a))
    Y0 = 10.0 * (1.0 + y0)
    # |F(y) - (k -+ 1) y| <= S / |y| bounds every root of the branch
    k = float(np.dot(signs, a))
    S = sum(abs(v) / ai for v, ai in zip(rhs, a))
    slope = min(abs(k - 1.0), abs(k + 1.0))
    Y = Y0 if slope == 0 else max(Y0, 1.05 * math.sqrt(S / slope) + 1.0)
    return y0, Y0, min(Y, 1e8)


def _domain_grid(y0, Y0, Y, n_grid):
    pos = np.concatenate([np.linspace(y0, Y0, n_grid // 2), np.geomspace(max(Y0, 1e-300), Y, 64)]) \
        if Y > Y0 else np.linspace(y0, Y, n_grid // 2)
    pos = np.unique(pos)
    if y0 == 0:
        return [np.concatenate([-pos[::-1], pos[1:]])]
    return [-pos[::-1], pos]


def _close_pairs(F, grid, vals):
    """Roots hidden inside one grid cell: two close roots or a tangency.

    At each interior local minimum of |F| without a sign change the signed
    minimum over the two neighbouring cells is located; if it crosses zero
    the pair is bracketed on either side of it.
    """
    a = np.abs(vals)
    same = (np.sign(vals[:-2]) == np.sign(vals[1:-1])) & (np.sign(vals[1:-1]) == np.sign(vals[2:]))
    idx = np.nonzero(same & (a[1:-1] <= a[:-2]) & (a[1:-1] <= a[2:]) & (vals[1:-1] != 0))[0] + 1
    out = []
    for i in idx:
        sg = np.sign(vals[i])
        lo, hi = grid[i - 1], grid[i + 1]
        m = minimize_scalar(lambda y: sg * F(y), bounds=(lo, hi), method="bounded",
                            options={"xatol": 1e-15 * max(1.0, abs(grid[i]))})
        if m.fun < 0:
            out.append(brentq(F, lo, m.x, xtol=1e-14, rtol=1e-15, maxiter=500))
            out.append(brentq(F, m.x, hi, xtol=1e-14, rtol=1e-15, maxiter=500))
        elif abs(m.fun) < 1e-13 * max(1.0, abs(m.x)):
            out.append(m.x)       # tangency; the residual check decides
    return out


def solve_pqr(ends, eps, n_grid=N_GRID, branches=None, tol=RESIDUAL_TOL):
    """All real solutions of the (p, q, r) system, modulo global sign.

    Each of the eight branch functions is scanned on its domain (all
    radicands non-negative), sign changes are refined with a bracketing
    root finder and the resulting triples are checked against the system.
    """
    sols = []
    phi = build_phi(ends)
    for signs in branches or product((1, -1), repeat=3):
        F, radicals = _branch_function(ends, eps, signs)
        y0, Y0, Y = _scan_window(ends, eps, signs)
        for grid in _domain_grid(y0, Y0, Y, n_grid):
            vals = F(grid)
            roots = list(grid[vals == 0.0])
            change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
            for i in change:
                roots.append(brentq(F, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15, maxiter=500))
            roots += _close_pairs(F, grid, vals)
            for y in roots:
                p, q, r = (np.array(signs) * radicals(y)[:, 0]).tolist()
                res = pqr_residuals(p, q, r, ends, eps)
                if np.max(np.abs(res)) < tol:
                    sols.append(PqrSolution(p, q, r, eps, tuple(signs), float(y)))
    out = dedupe_solutions(sols)
    if phi.root_class == "double_real":
        out = [s.with_flags(f"singular_point_at({phi.a1.real:.12g})") for s in out]
    return out


def canonical(sol):
    """Representative of {sol, -sol}: the lexicographically larger triple."""
    key = tuple(np.round(sol.pqr, 9))
    nkey = tuple(np.round(-sol.pqr, 9))
    return sol if key >= nkey else sol.negated()


def dedupe_solutions(sols, tol=1e-9):
    out = []
    for s in sorted((canonical(s) for s in sols), key=lambda s: tuple(np.round(s.pqr, 9)), reverse=True):
        scale = max(1.0, float(np.max(np.abs(s.pqr))))
        if not any(np.max(np.abs(s.pqr - o.pqr)) <= tol * scale
                   or np.max(np.abs(s.pqr + o.pqr)) <= tol * scale for o in out):
            out.append(s)
    return out


def pqr_to_abc(sol, lifted):
    """c = 2(p+q+r), a = p - alpha(p+q+r), b = q - (1-alpha-gamma)(p+q+r)."""
    alpha, _, gamma = lifted
    p, q, r = (sol.p, sol.q, sol.r) if isinstance(sol, PqrSolution) else sol
    y = p + q + r
    return p - alpha * y, q - (1 - alpha - gamma) * y, 2 * y


def abc_to_pqr(a, b, c, lifted):
    """p = a + alpha c/2, q = b + (1-alpha-gamma) c/2, r = -a - b + gamma c/2."""
    alpha, _, gamma = lifted
    return a + alpha * c / 2, b + (1 - alpha - gamma) * c / 2, -a - b + gamma * c / 2


def abc_residuals(a, b, c, ends, eps):
    P, Q, R = ends.rhs(eps)
    alpha, beta, gamma = ends.lifted
    s_mmm = (1 - alpha - beta - gamma) / 2
    s_mpm = (1 - alpha + beta - gamma) / 2
    return np.array([a * (a + alpha * c) - P,
                     (b + s_mmm * c) * (b + s_mpm * c) - Q,
                     (a + b) * (a + b - gamma * c) - R])


@dataclass(frozen=True)
class AbcCoefficients:
    a: float
    b: float
    c: float
    lam: complex
    mu: float
    eps: int


def normalize_lambda_mu(eps, lifted, frame, matrices):
    """mu > 0 with eps alpha mu^2 = t nu11 / nu21, and lambda = -eps i alpha mu."""
    nu = matrices.nu
    val = frame.t * nu[0, 0].real / nu[1, 0].real
    mu2 = val / (eps * lifted[0])
    if not mu2 > 0:
        raise ValueError("t nu11/nu21 and eps alpha have opposite signs: no real mu")
    mu = math.sqrt(mu2)
    return complex(-eps * 1j * lifted[0] * mu), mu


def hat_lambda_values(sol, lifted):
    """Lambda-hat at 0 and 1 (an affine function of z)."""
    alpha, beta, gamma = lifted
    p, q, r = sol.p, sol.q, sol.r
    y = p + q + r
    L0 = sol.eps * y * ((gamma ** 2 - beta ** 2) * (2 * p + q + r) + (1 - alpha ** 2) * (q - r))
    L1 = sol.eps * y * ((alpha ** 2 - beta ** 2) * (p + q + 2 * r) + (1 - gamma ** 2) * (q - p))
    return L0, L1


def hat_lambda_difference(sol, lifted):
    """Lambda-hat(1) - Lambda-hat(0) from its own closed form."""
    alpha, beta, gamma = lifted
    p, q, r = sol.p, sol.q, sol.r
    return sol.eps * (p + q + r) * ((alpha ** 2 - gamma ** 2) * (p + 2 * q + r) + (1 - beta ** 2) * (r - p))


def solution_record(sol, abc=None, residuals=None):
    """JSON-ready dictionary for one solution."""
    rec = {"p": sol.p, "q": sol.q, "r": sol.r, "eps": sol.eps,
           "branch": "".join("+" if s > 0 else "-" for s in sol.branch),
           "y": sol.y, "flags": list(sol.flags)}
    if abc is not None:
        rec.update(a=abc.a, b=abc.b, c=abc.c, **{"lambda": [abc.lam.real, abc.lam.imag]}, mu=abc.mu)
    if residuals is not None:
        rec["residuals"] = [float(v) for v in residuals]
    return rec


@dataclass
class Construction:
    """Everything needed to evaluate the Weierstrass data of one solution."""
    cfg: object
    ends: EndParameters
    frame: object
    matrices: object
    eps: int
    solution: PqrSolution
    abc: AbcCoefficients
    phi: PhiPolynomial

    def to_json(self):
        return solution_record(self.solution, self.abc)


def prepare(cfg, lifted=None):
    """Common preliminaries: end data, frame angles, connection matrices, eps."""
    from .geometry import frame_angles
    from .specfun import ExponentSet, connection_matrices
    ends = EndParameters.from_config(cfg, lifted)
    frame = frame_angles(cfg, ends.lifted)
    matrices = connection_matrices(ExponentSet(*ends.lifted))
    eps = epsilon_sign(cfg, ends.lifted, matrices, frame)
    return ends, frame, matrices, eps


def construct(cfg, lifted=None, solution=None, index=0, flip=False):
    """Solve for (p, q, r) and assemble a :class:`Construction`.

    ``solution`` may be given explicitly (it must solve the system with the
    configuration's eps); otherwise solution ``index`` of the scan is used.
    ``flip`` applies (lambda, mu) -> (i lambda, i mu), which turns (g, omega)
    into (-g, -omega): the reflection about the x3-axis.  mu is then
    imaginary and stored as a complex number.
    """
    ends, frame, matrices, eps = prepare(cfg, lifted)
    if solution is None:
        sols = solve_pqr(ends, eps)
        if not sols:
            raise LookupError("no real solution of the (p, q, r) system")
        solution = sols[index]
    elif solution.eps != eps:
        raise ValueError(f"solution has eps={solution.eps}, configuration requires eps={eps}")
    a, b, c = pqr_to_abc(solution, ends.lifted)
    lam, mu = normalize_lambda_mu(eps, ends.lifted, frame, matrices)
    if flip:
        lam, mu = 1j * lam, 1j * mu
    abc = AbcCoefficients(a, b, c, lam, mu, eps)
    return Construction(cfg, ends, frame, matrices, eps, solution, abc, build_phi(ends))
