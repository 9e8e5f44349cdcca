"""Invariant checks shared by the ``verify`` command and the acceptance suite.

Every check yields a :class:`Check` with the measured value, the tolerance
and the verdict; a :class:`VerificationReport` collects them together with
the seed and tolerances used.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import geometry, solver, specfun, surface, trinoid
from .geometry import TripleConfig, in_K

TOLERANCES = {
    "wronskian": 1e-9,
    "connection": 1e-12,
    "overlap": 1e-10,
    "residual": solver.RESIDUAL_TOL,
    "closed_form": 1e-9,
    "roundtrip": 1e-9,
    "spinor_identity": 1e-10,
    "collinearity": 1e-5,
    "distance": 1e-4,
    "end_fit": 1e-6,
    "mean_curvature": 1e-5,
    "det_drift": trinoid.DET_TOL,
    "hat_lambda": 1e-10,
    "plane": 1e-4,
    "embedded": trinoid.EMBED_TOL,
    "identity": 1e-9,
}


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    target: object = 0.0
    passed: bool = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(np.isfinite(self.measured) and self.measured < self.tolerance)

    def to_json(self):
        return {"name": self.name, "target": self.target, "measured": self.measured,
                "tolerance": self.tolerance, "pass": bool(self.passed)}


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    seed: int = None
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))
    context: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, *checks):
        self.checks.extend(checks)
        return self

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def to_json(self):
        return {"pass": self.passed, "seed": self.seed, "tolerances": self.tolerances,
                "checks": [c.to_json() for c in self.checks], "context": self.context}


def _tol(tols, key):
    return (tols or TOLERANCES).get(key, TOLERANCES[key])


# samplers ----------------------------------------------------------------

def random_K_angles(rng, low=0.02, high=0.98):
    """Uniform sample of (x, y, z) in the open tetrahedron K, away from its faces."""
    while True:
        x, y, z = rng.uniform(low, high, 3)
        if in_K(x, y, z) and min(x + y + z - 1, 1 + x - y - z, 1 - x + y - z, 1 - x - y + z) > 0.02:
            return float(x), float(y), float(z)


def random_config(rng, lifts=False):
    """(TripleConfig, lifted angles) with lengths of random sign."""
    a0, g0, b0 = random_K_angles(rng)
    A, B, C = rng.choice((-1, 1), 3) * rng.uniform(0.2, 3.0, 3)
    cfg = TripleConfig(a0, g0, b0, A, B, C, int(rng.choice((-1, 1))))
    lifted = cfg.angles
    if lifts:
        while True:
            k = rng.integers(-1, 2, 3)
            cand = tuple(float(v + 2 * kk) for v, kk in zip(cfg.angles, k))
            try:
                specfun.ExponentSet(*cand)
                break
            except ValueError:
                continue
        lifted = cand
    return cfg, lifted


def random_trinoid_spec(rng, high=3.0):
    """A spec whose base angles lie in K."""
    while True:
        mus = rng.uniform(0.02, high, 3)
        if any(abs(m - round(m)) < 0.02 for m in mus):
            continue
        spec = trinoid.TrinoidSpec(*mus)
        if trinoid.growth_check(spec)["in_K"] and min(abs(v) for v in trinoid.collision_values(*spec.mus)) > 1e-3:
            return spec


def sample_half_plane(rng, n, real_fraction=0.2):
    """Points of the closed upper half-plane on all scales, some of them real."""
    nr = int(n * real_fraction)
    mod = 10 ** rng.uniform(-2.5, 2.5, n - nr)
    arg = rng.uniform(0.02, math.pi - 0.02, n - nr)
    x = rng.uniform(-20, 20, 4 * nr)
    x = x[(np.abs(x) > 0.05) & (np.abs(x - 1) > 0.05)][:nr]
    return np.concatenate([mod * np.exp(1j * arg), x + 0j])


# special functions ---------------------------------------------------------

def wronskian_reference(exps, z):
    """alpha z^(alpha-1) (1-z)^(gamma-1) with the half-plane branches."""
    return (exps.alpha * specfun.branch_pow(z, exps.alpha - 1)
            * specfun.branch_pow(z, exps.gamma - 1, "pow_1_minus_z"))


def wronskian_error(exps, z, direct=False):
    """Largest relative deviation of W(sigma1, sigma2) from its closed form.

    ``direct`` forms sigma1 sigma2' - sigma1' sigma2 from the continued
    values; that difference is ill-conditioned for large |z|.
    """
    if direct:
        s1, s2, d1, d2 = specfun.sigma_global(exps, z)
        W = s1 * d2 - s2 * d1
    else:
        W = specfun.sigma_wronskian(exps, z)
    ref = wronskian_reference(exps, z)
    return float(np.max(np.abs(W - ref) / np.abs(ref)))


def connection_identity_errors(cfg, lifted):
    """Relative defects of nu12 nu21 = -t^2 nu11 nu22 and its hat analogue."""
    m = specfun.connection_matrices(specfun.ExponentSet(*lifted))
    fr = geometry.frame_angles(cfg, lifted)
    nu, nh = m.nu, m.nu_hat
    e1 = abs(nu[0, 1] * nu[1, 0] + fr.t ** 2 * nu[0, 0] * nu[1, 1]) / abs(nu[0, 1] * nu[1, 0])
    e2 = abs(nh[0, 1] * nh[1, 0] + fr.t_hat ** 2 * nh[0, 0] * nh[1, 1]) / abs(nh[0, 1] * nh[1, 0])
    lhs = fr.t_hat * nh[0, 0] / nh[1, 0]
    rhs = np.exp(-1j * math.pi * lifted[0]) * fr.t * nu[0, 0] / nu[1, 0]
    e3 = abs(lhs - rhs) / abs(rhs)
    return float(e1), float(e2), float(e3)


OVERLAP_PAIRS = (("near0", "near1"), ("near0", "nearInf"), ("near1", "nearInf"),
                 ("lens", "near0"), ("lens", "near1"), ("lens", "nearInf"))


def overlap_points(route_a, route_b, rng, n=40, margin=0.85):
    """Points where both routes apply with local moduli at most ``margin``."""
    pts = []
    while len(pts) < n:
        z = complex(rng.uniform(-2, 3), rng.uniform(0, 2))
        if route_a == "lens" or route_b == "lens":
            if abs(z - specfun._LENS_CENTER) > 0.4:
                continue
        r0, r1, rinf = (float(v[0]) for v in specfun._local_moduli(np.array([z])))
        ok = {"near0": r0 < margin, "near1": r1 < margin, "nearInf": rinf < margin, "lens": True}
        if ok[route_a] and ok[route_b]:
            pts.append(z)
    return np.array(pts)


def overlap_error(exps, rng, n=40):
    worst = 0.0
    for ra, rb in OVERLAP_PAIRS:
        z = overlap_points(ra, rb, rng, n)
        a = np.array(specfun.sigma_route(exps, z, ra)[:2])
        b = np.array(specfun.sigma_route(exps, z, rb)[:2])
        scale = np.linalg.norm(a, axis=0)
        worst = max(worst, float(np.max(np.linalg.norm(a - b, axis=0) / scale)))
    return worst


def specfun_checks(rng, n_triples=20, n_z=500, tols=None):
    werr, cerr, herr, rerr, oerr = 0.0, 0.0, 0.0, 0.0, 0.0
    for _ in range(n_triples):
        cfg, lifted = random_config(rng, lifts=True)
        exps = specfun.ExponentSet(*lifted)
        werr = max(werr, wronskian_error(exps, sample_half_plane(rng, n_z)))
        e1, e2, e3 = connection_identity_errors(cfg, lifted)
        cerr, herr, rerr = max(cerr, e1), max(herr, e2), max(rerr, e3)
        oerr = max(oerr, overlap_error(exps, rng, n=10))
    return [Check("wronskian", werr, _tol(tols, "wronskian")),
            Check("connection_identity", cerr, _tol(tols, "connection")),
            Check("connection_identity_hat", herr, _tol(tols, "connection")),
            Check("connection_ratio", rerr, _tol(tols, "connection")),
            Check("continuation_overlap", oerr, _tol(tols, "overlap"))]


# solver --------------------------------------------------------------------

def _as_set(triples, tol):
    out = []
    for t in triples:
        t = np.asarray(t, dtype=float)
        if not any(min(np.max(np.abs(t - o)), np.max(np.abs(t + o))) <= tol for o in out):
            out.append(t)
    return out


def same_set_mod_sign(xs, ys, tol):
    """Set equality of real triples modulo a global sign."""
    xs, ys = _as_set(xs, tol), _as_set(ys, tol)
    if len(xs) != len(ys):
        return False
    return all(any(min(np.max(np.abs(x - y)), np.max(np.abs(x + y))) <= tol for y in ys) for x in xs)


def trinoid_real_closed_forms(spec, eps):
    """Real solutions of the trinoid system predicted by the closed forms."""
    al, be, ga = spec.lifts()
    P = trinoid.pi_product(al, be, ga)
    U, V, W = trinoid.uvw(al, be, ga)
    out = []
    if eps == 1 and P < 0:
        d = 1 / (2 * math.sqrt(-P))
        out.append((U * d, V * d, W * d))
    if eps == -1:
        out += [s.pqr for s in trinoid.half_solutions(spec)]
        if P > 0:
            d = 1 / (2 * math.sqrt(P))
            out.append((U * d, V * d, W * d))
    return out


def solver_checks(rng, n_configs=100, n_trinoid=40, tols=None):
    worst_res = 0.0
    failures = 0
    for _ in range(n_configs):
        cfg, lifted = random_config(rng)
        ends, _, _, eps = solver.prepare(cfg, lifted)
        sols = solver.solve_pqr(ends, eps)
        failures += not sols
        for s in sols:
            worst_res = max(worst_res, float(np.max(np.abs(solver.pqr_residuals(*s.pqr, ends, eps)))))
    mismatches = 0
    tol_cf = _tol(tols, "closed_form")
    for k in range(n_trinoid):
        spec = random_trinoid_spec(rng, high=1.0 if k % 2 == 0 else 3.0)
        ends = trinoid.trinoid_rhs(spec)
        for eps in (1, -1):
            sols = solver.solve_pqr(ends, eps)
            for s in sols:
                worst_res = max(worst_res, float(np.max(np.abs(solver.pqr_residuals(*s.pqr, ends, eps)))))
            mismatches += not same_set_mod_sign([s.pqr for s in sols],
                                                trinoid_real_closed_forms(spec, eps), tol_cf)
    return [Check("system_residual", worst_res, _tol(tols, "residual")),
            Check("trinoid_closed_form_set", mismatches, 1, target=0, passed=mismatches == 0),
            Check("small_angle_existence", failures, 1, target=0, passed=failures == 0)]


# geometry ------------------------------------------------------------------

def roundtrip_error(cfg):
    back = geometry.classify_triple(*geometry.lines_from_config(cfg))
    a, b = np.array(cfg.invariants(), float), np.array(back.invariants(), float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))))


def geometry_checks(rng, n=1000, tols=None):
    err = max(roundtrip_error(random_config(rng)[0]) for _ in range(n))
    return [Check("invariant_roundtrip", err, _tol(tols, "roundtrip"))]


# surface -------------------------------------------------------------------

def symmetric_config(angle=0.6, rhs=0.05, eps0=1):
    """alpha0 = beta0 = gamma0 = angle with A alpha / 2pi = B beta / 2pi = C gamma / 2pi = rhs."""
    A = rhs * solver.TWO_PI / angle
    return TripleConfig(angle, angle, angle, A, A, A, eps0)


def spinor_identity_error(ev, rng, n=200):
    z = rng.uniform(-3, 4, n) + 1j * rng.uniform(0.05, 3, n)
    k1, k2, d1, d2 = ev.spinors(z)
    rhs = 1j * ev.phi(z)
    return float(np.max(np.abs(k1 * d2 - d1 * k2 - rhs) / np.abs(rhs)))


def end_fit_checks(ev, tols=None):
    out = []
    for end, name in (("0", "A"), ("inf", "B"), ("1", "C")):
        fit = surface.fit_end_asymptotics(ev, end)
        out.append(Check(f"end_fit_{name}", fit.residual, _tol(tols, "end_fit"),
                         target=getattr(ev.construction.cfg, name)))
    return out


def mesh_checks(mesh, cfg, tols=None):
    rep = surface.boundary_report(mesh, cfg)
    out = [Check("collinearity", max(rep["collinearity"]), _tol(tols, "collinearity"))]
    for k in ("A", "B", "C"):
        out.append(Check(f"distance_{k}", rep["relative_error"][k], _tol(tols, "distance"),
                         target=-getattr(cfg, k)))
    return out, rep


def mean_curvature_max(mesh):
    _, H = surface.fd_mean_curvature(mesh)
    return float(np.max(np.abs(H)))


def surface_checks(cfg, resolution=128, lifted=None, index=0, halving=True, tols=None, rng=None):
    rng = rng or np.random.default_rng(0)
    ev = surface.WeierstrassEvaluator(solver.construct(cfg, lifted, index=index))
    t0 = time.perf_counter()
    mesh = surface.normalize_translation(surface.generate_mesh(ev, resolution))
    out, rep = mesh_checks(mesh, cfg, tols)
    out += end_fit_checks(ev, tols)
    H = mean_curvature_max(mesh)
    out.append(Check("mean_curvature", H, _tol(tols, "mean_curvature")))
    elapsed = time.perf_counter() - t0
    info = {"resolution": resolution, "elapsed": elapsed, "boundary": rep, "H": H, "mesh": mesh}
    if halving:
        fine = surface.generate_mesh(ev, 2 * resolution)
        H2 = mean_curvature_max(fine)
        out.append(Check("mean_curvature_halving", H2 / H, 0.5, target="<= 1/2", passed=H2 <= H / 2))
        info["H_fine"] = H2
    out.append(Check("spinor_identity", spinor_identity_error(ev, rng), _tol(tols, "spinor_identity")))
    return out, info


# trinoid -------------------------------------------------------------------

def predicted_embedded_ends(sol, lifted, tol=1e-9):
    """Ends where Lambda-hat vanishes: 0 (Lambda(0)), 1 (Lambda(1)), inf (the difference)."""
    L0, L1 = solver.hat_lambda_values(sol, lifted)
    D = solver.hat_lambda_difference(sol, lifted)
    return {"0": abs(L0) < tol, "1": abs(L1) < tol, "inf": abs(D) < tol}


def distinctness_agreement(rng, n=1000):
    """Specs mixing generic draws with forced collisions; count verdict disagreements."""
    bad = 0
    for k in range(n):
        while True:
            m0, m1 = rng.uniform(0.05, 2.5, 2)
            pair = k % 4
            if pair == 0:
                mi = rng.uniform(0.05, 2.5)
            else:
                # solve the collision quadratic of one pair for the remaining mu
                sq = {1: m0 ** 2 + m1 ** 2 - 1, 2: m0 ** 2 - m1 ** 2 + 1, 3: 1 + m1 ** 2 - m0 ** 2}[pair]
                if sq <= 0.01:
                    continue
                mi = math.sqrt(sq)
                if pair == 3:
                    m0, mi = mi, m0   # 1 + mu0^2 - mu1^2 - mui^2 = 0
            if all(abs(v - round(v)) > 1e-3 for v in (m0, m1, mi)):
                break
        res = trinoid.boundary_distinctness(trinoid.TrinoidSpec(m0, m1, mi))
        bad += not res["agree"]
    return bad


def trinoid_checks(spec, resolution=32, rng=None, n_distinct=1000, tols=None, diagnostics=True):
    rng = rng or np.random.default_rng(0)
    mesh, ev = trinoid.trinoid_mesh(spec, resolution)
    out = [Check("det_drift", mesh.det_drift, _tol(tols, "det_drift"))]
    L0, L1 = solver.hat_lambda_values(ev.construction.solution, ev.lifted)
    out.append(Check("hat_lambda", max(abs(L0), abs(L1)), _tol(tols, "hat_lambda")))
    fits, allfit, dists = trinoid.segment_planes(mesh)
    out.append(Check("plane_coincidence", max(dists), _tol(tols, "plane")))
    out.append(Check("plane_residual", allfit.residual, _tol(tols, "plane")))
    if n_distinct:
        bad = distinctness_agreement(rng, n_distinct)
        out.append(Check("distinctness_agreement", bad, 1, target=0, passed=bad == 0))
    emb = {e: trinoid.embeddedness_check(ev, e, _tol(tols, "embedded")) for e in ("0", "1", "inf")}
    worst = max(max(abs(r.c_minus2), abs(r.c_minus1)) for r in emb.values())
    out.append(Check("embedded_all_ends", worst, _tol(tols, "embedded")))
    mism = 0
    for sol in trinoid.half_solutions(spec):
        hev = trinoid.cousin_evaluator(spec, sol)
        pred = predicted_embedded_ends(sol, hev.lifted)
        got = {e: trinoid.embeddedness_check(hev, e, _tol(tols, "embedded")).embedded for e in pred}
        mism += sum(pred[e] != got[e] for e in pred)
    out.append(Check("half_solution_embeddedness", mism, 1, target=0, passed=mism == 0))
    info = {"mesh": mesh, "ev": ev, "planes": fits}
    if diagnostics:
        info["diagnostics"] = trinoid.trinoid_diagnostics(spec, mesh, ev)
    return out, info


# identities ----------------------------------------------------------------

def uvw_identity_error(alpha, beta, gamma):
    U, V, W = trinoid.uvw(alpha, beta, gamma)
    disc = trinoid.phi_cap_discriminant(alpha, beta, gamma)
    return abs(U + V + W + 4 * disc) / (abs(U) + abs(V) + abs(W))


def identity_checks(rng, n_disc=1000, n_mu=10000, tols=None):
    err = max(uvw_identity_error(*rng.uniform(-3, 3, 3)) for _ in range(n_disc))
    bad = 0
    for m0, m1, mi in rng.uniform(0.0, 4.0, (n_mu, 3)):
        if min(abs(v - round(v)) for v in (m0, m1, mi)) < 1e-12:
            continue
        spec = trinoid.TrinoidSpec(m0, m1, mi)
        bad += in_K(*spec.base_angles) != trinoid.umehara_condition(*spec.mus)
    return [Check("uvw_discriminant", err, _tol(tols, "identity")),
            Check("umehara_equivalence", bad, 1, target=0, passed=bad == 0)]


# per-configuration suite used by the CLI -----------------------------------

def config_report(cfg, lifted=None, pqr=None, index=0, resolution=32, seed=0, tols=None, mesh=True):
    """Checks for one configuration and one (given or solved) solution."""
    tols = dict(TOLERANCES, **(tols or {}))
    rng = np.random.default_rng(seed)
    rep = VerificationReport(seed=seed, tolerances=tols)
    ends, frame, matrices, eps = solver.prepare(cfg, lifted)
    if pqr is not None:
        p, q, r = (float(v) for v in pqr)
        sol = solver.PqrSolution(p, q, r, eps, tuple(1 if v >= 0 else -1 for v in (p, q, r)), p + q + r)
    else:
        sols = solver.solve_pqr(ends, eps)
        if not sols:
            raise LookupError("no real solution of the (p, q, r) system")
        sol = sols[index]
    rep.context = {"config": cfg.to_json(), "lifted": list(ends.lifted), "eps": eps,
                   "pqr": list(sol.pqr)}
    res = solver.pqr_residuals(*sol.pqr, ends, eps)
    rep.add(Check("system_residual", float(np.max(np.abs(res))), tols["residual"]))
    a, b, c = solver.pqr_to_abc(sol, ends.lifted)
    rep.add(Check("abc_residual", float(np.max(np.abs(solver.abc_residuals(a, b, c, ends, eps)))),
                  tols["residual"]))
    e1, e2, e3 = connection_identity_errors(cfg, ends.lifted)
    rep.add(Check("connection_identity", e1, tols["connection"]),
            Check("connection_identity_hat", e2, tols["connection"]),
            Check("connection_ratio", e3, tols["connection"]))
    exps = specfun.ExponentSet(*ends.lifted)
    rep.add(Check("wronskian", wronskian_error(exps, sample_half_plane(rng, 500)), tols["wronskian"]))
    ev = surface.WeierstrassEvaluator(solver.construct(cfg, ends.lifted, solution=sol))
    lam, mu = ev.abc.lam, ev.abc.mu
    norm = abs(eps * ends.alpha * mu ** 2 - frame.t * matrices.nu[0, 0].real / matrices.nu[1, 0].real)
    rep.add(Check("lambda_mu_normalization", float(norm), tols["residual"]))
    rep.add(Check("spinor_identity", spinor_identity_error(ev, rng), tols["spinor_identity"]))
    rep.add(*end_fit_checks(ev, tols))
    if mesh:
        m = surface.normalize_translation(surface.generate_mesh(ev, resolution))
        rep.add(*mesh_checks(m, cfg, tols)[0])
    return rep


def trinoid_report(spec, resolution=32, seed=0, tols=None, n_distinct=200):
    tols = dict(TOLERANCES, **(tols or {}))
    rep = VerificationReport(seed=seed, tolerances=tols)
    growth = trinoid.growth_check(spec)
    checks, info = trinoid_checks(spec, resolution, np.random.default_rng(seed), n_distinct, tols)
    rep.add(*checks)
    rep.context = {"mu": list(spec.mus), "lifts": list(spec.lifts()), **growth,
                   "diagnostics": info["diagnostics"]}
    return rep
