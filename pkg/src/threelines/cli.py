"""Command-line driver.

    threelines MODE [--config PATH] [--out DIR] [--resolution N] [--r-excl X]
                    [--mu a,b,c] [--flip-reflection] [--emit-lines]

MODE is one of classify, solve, build-surface, build-trinoid, verify.  The
configuration is a single JSON document holding exactly one input form:
"config" (the seven invariants), "lines" (three oriented lines) or "mu"
(trinoid end data).  Exit codes: 0 success, 2 invalid or degenerate input,
3 legal empty result, 4 numerical failure (including failed verification).
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io, solver, surface, trinoid, verify
from .geometry import (DegenerateTripleError, OrientedLine, TripleConfig, check_lifts,
                       classify_triple, lines_from_config, lines_to_json)
from .specfun import ExponentSet

log = logging.getLogger("threelines")

EXIT_OK, EXIT_INVALID, EXIT_EMPTY, EXIT_NUMERICAL = 0, 2, 3, 4
MODES = ("classify", "solve", "build-surface", "build-trinoid", "verify")
DEFAULT_WINDOW = (-2.0, 3.0, 0.0, 2.5)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    mode: str
    config: TripleConfig = None
    lines: tuple = None
    mu: trinoid.TrinoidSpec = None
    lifts: tuple = None
    pqr: tuple = None
    solution_index: int = 0
    resolution: int = None
    r_excl: float = 0.05
    window: tuple = DEFAULT_WINDOW
    branches: list = None
    tolerances: dict = field(default_factory=lambda: dict(verify.TOLERANCES))
    seed: int = 0
    flip: bool = False
    emit_lines: bool = False
    out: Path = None

    @property
    def triple(self):
        """TripleConfig of the input (classifying lines when needed)."""
        if self.config is not None:
            return self.config
        if self.lines is not None:
            return classify_triple(*self.lines)
        return None

    def echo(self):
        d = {"mode": self.mode, "lifts": self.lifts, "solution_index": self.solution_index,
             "resolution": self.resolution, "r_excl": self.r_excl, "window": list(self.window),
             "branches": self.branches, "tolerances": self.tolerances, "seed": self.seed,
             "flip_reflection": self.flip}
        if self.config is not None:
            d["config"] = self.config.to_json()
        if self.lines is not None:
            d["lines"] = lines_to_json(self.lines)
        if self.mu is not None:
            d["mu"] = list(self.mu.mus)
        if self.pqr is not None:
            d["pqr"] = list(self.pqr)
        return d


def _parse_mu(text):
    try:
        vals = [float(v) for v in str(text).split(",")]
    except ValueError as exc:
        raise ConfigError(f"--mu expects three comma-separated numbers, got {text!r}") from exc
    if len(vals) != 3:
        raise ConfigError("--mu expects three numbers")
    return vals


def _parse_branch(b):
    if len(b) != 3 or set(b) - set("+-"):
        raise ConfigError(f"branch filter {b!r} must be three characters from '+-'")
    return tuple(1 if c == "+" else -1 for c in b)


def load_run_config(mode, args):
    """Merge the JSON document with the command-line flags and validate."""
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    if args.mu is not None:
        doc["mu"] = _parse_mu(args.mu)
    forms = [k for k in ("config", "lines", "mu") if doc.get(k) is not None]
    if len(forms) != 1:
        raise ConfigError(f"exactly one of config/lines/mu must be given, found {forms or 'none'}")
    rc = RunConfig(mode=mode)
    try:
        if "config" in forms:
            rc.config = TripleConfig.from_json(doc["config"])
        elif "lines" in forms:
            lines = doc["lines"]
            if len(lines) != 3:
                raise ConfigError("lines must hold three oriented lines")
            rc.lines = tuple(OrientedLine.from_json(d) for d in lines)
        else:
            mu = doc["mu"]
            rc.mu = trinoid.TrinoidSpec(*(_parse_mu(mu) if isinstance(mu, str) else mu))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed input: {exc}") from exc
    if doc.get("lifts") is not None:
        rc.lifts = tuple(float(v) for v in doc["lifts"])
        if len(rc.lifts) != 3:
            raise ConfigError("lifts must hold three numbers")
        try:
            ExponentSet(*rc.lifts)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if doc.get("pqr") is not None:
        rc.pqr = tuple(float(v) for v in doc["pqr"])
    rc.solution_index = int(doc.get("solution_index", 0))
    default_res = 32 if (rc.mu is not None or mode == "verify") else 64
    rc.resolution = int(args.resolution if args.resolution is not None else doc.get("resolution", default_res))
    rc.r_excl = float(args.r_excl if args.r_excl is not None else doc.get("r_excl", 0.05))
    rc.window = tuple(float(v) for v in doc.get("window", DEFAULT_WINDOW))
    if doc.get("branches") is not None:
        rc.branches = [_parse_branch(b) for b in doc["branches"]]
    tols = doc.get("tolerances", {})
    unknown = set(tols) - set(verify.TOLERANCES)
    if unknown:
        raise ConfigError(f"unknown tolerance keys {sorted(unknown)}")
    rc.tolerances.update({k: float(v) for k, v in tols.items()})
    if any(not v > 0 for v in rc.tolerances.values()):
        raise ConfigError("tolerances must be positive")
    if rc.resolution < 2 or not rc.r_excl > 0 or len(rc.window) != 4:
        raise ConfigError("resolution must be >= 2, r_excl positive and window four numbers")
    rc.seed = int(doc.get("seed", 0))
    rc.flip = bool(args.flip_reflection or doc.get("flip_reflection", False))
    rc.emit_lines = bool(args.emit_lines)
    rc.out = Path(args.out) if args.out else None
    if rc.lifts is not None and rc.triple is not None:
        try:
            check_lifts(rc.triple, rc.lifts)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return rc


def _out_dir(rc, default="threelines_out"):
    d = rc.out or Path(default)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _emit(rc, name, payload):
    """Print a JSON payload and store it in the output directory when one is set."""
    print(json.dumps(io.to_jsonable(payload), indent=2))
    if rc.out is not None:
        rc.out.mkdir(parents=True, exist_ok=True)
        io.write_json(rc.out / name, payload)


# commands ------------------------------------------------------------------

def cmd_classify(rc):
    cfg = rc.triple
    if cfg is None:
        raise ConfigError("classify needs a line triple or a configuration")
    payload = {"config": cfg.to_json(), "invariants": list(cfg.invariants())}
    if rc.emit_lines:
        payload["lines"] = lines_to_json(lines_from_config(cfg))
    _emit(rc, "classification.json", payload)
    return EXIT_OK


def _solution_payload(cfg, lifted, sol, flip=False, extra_flags=()):
    ends = solver.EndParameters.from_config(cfg, lifted)
    res = solver.pqr_residuals(*sol.pqr, ends, sol.eps)
    sol = sol.with_flags(*extra_flags) if extra_flags else sol
    try:
        c = solver.construct(cfg, lifted, solution=sol, flip=flip)
        rec = solver.solution_record(sol, c.abc, res)
    except ValueError:
        a, b, cc = solver.pqr_to_abc(sol, ends.lifted)
        rec = solver.solution_record(sol, None, res)
        rec.update(a=a, b=b, c=cc, **{"lambda": None}, mu=None)
        rec["flags"].append("no_real_mu")
    return rec


def _trinoid_solutions(rc):
    spec = rc.mu
    lifts = rc.lifts or spec.lifts()
    ends = trinoid.trinoid_rhs(spec, lifts)
    closed = trinoid.trinoid_pqr(spec, lifts)
    out = []
    for eps in (1, -1):
        cfg = trinoid.trinoid_config(spec, eps, lifts)
        for s in solver.solve_pqr(ends, eps, branches=rc.branches):
            flags = []
            if eps == closed.eps and (np.allclose(s.pqr, closed.pqr, atol=1e-9)
                                      or np.allclose(s.pqr, -closed.pqr, atol=1e-9)):
                flags.append("trinoid_admissible")
            if np.allclose(np.abs(s.pqr), 0.5, atol=1e-9):
                flags.append("parabolic")
            out.append(_solution_payload(cfg, ends.lifted, s, rc.flip, flags))
    return out, {"mu": list(spec.mus), "lifts": list(ends.lifted),
                 "growths": list(spec.growths), **trinoid.growth_check(spec)}


def cmd_solve(rc):
    if rc.mu is not None:
        records, context = _trinoid_solutions(rc)
    else:
        cfg = rc.triple
        ends, _, _, eps = solver.prepare(cfg, rc.lifts)
        sols = solver.solve_pqr(ends, eps, branches=rc.branches)
        records = [_solution_payload(cfg, ends.lifted, s, rc.flip) for s in sols]
        context = {"config": cfg.to_json(), "lifts": list(ends.lifted), "eps": eps,
                   "phi": {"root_class": solver.build_phi(ends).root_class}}
    payload = {**context, "solutions": records, "tolerances": rc.tolerances}
    _emit(rc, "solutions.json", payload)
    if not records:
        log.warning("no real solution found")
        return EXIT_EMPTY
    return EXIT_OK


def _surface_samples(ev, rng, translation, n=64):
    """Pointwise checks at random interior points, in the mesh's coordinates."""
    z = rng.uniform(-1.5, 2.5, n) + 1j * rng.uniform(0.1, 2.0, n)
    x = np.array([ev.immerse(v) for v in z]) + np.asarray(translation)
    k1, k2, d1, d2 = ev.spinors(z)
    spin = np.abs(k1 * d2 - d1 * k2 - 1j * ev.phi(z)) / np.abs(ev.phi(z))
    g, _, _ = ev.weierstrass_at(z)
    H = ev.mean_curvature(z)
    rows = [(a.real, a.imag, *p, b.real, b.imag, s, h) for a, p, b, s, h in zip(z, x, g, spin, H)]
    return rows, ["re_z", "im_z", "x1", "x2", "x3", "re_g", "im_g", "spinor_identity", "mean_curvature"]


def cmd_build_surface(rc):
    cfg = rc.triple
    if cfg is None:
        raise ConfigError("build-surface needs a configuration or a line triple")
    lifted = rc.lifts
    if rc.pqr is not None:
        ends, _, _, eps = solver.prepare(cfg, lifted)
        p, q, r = rc.pqr
        sol = solver.PqrSolution(p, q, r, eps, tuple(1 if v >= 0 else -1 for v in rc.pqr), p + q + r)
        c = solver.construct(cfg, lifted, solution=sol, flip=rc.flip)
    else:
        c = solver.construct(cfg, lifted, index=rc.solution_index, flip=rc.flip)
    ev = surface.WeierstrassEvaluator(c)
    mesh = surface.generate_mesh(ev, rc.resolution, rc.window, rc.r_excl)
    surface.normalize_translation(mesh)
    checks, boundary = verify.mesh_checks(mesh, cfg, rc.tolerances)
    checks += verify.end_fit_checks(ev, rc.tolerances)
    zH, H = surface.fd_mean_curvature(mesh)
    report = verify.VerificationReport(checks, rc.seed, rc.tolerances)
    d = _out_dir(rc)
    header = [f"threelines surface, resolution {rc.resolution}", "segments: 1 (-inf,0), 2 (0,1), 3 (1,inf)"]
    io.write_obj(d / "surface.obj", mesh.x, mesh.faces, mesh.normals, mesh.tags, mesh.z, header)
    io.write_ply(d / "surface.ply", mesh.x, mesh.faces, mesh.normals)
    rows, cols = _surface_samples(ev, np.random.default_rng(rc.seed), mesh.meta["translation"])
    io.write_csv(d / "surface_samples.csv", rows, cols)
    payload = {"run": rc.echo(), "solution": c.to_json(),
               "mesh": {"vertices": mesh.n_vertices, "faces": len(mesh.faces),
                        "segments": {k: int(mesh.segment(k).size) for k in (1, 2, 3)},
                        **{k: v for k, v in mesh.meta.items()}},
               "boundary": boundary,
               "end_asymptotics": [surface.fit_end_asymptotics(ev, e).to_json() for e in ("0", "1", "inf")],
               "fd_mean_curvature": {"max": float(np.max(np.abs(H))) if H.size else None,
                                     "nodes": int(H.size)},
               "report": report}
    io.write_json(d / "surface_report.json", payload)
    print(json.dumps({"out": str(d), "pass": report.passed, "failed": report.failed()}, indent=2))
    return EXIT_OK


def cmd_build_trinoid(rc):
    spec = rc.mu
    if spec is None:
        raise ConfigError("build-trinoid needs --mu or a 'mu' entry")
    chk = trinoid.growth_check(spec)
    if not chk["in_K"]:
        raise ConfigError("growths violate the K condition: no trinoid")
    if not chk["nondegenerate"]:
        raise ConfigError("degenerate end data")
    mesh, ev = trinoid.trinoid_mesh(spec, rc.resolution, rc.window, rc.r_excl, lifts=rc.lifts)
    diag = trinoid.trinoid_diagnostics(spec, mesh, ev)
    _, allfit, _ = trinoid.segment_planes(mesh)
    full = mesh.doubled(allfit)
    d = _out_dir(rc)
    tags = full.tags.copy()
    tags[len(mesh.z):] = 0          # the mirrored boundary coincides with the original
    io.write_obj(d / "trinoid.halfspace.obj", full.halfspace, full.faces, tags=tags, z=full.z,
                 header=["threelines trinoid, upper half-space model (x, y, height)"])
    io.write_obj(d / "trinoid.ball.obj", full.ball, full.faces, tags=tags, z=full.z,
                 header=["threelines trinoid, Poincare ball model"])
    keys = ("growths", "in_K", "nondegenerate", "boundary_points", "distinct", "det_drift", "plane_residual")
    diagnostics = {k: diag[k] for k in keys}
    diagnostics["extra"] = {k: v for k, v in diag.items() if k not in keys}
    diagnostics["solution"] = solver.solution_record(ev.construction.solution, ev.abc)
    diagnostics["run"] = rc.echo()
    io.write_json(d / "trinoid_diagnostics.json", diagnostics)
    print(json.dumps(io.to_jsonable({k: diagnostics[k] for k in keys} | {"out": str(d)}), indent=2))
    return EXIT_OK


def cmd_verify(rc):
    if rc.mu is not None:
        rep = verify.trinoid_report(rc.mu, rc.resolution, rc.seed, rc.tolerances)
    else:
        rep = verify.config_report(rc.triple, rc.lifts, rc.pqr, rc.solution_index, rc.resolution,
                                   rc.seed, rc.tolerances)
    rep.context["run"] = rc.echo()
    _emit(rc, "verification.json", rep)
    return EXIT_OK if rep.passed else EXIT_NUMERICAL


COMMANDS = {"classify": cmd_classify, "solve": cmd_solve, "build-surface": cmd_build_surface,
            "build-trinoid": cmd_build_trinoid, "verify": cmd_verify}


def build_parser():
    p = argparse.ArgumentParser(prog="threelines", description=__doc__.split("\n\n")[0])
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", metavar="PATH", help="JSON run config holding one of config, lines or mu")
    p.add_argument("--out", metavar="DIR", help="output directory for reports and meshes")
    p.add_argument("--resolution", type=int, metavar="N", help="grid cells across the parameter window")
    p.add_argument("--r-excl", type=float, metavar="X", dest="r_excl",
                   help="radius of the holes cut around z = 0 and z = 1")
    p.add_argument("--mu", metavar="a,b,c", help="trinoid end data mu0,mu1,mu_inf")
    p.add_argument("--flip-reflection", action="store_true",
                   help="apply (lambda, mu) -> (i lambda, i mu): the reflection about the x3-axis")
    p.add_argument("--emit-lines", action="store_true",
                   help="classify: also output the normalized representative lines")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = load_run_config(args.mode, args)
    except (ConfigError, DegenerateTripleError, ValueError) as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID
    try:
        return COMMANDS[args.mode](rc)
    except DegenerateTripleError as exc:
        log.error("degenerate triple (%s): %s", exc.test, exc)
        return EXIT_INVALID
    except ConfigError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID
    except LookupError as exc:
        log.warning("empty result: %s", exc)
        return EXIT_EMPTY
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
