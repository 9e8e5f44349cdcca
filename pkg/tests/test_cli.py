import json
import math

import numpy as np
import pytest

from threelines import io
from threelines.cli import main
from threelines.geometry import TripleConfig
from threelines.verify import symmetric_config

INFEASIBLE = TripleConfig(0.6674141262912923, 0.6768370038892144, 0.46527138568003257,
                          -1.9946323961476704, 0.4998505891844021, -2.1382223690055238, 1)
INFEASIBLE_LIFTS = [0.6674141262912923, 2.4652713856800323, 0.6768370038892144]


def write_doc(tmp_path, doc, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(io.to_jsonable(doc)))
    return str(p)


@pytest.fixture
def sym_doc(tmp_path):
    return write_doc(tmp_path, {"config": symmetric_config().to_json()})


def test_classify_roundtrip(tmp_path, sym_doc):
    out = tmp_path / "c"
    assert main(["classify", "--config", sym_doc, "--out", str(out), "--emit-lines"]) == 0
    res = io.read_json(out / "classification.json")
    assert len(res["lines"]) == 3
    # classify the emitted lines again
    doc = write_doc(tmp_path, {"lines": res["lines"]}, "lines.json")
    assert main(["classify", "--config", doc, "--out", str(tmp_path / "c2")]) == 0
    res2 = io.read_json(tmp_path / "c2" / "classification.json")
    assert np.allclose(res2["invariants"], res["invariants"], atol=1e-9)


def test_classify_degenerate_lines(tmp_path):
    lines = [{"point": [0, 0, 0], "direction": [1, 0, 0]},
             {"point": [0, 1, 0], "direction": [1, 0, 0]},
             {"point": [0, 0, 1], "direction": [0, 1, 0]}]
    assert main(["classify", "--config", write_doc(tmp_path, {"lines": lines})]) == 2


def test_solve_symmetric(tmp_path, sym_doc):
    out = tmp_path / "s"
    assert main(["solve", "--config", sym_doc, "--out", str(out)]) == 0
    sols = io.read_json(out / "solutions.json")["solutions"]
    s = math.sqrt(5) / 8
    got = sorted(tuple(round(abs(v), 12) for v in (r["p"], r["q"], r["r"])) for r in sols)
    assert got and all(np.allclose(g, s) for g in got)


def test_solve_trinoid_tags(tmp_path):
    out = tmp_path / "t"
    assert main(["solve", "--mu", "0.6,0.6,0.6", "--out", str(out)]) == 0
    res = io.read_json(out / "solutions.json")
    flags = [f for r in res["solutions"] for f in r["flags"]]
    assert "trinoid_admissible" in flags
    assert flags.count("parabolic") >= 3
    assert res["in_K"]


def test_solve_infeasible_lifts(tmp_path):
    doc = write_doc(tmp_path, {"config": INFEASIBLE.to_json(), "lifts": INFEASIBLE_LIFTS})
    assert main(["solve", "--config", doc]) == 3


def test_build_surface(tmp_path, sym_doc):
    out = tmp_path / "b"
    assert main(["build-surface", "--config", sym_doc, "--out", str(out), "--resolution", "24"]) == 0
    V, N, F, seg = io.read_obj(out / "surface.obj")
    assert sorted(seg) == [1, 2, 3]
    assert len(N) == len(V) and F.max() < len(V)
    Vp, Np, Fp = io.read_ply(out / "surface.ply")
    assert np.array_equal(Vp, V) and np.array_equal(Fp, F)
    head, rows = io.read_csv(out / "surface_samples.csv")
    assert "mean_curvature" in head and rows
    rep = io.read_json(out / "surface_report.json")
    assert rep["report"]["pass"]


def test_build_surface_flip(tmp_path, sym_doc):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["build-surface", "--config", sym_doc, "--out", str(a), "--resolution", "12"]) == 0
    assert main(["build-surface", "--config", sym_doc, "--out", str(b), "--resolution", "12",
                 "--flip-reflection"]) == 0
    Va, Vb = io.read_obj(a / "surface.obj")[0], io.read_obj(b / "surface.obj")[0]
    # the flipped solution is the half-turn of the surface about the x3-axis
    assert np.allclose(Va[:, :2], -Vb[:, :2], atol=1e-9)
    assert np.allclose(Va[:, 2], Vb[:, 2], atol=1e-9)


def test_build_trinoid(tmp_path):
    out = tmp_path / "tr"
    assert main(["build-trinoid", "--mu", "0.6,0.6,0.6", "--out", str(out), "--resolution", "12"]) == 0
    V, _, F, _ = io.read_obj(out / "trinoid.halfspace.obj")
    assert np.all(V[:, 2] > 0)
    Vb, _, _, _ = io.read_obj(out / "trinoid.ball.obj")
    assert np.all(np.linalg.norm(Vb, axis=1) < 1)
    d = io.read_json(out / "trinoid_diagnostics.json")
    for k in ("growths", "in_K", "nondegenerate", "boundary_points", "distinct", "det_drift",
              "plane_residual"):
        assert k in d
    assert d["in_K"] and d["nondegenerate"] and all(d["distinct"])
    assert d["det_drift"] < 1e-8


def test_build_trinoid_outside_K():
    assert main(["build-trinoid", "--mu", "0.2,0.2,0.2"]) == 2


def test_verify(tmp_path, sym_doc):
    out = tmp_path / "v"
    assert main(["verify", "--config", sym_doc, "--out", str(out), "--resolution", "16"]) == 0
    rep = io.read_json(out / "verification.json")
    assert rep["pass"]
    assert all({"name", "target", "measured", "tolerance", "pass"} <= set(c) for c in rep["checks"])


def test_verify_perturbed_solution(tmp_path):
    s = math.sqrt(5) / 8
    doc = write_doc(tmp_path, {"config": symmetric_config().to_json(), "pqr": [s + 1e-6, s, -s]})
    out = tmp_path / "v"
    assert main(["verify", "--config", doc, "--out", str(out), "--resolution", "12"]) == 4
    rep = io.read_json(out / "verification.json")
    failed = [c["name"] for c in rep["checks"] if not c["pass"]]
    assert "system_residual" in failed


@pytest.mark.parametrize("doc", [{}, {"config": symmetric_config().to_json(), "mu": [0.6, 0.6, 0.6]}])
def test_input_forms(tmp_path, doc):
    assert main(["classify", "--config", write_doc(tmp_path, doc)]) == 2


@pytest.mark.parametrize("extra", [{"tolerances": {"residual": -1}}, {"tolerances": {"nope": 1e-3}},
                                   {"lifts": [0.5, 0.5]}])
def test_bad_run_config(tmp_path, extra):
    doc = write_doc(tmp_path, {"config": symmetric_config().to_json(), **extra})
    assert main(["solve", "--config", doc]) == 2


def test_bad_arguments():
    assert main(["solve", "--mu", "0.6,x,0.6"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2
