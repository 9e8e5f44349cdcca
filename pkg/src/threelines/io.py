"""Mesh and report writers: OBJ, binary PLY, JSON and CSV."""

import csv
import json
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

_PLY_DTYPE = "<f8"


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays, complex numbers and dataclasses."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if is_dataclass(obj):
        return to_jsonable(asdict(obj))
    return obj


def write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(obj), indent=2) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_obj(path, vertices, faces, normals=None, tags=None, z=None, header=None):
    """Wavefront OBJ with optional per-vertex normals.

    Boundary segments are recorded as comments ``# seg k i j ...`` listing
    1-based vertex ids ordered along the segment (by Re z when given).
    """
    V = np.asarray(vertices, dtype=float)
    F = np.asarray(faces, dtype=int) + 1
    lines = [f"# {h}" for h in (header or [])]
    lines += [f"v {a:.17g} {b:.17g} {c:.17g}" for a, b, c in V]
    if normals is not None:
        lines += [f"vn {a:.17g} {b:.17g} {c:.17g}" for a, b, c in np.asarray(normals, dtype=float)]
    if tags is not None:
        tags = np.asarray(tags)
        for k in sorted(set(tags[tags > 0].tolist())):
            idx = np.nonzero(tags == k)[0]
            if z is not None:
                idx = idx[np.argsort(np.asarray(z)[idx].real)]
            lines.append(f"# seg {k} " + " ".join(str(i + 1) for i in idx))
    if normals is not None:
        lines += [f"f {a}//{a} {b}//{b} {c}//{c}" for a, b, c in F]
    else:
        lines += [f"f {a} {b} {c}" for a, b, c in F]
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


def read_obj(path):
    """(vertices, normals, faces (0-based), segments {k: 0-based ids})."""
    V, N, F, seg = [], [], [], {}
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            V.append([float(t) for t in parts[1:4]])
        elif parts[0] == "vn":
            N.append([float(t) for t in parts[1:4]])
        elif parts[0] == "f":
            F.append([int(t.split("/")[0]) - 1 for t in parts[1:4]])
        elif parts[:2] == ["#", "seg"]:
            seg[int(parts[2])] = np.array([int(t) - 1 for t in parts[3:]], dtype=int)
    return (np.array(V).reshape(-1, 3), np.array(N).reshape(-1, 3),
            np.array(F, dtype=int).reshape(-1, 3), seg)


def write_ply(path, vertices, faces, normals=None):
    """Binary little-endian PLY with double coordinates and int32 face indices."""
    V = np.asarray(vertices, dtype=float)
    F = np.asarray(faces, dtype=np.int32)
    props = ["x", "y", "z"] + (["nx", "ny", "nz"] if normals is not None else [])
    head = ["ply", "format binary_little_endian 1.0", f"element vertex {len(V)}"]
    head += [f"property double {p}" for p in props]
    head += [f"element face {len(F)}", "property list uchar int vertex_indices", "end_header"]
    vdata = V if normals is None else np.hstack([V, np.asarray(normals, dtype=float)])
    fdata = np.zeros(len(F), dtype=[("n", "u1"), ("i", "<i4", (3,))])
    fdata["n"] = 3
    fdata["i"] = F
    with open(path, "wb") as fh:
        fh.write(("\n".join(head) + "\n").encode("ascii"))
        fh.write(np.ascontiguousarray(vdata, dtype=_PLY_DTYPE).tobytes())
        fh.write(fdata.tobytes())
    return Path(path)


def read_ply(path):
    """(vertices, normals or None, faces) from a file written by :func:`write_ply`."""
    raw = Path(path).read_bytes()
    end = raw.index(b"end_header\n") + len(b"end_header\n")
    head = raw[:end].decode("ascii").splitlines()
    nv = int(next(h for h in head if h.startswith("element vertex")).split()[-1])
    nf = int(next(h for h in head if h.startswith("element face")).split()[-1])
    nprop = sum(h.startswith("property double") for h in head)
    vbytes = nv * nprop * 8
    vdata = np.frombuffer(raw[end:end + vbytes], dtype=_PLY_DTYPE).reshape(nv, nprop)
    fdata = np.frombuffer(raw[end + vbytes:], dtype=[("n", "u1"), ("i", "<i4", (3,))], count=nf)
    if np.any(fdata["n"] != 3):
        raise ValueError("only triangle faces are supported")
    normals = vdata[:, 3:6].copy() if nprop >= 6 else None
    return vdata[:, :3].copy(), normals, fdata["i"].astype(int)


def write_csv(path, rows, header):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return Path(path)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
