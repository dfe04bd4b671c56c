"""JSON documents: instances, embeddings and run reports.

Adjacency rows are hex strings of little-endian bitmasks (bit ``k`` set iff
local vertex ``k`` is adjacent), one string per row of each cluster-edge
biadjacency matrix. Densities are exact rationals written as ``"p/q"``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import FormatError, InvariantError
from .graph import HOST, PATTERN, BipartitePair, Graph, VertexSet, bits_from_bool, bool_from_bits
from .instances import Instance, PatternGraph, Restriction
from .params import ParameterCascade
from .regularity import ClusterGraph, host_from_pairs

INSTANCE_FORMAT = "blowup-instance/1"


def _hex_rows(mat: np.ndarray) -> list[str]:
    return [format(bits_from_bool(row), "x") for row in mat]


def _unhex_rows(rows: list[str], width: int) -> np.ndarray:
    if not rows:
        return np.zeros((0, width), dtype=bool)
    out = np.array([bool_from_bits(int(h, 16), width) for h in rows], dtype=bool)
    if any(int(h, 16) >> width for h in rows):
        raise FormatError("adjacency row has bits beyond the cluster size")
    return out


def instance_to_dict(inst: Instance) -> dict:
    host, pat = inst.host, inst.pattern
    n = host.n_per_cluster
    cg = host.cluster_graph
    return {
        "format": INSTANCE_FORMAT,
        "r": host.r,
        "N": n,
        "cluster_edges": [
            {"i": i, "j": j, "density": str(cg.density(i, j)), "rows": _hex_rows(host.block(i, j))}
            for (i, j) in cg.sorted_edges()
        ],
        "pattern": {
            "order": pat.order,
            "max_degree": pat.max_degree,
            "edges": [list(e) for e in pat.graph.edges()],
        },
        "psi": list(pat.assignment),
        "restrictions": [
            {"vertex": rs.vertex, "allowed": rs.allowed.to_list()} for rs in inst.restrictions
        ],
        "params": inst.params.to_dict(),
        "seed_lineage": inst.seed_lineage,
    }


def instance_from_dict(d: dict) -> Instance:
    """Rebuild and re-validate an instance. Raises FormatError or InvariantError."""
    try:
        if d.get("format") != INSTANCE_FORMAT:
            raise FormatError(f"unsupported format {d.get('format')!r}, expected {INSTANCE_FORMAT!r}")
        r, n = int(d["r"]), int(d["N"])
        edges = [(int(e["i"]), int(e["j"])) for e in d["cluster_edges"]]
        pairs = {}
        recorded = {}
        for e, (i, j) in zip(d["cluster_edges"], edges):
            mat = _unhex_rows(e["rows"], n)
            if mat.shape != (n, n):
                raise FormatError(f"cluster edge {(i, j)} has {mat.shape[0]} rows, expected {n}")
            pairs[(i, j)] = BipartitePair(mat)
            recorded[(i, j)] = Fraction(e["density"])
        cg = ClusterGraph.from_edges(r, edges)
        host = host_from_pairs(cg, n, pairs)
        for e, dens in recorded.items():
            if host.cluster_graph.density(*e) != dens:
                raise InvariantError("recorded-density", f"pair {e}: file says {dens}")
        pd = d["pattern"]
        pg = Graph.from_edges(int(pd["order"]), [tuple(e) for e in pd["edges"]], PATTERN)
        pattern = PatternGraph(pg, int(pd["max_degree"]), tuple(int(c) for c in d["psi"]), r, n)
        restrictions = [
            Restriction(int(rs["vertex"]), VertexSet.of(HOST, host.order, rs["allowed"]))
            for rs in d.get("restrictions", [])
        ]
        params = ParameterCascade.from_dict(d["params"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (FormatError, InvariantError)):
            raise
        raise FormatError(f"malformed instance document: {exc!r}") from exc
    inst = Instance(host, pattern, params, restrictions, dict(d.get("seed_lineage", {})))
    inst.validate()
    return inst


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _read_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps(instance_to_dict(inst)))


def load_instance(path) -> Instance:
    d = _read_json(path)
    if not isinstance(d, dict):
        raise FormatError("instance file must hold a JSON object")
    return instance_from_dict(d)


def save_embedding(phi, path) -> None:
    Path(path).write_text(json.dumps([int(v) for v in phi]) + "\n")


def load_embedding(path) -> list[int]:
    d = _read_json(path)
    if not isinstance(d, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in d):
        raise FormatError("embedding file must be a JSON array of integers")
    return d
