"""JSON and text file formats, written atomically.

Graph document::

    {"version": 1, "n": 6, "edges": [[0, 1], ...],
     "positions": [[x, y, z], ...],          # optional
     "partition": [[a, b, c], ...]}          # optional, node triples

Indices in JSON documents are 0-based; the plain edge-list text format is 1-based.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import GraphError, ParseError
from .graph import Graph, from_edge_list, graph_label, parse_edge_list
from .partition import TrianglePartition

FORMAT_VERSION = 1


def atomic_write(path, data) -> Path:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write(path, dumps(obj))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def graph_doc(
    g: Graph,
    positions=None,
    partition: Optional[TrianglePartition] = None,
    **extra,
) -> dict:
    doc = {"version": FORMAT_VERSION, "n": g.n, "edges": [list(e) for e in g.edges]}
    if positions is not None:
        doc["positions"] = np.asarray(positions, dtype=float).tolist()
    if partition is not None:
        doc["partition"] = partition.node_triples()
    doc.update(extra)
    return doc


def parse_graph_doc(doc: dict):
    """Return ``(graph, positions or None, partition or None)`` from a graph document."""
    if not isinstance(doc, dict):
        raise ParseError("graph document must be a JSON object")
    if doc.get("version", FORMAT_VERSION) != FORMAT_VERSION:
        raise ParseError(f"unsupported document version {doc.get('version')}")
    try:
        g = from_edge_list(int(doc["n"]), [tuple(e) for e in doc["edges"]])
    except GraphError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad graph document: {exc!r}") from exc
    positions = None
    if doc.get("positions") is not None:
        positions = np.asarray(doc["positions"], dtype=float)
        if positions.shape != (g.n, 3):
            raise ParseError(f"positions have shape {positions.shape}, expected ({g.n}, 3)")
    partition = None
    if doc.get("partition") is not None:
        try:
            partition = TrianglePartition.from_triples(g, doc["partition"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"partition triples are not triangles of the graph: {exc!r}") from exc
    return g, positions, partition


def read_graph(path):
    """Load a graph document (JSON) or a 1-based edge-list text file."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
        return parse_graph_doc(doc)
    return parse_edge_list(text), None, None


def partition_doc(g: Graph, partitions: Sequence[TrianglePartition]) -> dict:
    keys = sorted(tuple(tuple(t) for t in p.key) for p in partitions)
    return {"graph_label": graph_label(g), "partitions": [[list(t) for t in k] for k in keys]}


def write_catalog(catalog, out_dir, embeddings: dict) -> list[Path]:
    """One ``<canonical_label>.json`` per entry plus ``table1.json``.

    ``embeddings`` maps each label to ``(framework, report)`` for the stored
    positions and rigidity report.
    """
    out_dir = Path(out_dir)
    written = []
    for entry in catalog.entries:
        f, report = embeddings[entry.label]
        doc = graph_doc(
            entry.graph,
            positions=f.positions,
            canonical_label=entry.label,
            partitions=partition_doc(entry.graph, entry.partitions)["partitions"],
            rigidity=report.to_dict(),
        )
        written.append(write_json(out_dir / f"{entry.label}.json", doc))
    rows = [
        {"nodes": r.nodes, "mr_graphs": r.mr_graphs, "satisfy_nc": r.satisfy_nc, "partitions": r.partitions}
        for _, r in sorted(catalog.table.items())
    ]
    table = {
        "rows": rows,
        "unpartitionable": {str(n): sorted(v) for n, v in sorted(catalog.unpartitionable.items())},
    }
    written.append(write_json(out_dir / "table1.json", table))
    return written


def write_obj(path, points, faces) -> Path:
    lines = [f"v {x:.12g} {y:.12g} {z:.12g}" for x, y, z in np.asarray(points)]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in np.asarray(faces)]
    return atomic_write(path, "\n".join(lines) + "\n")
