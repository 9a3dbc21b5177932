"""Command-line front end: ``tririg <command> ...``.

Exit codes for ``partition``: 0 partitionable, 1 provably not, 2 budget or
timeout exhausted, 3 bad input or other failure. Other commands return 0 on
success and 3 on failure.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import os
import statistics
import sys
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .composition import PartitionedFramework, compose, match_triangle, random_chained_octahedra
from .embedding import DEFAULT_TRIALS, best_embedding
from .enumeration import build_catalog
from .errors import BudgetExceeded, SolverTimeout, TririgError
from .graph import necessary_conditions
from .io import (
    atomic_write,
    dumps,
    graph_doc,
    partition_doc,
    read_graph,
    sha256_file,
    write_catalog,
    write_json,
    write_obj,
)
from .partition import (
    DEFAULT_SUBSET_BUDGET,
    DEFAULT_TIMEOUT,
    end_to_end_search,
    exact_cover_partition,
    exhaustive_partition,
)
from .rigidity import Framework, rigidity_report
from .workspace import WorkspaceConfig, run_workspace

log = logging.getLogger("tririg")

EXIT_OK, EXIT_NONE, EXIT_BUDGET, EXIT_ERROR = 0, 1, 2, 3
METHODS = ("cover", "exhaustive", "end2end")


@dataclass
class RunManifest:
    command: str
    flags: dict
    seed: int
    version: str = __version__
    inputs: dict = field(default_factory=dict)
    phases: dict = field(default_factory=dict)

    def add_input(self, path):
        self.inputs[str(path)] = sha256_file(path)

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.phases[name] = round(time.perf_counter() - t0, 6)

    def write(self, path):
        return write_json(path, asdict(self))


def substream_seed(seed: int, name: str, *keys: int) -> int:
    """A per-module seed derived from the global one and a stream name."""
    ss = np.random.SeedSequence([seed, zlib.crc32(name.encode()), *keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _triple(text: str) -> tuple[int, int, int]:
    try:
        out = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a,b,c with integers, got {text!r}")
    if len(out) != 3:
        raise argparse.ArgumentTypeError(f"expected three node indices, got {text!r}")
    return out


def _sizes(text: str) -> list[int]:
    """``9,12,15`` or ``start:stop:step`` (stop inclusive)."""
    if ":" in text:
        a, b, *c = (int(t) for t in text.split(":"))
        return list(range(a, b + 1, c[0] if c else 3))
    return [int(t) for t in text.split(",") if t]


def _solve(g, method: str, find_all: bool, budget: int, timeout: float):
    if method == "cover":
        return exact_cover_partition(g, find_all=find_all, timeout=timeout)
    if method == "exhaustive":
        return exhaustive_partition(g, find_all=find_all, budget=budget, timeout=timeout)
    return end_to_end_search(g, find_all=find_all, timeout=timeout)


def _manifest_path(out: Path) -> Path:
    return out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")


def _emit(args, manifest: RunManifest, text: str):
    if args.out:
        out = Path(args.out)
        atomic_write(out, text)
        manifest.write(_manifest_path(out))
    else:
        sys.stdout.write(text)


def cmd_partition(args, manifest: RunManifest) -> int:
    with manifest.phase("read"):
        g, _, _ = read_graph(args.file)
    manifest.add_input(args.file)
    verdict = necessary_conditions(g)
    if not verdict:
        for reason in verdict.reasons():
            print(f"necessary condition failed: {reason}", file=sys.stderr)
        _emit(args, manifest, dumps(partition_doc(g, [])))
        return EXIT_NONE
    try:
        with manifest.phase("solve"):
            parts = _solve(g, args.method, args.all, args.budget, args.timeout)
    except (BudgetExceeded, SolverTimeout) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    _emit(args, manifest, dumps(partition_doc(g, parts)))
    return EXIT_OK if parts else EXIT_NONE


def cmd_enumerate(args, manifest: RunManifest) -> int:
    out = Path(args.out or "catalog")
    with manifest.phase("enumerate"):
        catalog = build_catalog(n_max=args.n_max, n_min=args.n_min)
    embeddings = {}
    with manifest.phase("embed"):
        for entry in catalog.entries:
            f, _ = best_embedding(entry.graph, args.trials, substream_seed(args.seed, "embedding", entry.label))
            embeddings[entry.label] = (f, rigidity_report(f))
    with manifest.phase("write"):
        write_catalog(catalog, out, embeddings)
    manifest.write(out / "manifest.json")
    for n, row in sorted(catalog.table.items()):
        print(f"{n}: mr_graphs={row.mr_graphs} satisfy_nc={row.satisfy_nc} partitions={row.partitions}")
    return EXIT_OK


def _partitioned(path, tri) -> PartitionedFramework:
    g, pos, part = read_graph(path)
    if pos is None:
        raise TririgError(f"{path} has no positions; run 'tririg embed' first")
    if part is None:
        key = tuple(sorted(tri))
        part = next((p for p in exact_cover_partition(g, find_all=True) if key in p.key), None)
        if part is None:
            raise TririgError(f"no partition of {path} contains triangle {key}")
    return PartitionedFramework(Framework(g, pos), part)


def cmd_compose(args, manifest: RunManifest) -> int:
    with manifest.phase("read"):
        a = _partitioned(args.file_a, args.tri1)
        b = _partitioned(args.file_b, args.tri2)
    manifest.add_input(args.file_a)
    manifest.add_input(args.file_b)
    with manifest.phase("compose"):
        if args.affine:
            target = a.positions[list(args.tri1)]
            away = a.positions.mean(axis=0)
            b = PartitionedFramework(match_triangle(b.framework, args.tri2, target, away), b.partition)
        out = compose(a, args.tri1, b, args.tri2)
    report = rigidity_report(out.framework)
    doc = graph_doc(out.graph, out.positions, out.partition, rigidity=report.to_dict())
    _emit(args, manifest, dumps(doc))
    return EXIT_OK


def cmd_embed(args, manifest: RunManifest) -> int:
    with manifest.phase("read"):
        g, _, part = read_graph(args.file)
    manifest.add_input(args.file)
    with manifest.phase("embed"):
        f, wcr = best_embedding(g, args.trials, substream_seed(args.seed, "embedding"))
    report = rigidity_report(f)
    doc = graph_doc(g, f.positions, part, wcr=wcr, rigidity=report.to_dict())
    _emit(args, manifest, dumps(doc))
    return EXIT_OK


def cmd_workspace(args, manifest: RunManifest) -> int:
    with manifest.phase("read"):
        g, pos, part = read_graph(args.file)
    manifest.add_input(args.file)
    if pos is None:
        raise TririgError(f"{args.file} has no positions; run 'tririg embed' first")
    if part is None or args.partition is not None:
        parts = exact_cover_partition(g, find_all=True)
        if not parts:
            raise TririgError("graph has no triangle partition")
        part = parts[(args.partition or 0) % len(parts)]
    f = Framework(g, pos)
    if not args.no_rescale:
        # longest edge 1, so the default radius is large next to the robot
        f = f.with_positions(f.positions / f.edge_lengths.max())
    cfg = WorkspaceConfig(dt=args.dt, targets=args.targets, radius=args.radius)
    with manifest.phase("sweep"):
        res = run_workspace(f, part, args.base, args.node, cfg, jobs=args.jobs)
    out = Path(args.out or "workspace")
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["target_idx", "tx", "ty", "tz", "rx", "ry", "rz", "steps", "reason"])
    for k, (t, r) in enumerate(zip(res.targets, res.reached)):
        w.writerow([k, *(f"{v:.12g}" for v in t), *(f"{v:.12g}" for v in r), res.steps[k], res.reasons[k]])
    atomic_write(out / "reached.csv", buf.getvalue())
    write_json(out / "summary.json", res.summary())
    write_obj(out / "mesh.obj", res.reached, res.triangulation)
    manifest.write(out / "manifest.json")
    print(dumps(res.summary()), end="")
    return EXIT_OK


def _bench_cell(job):
    size, method, rep, graph_seed, budget, timeout = job
    g = random_chained_octahedra(size, seed=graph_seed).graph
    t0 = time.perf_counter()
    try:
        parts = _solve(g, method, False, budget, timeout)
        status = "ok" if parts else "none"
    except SolverTimeout:
        status = "timeout"
    except (BudgetExceeded, MemoryError):
        status = "oom"
    return size, method, rep, time.perf_counter() - t0, status


def cmd_bench(args, manifest: RunManifest) -> int:
    jobs = [
        (size, method, rep, substream_seed(args.seed, "chain", size, rep), args.budget, args.timeout)
        for size in args.sizes
        for rep in range(args.reps)
        for method in args.methods
    ]
    with manifest.phase("bench"):
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                rows = list(pool.map(_bench_cell, jobs))
        else:
            rows = [_bench_cell(j) for j in jobs]
    rows.sort(key=lambda r: (r[0], METHODS.index(r[1]), r[2]))
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["size", "method", "rep", "seconds", "status"])
    for size, method, rep, sec, status in rows:
        w.writerow([size, method, rep, f"{sec:.6f}", status])
    summary = _io.StringIO()
    sw = csv.writer(summary, lineterminator="\n")
    sw.writerow(["size", "method", "median", "min", "max", "ok", "timeout", "oom"])
    for size in args.sizes:
        for method in args.methods:
            cell = [r for r in rows if r[0] == size and r[1] == method]
            done = [r[3] for r in cell if r[4] in ("ok", "none")]
            stats = [f"{statistics.median(done):.6f}", f"{min(done):.6f}", f"{max(done):.6f}"] if done else ["", "", ""]
            counts = [sum(r[4] == s for r in cell) for s in ("ok", "timeout", "oom")]
            sw.writerow([size, method, *stats, *counts])
    if args.out:
        out = Path(args.out)
        atomic_write(out, buf.getvalue())
        atomic_write(out.with_name(out.stem + "_summary.csv"), summary.getvalue())
        manifest.write(_manifest_path(out))
    else:
        sys.stdout.write(buf.getvalue())
    sys.stderr.write(summary.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="global random seed (default 0)")
    common.add_argument(
        "--jobs", type=int, default=argparse.SUPPRESS,
        help="worker processes (default $TRIRIG_JOBS or 1)",
    )
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="tririg", parents=[common], description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", parents=[common], help="split a graph's edges into triangles")
    p.add_argument("file", help="graph JSON or 1-based edge list")
    p.add_argument("--method", choices=METHODS, default="cover")
    p.add_argument("--all", action="store_true", help="list every partition")
    p.add_argument("--budget", type=int, default=DEFAULT_SUBSET_BUDGET, help="subset budget for exhaustive")
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="seconds")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("enumerate", parents=[common], help="build the catalog of partitionable graphs")
    p.add_argument("--n-max", type=int, default=9)
    p.add_argument("--n-min", type=int, default=6)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="embedding trials per graph")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("compose", parents=[common], help="glue two partitioned frameworks at a triangle")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--tri1", type=_triple, required=True, help="triangle a,b,c of the first graph (0-based)")
    p.add_argument("--tri2", type=_triple, required=True, help="triangle d,e,f of the second graph (0-based)")
    p.add_argument("--affine", action="store_true", help="re-embed the second framework so the triangles match")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("embed", parents=[common], help="3D embedding by randomised MDS")
    p.add_argument("file")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("workspace", parents=[common], help="single-node workspace sweep")
    p.add_argument("file", help="graph JSON with positions")
    p.add_argument("--node", type=int, required=True, help="moving node (0-based)")
    p.add_argument("--base", type=_triple, required=True, help="three fixed nodes a,b,c")
    p.add_argument("--targets", type=int, default=200)
    p.add_argument("--radius", type=float, default=6.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--partition", type=int, default=None, help="use the k-th partition instead of the stored one")
    p.add_argument("--no-rescale", action="store_true", help="keep the input scale instead of a unit longest edge")
    p.set_defaults(func=cmd_workspace)

    p = sub.add_parser("bench", parents=[common], help="solver timings on random chained octahedra")
    p.add_argument("--sizes", type=_sizes, default=_sizes("9:297:6"), help="list a,b,c or range start:stop:step")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--methods", type=lambda s: s.split(","), default=list(METHODS))
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    p.add_argument("--budget", type=int, default=DEFAULT_SUBSET_BUDGET)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    if hasattr(sys, "set_int_max_str_digits"):
        # labels of large graphs run to tens of thousands of digits
        sys.set_int_max_str_digits(0)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed = getattr(args, "seed", 0)
    args.jobs = getattr(args, "jobs", None) or int(os.environ.get("TRIRIG_JOBS", "1"))
    args.out = getattr(args, "out", None)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING)
    if args.command == "bench":
        bad = [m for m in args.methods if m not in METHODS]
        if bad:
            parser.error(f"unknown methods {bad}; choose from {METHODS}")
    flags = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(args).items() if k != "func"}
    manifest = RunManifest(command=args.command, flags=flags, seed=args.seed)
    try:
        return args.func(args, manifest)
    except (TririgError, OSError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
