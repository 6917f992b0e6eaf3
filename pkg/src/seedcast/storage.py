"""File formats for graphs, models, realization banks, pairs, weights, and
experiment configs.

Model and bank files are self-contained: they embed the canonical edge table
(and node count) so downstream commands need only the one artifact.  Files
also carry content hashes of what they were built from; loaders verify them
so stale pairings fail fast instead of silently producing garbage.  All
writers are deterministic byte-for-byte for identical inputs.
"""

from __future__ import annotations

import json
import struct
from dataclasses import fields as dc_fields
from pathlib import Path

import numpy as np

from .contagion import DiffusionModel, Realization, RealizationBank
from .graph import Graph, load_edge_list_stats, node_count_marker, serialize_edge_list
from .harness import ExperimentConfig
from .kernels import TaskKind
from .learner import HypothesisWeights, TrainerConfig
from .optimize import QueryDecisionPair

_BANK_MAGIC = b"SCBK1\n"


# ---------------------------------------------------------------- graphs ---

def write_graph(g: Graph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes {g.node_count}\n")
        fh.write(serialize_edge_list(g))


def read_graph(path: str | Path) -> Graph:
    """Read an edge-list file, honoring our own '# nodes N' marker so graphs
    with trailing isolated nodes round-trip."""
    text = Path(path).read_text(encoding="utf-8")
    g, _ = load_edge_list_stats(text, node_count=node_count_marker(text))
    return g


# ---------------------------------------------------------------- models ---

def write_model(m: DiffusionModel, path: str | Path) -> None:
    """Self-contained text model: node count, graph hash, then one
    'u v p alpha beta' row per canonical edge."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# model kind={m.kind} seed={m.seed}\n")
        fh.write(f"# nodes {m.graph.node_count}\n")
        fh.write(f"# graph {m.graph.content_hash()}\n")
        for (u, v), p, a, b in zip(m.graph.edges, m.edge_prob, m.weibull_shape, m.weibull_scale):
            fh.write(f"{u} {v} {float(p)!r} {float(a)!r} {float(b)!r}\n")


def read_model(path: str | Path, g: Graph | None = None) -> DiffusionModel:
    """Load a model file; rebuilds the graph unless one is supplied (in which
    case the stored hash must match it)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    kind, seed, graph_hash, node_count = "custom", None, None, None
    rows = []
    for line in lines:
        if line.startswith("# model"):
            for tok in line.split()[2:]:
                key, _, val = tok.partition("=")
                if key == "kind":
                    kind = val
                elif key == "seed" and val != "None":
                    seed = int(val)
        elif line.startswith("# nodes"):
            node_count = int(line.split()[2])
        elif line.startswith("# graph"):
            graph_hash = line.split()[2]
        elif line.strip() and not line.startswith("#"):
            rows.append(line.split())
    uv = np.array([[int(r[0]), int(r[1])] for r in rows], dtype=np.int64).reshape(-1, 2)
    if g is None:
        if node_count is None:
            node_count = int(uv.max()) + 1 if uv.size else 0
        g = Graph(node_count, uv)
    if graph_hash is not None and graph_hash != g.content_hash():
        raise ValueError("model file was built for a different graph")
    if len(rows) != g.edge_count or not np.array_equal(uv, g.edges):
        raise ValueError("model file edges do not match the canonical graph")
    p = np.array([float(r[2]) for r in rows])
    a = np.array([float(r[3]) for r in rows])
    b = np.array([float(r[4]) for r in rows])
    return DiffusionModel(g, p, a, b, kind=kind, seed=seed)


# ----------------------------------------------------------------- banks ---

def write_bank(bank: RealizationBank, path: str | Path) -> None:
    """Binary bank file: magic, JSON header line, the little-endian u32 edge
    table, then per realization a u32 live count, u32 edge indices, and f64
    travel times."""
    g = bank.graph
    header = {
        "k": len(bank),
        "nodes": g.node_count,
        "edges": g.edge_count,
        "graph": g.content_hash(),
        "provenance": bank.provenance,
        "seed": bank.seed,
    }
    with open(path, "wb") as fh:
        fh.write(_BANK_MAGIC)
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        fh.write(g.edges.astype("<u4").tobytes())
        for r in bank.realizations:
            fh.write(struct.pack("<I", r.live_edge_idx.size))
            fh.write(r.live_edge_idx.astype("<u4").tobytes())
            fh.write(r.travel_times.astype("<f8").tobytes())


def read_bank(path: str | Path, g: Graph | None = None) -> RealizationBank:
    with open(path, "rb") as fh:
        magic = fh.read(len(_BANK_MAGIC))
        if magic != _BANK_MAGIC:
            raise ValueError("not a realization bank file")
        header = json.loads(fh.readline().decode())
        edges = np.frombuffer(fh.read(8 * header["edges"]), dtype="<u4")
        edges = edges.astype(np.int64).reshape(-1, 2)
        if g is None:
            g = Graph(header["nodes"], edges)
        if header["graph"] != g.content_hash():
            raise ValueError("bank file was built for a different graph")
        reals = []
        for _ in range(header["k"]):
            (count,) = struct.unpack("<I", fh.read(4))
            idx = np.frombuffer(fh.read(4 * count), dtype="<u4").astype(np.int64)
            times = np.frombuffer(fh.read(8 * count), dtype="<f8").astype(np.float64)
            reals.append(Realization(g, idx, times))
    return RealizationBank(reals, provenance=header.get("provenance", ""),
                           seed=header.get("seed"))


# ----------------------------------------------------------------- pairs ---

def write_pairs(pairs, path: str | Path) -> None:
    """Line format: task budget x1,x2,... y1,y2,...  ('-' for an empty set)."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            xs = ",".join(str(int(v)) for v in p.X) or "-"
            ys = ",".join(str(int(v)) for v in p.Y) or "-"
            fh.write(f"{p.task} {p.budget} {xs} {ys}\n")


def read_pairs(path: str | Path) -> list[QueryDecisionPair]:
    pairs = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 'task budget X Y'")
        task = TaskKind.parse(parts[0])
        budget = int(parts[1])
        X = [] if parts[2] == "-" else [int(t) for t in parts[2].split(",")]
        Y = [] if parts[3] == "-" else [int(t) for t in parts[3].split(",")]
        pairs.append(QueryDecisionPair(task=task, X=np.array(sorted(X), dtype=np.int64),
                                       Y=np.array(sorted(Y), dtype=np.int64), budget=budget))
    return pairs


# --------------------------------------------------------------- weights ---

def write_weights(h: HypothesisWeights, path: str | Path) -> None:
    cfg = h.config or TrainerConfig()
    header = {
        "k": len(h.w),
        "bank": h.bank.content_hash(),
        "source_task": str(h.source_task),
        "target_task": str(h.target_task),
        "trainer": {f.name: getattr(cfg, f.name) for f in dc_fields(cfg)},
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# weights " + json.dumps(header, sort_keys=True) + "\n")
        for w in h.w:
            fh.write(f"{float(w)!r}\n")


def read_weights(path: str | Path, bank: RealizationBank) -> HypothesisWeights:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# weights "):
        raise ValueError("not a weights file")
    header = json.loads(lines[0][len("# weights "):])
    if header["bank"] != bank.content_hash():
        raise ValueError("weights were trained on a different bank")
    w = np.array([float(t) for t in lines[1:] if t.strip()])
    if len(w) != header["k"] or len(w) != len(bank):
        raise ValueError("weight count mismatch")
    cfg = TrainerConfig(**header["trainer"])
    return HypothesisWeights(w, bank, TaskKind.parse(header["source_task"]),
                             TaskKind.parse(header["target_task"]), cfg)


# ---------------------------------------------------------------- config ---

def write_config(cfg: ExperimentConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in dc_fields(cfg):
            v = getattr(cfg, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            fh.write(f"{f.name} = {v}\n")


def read_config(path_or_text: str | Path) -> ExperimentConfig:
    """Parse a flat 'key = value' config file."""
    p = Path(path_or_text)
    text = p.read_text(encoding="utf-8") if p.exists() else str(path_or_text)
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        values[key.strip()] = val.strip()

    kwargs = {}
    for f in dc_fields(ExperimentConfig):
        if f.name not in values:
            continue
        raw = values.pop(f.name)
        if f.type == "int":
            kwargs[f.name] = int(raw)
        elif f.type == "float":
            kwargs[f.name] = float(raw)
        elif f.type.startswith("tuple"):
            kwargs[f.name] = tuple(int(t) for t in raw.split(",") if t.strip())
        else:
            kwargs[f.name] = raw
    if values:
        raise ValueError(f"unknown config keys: {sorted(values)}")
    return ExperimentConfig(**kwargs)
