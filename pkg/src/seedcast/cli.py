"""Command-line interface: generate graphs and models, sample realization
banks, build query-decision pools, train weights, predict, and run full
evaluations."""

from __future__ import annotations

from pathlib import Path

import click

from .contagion import build_true_model, perturb_model, random_model, sample_bank
from .graph import load_edge_list_compact, generate_er, load_edge_list_stats
from .harness import run_experiment
from .kernels import TaskKind
from .learner import TrainerConfig, infer, train
from .optimize import generate_pairs
from . import storage


@click.group()
def main():
    """Seed-set decision making for contagion management."""


def _parse_ids(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip() != ""]


@main.command("gen-graph")
@click.option("--type", "gtype", type=click.Choice(["er"]), default="er", show_default=True)
@click.option("--nodes", type=int, required=True)
@click.option("--edges", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def gen_graph(gtype, nodes, edges, seed, out):
    """Generate a random graph and write it as a canonical edge list."""
    g = generate_er(nodes, edges, seed)
    storage.write_graph(g, out)
    click.echo(f"wrote {g.node_count} nodes, {g.edge_count} edges to {out}")


@main.command("load")
@click.option("--edges", "edges_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None,
              help="Write the canonical (dense-id) form here.")
def load_cmd(edges_path, out):
    """Validate an edge-list file; remap sparse ids when --out is given."""
    text = Path(edges_path).read_text(encoding="utf-8")
    g, stats = load_edge_list_stats(text)
    click.echo(f"{g.node_count} nodes, {g.edge_count} edges "
               f"({stats['duplicates_dropped']} duplicates, "
               f"{stats['self_loops_dropped']} self-loops dropped)")
    if out is not None:
        compact, mapping = load_edge_list_compact(text)
        storage.write_graph(compact, out)
        if compact.node_count != g.node_count:
            map_path = str(out) + ".map"
            with open(map_path, "w", encoding="utf-8") as fh:
                for old, new in sorted(mapping.items()):
                    fh.write(f"{old} {new}\n")
            click.echo(f"remapped to {compact.node_count} dense ids (mapping in {map_path})")


@main.command("gen-model")
@click.option("--graph", "graph_path", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def gen_model(graph_path, seed, out):
    """Build the weighted-cascade ground-truth model for a graph."""
    g = storage.read_graph(graph_path)
    storage.write_model(build_true_model(g, seed), out)
    click.echo(f"wrote model for {g.edge_count} edges to {out}")


@main.command("perturb")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--q", type=float, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def perturb(model_path, q, seed, out):
    """Redraw model parameters within a +-q relative band."""
    m = storage.read_model(model_path)
    storage.write_model(perturb_model(m, q, seed), out)
    click.echo(f"wrote perturbed model (q={q}) to {out}")


@main.command("random-model")
@click.option("--graph", "graph_path", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def random_model_cmd(graph_path, seed, out):
    """Build the fully random empirical model (parameters uniform on [0,1])."""
    g = storage.read_graph(graph_path)
    storage.write_model(random_model(g, seed), out)
    click.echo(f"wrote random model to {out}")


@main.command("gen-pairs")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--task", type=click.Choice(["de", "dc"]), required=True)
@click.option("--count", type=int, required=True)
@click.option("--eval-bank", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def gen_pairs(model_path, task, count, eval_bank, seed, out):
    """Generate a pool of query-decision pairs by greedy optimization."""
    m = storage.read_model(model_path)
    pairs = generate_pairs(m, TaskKind.parse(task), count, eval_bank_size=eval_bank, seed=seed)
    storage.write_pairs(pairs, out)
    click.echo(f"wrote {len(pairs)} {task} pairs to {out}")


@main.command("sample-bank")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--k", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def sample_bank_cmd(model_path, k, seed, out):
    """Sample K iid realizations into a bank file."""
    m = storage.read_model(model_path)
    storage.write_bank(sample_bank(m, k, seed), out)
    click.echo(f"wrote bank of {k} realizations to {out}")


@main.command("train")
@click.option("--pairs", "pairs_path", type=click.Path(exists=True), required=True)
@click.option("--bank", "bank_path", type=click.Path(exists=True), required=True)
@click.option("--source", type=click.Choice(["de", "dc"]), required=True)
@click.option("--target", type=click.Choice(["de", "dc"]), required=True)
@click.option("--c", type=float, default=0.01, show_default=True)
@click.option("--cstar", type=float, default=1.0, show_default=True)
@click.option("--epochs", type=int, default=5, show_default=True)
@click.option("--method", type=click.Choice(["subgradient", "n_slack"]),
              default="subgradient", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def train_cmd(pairs_path, bank_path, source, target, c, cstar, epochs, method, seed, out):
    """Train hypothesis weights from source-task pairs."""
    bank = storage.read_bank(bank_path)
    pairs = storage.read_pairs(pairs_path)
    cfg = TrainerConfig(c=c, margin_coeff=cstar, epochs=epochs, method=method, seed=seed)
    h = train(pairs, bank, TaskKind.parse(source), TaskKind.parse(target), cfg)
    storage.write_weights(h, out)
    click.echo(f"wrote weights (K={len(h.w)}, best objective "
               f"{h.history['objective_best']:.6g}) to {out}")


@main.command("predict")
@click.option("--weights", "weights_path", type=click.Path(exists=True), required=True)
@click.option("--bank", "bank_path", type=click.Path(exists=True), required=True)
@click.option("--query", type=str, required=True, help="Comma-separated node ids.")
@click.option("--budget", type=int, required=True)
def predict(weights_path, bank_path, query, budget):
    """Greedy target-task decision for a query under trained weights."""
    bank = storage.read_bank(bank_path)
    h = storage.read_weights(weights_path, bank)
    y = infer(h, _parse_ids(query), budget)
    click.echo(",".join(str(v) for v in sorted(y)))


@main.command("evaluate")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--report", "report_path", type=click.Path(), required=True)
def evaluate(config_path, report_path):
    """Run the full experiment described by a config file.

    Writes the human-readable table to REPORT and the machine-readable
    per-query records to REPORT.jsonl (deterministic per master seed).
    """
    cfg = storage.read_config(config_path)
    rep = run_experiment(cfg)
    Path(report_path).write_text(rep.to_text(), encoding="utf-8")
    Path(str(report_path) + ".jsonl").write_text(rep.to_jsonl(), encoding="utf-8")
    click.echo(rep.to_text(), nl=False)
    click.echo(f"report written to {report_path} (+ .jsonl)")


if __name__ == "__main__":
    main()
