"""Command-line entry point: `run`, `score`, and `embed` subcommands.

Values resolve as defaults < config file < flags, and every run writes the
fully resolved configuration next to its outputs so it can be replayed
exactly (`gpembed run --config <out>/config.resolved`).
"""
from __future__ import annotations

import argparse
import os
import sys

from . import evolution, harness
from .complexity import CostClass, CostModel, baseline_complexity, complexity_report
from .dataset import DatasetError, load_csv
from .expr import Individual, TreeParseError, eval_individual, max_feature_index, parse


class ConfigError(ValueError):
    pass


# flat config-file keys, their types, and defaults (None = unset)
CONFIG_SCHEMA: dict[str, tuple[type, object]] = {
    "data.path": (str, None),
    "data.label_col": (str, None),
    "out.dir": (str, "out"),
    "evo.generations": (int, 1000),
    "evo.population": (int, 100),
    "evo.seed": (int, 0),
    "evo.p_xover": (float, 0.70),
    "evo.p_mut": (float, 0.15),
    "evo.p_tree_mut": (float, 0.15),
    "evo.min_depth": (int, 2),
    "evo.max_depth": (int, 14),
    "evo.neighbourhood": (int, 15),
    "evo.threads": (int, 1),
    "cost.mu": (float, 0.75),
    "cost.size_max": (int, 100),
    "cost.leaf": (float, 1.0),
    "cost.max_neighbours": (int, None),
    "eval.k": (int, 5),
    "eval.folds": (int, 10),
}
for _op in ("add", "sub", "mul", "pdiv", "max", "min", "abs", "relu", "sigmoid"):
    CONFIG_SCHEMA[f"cost.{_op}"] = (str, None)


def parse_config_file(path) -> dict[str, object]:
    values: dict[str, object] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_SCHEMA:
            raise ConfigError(f"{path}:{line_no}: unknown config key {key!r}")
        values[key] = _coerce(key, value)
    return values


def _coerce(key: str, value):
    if value is None:
        return None
    kind = CONFIG_SCHEMA[key][0]
    try:
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {value!r} as {kind.__name__}") from None
    return str(value)


def parse_cost_set(text: str) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ConfigError(f"--cost-set entries must look like op=class, got {item!r}")
        op, _, cls = item.partition("=")
        overrides[op.strip()] = cls.strip()
    return overrides


def resolve_config(args: argparse.Namespace) -> dict[str, object]:
    values = {key: default for key, (_, default) in CONFIG_SCHEMA.items()}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))

    flag_map = {
        "data": "data.path",
        "label_col": "data.label_col",
        "out": "out.dir",
        "seed": "evo.seed",
        "generations": "evo.generations",
        "population": "evo.population",
        "threads": "evo.threads",
        "p_xover": "evo.p_xover",
        "p_mut": "evo.p_mut",
        "p_tree_mut": "evo.p_tree_mut",
        "min_depth": "evo.min_depth",
        "max_depth": "evo.max_depth",
        "neighbourhood": "evo.neighbourhood",
        "mu": "cost.mu",
        "size_max": "cost.size_max",
        "leaf": "cost.leaf",
        "max_neighbours": "cost.max_neighbours",
        "k": "eval.k",
        "folds": "eval.folds",
    }
    for attr, key in flag_map.items():
        flag_value = getattr(args, attr, None)
        if flag_value is not None:
            values[key] = flag_value
    if getattr(args, "cost_set", None):
        for op, cls in parse_cost_set(args.cost_set).items():
            key = f"cost.{op}"
            if key not in CONFIG_SCHEMA or CONFIG_SCHEMA[key][0] is not str or "." in op:
                raise ConfigError(f"--cost-set names unknown operator {op!r}")
            values[key] = cls
    return values


def build_cost_model(values: dict[str, object]) -> CostModel:
    overrides = {}
    for op in ("add", "sub", "mul", "pdiv", "max", "min", "abs", "relu", "sigmoid"):
        assigned = values.get(f"cost.{op}")
        if assigned is not None:
            try:
                overrides[op] = CostClass.from_string(str(assigned))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    try:
        model = CostModel(
            mu=float(values["cost.mu"]),
            size_max=int(values["cost.size_max"]),
            leaf_complexity=float(values["cost.leaf"]),
        )
        return model.with_overrides(overrides) if overrides else model
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_evolution_config(values: dict[str, object]) -> evolution.EvolutionConfig:
    config = evolution.EvolutionConfig(
        generations=int(values["evo.generations"]),
        population_size=int(values["evo.population"]),
        p_crossover=float(values["evo.p_xover"]),
        p_standard_mutation=float(values["evo.p_mut"]),
        p_tree_mutation=float(values["evo.p_tree_mut"]),
        min_depth=int(values["evo.min_depth"]),
        max_depth=int(values["evo.max_depth"]),
        moead_neighbourhood=int(values["evo.neighbourhood"]),
        seed=int(values["evo.seed"]),
        threads=int(values["evo.threads"]),
    )
    try:
        config.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return config


def write_resolved(values: dict[str, object], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(values):
            if values[key] is None:
                continue
            fh.write(f"{key} = {values[key]}\n")


def _load_trees(path) -> Individual:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [line.strip() for line in fh]
    except OSError as exc:
        raise ConfigError(f"cannot read tree file {path}: {exc}") from exc
    trees = tuple(parse(line) for line in lines if line)
    if not trees:
        raise ConfigError(f"{path}: no trees found")
    return Individual(trees=trees)


def cmd_run(args) -> int:
    values = resolve_config(args)
    if not values.get("data.path"):
        raise ConfigError("a dataset is required (--data or data.path)")
    cost_model = build_cost_model(values)
    config = build_evolution_config(values)
    dataset = load_csv(
        values["data.path"],
        label_column=values.get("data.label_col"),
        max_neighbours=values.get("cost.max_neighbours"),
    )

    out_dir = str(values["out.dir"])
    os.makedirs(out_dir, exist_ok=True)
    write_resolved(values, os.path.join(out_dir, "config.resolved"))

    result = evolution.run(dataset, config, cost_model=cost_model)
    records = harness.report(
        result,
        dataset,
        config,
        out_dir,
        k=int(values["eval.k"]),
        folds=int(values["eval.folds"]),
        model=cost_model,
    )

    print(f"archive: {len(result.archive)} non-dominated individuals "
          f"({len(result.final_front)} in the final population front)")
    print(f"{'id':>4} {'cost':>10} {'complexity':>12} {'trees':>5} {'nodes':>5} {'knn_acc':>8}")
    entries = harness.sorted_entries(result.archive)
    for entry, rec in zip(entries, records):
        acc = f"{rec.knn_acc_mean:.3f}" if rec.knn_acc_mean == rec.knn_acc_mean else "-"
        print(
            f"{rec.entry_id:>4} {rec.cost:>10.4f} {rec.complexity:>12.2f} "
            f"{len(entry.individual.trees):>5} {rec.stats.n_nodes:>5} {acc:>8}"
        )
    print(f"reports written to {out_dir}")
    return 0


def cmd_score(args) -> int:
    values = resolve_config(args)
    cost_model = build_cost_model(values)
    ind = _load_trees(args.tree_file)
    rep = complexity_report(ind, cost_model)
    for idx, (tree, tc) in enumerate(zip(ind.trees, rep.trees)):
        base = baseline_complexity(tree)
        print(f"tree {idx}: F(T) = {tc.value}")
        print(f"  nodes = {tc.node_count}  scaling = {tc.scaling}  "
              f"asymmetry_total = {tc.asymmetry_total}  baseline = {base}")
        for contrib in tc.contributions:
            print(f"    {contrib.op}: formula {contrib.formula_value}, "
                  f"asymmetry {contrib.asymmetry}")
    print(f"individual complexity = {rep.total}")
    return 0


def cmd_embed(args) -> int:
    values = resolve_config(args)
    if not values.get("data.path"):
        raise ConfigError("a dataset is required (--data or data.path)")
    ind = _load_trees(args.tree_file)
    dataset = load_csv(
        values["data.path"],
        label_column=values.get("data.label_col"),
        max_neighbours=values.get("cost.max_neighbours"),
    )
    for idx, tree in enumerate(ind.trees):
        top = max_feature_index(tree)
        if top >= dataset.n_features:
            raise ConfigError(
                f"tree {idx} references f{top} but the dataset has "
                f"{dataset.n_features} features"
            )
    embedding = eval_individual(ind, dataset)
    out_path = args.out if args.out else "embedding.csv"
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(f"e{j}" for j in range(embedding.shape[1])) + "\n")
        for row in embedding:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"embedding ({embedding.shape[0]} x {embedding.shape[1]}) written to {out_path}")
    return 0


def _add_common_flags(sub: argparse.ArgumentParser, with_data: bool) -> None:
    sub.add_argument("--config", help="config file of 'key = value' lines")
    if with_data:
        sub.add_argument("--data", help="dataset CSV path")
        sub.add_argument("--label-col", dest="label_col", help="name of the label column")
        sub.add_argument("--max-neighbours", dest="max_neighbours", type=int)
    sub.add_argument("--mu", type=float, help="scaling threshold")
    sub.add_argument("--size-max", dest="size_max", type=int, help="scaling reference size")
    sub.add_argument("--leaf", type=float, help="leaf complexity weight")
    sub.add_argument("--cost-set", dest="cost_set",
                     help="operator cost overrides, e.g. mul=sum,relu=prod")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpembed",
        description="Evolve explainable tree mappings to low-dimensional embeddings.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    run_p = subs.add_parser("run", help="run an evolutionary search and write reports")
    _add_common_flags(run_p, with_data=True)
    run_p.add_argument("--out", help="output directory (default: out)")
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--generations", type=int)
    run_p.add_argument("--population", type=int)
    run_p.add_argument("--threads", type=int)
    run_p.add_argument("--p-xover", dest="p_xover", type=float)
    run_p.add_argument("--p-mut", dest="p_mut", type=float)
    run_p.add_argument("--p-tree-mut", dest="p_tree_mut", type=float)
    run_p.add_argument("--min-depth", dest="min_depth", type=int)
    run_p.add_argument("--max-depth", dest="max_depth", type=int)
    run_p.add_argument("--neighbourhood", type=int)
    run_p.add_argument("--k", type=int, help="KNN neighbours for evaluation")
    run_p.add_argument("--folds", type=int, help="cross-validation folds")
    run_p.set_defaults(func=cmd_run)

    score_p = subs.add_parser("score", help="print the complexity breakdown of trees")
    score_p.add_argument("tree_file", help="file of s-expressions, one per line")
    _add_common_flags(score_p, with_data=False)
    score_p.set_defaults(func=cmd_score)

    embed_p = subs.add_parser("embed", help="evaluate trees on a dataset to a CSV")
    embed_p.add_argument("tree_file", help="file of s-expressions, one per line")
    _add_common_flags(embed_p, with_data=True)
    embed_p.add_argument("--out", help="embedding CSV path (default: embedding.csv)")
    embed_p.set_defaults(func=cmd_embed)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DatasetError, TreeParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
