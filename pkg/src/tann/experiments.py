"""Experiment runners behind the CLI: gate benchmarks, depth sweeps,
architecture comparisons, text classification, cost reports.

Every command resolves its options (flags > config file > preset defaults),
runs, and writes a ``manifest.json`` recording the fully resolved options;
replaying a manifest reproduces every CSV byte for byte.  Output files are
written atomically (temp file + rename).  Independent runs within a command
can execute on a small thread pool; each run owns its trie.
"""

from __future__ import annotations

import configparser
import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import baselines
from .datasets import (
    VectorizerConfig,
    build_vocab,
    gate_dataset,
    load_dir_per_class,
    load_labeled_lines,
    train_test_split,
    vectorize,
)
from .exceptions import ContractError
from .metrics import METRICS_CSV_HEADER, metrics_csv_row
from .nn import losses
from .nn.network import init_params, mini_nn
from .plotting import parse_trace_csv, render_traces_svg
from .training import (
    TrainConfig,
    evaluate,
    trace_csv,
    train_single,
    train_tann,
    train_tann_batched,
)
from .trie import (
    BitConsume,
    CostModel,
    FeatureThreshold,
    assign_feature_indices,
    build_trie,
    estimate_cost,
    node_seed,
    structural_stats,
)

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1

DEFAULT_SEEDS = [1, 2, 3, 4, 5]


@dataclass
class RunArtifacts:
    out_dir: Path
    files: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    summary_lines: list = field(default_factory=list)  # printed by the CLI


# ------------------------------------------------------------- file plumbing


def write_atomic(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def resolve_out_dir(flag_value, command: str) -> Path:
    if flag_value:
        return Path(flag_value)
    env = os.environ.get("TANN_OUT_DIR")
    if env:
        return Path(env) / command
    return Path("tann-out") / command


def write_manifest(out_dir: Path, command: str, options: dict) -> Path:
    payload = {
        "tool": "tann",
        "manifest_version": MANIFEST_VERSION,
        "command": command,
        "options": options,
    }
    path = out_dir / MANIFEST_NAME
    write_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def load_manifest(path) -> tuple[str, dict]:
    payload = json.loads(Path(path).read_text())
    if payload.get("tool") != "tann":
        raise ContractError(f"{path} is not a tann manifest")
    return payload["command"], payload["options"]


def resolve_options(defaults: dict, config_file, section: str, flags: dict) -> dict:
    """Precedence: command-line flags > config file section > defaults."""
    resolved = dict(defaults)
    if config_file:
        parser = configparser.ConfigParser()
        read = parser.read(config_file)
        if not read:
            raise OSError(f"cannot read config file {config_file}")
        for sec in ("common", section):
            if parser.has_section(sec):
                for key, raw in parser.items(sec):
                    key = key.replace("-", "_")
                    if key not in resolved:
                        raise ContractError(
                            f"config key {key!r} unknown for command {section!r}"
                        )
                    resolved[key] = _coerce_like(resolved[key], raw)
    for key, value in flags.items():
        if value is not None:
            resolved[key] = value
    return resolved


def _coerce_like(template, raw: str):
    if isinstance(template, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(template, int):
        return int(raw)
    if isinstance(template, float):
        return float(raw)
    if isinstance(template, list):
        return [int(v) for v in raw.replace(",", " ").split()]
    return raw


def _routing(name: str, threshold: float = 0.5):
    if name == "bits":
        return BitConsume()
    if name == "threshold":
        return FeatureThreshold(threshold=threshold)
    raise ContractError(f"unknown routing {name!r}")


def _pool_map(fn, items, workers: int):
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _emit_plot_file(out_dir: Path, name: str, traces) -> str:
    svg = render_traces_svg(traces)
    write_atomic(out_dir / name, svg)
    return name


# -------------------------------------------------------------------- gate

GATE_DEFAULTS = {
    "gate": "xor",
    "depth": 3,
    "epochs": 200,
    "lr": 0.01,
    "hidden_size": 20,
    "seeds": DEFAULT_SEEDS,
    "step_mode": "route-local",
    "routing": "bits",
    "workers": 1,
}


def run_gate(options: dict, out_dir: Path) -> RunArtifacts:
    """Train the trie model and a single network with identical settings."""
    art = RunArtifacts(out_dir=out_dir)
    data = gate_dataset(options["gate"])
    seeds = list(options["seeds"])

    def one_seed(seed: int):
        cfg = TrainConfig(
            lr=options["lr"],
            epochs=options["epochs"],
            optimizer="adam",
            loss=losses.BCE,
            step_mode=options["step_mode"],
            routing=_routing(options["routing"]),
            seed=seed,
        )
        trie = build_trie(2, options["hidden_size"], options["depth"], seed=seed)
        assign_feature_indices(trie, ("cycle", 2))
        tann_rep = train_tann(trie, data, cfg)
        tann_m = evaluate(trie, data, cfg.routing)
        net = init_params(mini_nn(2, options["hidden_size"]), node_seed(seed, 1))
        single_rep = train_single(net, data, cfg)
        single_m = evaluate(net, data)
        return seed, tann_rep, tann_m, single_rep, single_m

    results = _pool_map(one_seed, seeds, options["workers"])
    cfg_label = (
        f"gate={options['gate']};depth={options['depth']};"
        f"epochs={options['epochs']};lr={options['lr']}"
    )
    summary = [METRICS_CSV_HEADER]
    tann_finals, single_finals = [], []
    plot_traces = []
    for seed, tann_rep, tann_m, single_rep, single_m in results:
        for model, rep, m in (("tann", tann_rep, tann_m),
                              ("single", single_rep, single_m)):
            name = f"trace_{model}_seed{seed}.csv"
            write_atomic(out_dir / name, trace_csv(rep.records))
            art.files.append(name)
            summary.append(
                metrics_csv_row(model, f"{cfg_label};seed={seed}",
                                options["depth"], rep.final_mean_loss,
                                m.accuracy, m.weighted_f1)
            )
            plot_traces.append(
                (f"{model}-s{seed}", [(r.epoch, r.mean_loss) for r in rep.records])
            )
        tann_finals.append(tann_rep.final_mean_loss)
        single_finals.append(single_rep.final_mean_loss)
    write_atomic(out_dir / "summary.csv", "\n".join(summary) + "\n")
    art.files.append("summary.csv")
    med_t, med_s = float(np.median(tann_finals)), float(np.median(single_finals))
    write_atomic(
        out_dir / "medians.csv",
        f"model,median_final_loss\ntann,{med_t!r}\nsingle,{med_s!r}\n",
    )
    art.files.append("medians.csv")
    art.files.append(_emit_plot_file(out_dir, "loss.svg", plot_traces))
    art.summary_lines.append(
        f"{options['gate']}: median final loss tann={med_t:.6f} "
        f"single={med_s:.6f}"
    )
    return art


# ------------------------------------------------------------- depth sweep

SWEEP_DEFAULTS = {
    "gate": "xor",
    "depths": [1, 2, 3, 4, 5],
    "epochs": 200,
    "lr": 0.01,
    "hidden_size": 20,
    "seeds": DEFAULT_SEEDS,
    "step_mode": "route-local",
    "routing": "bits",
    "workers": 1,
}


def run_depth_sweep(options: dict, out_dir: Path) -> RunArtifacts:
    art = RunArtifacts(out_dir=out_dir)
    if not options["depths"]:
        raise ContractError("depth sweep needs at least one depth")
    depths = []
    for d in options["depths"]:
        if d in depths:
            art.summary_lines.append(f"duplicate depth {d} ignored")
        else:
            depths.append(d)
    data = gate_dataset(options["gate"])
    seeds = list(options["seeds"])

    def one(job):
        depth, seed = job
        cfg = TrainConfig(
            lr=options["lr"], epochs=options["epochs"], optimizer="adam",
            loss=losses.BCE, step_mode=options["step_mode"],
            routing=_routing(options["routing"]), seed=seed,
        )
        trie = build_trie(2, options["hidden_size"], depth, seed=seed)
        rep = train_tann(trie, data, cfg)
        m = evaluate(trie, data, cfg.routing)
        return depth, seed, rep, m

    jobs = [(d, s) for d in depths for s in seeds]
    results = _pool_map(one, jobs, options["workers"])
    by_depth: dict[int, list] = {d: [] for d in depths}
    for depth, seed, rep, m in results:
        name = f"trace_depth{depth}_seed{seed}.csv"
        write_atomic(out_dir / name, trace_csv(rep.records))
        art.files.append(name)
        by_depth[depth].append((seed, rep.final_mean_loss, m.accuracy))
    lines = ["depth,median_final_loss,min_accuracy"]
    for d in depths:
        finals = [f for _, f, _ in by_depth[d]]
        accs = [a for _, _, a in by_depth[d]]
        lines.append(f"{d},{float(np.median(finals))!r},{min(accs)!r}")
        art.summary_lines.append(
            f"depth {d}: median final loss {float(np.median(finals)):.6f}, "
            f"min accuracy {min(accs):.2f}"
        )
    write_atomic(out_dir / "sweep.csv", "\n".join(lines) + "\n")
    art.files.append("sweep.csv")
    return art


# ----------------------------------------------------------------- compare

COMPARE_DEFAULTS = {
    "arch": "all",
    "gate": "xor",
    "depth": 3,
    "seed": 1,
    "workers": 1,
}


def run_compare(options: dict, out_dir: Path) -> RunArtifacts:
    """Each architecture standalone and embedded per trie node, with its
    benchmark training configuration."""
    art = RunArtifacts(out_dir=out_dir)
    if options["arch"] == "all":
        kinds = list(baselines.GATE_KINDS)
    elif options["arch"] in baselines.GATE_KINDS:
        kinds = [options["arch"]]
    else:
        raise ContractError(f"unknown comparison architecture {options['arch']!r}")
    data = gate_dataset(options["gate"])
    seed = options["seed"]

    def one(job):
        kind, variant = job
        cfg = replace(baselines.make_comparison_config(kind), seed=seed)
        spec = baselines.ArchSpec(kind=kind)
        if variant == "standalone":
            net = baselines.make_network(spec, seed=node_seed(seed, 1))
            rep = train_single(net, data, cfg)
            m = evaluate(net, data)
        else:
            trie = baselines.embed_in_trie(spec, options["depth"], seed=seed)
            rep = train_tann(trie, data, cfg)
            m = evaluate(trie, data, cfg.routing)
        return kind, variant, cfg, rep, m

    jobs = [(k, v) for k in kinds for v in ("standalone", "tann")]
    results = _pool_map(one, jobs, options["workers"])
    summary = [METRICS_CSV_HEADER]
    plot_traces = []
    for kind, variant, cfg, rep, m in results:
        name = f"trace_{kind}_{variant}.csv"
        write_atomic(out_dir / name, trace_csv(rep.records))
        art.files.append(name)
        cfg_label = (
            f"variant={variant};lr={cfg.lr};optimizer={cfg.optimizer};"
            f"loss={cfg.loss};epochs={cfg.epochs};gate={options['gate']};"
            f"seed={seed}"
        )
        depth = options["depth"] if variant == "tann" else 0
        summary.append(
            metrics_csv_row(kind, cfg_label, depth, rep.final_mean_loss,
                            m.accuracy, m.weighted_f1)
        )
        plot_traces.append(
            (f"{kind}-{variant}", [(r.epoch, r.mean_loss) for r in rep.records])
        )
        art.summary_lines.append(
            f"{kind} {variant}: final loss {rep.final_mean_loss:.6f}"
        )
    write_atomic(out_dir / "summary.csv", "\n".join(summary) + "\n")
    art.files.append("summary.csv")
    art.files.append(_emit_plot_file(out_dir, "loss.svg", plot_traces))
    return art


# -------------------------------------------------------------------- text

TEXT_DEFAULTS = {
    "data": "",  # empty -> bundled mini corpus
    "format": "tsv",  # or "dirs"
    "model": "ffn",
    "dropout": False,
    "depth": 1,
    "epochs": 3,
    "lr": 0.001,
    "batch_size": 8,
    "seed": 1,
    "max_features": 2000,
    "weighting": "tfidf",
    "split_ratio": 0.8,
    "threshold": 0.5,
    "workers": 1,
}


def run_text(options: dict, out_dir: Path) -> RunArtifacts:
    art = RunArtifacts(out_dir=out_dir)
    data_path = options["data"]
    if not data_path:
        from .datasets import bundled_spam_path

        data_path = str(bundled_spam_path())
    if options["format"] == "tsv":
        corpus = load_labeled_lines(data_path)
    elif options["format"] == "dirs":
        corpus = load_dir_per_class(data_path)
    else:
        raise ContractError(f"unknown corpus format {options['format']!r}")
    vcfg = VectorizerConfig(
        max_features=options["max_features"], weighting=options["weighting"]
    )
    ds = vectorize(corpus, build_vocab(corpus, vcfg), vcfg)
    train, test = train_test_split(ds, options["split_ratio"], seed=options["seed"])

    kind = {"ffn": baselines.TEXT_FFN, "rnn": baselines.TEXT_RNN}.get(options["model"])
    if kind is None:
        raise ContractError(f"unknown text model {options['model']!r}")
    spec = baselines.ArchSpec(
        kind=kind,
        input_size=ds.feature_width,
        num_classes=ds.num_classes,
        dropout=options["dropout"],
    )
    trie = baselines.embed_in_trie(spec, options["depth"], seed=options["seed"])
    assign_feature_indices(trie, ("cycle", ds.feature_width))
    cfg = TrainConfig(
        lr=options["lr"],
        epochs=options["epochs"],
        optimizer="adam",
        loss=losses.CROSS_ENTROPY,
        routing=FeatureThreshold(threshold=options["threshold"]),
        batch_size=options["batch_size"],
        seed=options["seed"],
        shuffle=True,
    )
    rep = train_tann_batched(trie, train, cfg)
    m = evaluate(trie, test, cfg.routing)
    write_atomic(out_dir / "trace.csv", trace_csv(rep.records))
    art.files.append("trace.csv")
    model_name = f"tann_text_{options['model']}"
    cfg_label = (
        f"dropout={options['dropout']};epochs={options['epochs']};"
        f"lr={options['lr']};batch={options['batch_size']};"
        f"seed={options['seed']};vocab={ds.feature_width}"
    )
    rows = [
        METRICS_CSV_HEADER,
        metrics_csv_row(model_name, cfg_label, options["depth"],
                        rep.final_mean_loss, m.accuracy, m.weighted_f1),
    ]
    write_atomic(out_dir / "metrics.csv", "\n".join(rows) + "\n")
    art.files.append("metrics.csv")
    art.summary_lines.append(
        f"{model_name} depth={options['depth']}: held-out accuracy "
        f"{m.accuracy:.4f}, weighted F1 {m.weighted_f1:.4f}"
    )
    return art


# -------------------------------------------------------------------- cost

COST_DEFAULTS = {
    "depth": 3,
    "neurons": 21,
    "layers": 2,
    "cost_per_neuron": 1.0,
}


def run_cost(options: dict, out_dir: Path) -> RunArtifacts:
    art = RunArtifacts(out_dir=out_dir)
    if options["depth"] < 1:
        raise ContractError("cost report needs depth >= 1")
    cm = CostModel(
        neurons=options["neurons"],
        layers=options["layers"],
        per_neuron_cost=options["cost_per_neuron"],
    )
    trie = build_trie(1, 1, options["depth"], seed=0)
    est = estimate_cost(trie, cm)
    stats = structural_stats(trie)
    lines = [
        f"depth={options['depth']} nodes={stats.node_count} height={stats.height}",
        f"t_node={est.t_node!r}",
        f"per_inference={est.per_inference!r}",
    ]
    text = "\n".join(lines) + "\n"
    write_atomic(out_dir / "cost.txt", text)
    art.files.append("cost.txt")
    art.summary_lines.extend(lines)
    return art


# -------------------------------------------------------------------- plot

PLOT_DEFAULTS = {
    "traces": [],
}


def run_plot(options: dict, out_dir: Path) -> RunArtifacts:
    art = RunArtifacts(out_dir=out_dir)
    paths = options["traces"]
    if not paths:
        raise ContractError("plot needs at least one trace CSV")
    traces = []
    for p in paths:
        traces.append((Path(p).stem, parse_trace_csv(Path(p).read_text())))
    art.files.append(_emit_plot_file(out_dir, "plot.svg", traces))
    art.summary_lines.append(f"plotted {len(traces)} trace(s)")
    return art


# ------------------------------------------------------------------ replay

COMMANDS = {
    "gate": (GATE_DEFAULTS, run_gate),
    "depth-sweep": (SWEEP_DEFAULTS, run_depth_sweep),
    "compare": (COMPARE_DEFAULTS, run_compare),
    "text": (TEXT_DEFAULTS, run_text),
    "cost": (COST_DEFAULTS, run_cost),
    "plot": (PLOT_DEFAULTS, run_plot),
}


def execute(command: str, options: dict, out_dir: Path) -> RunArtifacts:
    """Run a command and write its manifest; exceptions become failures."""
    defaults, runner = COMMANDS[command]
    unknown = set(options) - set(defaults)
    if unknown:
        raise ContractError(f"unknown options for {command}: {sorted(unknown)}")
    merged = {**defaults, **options}
    out_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(out_dir, command, merged)
    art = runner(merged, out_dir)
    art.files.append(MANIFEST_NAME)
    return art


def replay(manifest_path, out_dir: Path) -> RunArtifacts:
    command, options = load_manifest(manifest_path)
    return execute(command, options, out_dir)
