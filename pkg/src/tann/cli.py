"""Command-line experiment harness.

Subcommands: gate, depth-sweep, compare, text, cost, plot, replay.
Flag values win over config-file values (INI ``key = value`` sections named
after the command, plus an optional ``[common]`` section), which win over
built-in presets.  ``--out`` falls back to the TANN_OUT_DIR environment
variable.  Exit status is 0 only if every run completed; otherwise a JSON
failure list goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .exceptions import ContractError
from .experiments import (
    COMMANDS,
    execute,
    replay,
    resolve_options,
    resolve_out_dir,
)


def _positive_int(value):
    iv = int(value)
    if iv < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return iv


def _int_list(value):
    try:
        return [int(v) for v in value.replace(",", " ").split()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _add_common(parser):
    parser.add_argument("--out", help="output directory (default: $TANN_OUT_DIR/<cmd>)")
    parser.add_argument("--config", help="INI config file with per-command sections")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tann",
        description="Trie-augmented neural network experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gate", help="train trie vs single network on a logic gate")
    p.add_argument("gate", choices=["xor", "and", "or"])
    p.add_argument("--depth", type=_positive_int)
    p.add_argument("--epochs", type=_positive_int)
    p.add_argument("--lr", type=float)
    p.add_argument("--hidden-size", dest="hidden_size", type=_positive_int)
    p.add_argument("--seed", type=int, help="single seed (shorthand for --seeds)")
    p.add_argument("--seeds", type=_int_list, help="comma-separated seed list")
    p.add_argument("--step-mode", dest="step_mode",
                   choices=["route-local", "global"])
    p.add_argument("--routing", choices=["bits", "threshold"])
    p.add_argument("--workers", type=_positive_int)
    _add_common(p)

    p = sub.add_parser("depth-sweep", help="gate run repeated across trie depths")
    p.add_argument("gate", choices=["xor", "and", "or"])
    p.add_argument("--depths", type=_int_list)
    p.add_argument("--epochs", type=_positive_int)
    p.add_argument("--lr", type=float)
    p.add_argument("--hidden-size", dest="hidden_size", type=_positive_int)
    p.add_argument("--seeds", type=_int_list)
    p.add_argument("--step-mode", dest="step_mode",
                   choices=["route-local", "global"])
    p.add_argument("--routing", choices=["bits", "threshold"])
    p.add_argument("--workers", type=_positive_int)
    _add_common(p)

    p = sub.add_parser("compare", help="benchmark architectures with and without the trie")
    p.add_argument("--arch", choices=["all", "simple_dropout", "tiny_cnn",
                                      "tiny_rnn", "complex"])
    p.add_argument("--gate", choices=["xor", "and", "or"])
    p.add_argument("--depth", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=_positive_int)
    _add_common(p)

    p = sub.add_parser("text", help="text classification on a local corpus")
    p.add_argument("--data", help="corpus path (default: bundled mini spam set)")
    p.add_argument("--format", choices=["tsv", "dirs"])
    p.add_argument("--model", choices=["ffn", "rnn"])
    p.add_argument("--dropout", action="store_const", const=True, default=None)
    p.add_argument("--depth", type=_positive_int)
    p.add_argument("--epochs", type=_positive_int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-features", dest="max_features", type=_positive_int)
    p.add_argument("--weighting", choices=["tf", "tfidf"])
    _add_common(p)

    p = sub.add_parser("cost", help="per-node and per-inference cost estimate")
    p.add_argument("--depth", type=_positive_int)
    p.add_argument("--neurons", type=_positive_int)
    p.add_argument("--layers", type=_positive_int)
    p.add_argument("--cost-per-neuron", dest="cost_per_neuron", type=float)
    _add_common(p)

    p = sub.add_parser("plot", help="render trace CSVs to an SVG line plot")
    p.add_argument("traces", nargs="+", help="trace CSV files")
    _add_common(p)

    p = sub.add_parser("replay", help="re-run a recorded manifest")
    p.add_argument("manifest")
    _add_common(p)

    return parser


def _flags_for(command: str, ns: argparse.Namespace) -> dict:
    defaults = COMMANDS[command][0]
    flags = {}
    for key in defaults:
        if hasattr(ns, key):
            flags[key] = getattr(ns, key)
    # --seed is shorthand for a one-element seed list
    if "seeds" in defaults and getattr(ns, "seed", None) is not None:
        if flags.get("seeds") is None:
            flags["seeds"] = [ns.seed]
    return flags


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    command = ns.command
    try:
        if command == "replay":
            out_dir = resolve_out_dir(ns.out, "replay")
            art = replay(ns.manifest, out_dir)
        else:
            defaults = COMMANDS[command][0]
            flags = _flags_for(command, ns)
            options = resolve_options(defaults, ns.config, command, flags)
            out_dir = resolve_out_dir(ns.out, command)
            art = execute(command, options, out_dir)
    except (ContractError, OSError) as err:
        print(json.dumps({"failures": [str(err)]}), file=sys.stderr)
        return 1
    for line in art.summary_lines:
        print(line)
    print(f"wrote {len(art.files)} file(s) to {art.out_dir}")
    if art.failures:
        print(json.dumps({"failures": art.failures}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
