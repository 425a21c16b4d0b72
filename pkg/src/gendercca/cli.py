"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data or numerical error.
"""

import argparse
import json
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import reports
from .analysis import AnalysisConfig, analyze_pair, run_batch
from .cca import CcaModel
from .dataset import GenderInventory, load_embeddings, load_lexicon
from .errors import ConfigError, GenderCCAError
from .manifest import load_manifest
from .similarity import hierarchical_cluster, projection_similarity

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

log = logging.getLogger("gendercca")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ranged(kind, low=None, high=None, low_open=False, high_open=False):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value {text!r}") from None
        if low is not None and (value < low or (low_open and value == low)):
            raise argparse.ArgumentTypeError(f"{value} is out of range")
        if high is not None and (value > high or (high_open and value == high)):
            raise argparse.ArgumentTypeError(f"{value} is out of range")
        return value

    return parse


def _inventory(text):
    try:
        return GenderInventory.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_protocol_flags(parser, defaults):
    d = (lambda value: value) if defaults else (lambda value: None)
    parser.add_argument("--seed", type=_ranged(int, 0), default=d(0),
                        help="random seed for the split and permutations (default 0)")
    parser.add_argument("--permutations", type=_ranged(int, 0), default=d(100_000),
                        help="permutation replicates B (default 100000)")
    parser.add_argument("--train-frac", type=_ranged(float, 0, 1, True, True), default=d(0.75),
                        help="training fraction (default 0.75)")
    parser.add_argument("--ridge", type=_ranged(float, 0), default=d(1e-8),
                        help="covariance ridge (default 1e-8)")
    parser.add_argument("--alpha", type=_ranged(float, 0, 1, True, True), default=d(0.05),
                        help="significance level after correction (default 0.05)")
    parser.add_argument("--m", type=_ranged(int, 1), default=None,
                        help="Bonferroni hypothesis count (default: 1 for analyze, "
                             "number of pairs for batch)")
    parser.add_argument("--dim", type=_ranged(int, 1), default=d(50),
                        help="embedding dimensionality (default 50)")
    parser.add_argument("--normalize", action="store_true", default=False if defaults else None,
                        help="L2-normalize embeddings before fitting")
    parser.add_argument("--jobs", type=_ranged(int, 1), default=1,
                        help="concurrent workers (default 1)")


def _config_from(args, base=None):
    values = {
        "seed": args.seed,
        "B": args.permutations,
        "train_frac": args.train_frac,
        "ridge": args.ridge,
        "alpha": args.alpha,
        "m_hypotheses": args.m,
        "embedding_dim": args.dim,
        "normalize_embeddings": args.normalize,
    }
    values = {key: value for key, value in values.items() if value is not None}
    return replace(base or AnalysisConfig(), **values)


def build_parser():
    parser = _Parser(prog="gendercca", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="analyze one gendered/donor language pair")
    p.add_argument("lexicon", help="TSV of noun, gender, donor word")
    p.add_argument("embeddings", help="donor-language .vec file")
    p.add_argument("--inventory", type=_inventory, required=True,
                   help="ordered comma-separated gender labels, e.g. MSC,FEM")
    p.add_argument("--gendered", default="gendered", help="gendered language id")
    p.add_argument("--donor", default="donor", help="donor language id")
    _add_protocol_flags(p, defaults=True)

    p = sub.add_parser("batch", help="run every pair listed in a manifest")
    p.add_argument("manifest")
    p.add_argument("output_dir")
    _add_protocol_flags(p, defaults=False)

    p = sub.add_parser("similarity", help="compare projections across gendered languages")
    p.add_argument("inputs", nargs="+", help="model/result JSON files or a results directory")
    p.add_argument("--donor", required=True)
    p.add_argument("-o", "--output", required=True, help="similarity TSV path")
    p.add_argument("--tree", help="cluster tree JSON path (default: <output stem>.tree.json)")
    p.add_argument("--centered", action="store_true",
                   help="mean-center projections first (Pearson instead of cosine)")

    p = sub.add_parser("report", help="re-render plot-data TSVs from a results directory")
    p.add_argument("results_dir")
    p.add_argument("--out-dir", help="where to write (default: the results directory)")
    return parser


def _emit(record):
    sys.stdout.write(reports.dump_record(record) + "\n")


def cmd_analyze(args):
    config = _config_from(args)
    lexicon = load_lexicon(args.lexicon, args.inventory)
    embeddings = load_embeddings(args.embeddings, config.embedding_dim)
    if embeddings.duplicates:
        log.warning("%s: %d duplicate tokens ignored", args.embeddings, embeddings.duplicates)
    result = analyze_pair(
        lexicon, embeddings, args.inventory, config, args.gendered, args.donor, workers=args.jobs
    )
    _emit(result.to_record())
    return EXIT_OK


def cmd_batch(args):
    manifest = load_manifest(args.manifest)
    try:
        base = replace(AnalysisConfig(), **manifest.overrides)
    except TypeError as exc:
        raise ConfigError(f"{args.manifest}: {exc}") from None
    config = _config_from(args, base)
    results = run_batch(manifest.pairs, config, jobs=args.jobs)
    reports.write_batch_outputs(results, args.output_dir)
    succeeded = sum(r.ok for r in results)
    log.info("%d of %d pairs analyzed, %d significant", succeeded, len(results),
             sum(r.ok and r.significant for r in results))
    return EXIT_OK if succeeded else EXIT_DATA


def _load_models(inputs, donor):
    """Collect (label, model) pairs for ``donor`` from result/model files."""
    found = []
    for item in inputs:
        path = Path(item)
        if path.is_dir():
            path = path / reports.RESULTS_FILE
        if not path.exists():
            raise GenderCCAError(f"no such model file or results directory: {item}")
        if path.suffix == ".jsonl":
            for result in reports.read_results(path):
                if result.ok and result.donor_lang == donor:
                    found.append((result.gendered_lang, path.stem, result.model))
        else:
            try:
                record = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise GenderCCAError(f"{path}: invalid JSON: {exc}") from None
            if record.get("status") == "error" or "model" not in record:
                raise GenderCCAError(f"{path}: not a model or pair result record")
            if record.get("donor_lang") == donor:
                try:
                    model = CcaModel.from_dict(record["model"])
                except (ValueError, KeyError, TypeError) as exc:
                    raise GenderCCAError(f"{path}: bad model record: {exc}") from None
                found.append((record["gendered_lang"], path.stem, model))
    models = {}
    for lang, stem, model in found:
        label = lang if lang not in models else f"{lang}@{stem}"
        suffix = 2
        while label in models:
            label, suffix = f"{lang}@{stem}#{suffix}", suffix + 1
        models[label] = model
    return models


def cmd_similarity(args):
    models = _load_models(args.inputs, args.donor)
    if len(models) < 2:
        raise GenderCCAError(f"need at least 2 models for donor {args.donor!r}, found {len(models)}")
    sim = projection_similarity(models, args.donor, centered=args.centered)
    output = Path(args.output)
    output.parent.mkdir(parents=True, exist_ok=True)
    reports.write_similarity(sim, output)
    tree_path = Path(args.tree) if args.tree else output.with_suffix(".tree.json")
    reports.write_tree(hierarchical_cluster(sim), tree_path, args.donor)
    return EXIT_OK


def cmd_report(args):
    results_dir = Path(args.results_dir)
    out_dir = Path(args.out_dir) if args.out_dir else results_dir
    results = reports.read_results(results_dir / reports.RESULTS_FILE)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports.write_figure1(results, out_dir / reports.FIGURE1_FILE)
    for donor in sorted({r.donor_lang for r in results if r.ok}):
        models = {r.gendered_lang: r.model for r in results if r.ok and r.donor_lang == donor}
        if len(models) >= 2:
            reports.write_heatmap(projection_similarity(models, donor), out_dir / f"figure2_{donor}.tsv")
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "batch": cmd_batch,
    "similarity": cmd_similarity,
    "report": cmd_report,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    logging.captureWarnings(True)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[args.command](args)
    except (GenderCCAError, OSError, UnicodeDecodeError) as exc:
        print(f"gendercca {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
