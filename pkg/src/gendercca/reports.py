"""Writers and readers for batch outputs: JSON-lines results, TSV summary,
plot data, similarity matrices and cluster trees.

Floats are written with ``repr`` and no run-dependent metadata is
emitted, so identical inputs give byte-identical files.
"""

import json
from pathlib import Path

from .analysis import PairError, PairResult

RESULTS_FILE = "results.jsonl"
SUMMARY_FILE = "summary.tsv"
FIGURE1_FILE = "figure1.tsv"


def _num(value):
    return repr(float(value))


def _write_tsv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write("\t".join(header) + "\n")
        for row in rows:
            out.write("\t".join(str(cell) for cell in row) + "\n")


def dump_record(record):
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def write_results(results, path):
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for result in results:
            out.write(dump_record(result.to_record()) + "\n")


def read_results(path):
    """Parse a results file back into PairResult / PairError objects."""
    results = []
    with open(path, encoding="utf-8") as stream:
        for line in stream:
            if not line.strip():
                continue
            record = json.loads(line)
            if record.get("status") == "error":
                results.append(
                    PairError(
                        record["gendered_lang"],
                        record["donor_lang"],
                        record["error_type"],
                        record["message"],
                    )
                )
            else:
                results.append(PairResult.from_record(record))
    return results


def _pair_label(result):
    return f"{result.gendered_lang}-{result.donor_lang}"


def write_summary(results, path):
    rows = []
    for r in results:
        if r.ok:
            rows.append([
                _pair_label(r), r.n_total, _num(r.rho), _num(r.p_raw),
                _num(r.p_corrected), str(r.significant).lower(),
            ])
        else:
            rows.append([_pair_label(r), "", "", "", "", f"error:{r.error_type}"])
    _write_tsv(path, ["pair", "n", "rho", "p_raw", "p_corrected", "significant"], rows)


def write_figure1(results, path):
    """Bar-chart data: one bar per successful pair, ``*`` marks significance."""
    rows = [
        [_pair_label(r), r.gendered_lang, r.donor_lang, _num(r.rho), "*" if r.significant else ""]
        for r in results
        if r.ok
    ]
    _write_tsv(path, ["pair", "gendered", "donor", "rho", "significance"], rows)


def write_similarity(sim, path):
    rows = [[lang] + [_num(v) for v in row] for lang, row in zip(sim.languages, sim.values)]
    _write_tsv(path, [sim.donor] + list(sim.languages), rows)


def write_heatmap(sim, path):
    """Long-format heatmap data, one row per ordered language pair."""
    rows = [
        [a, b, _num(sim.values[i, j])]
        for i, a in enumerate(sim.languages)
        for j, b in enumerate(sim.languages)
    ]
    _write_tsv(path, ["language_a", "language_b", "similarity"], rows)


def write_tree(tree, path, donor=None):
    payload = {"donor": donor, "linkage": "average", "distance": "1 - cosine", "tree": tree.to_dict()}
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def write_batch_outputs(results, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_results(results, out_dir / RESULTS_FILE)
    write_summary(results, out_dir / SUMMARY_FILE)
    write_figure1(results, out_dir / FIGURE1_FILE)
