"""Acceptance suite: one test per exit criterion, each at its pinned
tolerance and runtime budget. A PASS/FAIL line per criterion is printed
in the terminal summary.

The external-data checks (criterion 9) need real lexicon/fastText runs;
point ``GENDERCCA_EXTERNAL_RESULTS`` at the output directory of a
``gendercca batch`` run over the 90-pair manifest to enable them.
"""

import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

from gendercca.analysis import AnalysisConfig, analyze_pair
from gendercca.cca import CcaModel, fit_cca, project_and_correlate
from gendercca.cli import main
from gendercca.dataset import EmbeddingTable, GenderInventory, LexiconEntry
from gendercca.reports import read_results
from gendercca.similarity import projection_similarity
from gendercca.stats import bonferroni, permutation_test
from oracles import exhaustive_permutation_p, fsum_cosine, grid_max_corr, one_hot
from synthetic import null_views, signal_views, write_pair_files

MF = GenderInventory(("MSC", "FEM"))


def _lexicon(codes, E):
    tokens = tuple(f"w{i}" for i in range(len(codes)))
    entries = [LexiconEntry(f"n{i}", MF.labels[c], tokens[i]) for i, c in enumerate(codes)]
    return entries, EmbeddingTable(E.shape[0], tokens, E.T.copy())


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


@pytest.mark.criterion(1, "CCA matches angle-grid oracle on 200 instances within 1e-3, < 10 s")
def test_cca_oracle_equivalence():
    rng = np.random.default_rng(20240101)
    worst = 0.0
    with Timer() as timer:
        for _ in range(200):
            n = int(rng.integers(10, 61))
            dim = int(rng.choice([2, 3]))
            codes = rng.integers(0, 2, n)
            codes[:2] = (0, 1)
            E = rng.standard_normal((dim, n))
            E[0] += rng.uniform(0.0, 1.5) * codes
            rho = fit_cca(one_hot(codes), E).train_rho
            worst = max(worst, abs(rho - grid_max_corr(codes == 0, E)))
    print(f"worst |train_rho - oracle| = {worst:.2e}")
    assert worst <= 1e-3
    assert timer.seconds < 10


@pytest.mark.criterion(2, "affine invariance of train_rho < 1e-6 over 50 transforms, < 5 s")
def test_affine_invariance():
    rng = np.random.default_rng(7)
    worst, transforms = 0.0, 0
    with Timer() as timer:
        while transforms < 50:
            dim = int(rng.integers(2, 6))
            A = rng.standard_normal((dim, dim))
            if np.linalg.cond(A) >= 100:
                continue
            transforms += 1
            n = int(rng.integers(30, 80))
            codes = rng.integers(0, 2, n)
            codes[:2] = (0, 1)
            E = rng.standard_normal((dim, n))
            E[0] += 0.7 * codes
            shift = 10 * rng.standard_normal((dim, 1))
            base = fit_cca(one_hot(codes), E, ridge=0.0).train_rho
            moved = fit_cca(one_hot(codes), A @ E + shift, ridge=0.0).train_rho
            worst = max(worst, abs(base - moved))
    print(f"worst change = {worst:.2e}")
    assert worst < 1e-6
    assert timer.seconds < 5


@pytest.mark.criterion(3, "Monte Carlo p (B=100000) within 0.01 of exact 120-permutation p, < 2 min")
def test_exact_permutation_oracle():
    G_train = one_hot([0, 1, 0, 1, 1])
    E_train = np.array([[1.2, -0.4, 0.3, 0.1, -0.9], [0.5, 0.8, -1.0, 0.2, 0.4]])
    G_test = one_hot([0, 1, 1, 0, 1, 0, 0, 1])
    E_test = np.array([
        [0.7, -0.2, 0.4, 0.9, -1.1, 0.1, 0.3, -0.5],
        [0.3, 0.1, -0.6, 1.2, 0.4, -0.8, 0.2, 0.9],
    ])
    with Timer() as timer:
        exact, _ = exhaustive_permutation_p(
            G_train, E_train, G_test, E_test, 1e-8, fit_cca, project_and_correlate
        )
        outcome = permutation_test(G_train, E_train, G_test, E_test, B=100_000, seed=2019)
    print(f"exact p = {exact:.4f}, Monte Carlo p = {outcome.p_raw:.4f}")
    assert abs(outcome.p_raw - exact) <= 0.01
    assert timer.seconds < 120


@pytest.mark.criterion(4, "null calibration: P(p_raw <= 0.05) in [0.01, 0.10] over 200 replicates, < 10 min")
def test_null_calibration():
    hits = 0
    with Timer() as timer:
        for replicate in range(200):
            codes, E = null_views(np.random.default_rng(50_000 + replicate), 200, 10)
            config = AnalysisConfig(B=999, seed=replicate, embedding_dim=10)
            hits += analyze_pair(*_lexicon(codes, E), MF, config).p_raw <= 0.05
    print(f"fraction significant at 0.05 = {hits / 200:.3f}")
    assert 0.01 <= hits / 200 <= 0.10
    assert timer.seconds < 600


@pytest.mark.criterion(5, "positive control: rho >= 0.5 and corrected p < 0.05 in >= 19/20, < 5 min")
def test_positive_control():
    passes = floors = 0
    with Timer() as timer:
        for replicate in range(20):
            codes, E = signal_views(np.random.default_rng(70_000 + replicate), 1000, 50, flip=0.1)
            config = AnalysisConfig(B=9_999, seed=replicate, m_hypotheses=90)
            result = analyze_pair(*_lexicon(codes, E), MF, config)
            assert result.p_corrected == bonferroni(result.p_raw, 90)
            passes += result.rho >= 0.5 and result.p_corrected < 0.05
            floors += result.p_raw == 1 / 10_000
    print(f"{passes}/20 replicates pass, {floors}/20 at the p floor")
    assert passes >= 19
    assert floors >= 19
    assert timer.seconds < 300


@pytest.mark.criterion(6, "p-value and Bonferroni formula exactness")
def test_formula_exactness():
    codes, E = signal_views(np.random.default_rng(3), 400, 5, flip=0.0)
    G = one_hot(codes)
    views = (G[:, :300], E[:, :300], G[:, 300:], E[:, 300:])
    assert permutation_test(*views, B=0, seed=1).p_raw == 1.0
    outcome = permutation_test(*views, B=99, seed=1)
    assert outcome.exceed_count == 0
    assert outcome.p_raw == 0.01
    assert bonferroni(0.0005, 90) == pytest.approx(0.045, rel=1e-12)
    assert bonferroni(0.02, 90) == 1.0


@pytest.mark.criterion(7, "byte-identical batch outputs across reruns and --jobs 1 vs 8")
def test_batch_determinism(tmp_path):
    rng = np.random.default_rng(99)
    pairs = []
    for gendered in ("es", "fr", "it", "pl"):
        for donor in ("en", "ja"):
            views = signal_views(rng, 240, 6) if gendered != "pl" else null_views(rng, 240, 6)
            lexicon, vectors = write_pair_files(tmp_path, f"{gendered}-{donor}", *views)
            pairs.append({"gendered": gendered, "donor": donor,
                          "lexicon": lexicon.name, "embeddings": vectors.name})
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({
        "config": {"permutations": 199, "seed": 42, "dim": 6},
        "inventories": {lang: "MSC,FEM" for lang in ("es", "fr", "it", "pl")},
        "pairs": pairs,
    }))
    outputs = {}
    for name, jobs in (("first", "1"), ("second", "1"), ("parallel", "8")):
        assert main(["batch", str(manifest), str(tmp_path / name), "--jobs", jobs]) == 0
        assert main(["report", str(tmp_path / name)]) == 0
        outputs[name] = {p.name: p.read_bytes() for p in sorted((tmp_path / name).iterdir())}
    assert "results.jsonl" in outputs["first"] and "figure2_en.tsv" in outputs["first"]
    assert outputs["first"] == outputs["second"] == outputs["parallel"]


@pytest.mark.criterion(8, "similarity matrix contracts and 4-model cosine match to 1e-12")
def test_similarity_contracts():
    rng = np.random.default_rng(12)
    vectors = {lang: rng.standard_normal(50) * rng.uniform(0.01, 100) for lang in ("fr", "es", "it", "pl")}
    models = {
        lang: CcaModel(a=[1.0, -1.0], b=b, mean_g=[0.5, 0.5], mean_e=np.zeros(50), ridge=1e-8, train_rho=0.5)
        for lang, b in vectors.items()
    }
    sim = projection_similarity(models, "en")
    values = sim.values
    assert np.max(np.abs(values - values.T)) <= 1e-12
    assert np.max(np.abs(np.diag(values) - 1.0)) <= 1e-9
    assert np.all((values >= -1.0) & (values <= 1.0))
    for i, a in enumerate(sim.languages):
        for j, b in enumerate(sim.languages):
            assert abs(values[i, j] - fsum_cosine(vectors[a], vectors[b])) <= 1e-12


EXTERNAL = os.environ.get("GENDERCCA_EXTERNAL_RESULTS")


@pytest.mark.criterion("9a", "external data: es-en = 4947 and fr-en = 6257 nouns")
@pytest.mark.skipif(not EXTERNAL, reason="GENDERCCA_EXTERNAL_RESULTS not set")
def test_external_counts():
    results = {r.key: r for r in read_results(Path(EXTERNAL) / "results.jsonl") if r.ok}
    assert results["es", "en"].n_total == 4947
    assert results["fr", "en"].n_total == 6257


@pytest.mark.criterion("9b", "external data: 55 of 90 pairs significant")
@pytest.mark.skipif(not EXTERNAL, reason="GENDERCCA_EXTERNAL_RESULTS not set")
def test_external_significance_count():
    results = [r for r in read_results(Path(EXTERNAL) / "results.jsonl") if r.ok]
    assert len(results) == 90
    assert sum(r.significant for r in results) == 55


@pytest.mark.criterion("9c", "external data: sim(fr, es) > sim(fr, pl) for donor en")
@pytest.mark.skipif(not EXTERNAL, reason="GENDERCCA_EXTERNAL_RESULTS not set")
def test_external_similarity_order():
    models = {
        r.gendered_lang: r.model
        for r in read_results(Path(EXTERNAL) / "results.jsonl")
        if r.ok and r.donor_lang == "en"
    }
    sim = projection_similarity(models, "en")
    assert sim["fr", "es"] > sim["fr", "pl"]
