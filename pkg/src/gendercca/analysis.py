"""Per-pair pipeline (pair, split, fit, evaluate, test, correct) and the
batch driver over many gendered/donor language pairs."""

import functools
import hashlib
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .cca import DEFAULT_RIDGE, CcaModel, fit_cca
from .dataset import GenderInventory, build_paired_dataset, load_embeddings, load_lexicon, split
from .errors import ConfigError, GenderCCAError
from .stats import bonferroni, permutation_test

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnalysisConfig:
    train_frac: float = 0.75
    seed: int = 0
    B: int = 100_000
    ridge: float = DEFAULT_RIDGE
    alpha: float = 0.05
    m_hypotheses: int = None  # None: number of pairs in the batch
    embedding_dim: int = 50
    normalize_embeddings: bool = False

    def __post_init__(self):
        if not 0 < self.train_frac < 1:
            raise ConfigError(f"train_frac must lie in (0, 1), got {self.train_frac}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not isinstance(self.B, int) or self.B < 0:
            raise ConfigError(f"B must be a nonnegative integer, got {self.B!r}")
        if self.ridge < 0:
            raise ConfigError(f"ridge must be nonnegative, got {self.ridge}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.m_hypotheses is not None and (
            not isinstance(self.m_hypotheses, int) or self.m_hypotheses < 1
        ):
            raise ConfigError(f"m_hypotheses must be a positive integer, got {self.m_hypotheses!r}")
        if not isinstance(self.embedding_dim, int) or self.embedding_dim < 1:
            raise ConfigError(f"embedding_dim must be a positive integer, got {self.embedding_dim!r}")


@dataclass(frozen=True, eq=False)
class PairResult:
    gendered_lang: str
    donor_lang: str
    n_total: int
    n_train: int
    n_test: int
    rho: float
    p_raw: float
    p_corrected: float
    significant: bool
    model: CcaModel
    degenerate_permutations: int
    exceed_count: int
    seed: int
    B: int
    ridge: float
    alpha: float
    m_hypotheses: int
    train_frac: float

    ok = True

    @property
    def key(self):
        return (self.gendered_lang, self.donor_lang)

    def to_record(self):
        return {
            "status": "ok",
            "gendered_lang": self.gendered_lang,
            "donor_lang": self.donor_lang,
            "n_total": self.n_total,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "rho": self.rho,
            "train_rho": self.model.train_rho,
            "p_raw": self.p_raw,
            "p_corrected": self.p_corrected,
            "significant": self.significant,
            "alpha": self.alpha,
            "m_hypotheses": self.m_hypotheses,
            "B": self.B,
            "exceed_count": self.exceed_count,
            "degenerate_permutations": self.degenerate_permutations,
            "seed": self.seed,
            "ridge": self.ridge,
            "train_frac": self.train_frac,
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_record(cls, record):
        return cls(
            gendered_lang=record["gendered_lang"],
            donor_lang=record["donor_lang"],
            n_total=record["n_total"],
            n_train=record["n_train"],
            n_test=record["n_test"],
            rho=record["rho"],
            p_raw=record["p_raw"],
            p_corrected=record["p_corrected"],
            significant=record["significant"],
            model=CcaModel.from_dict(record["model"]),
            degenerate_permutations=record["degenerate_permutations"],
            exceed_count=record["exceed_count"],
            seed=record["seed"],
            B=record["B"],
            ridge=record["ridge"],
            alpha=record["alpha"],
            m_hypotheses=record["m_hypotheses"],
            train_frac=record["train_frac"],
        )


@dataclass(frozen=True)
class PairError:
    """Batch entry for a pair whose analysis failed."""

    gendered_lang: str
    donor_lang: str
    error_type: str
    message: str

    ok = False

    @property
    def key(self):
        return (self.gendered_lang, self.donor_lang)

    def to_record(self):
        return {
            "status": "error",
            "gendered_lang": self.gendered_lang,
            "donor_lang": self.donor_lang,
            "error_type": self.error_type,
            "message": self.message,
        }


@dataclass(frozen=True)
class PairSpec:
    lexicon: str
    embeddings: str
    inventory: GenderInventory
    gendered: str
    donor: str


def is_significant(p_corrected, alpha):
    return p_corrected < alpha


def analyze_pair(
    lexicon, embeddings, inventory, config, gendered_lang="gendered", donor_lang="donor", workers=1
):
    """Run the full pipeline for one gendered/donor pair.

    ``config.m_hypotheses`` of None means a single hypothesis. Errors from
    the data and CCA stages propagate with the pair prefixed to their
    message.
    """
    m = config.m_hypotheses or 1
    try:
        dataset = build_paired_dataset(
            lexicon, embeddings, inventory, normalize=config.normalize_embeddings
        )
        parts = split(dataset, config.train_frac, config.seed)
        G_train, E_train = parts.train(dataset)
        G_test, E_test = parts.test(dataset)
        model = fit_cca(G_train, E_train, config.ridge)
        outcome = permutation_test(
            G_train, E_train, G_test, E_test,
            B=config.B, seed=config.seed, ridge=config.ridge, workers=workers,
        )
    except GenderCCAError as exc:
        exc.pair = (gendered_lang, donor_lang)
        exc.args = (f"[{gendered_lang}-{donor_lang}] {exc}",)
        raise

    p_corrected = bonferroni(outcome.p_raw, m)
    return PairResult(
        gendered_lang=gendered_lang,
        donor_lang=donor_lang,
        n_total=dataset.size,
        n_train=len(parts.train_indices),
        n_test=len(parts.test_indices),
        rho=outcome.rho_observed,
        p_raw=outcome.p_raw,
        p_corrected=p_corrected,
        significant=is_significant(p_corrected, config.alpha),
        model=model,
        degenerate_permutations=outcome.degenerate_count,
        exceed_count=outcome.exceed_count,
        seed=config.seed,
        B=config.B,
        ridge=config.ridge,
        alpha=config.alpha,
        m_hypotheses=m,
        train_frac=config.train_frac,
    )


def pair_seed(seed, gendered, donor):
    """Per-pair seed, stable under adding or removing other pairs."""
    digest = hashlib.sha256(f"{seed}\x1f{gendered}\x1f{donor}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@functools.lru_cache(maxsize=2)
def _cached_embeddings(path, dim, stamp):
    return load_embeddings(path, dim)


def _embeddings_for(path, dim):
    info = os.stat(path)
    return _cached_embeddings(str(path), dim, (info.st_mtime_ns, info.st_size))


def _run_spec(spec, config):
    try:
        lexicon = load_lexicon(spec.lexicon, spec.inventory)
        embeddings = _embeddings_for(spec.embeddings, config.embedding_dim)
        pair_config = replace(config, seed=pair_seed(config.seed, spec.gendered, spec.donor))
        return analyze_pair(lexicon, embeddings, spec.inventory, pair_config, spec.gendered, spec.donor)
    except (GenderCCAError, OSError, UnicodeDecodeError) as exc:
        log.warning("pair %s-%s failed: %s", spec.gendered, spec.donor, exc)
        return PairError(spec.gendered, spec.donor, type(exc).__name__, str(exc))


def check_specs(pair_specs):
    if not pair_specs:
        raise ConfigError("a batch needs at least one pair")
    inventories, seen = {}, set()
    for spec in pair_specs:
        known = inventories.setdefault(spec.gendered, spec.inventory)
        if known != spec.inventory:
            raise ConfigError(
                f"inconsistent inventories for {spec.gendered}: {known} vs {spec.inventory}"
            )
        if (spec.gendered, spec.donor) in seen:
            raise ConfigError(f"duplicate pair {spec.gendered}-{spec.donor}")
        seen.add((spec.gendered, spec.donor))


def run_batch(pair_specs, config, jobs=1):
    """Analyze every pair; failed pairs become :class:`PairError` entries.

    The Bonferroni factor defaults to the number of pairs. Results are
    sorted by (gendered, donor) and do not depend on ``jobs``.
    """
    pair_specs = [
        spec if isinstance(spec, PairSpec) else PairSpec(*spec) for spec in pair_specs
    ]
    check_specs(pair_specs)
    if config.m_hypotheses is None:
        config = replace(config, m_hypotheses=len(pair_specs))
    # consecutive pairs sharing an embedding file hit the loader cache
    ordered = sorted(pair_specs, key=lambda s: (str(s.embeddings), s.gendered, s.donor))

    if jobs <= 1 or len(ordered) == 1:
        results = [_run_spec(spec, config) for spec in ordered]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_spec, ordered, [config] * len(ordered)))
    return sorted(results, key=lambda r: r.key)
