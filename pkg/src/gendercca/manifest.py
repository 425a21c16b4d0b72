"""Batch manifest: one JSON file listing every language pair.

Example::

    {
      "config": {"seed": 1, "permutations": 999},
      "inventories": {"es": "MSC,FEM", "de": "MSC,FEM,NEU"},
      "pairs": [
        {"gendered": "es", "donor": "en",
         "lexicon": "lexicons/es-en.tsv", "embeddings": "vectors/en.vec"}
      ]
    }

Relative paths resolve against the manifest's directory. ``config`` keys
follow the CLI flag names (``train_frac``, ``seed``, ``permutations``,
``ridge``, ``alpha``, ``m``, ``dim``, ``normalize``).
"""

import json
from dataclasses import dataclass
from pathlib import Path

from .analysis import PairSpec, check_specs
from .dataset import GenderInventory
from .errors import ConfigError

CONFIG_KEYS = {
    "train_frac": "train_frac",
    "seed": "seed",
    "permutations": "B",
    "ridge": "ridge",
    "alpha": "alpha",
    "m": "m_hypotheses",
    "dim": "embedding_dim",
    "normalize": "normalize_embeddings",
}


@dataclass(frozen=True)
class BatchManifest:
    pairs: tuple
    overrides: dict


def _inventory(text, where):
    try:
        return GenderInventory.parse(text)
    except (ValueError, AttributeError) as exc:
        raise ConfigError(f"{where}: bad inventory {text!r}: {exc}") from None


def load_manifest(path):
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict) or not isinstance(raw.get("pairs"), list):
        raise ConfigError(f"{path}: expected an object with a 'pairs' list")

    unknown = set(raw) - {"config", "inventories", "pairs"}
    if unknown:
        raise ConfigError(f"{path}: unknown top-level keys {sorted(unknown)}")
    config = raw.get("config", {})
    bad = set(config) - set(CONFIG_KEYS)
    if bad:
        raise ConfigError(f"{path}: unknown config keys {sorted(bad)}")
    overrides = {CONFIG_KEYS[key]: value for key, value in config.items()}

    inventories = {
        lang: _inventory(text, f"{path}: inventories.{lang}")
        for lang, text in raw.get("inventories", {}).items()
    }
    base = path.parent
    specs = []
    for i, pair in enumerate(raw["pairs"]):
        where = f"{path}: pairs[{i}]"
        try:
            gendered, donor = str(pair["gendered"]), str(pair["donor"])
            lexicon, embeddings = pair["lexicon"], pair["embeddings"]
        except (KeyError, TypeError):
            raise ConfigError(
                f"{where}: needs 'gendered', 'donor', 'lexicon' and 'embeddings'"
            ) from None
        inventory = inventories.get(gendered)
        if "inventory" in pair:
            own = _inventory(pair["inventory"], where)
            if inventory is not None and own != inventory:
                raise ConfigError(f"{where}: inventory {own} contradicts {inventory} for {gendered}")
            inventory = own
        if inventory is None:
            raise ConfigError(f"{where}: no inventory for gendered language {gendered!r}")
        specs.append(
            PairSpec(str(base / lexicon), str(base / embeddings), inventory, gendered, donor)
        )
    check_specs(specs)
    return BatchManifest(tuple(specs), overrides)
