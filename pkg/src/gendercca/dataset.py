"""Loading embedding tables and gender lexicons, and pairing them into
the one-hot gender / embedding matrices the CCA stage consumes.

Columns are nouns throughout: ``G`` is ``n_genders x V`` and ``E`` is
``dim x V``.
"""

import unicodedata
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSplit,
    EmptyDataset,
    HeaderMismatch,
    MalformedLine,
    MissingGenderClass,
    UnknownGender,
)


def normalize_token(token):
    return unicodedata.normalize("NFC", token)


def _frozen(array):
    array = np.array(array, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class GenderInventory:
    labels: tuple

    def __post_init__(self):
        labels = tuple(normalize_token(str(label).strip()) for label in self.labels)
        if len(labels) not in (2, 3):
            raise ValueError(f"a gender inventory needs 2 or 3 labels, got {len(labels)}")
        if len(set(labels)) != len(labels) or not all(labels):
            raise ValueError(f"gender labels must be unique and non-empty: {labels}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def parse(cls, text):
        """Build from a comma-separated spec such as ``"MSC,FEM,NEU"``."""
        return cls(tuple(part for part in text.split(",")))

    def index(self, label):
        return self.labels.index(label)

    def __len__(self):
        return len(self.labels)

    def __str__(self):
        return ",".join(self.labels)


@dataclass(frozen=True)
class LexiconEntry:
    noun: str
    gender: str
    donor_word: str


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Token -> vector map backed by one ``(count, dim)`` float64 array."""

    dim: int
    tokens: tuple
    vectors: np.ndarray
    duplicates: int = 0
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        vectors = _frozen(self.vectors).reshape(len(self.tokens), self.dim)
        object.__setattr__(self, "vectors", vectors)
        index = {}
        for row, token in enumerate(self.tokens):
            if token in index:
                raise ValueError(f"duplicate token {token!r}")
            index[token] = row
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self._index

    def __getitem__(self, token):
        return self.vectors[self._index[token]]

    def get(self, token, default=None):
        row = self._index.get(token)
        return default if row is None else self.vectors[row]


@dataclass(frozen=True, eq=False)
class PairedDataset:
    """Nouns paired column-wise with one-hot genders ``G`` and embeddings ``E``."""

    nouns: tuple
    G: np.ndarray
    E: np.ndarray
    inventory: GenderInventory
    entries: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "G", _frozen(self.G))
        object.__setattr__(self, "E", _frozen(self.E))
        if self.G.shape[1] != self.E.shape[1] or self.G.shape[1] != len(self.nouns):
            raise ValueError("G, E and nouns must have the same number of columns")
        if self.G.shape[0] != len(self.inventory):
            raise ValueError("G must have one row per inventory label")
        if not (np.all((self.G == 0) | (self.G == 1)) and np.all(self.G.sum(axis=0) == 1)):
            raise ValueError("every column of G must be one-hot")

    @property
    def size(self):
        return len(self.nouns)

    @property
    def dim(self):
        return self.E.shape[0]

    def gender_codes(self):
        return np.argmax(self.G, axis=0)


@dataclass(frozen=True)
class SplitDataset:
    train_indices: tuple
    test_indices: tuple
    seed: int

    def train(self, dataset):
        idx = list(self.train_indices)
        return dataset.G[:, idx], dataset.E[:, idx]

    def test(self, dataset):
        idx = list(self.test_indices)
        return dataset.G[:, idx], dataset.E[:, idx]


def parse_embeddings(stream, expected_dim=50, source=None, vocabulary=None):
    """Parse a fastText-style ``.vec`` text stream.

    The first line is ``<count> <dim>``; every other line is a token
    followed by ``dim`` space-separated floats. Duplicate tokens keep
    their first vector and are counted in ``EmbeddingTable.duplicates``.

    If ``vocabulary`` is given, only those tokens are stored; other lines
    are still checked for the right field count.
    """
    header = stream.readline()
    parts = header.split()
    if len(parts) != 2:
        raise MalformedLine(1, f"expected header '<count> <dim>', got {header.strip()!r}", source)
    try:
        _, declared_dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise MalformedLine(1, f"non-integer header {header.strip()!r}", source) from None
    if declared_dim != expected_dim:
        raise HeaderMismatch(
            f"{source or 'embeddings'}: header declares dim {declared_dim}, expected {expected_dim}"
        )
    if vocabulary is not None:
        vocabulary = {normalize_token(word) for word in vocabulary}

    tokens, rows, seen = [], [], set()
    duplicates = 0
    for line_no, line in enumerate(stream, start=2):
        line = line.rstrip("\r\n").rstrip(" ")
        if not line:
            continue
        fields = line.split(" ")
        if len(fields) != expected_dim + 1:
            raise MalformedLine(
                line_no, f"expected {expected_dim + 1} fields, got {len(fields)}", source
            )
        token = normalize_token(fields[0])
        if token in seen:
            duplicates += 1
            continue
        seen.add(token)
        if vocabulary is not None and token not in vocabulary:
            continue
        try:
            rows.append([float(value) for value in fields[1:]])
        except ValueError as exc:
            raise MalformedLine(line_no, f"unparsable float ({exc})", source) from None
        tokens.append(token)

    vectors = np.array(rows, dtype=np.float64).reshape(len(tokens), expected_dim)
    return EmbeddingTable(expected_dim, tuple(tokens), vectors, duplicates)


def write_embeddings(table, stream):
    """Inverse of :func:`parse_embeddings`; floats are written with ``repr``
    so a round trip is exact."""
    stream.write(f"{len(table)} {table.dim}\n")
    for token, vector in zip(table.tokens, table.vectors):
        stream.write(token + " " + " ".join(repr(float(v)) for v in vector) + "\n")


def load_embeddings(path, expected_dim=50, vocabulary=None):
    with open(path, encoding="utf-8") as stream:
        return parse_embeddings(stream, expected_dim, source=str(path), vocabulary=vocabulary)


def parse_lexicon(stream, inventory, source=None):
    """Parse ``noun<TAB>gender<TAB>donor_word`` rows; ``#`` lines are comments."""
    entries = []
    for line_no, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise MalformedLine(line_no, f"expected 3 tab-separated fields, got {len(fields)}", source)
        noun, gender, donor = (normalize_token(f.strip()) for f in fields)
        if not noun or not donor:
            raise MalformedLine(line_no, "empty noun or donor word", source)
        if gender not in inventory.labels:
            raise UnknownGender(
                line_no, f"gender {gender!r} not in inventory ({inventory})", source
            )
        entries.append(LexiconEntry(noun, gender, donor))
    return entries


def load_lexicon(path, inventory):
    with open(path, encoding="utf-8") as stream:
        return parse_lexicon(stream, inventory, source=str(path))


def build_paired_dataset(entries, embeddings, inventory, normalize=False):
    """Intersect a lexicon with an embedding table.

    Entries whose donor word has no embedding are dropped, then repeated
    gendered nouns keep their first entry.
    """
    kept, seen = [], set()
    for entry in entries:
        if entry.noun in seen or entry.donor_word not in embeddings:
            continue
        seen.add(entry.noun)
        kept.append(entry)
    if not kept:
        raise EmptyDataset("no lexicon entry has an embedding for its donor word")

    G = np.zeros((len(inventory), len(kept)))
    G[[inventory.index(e.gender) for e in kept], np.arange(len(kept))] = 1.0
    E = np.stack([embeddings[e.donor_word] for e in kept], axis=1)
    if normalize:
        norms = np.linalg.norm(E, axis=0)
        E = E / np.where(norms > 0, norms, 1.0)

    missing = [label for label, count in zip(inventory.labels, G.sum(axis=1)) if count == 0]
    if missing:
        warnings.warn(f"no retained nouns for gender(s) {', '.join(missing)}", MissingGenderClass)
    return PairedDataset(tuple(e.noun for e in kept), G, E, inventory, tuple(kept))


def split_stream(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(0,))))


def split(dataset, train_frac=0.75, seed=0):
    """Random train/test partition of the dataset columns, fixed by ``seed``."""
    if not 0 < train_frac < 1:
        raise ValueError(f"train_frac must lie in (0, 1), got {train_frac}")
    size = dataset.size
    if size < 4:
        raise DegenerateSplit(f"need at least 4 nouns to split, got {size}")
    n_train = int(np.floor(train_frac * size + 0.5))  # round half up
    if n_train == 0 or n_train == size:
        raise DegenerateSplit(f"train_frac {train_frac} leaves an empty side for {size} nouns")

    order = split_stream(seed).permutation(size)
    train = tuple(sorted(int(i) for i in order[:n_train]))
    test = tuple(sorted(int(i) for i in order[n_train:]))

    codes = dataset.gender_codes()
    for name, idx in (("train", train), ("test", test)):
        if len(np.unique(codes[list(idx)])) < 2:
            raise DegenerateSplit(f"{name} side contains a single gender")
    return SplitDataset(train, test, seed)
