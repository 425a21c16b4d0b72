"""Cross-language comparison of embedding-side projections: a cosine
similarity matrix over gendered languages and an average-linkage tree
built on ``1 - cosine``."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DimensionMismatch


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    languages: tuple
    donor: str
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (len(self.languages), len(self.languages)):
            raise DimensionMismatch("similarity values must be square over the languages")
        values.setflags(write=False)
        object.__setattr__(self, "languages", tuple(self.languages))
        object.__setattr__(self, "values", values)

    def __getitem__(self, pair):
        i, j = (self.languages.index(lang) for lang in pair)
        return float(self.values[i, j])

    def distances(self):
        return 1.0 - self.values


def _unit(vector, centered):
    v = np.asarray(vector, dtype=np.float64)
    if centered:
        v = v - v.mean()
    norm = np.sqrt(v @ v)
    if norm == 0.0:
        raise DegenerateInput("cannot compare a zero projection vector")
    return v / norm


def projection_similarity(models, donor, centered=False):
    """Pairwise cosine similarity of the models' embedding projections.

    ``models`` maps gendered-language id to a fitted model against the
    same donor. With ``centered=True`` each vector is mean-centered
    first, giving a Pearson correlation instead of a cosine.
    """
    if not models:
        raise DegenerateInput("no models to compare")
    languages = sorted(models)
    dims = {models[lang].b.size for lang in languages}
    if len(dims) != 1:
        raise DimensionMismatch(f"projection vectors have differing lengths {sorted(dims)}")
    units = [_unit(models[lang].b, centered) for lang in languages]
    k = len(languages)
    values = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            values[i, j] = values[j, i] = min(1.0, max(-1.0, float(units[i] @ units[j])))
    return SimilarityMatrix(tuple(languages), donor, values)


@dataclass(frozen=True)
class ClusterNode:
    members: tuple
    height: float = 0.0
    left: "ClusterNode" = None
    right: "ClusterNode" = None
    step: int = -1

    @property
    def is_leaf(self):
        return self.left is None

    def to_dict(self):
        if self.is_leaf:
            return {"language": self.members[0], "height": 0.0}
        return {
            "height": self.height,
            "members": list(self.members),
            "children": [self.left.to_dict(), self.right.to_dict()],
        }

    def merges(self):
        """Internal nodes in the order they were merged."""
        if self.is_leaf:
            return []
        nodes = self.left.merges() + self.right.merges() + [self]
        return sorted(nodes, key=lambda node: node.step)


def hierarchical_cluster(sim):
    """Average-linkage agglomeration over ``d = 1 - similarity``.

    Ties on distance go to the pair of clusters whose sorted member ids
    come first lexicographically. The left child of every merge is the
    lexicographically smaller cluster.
    """
    index = {lang: i for i, lang in enumerate(sim.languages)}
    dist = sim.distances()
    clusters = [ClusterNode((lang,)) for lang in sorted(sim.languages)]

    def linkage(x, y):
        total = sum(dist[index[p], index[q]] for p in x.members for q in y.members)
        return total / (len(x.members) * len(y.members))

    step = 0
    while len(clusters) > 1:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                key = (linkage(clusters[i], clusters[j]), clusters[i].members, clusters[j].members)
                if best is None or key < best[0]:
                    best = (key, i, j)
        (height, _, _), i, j = best
        left, right = clusters[i], clusters[j]
        members = tuple(sorted(left.members + right.members))
        merged = ClusterNode(members, max(height, 0.0), left, right, step)
        step += 1
        clusters = [c for k, c in enumerate(clusters) if k not in (i, j)] + [merged]
        clusters.sort(key=lambda c: c.members)
    return clusters[0]
