"""Single-component CCA between a one-hot gender view and an embedding view.

Both views are whitened with a ridge-regularized inverse square root of
their covariance, and the top singular pair of the whitened
cross-covariance gives the projections.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DimensionMismatch, NumericalFailure

DEFAULT_RIDGE = 1e-8
MODEL_FORMAT = "gendercca.cca-model/1"


@dataclass(frozen=True)
class PearsonResult:
    r: float
    n: int


def pearson(x, y):
    """Sample Pearson correlation, clamped to [-1, 1]."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DegenerateInput(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 3:
        raise DegenerateInput(f"need at least 3 points, got {x.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = dx @ dx
    syy = dy @ dy
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("correlation undefined for a constant series")
    r = (dx @ dy) / np.sqrt(sxx * syy)
    return PearsonResult(float(min(1.0, max(-1.0, r))), int(x.size))


def inverse_sqrt_psd(cov, ridge=0.0):
    """``(cov + ridge*I)^(-1/2)`` through a symmetric eigendecomposition.

    Eigenvalues are floored at ``ridge``. Directions whose eigenvalue is
    numerically zero get weight 0, so ``ridge=0`` yields the
    pseudo-inverse square root.
    """
    cov = np.asarray(cov, dtype=np.float64)
    k = cov.shape[0]
    try:
        w, V = np.linalg.eigh(cov + ridge * np.eye(k))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    w = np.maximum(w, ridge)
    tol = max(w.max(), 0.0) * k * np.finfo(np.float64).eps
    inv_root = np.zeros_like(w)
    keep = w > tol
    inv_root[keep] = 1.0 / np.sqrt(w[keep])
    return (V * inv_root) @ V.T


@dataclass(frozen=True, eq=False)
class CcaModel:
    a: np.ndarray
    b: np.ndarray
    mean_g: np.ndarray
    mean_e: np.ndarray
    ridge: float
    train_rho: float

    def __post_init__(self):
        for name in ("a", "b", "mean_g", "mean_e"):
            value = np.array(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(value)):
                raise NumericalFailure(f"non-finite values in {name}")
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_genders(self):
        return self.a.size

    @property
    def dim(self):
        return self.b.size

    def project(self, G, E):
        return self.a @ np.asarray(G), self.b @ np.asarray(E)

    def to_dict(self):
        return {
            "format": MODEL_FORMAT,
            "n_genders": self.n_genders,
            "dim": self.dim,
            "ridge": self.ridge,
            "train_rho": self.train_rho,
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "mean_g": self.mean_g.tolist(),
            "mean_e": self.mean_e.tolist(),
        }

    @classmethod
    def from_dict(cls, record):
        if record.get("format") != MODEL_FORMAT:
            raise ValueError(f"not a CCA model record (format={record.get('format')!r})")
        model = cls(
            a=record["a"],
            b=record["b"],
            mean_g=record["mean_g"],
            mean_e=record["mean_e"],
            ridge=float(record["ridge"]),
            train_rho=float(record["train_rho"]),
        )
        if model.n_genders != record["n_genders"] or model.dim != record["dim"]:
            raise DimensionMismatch("model vectors disagree with the declared dimensions")
        return model

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _orient(a, b):
    # First gender projects at least as high as the second; on an exact tie
    # fall back to the next label pairs so the orientation is never arbitrary.
    k = a.size
    scale = np.abs(a).max()
    for i in range(k):
        for j in range(i + 1, k):
            diff = a[i] - a[j]
            if abs(diff) > 1e-12 * scale:
                return (a, b) if diff > 0 else (-a, -b)
    return a, b


class CcaProblem:
    """Centered and whitened training views, ready to be solved.

    The gender covariance is invariant to reordering the gender columns,
    so :meth:`solve` can refit against any column permutation of the
    gender view while reusing both whiteners.
    """

    def __init__(self, G_train, E_train, ridge=DEFAULT_RIDGE):
        G = np.asarray(G_train, dtype=np.float64)
        E = np.asarray(E_train, dtype=np.float64)
        if G.ndim != 2 or E.ndim != 2:
            raise DimensionMismatch("G_train and E_train must be matrices")
        if G.shape[1] != E.shape[1]:
            raise DimensionMismatch(
                f"G_train has {G.shape[1]} columns but E_train has {E.shape[1]}"
            )
        if ridge < 0:
            raise ValueError("ridge must be nonnegative")
        if not (np.all(np.isfinite(G)) and np.all(np.isfinite(E))):
            raise DegenerateInput("non-finite training data")
        k, n = G.shape
        if n < k + 2:
            raise DegenerateInput(f"need at least {k + 2} training nouns, got {n}")
        if np.count_nonzero(G.sum(axis=1)) < 2:
            raise DegenerateInput("training data contains a single gender")

        self.n = n
        self.ridge = float(ridge)
        self.mean_g = G.mean(axis=1)
        self.mean_e = E.mean(axis=1)
        self.Gc = G - self.mean_g[:, None]
        self.Ec = E - self.mean_e[:, None]
        if not np.any(self.Ec):
            raise DegenerateInput("embedding view has zero variance")

        self.Wg = inverse_sqrt_psd(self.Gc @ self.Gc.T / (n - 1), self.ridge)
        self.We = inverse_sqrt_psd(self.Ec @ self.Ec.T / (n - 1), self.ridge)
        self._EcWe = self.Ec.T @ self.We

    def solve(self, order=None):
        """Fit the model; ``order`` optionally permutes the gender columns."""
        Gc = self.Gc if order is None else self.Gc[:, order]
        K = self.Wg @ (Gc @ self._EcWe) / (self.n - 1)
        try:
            U, _, Vt = np.linalg.svd(K, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"SVD did not converge: {exc}") from exc
        a, b = _orient(self.Wg @ U[:, 0], self.We @ Vt[0])
        rho = pearson(a @ Gc, b @ self.Ec).r
        return CcaModel(a, b, self.mean_g, self.mean_e, self.ridge, rho)


def fit_cca(G_train, E_train, ridge=DEFAULT_RIDGE):
    """Fit the top canonical pair on training columns.

    Parameters
    ----------
    G_train : array, shape (n_genders, n)
        One-hot gender columns with at least two genders present.
    E_train : array, shape (dim, n)
        Embedding columns.
    ridge : float
        Added to both covariance diagonals before whitening.

    Returns
    -------
    CcaModel
        ``train_rho`` is the realized Pearson correlation of the two
        projected training series, not the raw singular value.
    """
    return CcaProblem(G_train, E_train, ridge).solve()


def project_and_correlate(model, G_test, E_test):
    """Held-out correlation between the projected gender and embedding views."""
    G = np.asarray(G_test, dtype=np.float64)
    E = np.asarray(E_test, dtype=np.float64)
    if G.shape[0] != model.n_genders or E.shape[0] != model.dim:
        raise DimensionMismatch(
            f"test views are {G.shape[0]}x? and {E.shape[0]}x?, "
            f"model expects {model.n_genders} and {model.dim} rows"
        )
    if G.shape[1] != E.shape[1]:
        raise DimensionMismatch("G_test and E_test column counts differ")
    return pearson(*model.project(G, E))
