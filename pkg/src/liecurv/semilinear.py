"""Semi-Euclidean linear algebra.

Vectors are 1-D numpy arrays of coordinates in a fixed basis; families of
vectors are 2-D arrays whose *rows* are the vectors. An operator's matrix
acts on column vectors, ``matrix @ x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from liecurv.errors import (
    Degenerate,
    DegenerateSubspace,
    LinearlyDependent,
    NotSelfAdjoint,
)
from liecurv.tolerances import tols


@dataclass(frozen=True, eq=False)
class BilinearForm:
    """Symmetric bilinear form given by its Gram matrix.

    Symmetry is enforced at construction. Nondegeneracy is *not*: the
    Killing form of a solvable algebra is a legitimate degenerate form, so
    degeneracy is queried with :attr:`degenerate` and enforced by the
    operations that need it.
    """

    gram: np.ndarray

    def __post_init__(self):
        g = np.array(self.gram, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] == 0:
            raise ValueError(f"Gram matrix must be square and nonempty, got shape {g.shape}")
        scale = max(1.0, float(np.abs(g).max()))
        if np.abs(g - g.T).max() > tols().sym * scale:
            raise ValueError("Gram matrix is not symmetric")
        g = 0.5 * (g + g.T)
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)

    @classmethod
    def identity(cls, n: int) -> "BilinearForm":
        return cls(np.eye(n))

    @classmethod
    def diagonal(cls, entries) -> "BilinearForm":
        return cls(np.diag(np.asarray(entries, dtype=float)))

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.gram)

    @property
    def degenerate(self) -> bool:
        return _is_degenerate(self.gram)

    @property
    def positive_definite(self) -> bool:
        ev = self.eigenvalues
        return bool(ev.min() > tols().degenerate * max(np.abs(ev).max(), 1e-300))

    @property
    def definite(self) -> bool:
        ev = self.eigenvalues
        thr = tols().degenerate * max(np.abs(ev).max(), 1e-300)
        return bool(ev.min() > thr or ev.max() < -thr)

    def __call__(self, x, y):
        return np.asarray(x) @ self.gram @ np.asarray(y)

    def products(self, vectors) -> np.ndarray:
        """Gram matrix of a family of row vectors."""
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        return v @ self.gram @ v.T

    def restrict(self, vectors) -> "BilinearForm":
        return BilinearForm(self.products(vectors))

    def to_list(self) -> list[list[float]]:
        return self.gram.tolist()


def _is_degenerate(gram: np.ndarray) -> bool:
    ev = np.linalg.eigvalsh(gram)
    top = np.abs(ev).max()
    if top == 0.0:
        return True
    return bool(np.abs(ev).min() < tols().degenerate * top)


def signature(form: BilinearForm) -> tuple[int, int]:
    """Counts (p, q) of positive and negative directions."""
    if form.degenerate:
        raise Degenerate("form has a null direction; signature undefined")
    ev = form.eigenvalues
    return int((ev > 0).sum()), int((ev < 0).sum())


def orthonormalize(form: BilinearForm, vectors) -> np.ndarray:
    """Orthonormal basis of ``span(vectors)`` with respect to ``form``.

    Gram-Schmidt with pivoting: each step takes the remaining vector whose
    self-product is largest in magnitude. When every remaining vector is
    (numerically) null but the span is not, two of them are combined into
    a non-null one first.
    """
    v = np.atleast_2d(np.array(vectors, dtype=float))
    if v.shape[1] != form.dim:
        raise ValueError(f"vectors have length {v.shape[1]}, form has dim {form.dim}")
    if v.shape[0] == 0:
        return v.copy()
    if np.linalg.matrix_rank(v, tol=tols().tol * max(1.0, np.abs(v).max())) < v.shape[0]:
        raise LinearlyDependent("vectors are linearly dependent")
    if _is_degenerate(form.products(v)):
        raise DegenerateSubspace("span is degenerate with respect to the form")

    g = form.gram
    remaining = [row for row in v]
    out = []
    while remaining:
        selfp = np.array([w @ g @ w for w in remaining])
        scale = max(np.max([w @ w for w in remaining]), 1e-300)
        k = _pivot(np.abs(selfp))
        if abs(selfp[k]) <= tols().degenerate * scale:
            cross = np.array([[a @ g @ b for b in remaining] for a in remaining])
            np.fill_diagonal(cross, 0.0)
            i, j = np.unravel_index(np.argmax(np.abs(cross)), cross.shape)
            remaining[i] = remaining[i] + np.sign(cross[i, j]) * remaining[j]
            continue
        e = remaining.pop(k)
        e = e / np.sqrt(abs(selfp[k]))
        eps = np.sign(e @ g @ e)
        # two projection passes keep the result orthogonal to working precision
        for _ in range(2):
            remaining = [w - (w @ g @ e) * eps * e for w in remaining]
        out.append(e)
    return np.array(out)


def _pivot(values: np.ndarray) -> int:
    top = values.max()
    return int(np.flatnonzero(values >= top * (1.0 - 1e-9))[0])


def self_products(form: BilinearForm, basis) -> np.ndarray:
    """Signs f(v, v) of an orthonormal basis, rounded to +-1."""
    return np.sign(np.diag(form.products(basis)))


@dataclass(frozen=True, eq=False)
class Operator:
    """Linear endomorphism together with the form it is measured against."""

    matrix: np.ndarray
    form: BilinearForm

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (self.form.dim, self.form.dim):
            raise ValueError(f"matrix shape {m.shape} does not match form dim {self.form.dim}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.form.dim

    def __call__(self, x):
        return self.matrix @ np.asarray(x)

    def self_adjoint_residual(self) -> float:
        g = self.form.gram
        return float(np.abs(g @ self.matrix - self.matrix.T @ g).max(initial=0.0))

    def skew_adjoint_residual(self) -> float:
        g = self.form.gram
        return float(np.abs(g @ self.matrix + self.matrix.T @ g).max(initial=0.0))

    def is_self_adjoint(self, tol: float | None = None) -> bool:
        tol = tols().tol if tol is None else tol
        return self.self_adjoint_residual() <= tol * max(1.0, np.abs(self.matrix).max(initial=0.0))

    def compose(self, other: "Operator") -> "Operator":
        return Operator(self.matrix @ other.matrix, self.form)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix + other.matrix, self.form)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix - other.matrix, self.form)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenbasis: np.ndarray  # rows; empty (0, n) when not diagonalizable
    clusters: list[list[int]]
    diagonalizable: bool
    condition: float = 1.0
    threshold: float = 0.0
    signs: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def cluster_values(self) -> list[float]:
        return [float(np.mean(self.eigenvalues[c])) for c in self.clusters]

    def cluster_of(self, index: int) -> int:
        for ci, c in enumerate(self.clusters):
            if index in c:
                return ci
        raise IndexError(index)

    def multiplicities(self) -> list[tuple[float, int]]:
        return [(v, len(c)) for v, c in zip(self.cluster_values(), self.clusters)]

    def spectral_gaps(self) -> list[float]:
        vals = self.cluster_values()
        return [b - a for a, b in zip(vals, vals[1:])]


def cluster_eigenvalues(values: np.ndarray, threshold: float) -> list[list[int]]:
    """Single-linkage grouping of sorted eigenvalues."""
    order = np.argsort(values, kind="stable")
    clusters: list[list[int]] = []
    for idx in order:
        if clusters and values[idx] - values[clusters[-1][-1]] < threshold:
            clusters[-1].append(int(idx))
        else:
            clusters.append([int(idx)])
    return clusters


def _fix_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) >= np.abs(v).max() * (1.0 - 1e-9)))
    return -v if v[k] < 0 else v


def eigen_orthonormal(op: Operator) -> EigenDecomposition:
    """Eigendecomposition with an eigenbasis orthonormal for ``op.form``.

    Definite forms go through a Cholesky reduction to a symmetric
    eigenproblem. Indefinite forms go through the nonsymmetric problem on
    the matrix itself; the result is flagged non-diagonalizable when
    eigenvalues are complex, eigenvectors are ill-conditioned, an
    eigenspace is too small, or an eigenspace is degenerate for the form.
    """
    t = tols()
    n = op.dim
    scale = max(1.0, float(np.abs(op.matrix).max(initial=0.0)))
    if op.self_adjoint_residual() > t.tol * scale:
        raise NotSelfAdjoint(f"self-adjointness residual {op.self_adjoint_residual():.3e}")
    form = op.form
    if form.degenerate:
        raise Degenerate("operator form is degenerate")

    if form.definite:
        s = 1.0 if form.eigenvalues.max() > 0 else -1.0
        chol = np.linalg.cholesky(s * form.gram)
        sym = scipy.linalg.solve_triangular(chol, s * form.gram @ op.matrix, lower=True)
        sym = scipy.linalg.solve_triangular(chol, sym.T, lower=True).T
        sym = 0.5 * (sym + sym.T)
        w, u = np.linalg.eigh(sym)
        vecs = scipy.linalg.solve_triangular(chol.T, u, lower=False).T
        thr = t.cluster * max(1.0, float(np.abs(w).max(initial=0.0)))
        clusters = cluster_eigenvalues(w, thr)
        return _finish(op, w, vecs, clusters, thr, condition=1.0)

    w, v = np.linalg.eig(op.matrix)
    radius = float(np.abs(w).max(initial=0.0))
    thr = t.cluster * max(1.0, radius)
    cond = float(np.linalg.cond(v)) if n else 1.0
    real = w.real
    if np.abs(w.imag).max(initial=0.0) > thr or not np.isfinite(cond) or cond > t.cond_max:
        return _not_diagonalizable(real, thr, cond)

    clusters = cluster_eigenvalues(real, thr)
    vectors = np.zeros((n, n))
    values = np.zeros(n)
    pos = 0
    for c in clusters:
        mu = float(np.mean(real[c]))
        k = len(c)
        _, sv, vh = np.linalg.svd(op.matrix - mu * np.eye(n))
        space = vh[n - k:]
        if sv[n - k] > max(10 * thr, 1e-8 * scale):
            return _not_diagonalizable(real, thr, cond)
        if _is_degenerate(form.products(space)):
            return _not_diagonalizable(real, thr, cond)
        basis = orthonormalize(form, space)
        for vec in basis:
            values[pos] = (vec @ form.gram @ op.matrix @ vec) / (vec @ form.gram @ vec)
            vectors[pos] = vec
            pos += 1
    order = np.argsort(values, kind="stable")
    values, vectors = values[order], vectors[order]
    return _finish(op, values, vectors, cluster_eigenvalues(values, thr), thr, cond)


def _not_diagonalizable(values, thr, cond) -> EigenDecomposition:
    values = np.sort(values)
    return EigenDecomposition(
        eigenvalues=values,
        eigenbasis=np.zeros((0, len(values))),
        clusters=cluster_eigenvalues(values, thr),
        diagonalizable=False,
        condition=cond,
        threshold=thr,
    )


def _finish(op, values, vectors, clusters, thr, condition) -> EigenDecomposition:
    vectors = np.array([_fix_sign(v) for v in vectors]) if len(vectors) else vectors
    signs = self_products(op.form, vectors) if len(vectors) else np.zeros(0)
    return EigenDecomposition(
        eigenvalues=np.asarray(values, dtype=float),
        eigenbasis=vectors,
        clusters=clusters,
        diagonalizable=True,
        condition=condition,
        threshold=thr,
        signs=signs,
    )


def reconstruct(decomp: EigenDecomposition, form: BilinearForm) -> np.ndarray:
    """Matrix of sum_j lambda_j v_j f(v_j, .) / f(v_j, v_j)."""
    v = decomp.eigenbasis
    selfp = np.diag(form.products(v))
    return (v.T * (decomp.eigenvalues / selfp)) @ v @ form.gram


def cluster_projector(decomp: EigenDecomposition, form: BilinearForm, cluster: int) -> np.ndarray:
    """Form-orthogonal projector onto the eigenspace of one cluster."""
    v = decomp.eigenbasis[decomp.clusters[cluster]]
    selfp = np.diag(form.products(v))
    return (v.T / selfp) @ v @ form.gram


@dataclass(frozen=True, eq=False)
class CommuteResult:
    commute: bool
    residual: float
    common_basis: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.commute


def commutator_norm(a: Operator, b: Operator) -> float:
    return float(np.linalg.norm(a.matrix @ b.matrix - b.matrix @ a.matrix))


def commute(a: Operator, b: Operator, tol: float | None = None) -> CommuteResult:
    """Test ``ab == ba`` and, when both diagonalize, build a common eigenbasis."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    tol = tols().commute if tol is None else tol
    res = commutator_norm(a, b)
    bound = tol * (np.linalg.norm(a.matrix) * np.linalg.norm(b.matrix) + 1.0)
    if res > bound:
        return CommuteResult(False, res)
    basis = _common_basis(a, b)
    return CommuteResult(True, res, basis)


def _common_basis(a: Operator, b: Operator) -> np.ndarray | None:
    try:
        da = eigen_orthonormal(a)
        if not da.diagonalizable or not eigen_orthonormal(b).diagonalizable:
            return None
    except (NotSelfAdjoint, Degenerate):
        return None
    form = a.form
    out = []
    for c in da.clusters:
        space = da.eigenbasis[c]
        eps = np.diag(form.products(space))
        # coefficients of b(v_l) along the orthonormal v_k
        restricted = (space @ form.gram @ b.matrix @ space.T) / eps[:, None]
        sub = Operator(restricted, BilinearForm(np.diag(eps)))
        try:
            db = eigen_orthonormal(sub)
        except NotSelfAdjoint:
            return None
        if not db.diagonalizable:
            return None
        out.extend(db.eigenbasis @ space)
    return np.array([_fix_sign(v) for v in out])
