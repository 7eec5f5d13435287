"""Real Lie algebras given by structure constants, and metric Lie algebras.

A vector of the algebra is identified with its left-invariant extension,
so everything here lives at the identity of the group.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from liecurv.errors import DegenerateSubspace, LinearlyDependent, NotBiInvariant
from liecurv.semilinear import BilinearForm, _is_degenerate
from liecurv.tolerances import tols

MAX_DIM = 32


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Structure constants ``c[i, j, k]`` with ``[b_i, b_j] = sum_k c[i, j, k] b_k``."""

    structure: np.ndarray
    name: str = ""

    def __post_init__(self):
        c = np.array(self.structure, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise ValueError(f"structure constants must be n x n x n, got {c.shape}")
        if c.shape[0] > MAX_DIM:
            raise ValueError(f"dimension {c.shape[0]} exceeds the supported maximum {MAX_DIM}")
        if np.abs(c + c.transpose(1, 0, 2)).max(initial=0.0) > 0.0:
            raise ValueError("structure constants are not antisymmetric in the first two slots")
        c.setflags(write=False)
        object.__setattr__(self, "structure", c)

    @classmethod
    def from_brackets(cls, n: int, brackets: dict, name: str = "") -> "LieAlgebra":
        """Build from ``{(i, j): vector}`` for i < j; the mirror entries are filled in."""
        c = np.zeros((n, n, n))
        for (i, j), vec in brackets.items():
            c[i, j] = vec
            c[j, i] = -np.asarray(vec, dtype=float)
        return cls(c, name)

    @classmethod
    def abelian(cls, n: int) -> "LieAlgebra":
        return cls(np.zeros((n, n, n)), f"abelian:{n}")

    @property
    def dim(self) -> int:
        return self.structure.shape[0]

    def bracket(self, x, y) -> np.ndarray:
        return np.einsum("i,j,ijk->k", np.asarray(x, float), np.asarray(y, float), self.structure)

    def ad(self, x) -> np.ndarray:
        """Matrix of y -> [x, y]."""
        return np.einsum("i,ijk->kj", np.asarray(x, float), self.structure)

    def direct_sum(self, other: "LieAlgebra", name: str = "") -> "LieAlgebra":
        n, m = self.dim, other.dim
        c = np.zeros((n + m,) * 3)
        c[:n, :n, :n] = self.structure
        c[n:, n:, n:] = other.structure
        return LieAlgebra(c, name or f"{self.name}x{other.name}")


def bracket(alg: LieAlgebra, x, y) -> np.ndarray:
    return alg.bracket(x, y)


def check_jacobi(alg: LieAlgebra) -> float:
    """Largest Jacobi-identity residual over basis triples."""
    c = alg.structure
    # [e_i, [e_j, e_k]] = sum_l c[j,k,l] c[i,l,m]
    inner = np.einsum("jkl,ilm->ijkm", c, c)
    total = inner + inner.transpose(1, 2, 0, 3) + inner.transpose(2, 0, 1, 3)
    return float(np.linalg.norm(total, axis=-1).max(initial=0.0))


@dataclass(frozen=True, eq=False)
class KillingForm:
    form: BilinearForm
    degenerate: bool


def killing_form(alg: LieAlgebra) -> KillingForm:
    c = alg.structure
    gram = np.einsum("ilk,jkl->ij", c, c)
    form = BilinearForm(gram)
    return KillingForm(form, _is_degenerate(gram))


def ad_invariance_residual(alg: LieAlgebra, form: BilinearForm) -> float:
    """max |<[e_i,e_j],e_k> - <e_i,[e_j,e_k]>| over basis triples."""
    c, g = alg.structure, form.gram
    lhs = np.einsum("ijl,lk->ijk", c, g)
    rhs = np.einsum("il,jkl->ijk", g, c)
    return float(np.abs(lhs - rhs).max(initial=0.0))


def is_ad_invariant(alg: LieAlgebra, form: BilinearForm, tol: float | None = None):
    tol = tols().tol if tol is None else tol
    res = ad_invariance_residual(alg, form)
    scale = max(1.0, np.abs(alg.structure).max(initial=0.0) * np.abs(form.gram).max(initial=0.0))
    return bool(res <= tol * scale), res


@dataclass(frozen=True, eq=False)
class Subspace:
    """Ordered basis (rows) of a subspace of R^n."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.array(self.basis, dtype=float))
        if b.size and np.linalg.matrix_rank(b, tol=tols().tol * max(1.0, np.abs(b).max())) < b.shape[0]:
            raise LinearlyDependent("subspace basis is not linearly independent")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def empty(cls, n: int) -> "Subspace":
        return cls(np.zeros((0, n)))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[1]

    def euclidean_orthonormal(self) -> np.ndarray:
        if self.dim == 0:
            return self.basis.copy()
        q, _ = np.linalg.qr(self.basis.T)
        return q.T

    def euclidean_projector(self) -> np.ndarray:
        q = self.euclidean_orthonormal()
        return q.T @ q

    def same_span(self, other: "Subspace", tol: float = 1e-9) -> bool:
        if self.dim != other.dim:
            return False
        p = self.euclidean_projector()
        return bool(np.abs(other.basis - other.basis @ p).max(initial=0.0) <= tol * max(1.0, np.abs(other.basis).max(initial=0.0)))


def as_subspace(s) -> Subspace:
    return s if isinstance(s, Subspace) else Subspace(s)


def subalgebra_residual(alg: LieAlgebra, s) -> float:
    """Largest component of [s_i, s_j] outside span(s), on a unit-normalized basis."""
    s = as_subspace(s)
    q = s.euclidean_orthonormal()
    proj = q.T @ q
    worst = 0.0
    for i, j in itertools.combinations(range(s.dim), 2):
        b = alg.bracket(q[i], q[j])
        worst = max(worst, float(np.linalg.norm(b - proj @ b)))
    return worst


def is_subalgebra(alg: LieAlgebra, s, tol: float | None = None):
    tol = tols().closed if tol is None else tol
    res = subalgebra_residual(alg, s)
    return bool(res <= tol), res


def abelian_residual(alg: LieAlgebra, s) -> float:
    q = as_subspace(s).euclidean_orthonormal()
    return max(
        (float(np.linalg.norm(alg.bracket(q[i], q[j]))) for i, j in itertools.combinations(range(len(q)), 2)),
        default=0.0,
    )


def is_abelian_subspace(alg: LieAlgebra, s, tol: float | None = None) -> bool:
    tol = tols().tol if tol is None else tol
    return abelian_residual(alg, s) <= tol


@dataclass(frozen=True, eq=False)
class MetricLieAlgebra:
    """A Lie algebra with a nondegenerate ad-invariant form.

    ``strict=False`` skips the ad-invariance and Jacobi checks; it exists
    for negative examples such as se(2) with the Euclidean form.
    """

    algebra: LieAlgebra
    form: BilinearForm
    name: str = ""
    strict: bool = True

    def __post_init__(self):
        if self.form.dim != self.algebra.dim:
            raise ValueError("form and algebra dimensions differ")
        if self.form.degenerate:
            raise DegenerateSubspace("metric form is degenerate")
        if self.strict:
            jac = check_jacobi(self.algebra)
            if jac > tols().jacobi * max(1.0, np.abs(self.algebra.structure).max(initial=0.0) ** 2):
                raise NotBiInvariant(f"Jacobi identity fails (residual {jac:.3e})")
            ok, res = is_ad_invariant(self.algebra, self.form)
            if not ok:
                raise NotBiInvariant(f"form is not ad-invariant (residual {res:.3e})")

    @property
    def dim(self) -> int:
        return self.algebra.dim

    def inner(self, x, y) -> float:
        return float(self.form(x, y))

    def bracket(self, x, y) -> np.ndarray:
        return self.algebra.bracket(x, y)


def orthogonal_complement(mla: MetricLieAlgebra | BilinearForm, s) -> Subspace:
    """Form-orthogonal complement.

    The returned basis is a selection of projected standard basis vectors
    (column-pivoted QR), so complements of coordinate subspaces come back
    as coordinate vectors.
    """
    form = mla.form if isinstance(mla, MetricLieAlgebra) else mla
    s = as_subspace(s)
    n = form.dim
    if s.dim == 0:
        return Subspace(np.eye(n))
    sg = form.products(s.basis)
    if _is_degenerate(sg):
        raise DegenerateSubspace("subspace is degenerate; its orthogonal complement is not a complement")
    g = form.gram
    # P x = x - S^T (S G S^T)^-1 S G x
    proj = np.eye(n) - s.basis.T @ np.linalg.solve(sg, s.basis @ g)
    k = n - s.dim
    if k == 0:
        return Subspace.empty(n)
    _, _, piv = scipy.linalg.qr(proj, pivoting=True)
    cols = np.sort(piv[:k])
    return Subspace(proj[:, cols].T)


def projector(form: BilinearForm, s) -> np.ndarray:
    """Form-orthogonal projector onto a nondegenerate subspace (acts on column vectors)."""
    s = as_subspace(s)
    if s.dim == 0:
        return np.zeros((form.dim, form.dim))
    sg = form.products(s.basis)
    if _is_degenerate(sg):
        raise DegenerateSubspace("cannot project onto a degenerate subspace")
    return s.basis.T @ np.linalg.solve(sg, s.basis @ form.gram)


def inner_automorphism(alg: LieAlgebra, y) -> np.ndarray:
    """Ad_{exp y} = exp(ad y) as a matrix on algebra coordinates."""
    return scipy.linalg.expm(alg.ad(y))


def generated_subalgebra(alg: LieAlgebra, vectors, max_rounds: int = 10) -> Subspace:
    """Smallest subalgebra containing ``vectors``."""
    span = np.atleast_2d(np.asarray(vectors, float))
    for _ in range(max_rounds):
        q = Subspace(span).euclidean_orthonormal() if len(span) else span
        new = [alg.bracket(a, b) for a, b in itertools.combinations(q, 2)]
        stacked = np.vstack([q] + ([np.array(new)] if new else []))
        u, sv, vh = np.linalg.svd(stacked, full_matrices=False)
        rank = int((sv > 1e-10 * max(1.0, sv.max(initial=0.0))).sum())
        if rank == len(q):
            return Subspace(q)
        span = vh[:rank]
    raise RuntimeError("subalgebra closure did not stabilise")
