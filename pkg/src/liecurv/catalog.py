"""Built-in Lie algebras, their default ad-invariant metrics and matrix models."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from liecurv.liealg import LieAlgebra, MetricLieAlgebra, killing_form
from liecurv.semilinear import BilinearForm


def _levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for i, j, k in itertools.permutations(range(3)):
        eps[i, j, k] = np.linalg.det(np.eye(3)[[i, j, k]])
    return eps


def su2() -> LieAlgebra:
    return LieAlgebra(_levi_civita(), "su2")


def so3() -> LieAlgebra:
    return LieAlgebra(_levi_civita(), "so3")


def sl2r() -> LieAlgebra:
    # basis (H, E, F)
    return LieAlgebra.from_brackets(
        3, {(0, 1): [0, 2, 0], (0, 2): [0, 0, -2], (1, 2): [1, 0, 0]}, "sl2r"
    )


def se2() -> LieAlgebra:
    # basis (J, P1, P2)
    return LieAlgebra.from_brackets(3, {(0, 1): [0, 0, 1], (0, 2): [0, -1, 0]}, "se2")


SO4_PAIRS = list(itertools.combinations(range(4), 2))


def so4() -> LieAlgebra:
    # basis E_ab = e_a e_b^T - e_b e_a^T, a < b, in lexicographic order;
    # [E_ij, E_kl] = d_jk E_il - d_ik E_jl - d_jl E_ik + d_il E_jk
    index = {p: n for n, p in enumerate(SO4_PAIRS)}

    def elem(a, b):
        v = np.zeros(6)
        if a == b:
            return v
        if a < b:
            v[index[(a, b)]] = 1.0
        else:
            v[index[(b, a)]] = -1.0
        return v

    c = np.zeros((6, 6, 6))
    for (p, (i, j)), (q, (k, l)) in itertools.product(enumerate(SO4_PAIRS), repeat=2):
        c[p, q] = (
            (j == k) * elem(i, l) - (i == k) * elem(j, l) - (j == l) * elem(i, k) + (i == l) * elem(j, k)
        )
    return LieAlgebra(c, "so4")


def _complex_as_real(z: np.ndarray) -> np.ndarray:
    return np.block([[z.real, -z.imag], [z.imag, z.real]])


def _blockdiag(*blocks) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size))
    pos = 0
    for b in blocks:
        k = b.shape[0]
        out[pos:pos + k, pos:pos + k] = b
        pos += k
    return out


PAULI = [
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


def su2_matrices() -> list[np.ndarray]:
    """-(i/2) sigma_j realized as 4x4 real matrices."""
    return [_complex_as_real(-0.5j * s) for s in PAULI]


def so3_matrices() -> list[np.ndarray]:
    return [-_levi_civita()[i] for i in range(3)]


def sl2r_matrices() -> list[np.ndarray]:
    return [np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0, 0.0], [1.0, 0.0]])]


def se2_matrices() -> list[np.ndarray]:
    j = np.zeros((3, 3))
    j[1, 0], j[0, 1] = 1.0, -1.0
    p1, p2 = np.zeros((3, 3)), np.zeros((3, 3))
    p1[0, 2] = 1.0
    p2[1, 2] = 1.0
    return [j, p1, p2]


def so4_matrices() -> list[np.ndarray]:
    out = []
    for a, b in SO4_PAIRS:
        m = np.zeros((4, 4))
        m[a, b], m[b, a] = 1.0, -1.0
        out.append(m)
    return out


def abelian_matrices(n: int) -> list[np.ndarray]:
    """Translations of R^n as (n+1)x(n+1) affine matrices."""
    out = []
    for k in range(n):
        m = np.zeros((n + 1, n + 1))
        m[k, n] = 1.0
        out.append(m)
    return out


def _embed(blocks_a, blocks_b):
    za = np.zeros_like(blocks_b[0])
    zb = np.zeros_like(blocks_a[0])
    return [_blockdiag(a, za) for a in blocks_a] + [_blockdiag(zb, b) for b in blocks_b]


@dataclass(frozen=True)
class CatalogEntry:
    ident: str
    description: str
    algebra: LieAlgebra
    default_gram: np.ndarray
    matrices: list
    bi_invariant: bool = True


def _entry(ident: str) -> CatalogEntry:
    if ident.startswith("abelian:"):
        n = int(ident.split(":", 1)[1])
        if n < 1:
            raise KeyError(ident)
        return CatalogEntry(ident, f"abelian R^{n} (dim {n}, flat)", LieAlgebra.abelian(n), np.eye(n), abelian_matrices(n))
    if ident == "su2":
        return CatalogEntry(ident, "su2 (dim 3, compact simple)", su2(), np.eye(3), su2_matrices())
    if ident == "so3":
        return CatalogEntry(ident, "so3 (dim 3, compact simple)", so3(), np.eye(3), so3_matrices())
    if ident == "sl2r":
        alg = sl2r()
        gram = -killing_form(alg).form.gram / 8.0
        return CatalogEntry(ident, "sl2r (dim 3, noncompact simple, Lorentzian metric)", alg, gram, sl2r_matrices())
    if ident == "su2xsu2":
        alg = su2().direct_sum(su2(), "su2xsu2")
        return CatalogEntry(ident, "su2xsu2 (dim 6, compact semisimple)", alg, np.eye(6), _embed(su2_matrices(), su2_matrices()))
    if ident == "su2xR":
        alg = su2().direct_sum(LieAlgebra.abelian(1), "su2xR")
        return CatalogEntry(ident, "su2xR (dim 4, compact reductive)", alg, np.eye(4), _embed(su2_matrices(), [np.ones((1, 1))]))
    if ident == "so4":
        return CatalogEntry(ident, "so4 (dim 6, compact semisimple)", so4(), np.eye(6), so4_matrices())
    if ident == "se2":
        return CatalogEntry(
            ident, "se2 (dim 3, solvable; Euclidean form is NOT ad-invariant)", se2(), np.eye(3), se2_matrices(), bi_invariant=False
        )
    raise KeyError(ident)


ALGEBRA_IDS = ["abelian:n", "su2", "sl2r", "so3", "su2xsu2", "su2xR", "so4", "se2"]


def entry(ident: str) -> CatalogEntry:
    try:
        return _entry(ident)
    except (KeyError, ValueError):
        raise KeyError(f"unknown catalog algebra {ident!r}; known: {', '.join(ALGEBRA_IDS)}") from None


def algebra(ident: str) -> LieAlgebra:
    return entry(ident).algebra


def metric_form(ident: str, metric="default") -> BilinearForm:
    e = entry(ident)
    if isinstance(metric, str):
        if metric == "default":
            return BilinearForm(e.default_gram)
        if metric == "identity":
            return BilinearForm.identity(e.algebra.dim)
        if metric == "killing":
            return killing_form(e.algebra).form
        raise KeyError(f"unknown metric {metric!r}")
    return BilinearForm(np.asarray(metric, dtype=float))


def metric_algebra(ident: str, metric="default") -> MetricLieAlgebra:
    e = entry(ident)
    return MetricLieAlgebra(e.algebra, metric_form(ident, metric), name=ident, strict=e.bi_invariant)


def listing() -> list[str]:
    return [entry("abelian:3").description.replace("R^3", "R^n").replace("dim 3", "dim n").replace("abelian", "abelian:n", 1)] + [
        entry(i).description for i in ALGEBRA_IDS[1:]
    ]
