"""Named and randomized germs for verification runs.

Random germs with closed normal space are found by drawing a subalgebra
from a per-algebra seed list, conjugating it by a random inner
automorphism, and taking its orthogonal complement as the tangent space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from liecurv import catalog
from liecurv.curvature import CurvatureContext
from liecurv.errors import Degenerate, LinearlyDependent, NotUnit
from liecurv.liealg import Subspace, inner_automorphism, is_subalgebra, orthogonal_complement
from liecurv.matrixgroup import Immersion, MatrixGroupModel
from liecurv.semilinear import _is_degenerate, cluster_projector, eigen_orthonormal, orthonormalize
from liecurv.submanifold import Germ, invariant_shape, normal_jacobi

# so(4) = self-dual + anti-self-dual, in the catalog basis E01, E02, E03, E12, E13, E23
_SO4_SD = np.array([[1, 0, 0, 0, 0, 1], [0, 1, 0, 0, -1, 0], [0, 0, 1, 1, 0, 0]], float)
_SO4_ASD = np.array([[1, 0, 0, 0, 0, -1], [0, 1, 0, 0, 1, 0], [0, 0, 1, -1, 0, 0]], float)


def subalgebra_seeds(ident: str) -> list[tuple[str, object]]:
    """(name, basis) pairs; ``basis`` is an array, or a callable ``rng -> array``
    for families drawn at random (lines, abelian subspaces)."""
    alg = catalog.algebra(ident)
    n = alg.dim
    line = ("line", lambda rng: rng.standard_normal((1, n)))
    if ident.startswith("abelian:"):
        return [("subspace", lambda rng: rng.standard_normal((int(rng.integers(1, n)), n)))]
    if ident in ("su2", "so3", "sl2r", "se2"):
        return [line]
    e = np.eye(n)
    if ident == "su2xsu2":
        return [
            line,
            ("cartan", e[[2, 5]]),
            ("factor", e[:3]),
            ("diagonal", e[:3] + e[3:]),
            ("factor+line", np.vstack([e[:3], e[5]])),
        ]
    if ident == "su2xR":
        return [line, ("cartan", e[[2, 3]]), ("factor", e[:3])]
    if ident == "so4":
        return [
            line,
            ("cartan", e[[0, 5]]),
            ("so3", e[[0, 1, 3]]),
            ("self-dual", _SO4_SD),
            ("anti-self-dual", _SO4_ASD),
            ("ideal+line", np.vstack([_SO4_SD, _SO4_ASD[0]])),
        ]
    raise KeyError(ident)


def prop4_seeds(ident: str) -> list[tuple[str, object]]:
    """Three-dimensional normal subalgebras with nonvanishing K on the complement."""
    seeds = dict(subalgebra_seeds(ident))
    key = {"su2xsu2": "diagonal", "so4": "so3"}[ident]
    return [(key, seeds[key])]


def _random_unit_normal(form, normal: np.ndarray, rng, spacelike: bool | None):
    for _ in range(100):
        eta = rng.standard_normal(len(normal)) @ normal
        q = form(eta, eta)
        if abs(q) < 0.05 * (eta @ eta):
            continue
        if spacelike is not None and (q > 0) != spacelike:
            continue
        return eta / np.sqrt(abs(q))
    return None


def random_closed_germ(
    ctx: CurvatureContext,
    rng: np.random.Generator,
    seeds,
    spacelike: bool | None = True,
    tangent_dims=None,
    conjugate: float = 1.0,
    max_tries: int = 500,
) -> tuple[Germ, str]:
    """A random germ whose translated normal space is a subalgebra.

    ``spacelike`` restricts the sign of <eta, eta> (None allows both).
    Returns the germ and the seed name it came from.
    """
    alg = ctx.mla.algebra
    form = ctx.form
    n = alg.dim
    for _ in range(max_tries):
        name, basis = seeds[int(rng.integers(len(seeds)))]
        s = np.atleast_2d(basis(rng) if callable(basis) else basis).astype(float)
        if tangent_dims is not None and n - len(s) not in tangent_dims:
            continue
        if conjugate:
            ad = inner_automorphism(alg, conjugate * rng.standard_normal(n))
            s = s @ ad.T
        try:
            if _is_degenerate(form.products(s)):
                continue
            tangent = orthogonal_complement(form, Subspace(s))
            if tangent.dim == 0:
                continue
            eta = _random_unit_normal(form, s, rng, spacelike)
            if eta is None:
                continue
            germ = Germ.from_vectors(ctx, tangent.basis, eta)
        except (Degenerate, LinearlyDependent, NotUnit):
            continue
        if not is_subalgebra(alg, germ.frame.normal)[0]:
            continue
        return germ, name
    raise RuntimeError("no closed-normal germ found; seeds may not fit the requested dimensions")


# ---------------------------------------------------------------- explicit W


def random_self_adjoint(signs: np.ndarray, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random matrix self-adjoint for the form diag(signs)."""
    m = len(signs)
    a = rng.standard_normal((m, m)) * scale
    return np.diag(signs) @ (a + a.T) / 2


def _adjoint(x: np.ndarray, signs: np.ndarray) -> np.ndarray:
    return np.diag(signs) @ x.T @ np.diag(signs)


def _projectors(germ: Germ):
    dec = eigen_orthonormal(normal_jacobi(germ).operator)
    return dec, [cluster_projector(dec, germ.tangent_form, c) for c in range(len(dec.clusters))]


def adapted_shape(germ: Germ, rng: np.random.Generator) -> np.ndarray:
    """Random self-adjoint A preserving every K-eigenspace."""
    _, projs = _projectors(germ)
    s0 = random_self_adjoint(germ.frame.tangent_signs, rng)
    return sum(p @ s0 @ p for p in projs)


def mixing_shape(germ: Germ, rng: np.random.Generator, strength: float = 0.5, clusters=None) -> np.ndarray:
    """Adapted A plus a self-adjoint block coupling two K-eigenspaces.

    ``clusters`` picks the pair (a, b); by default a random pair is used.
    """
    dec, projs = _projectors(germ)
    if len(projs) < 2:
        raise ValueError("K has a single eigenvalue; every A is adapted")
    if clusters is None:
        a, b = rng.choice(len(projs), size=2, replace=False)
    else:
        a, b = clusters
    x = projs[a] @ rng.standard_normal((germ.dim, germ.dim)) @ projs[b]
    x = x / max(np.linalg.norm(x, 2), 1e-300)
    signs = germ.frame.tangent_signs
    return adapted_shape(germ, rng) + strength * (x + _adjoint(x, signs))


def gauss_for_shape(germ: Germ, shape: np.ndarray) -> np.ndarray:
    """The W with alpha + W equal to ``shape``."""
    return np.asarray(shape) - invariant_shape(germ).matrix


# ------------------------------------------------------------ immersions


def graph_immersion(model: MatrixGroupModel, eta, tangent, hessian, cubic=None, left=None) -> Immersion:
    """u -> L exp(sum u_j x_j) exp(f(u) eta) with f = 1/2 u^T H u + cubic terms.

    ``cubic`` is a list of (coef, powers) monomials added to f.
    """
    m = len(tangent)
    h = np.asarray(hessian, float)
    coefficients = []
    for i in range(m):
        for j in range(i, m):
            powers = [0] * m
            powers[i] += 1
            powers[j] += 1
            c = 0.5 * h[i, i] if i == j else h[i, j]
            if c:
                coefficients.append([float(c), *powers])
    for coef, powers in cubic or []:
        coefficients.append([float(coef), *powers])
    params = {
        "source_dim": m,
        "tangent": np.asarray(tangent, float).tolist(),
        "normal": np.asarray(eta, float).tolist(),
        "coefficients": coefficients,
    }
    if left is not None:
        params["left"] = np.asarray(left, float).tolist()
    return Immersion(model, "exp-graph", params)


def random_hypersurface(model: MatrixGroupModel, rng: np.random.Generator, cubic_terms: int = 4, left: bool = True):
    """Random exp-graph hypersurface through a random point; returns (immersion, eta)."""
    n = model.dim
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eta, tangent = q[:, 0], q[:, 1:].T
    m = n - 1
    hess = rng.standard_normal((m, m))
    cubic = []
    for _ in range(cubic_terms):
        powers = [0] * m
        for k in rng.choice(m, size=3):
            powers[k] += 1
        cubic.append((rng.standard_normal(), powers))
    lft = 0.7 * rng.standard_normal(n) if left else None
    return graph_immersion(model, eta, tangent, (hess + hess.T) / 2, cubic, lft), eta


def umbilic_hypersurface(model: MatrixGroupModel, eta, c: float, rng: np.random.Generator, cubic_terms: int = 3):
    """Exp-graph hypersurface with A = c * identity at u = 0 (Riemannian tangent).

    Cubic terms change the germ away from the base point without touching A there.
    """
    form = model.form
    eta = np.asarray(eta, float)
    perp = orthogonal_complement(form, Subspace(eta[None, :]))
    tangent = orthonormalize(form, np.linalg.qr(rng.standard_normal((perp.dim, perp.dim)))[0] @ perp.basis)
    m = len(tangent)
    eps_eta = np.sign(form(eta, eta))
    cubic = []
    for _ in range(cubic_terms):
        powers = [0] * m
        for k in rng.choice(m, size=3):
            powers[k] += 1
        cubic.append((rng.standard_normal(), powers))
    return graph_immersion(model, eta, tangent, -c * eps_eta * np.eye(m), cubic)


@dataclass(frozen=True)
class NamedGerm:
    name: str
    ident: str
    tangent: list
    eta: list
    closed: bool = True


NAMED_GERMS = [
    NamedGerm("su2 hypersurface", "su2", [[1, 0, 0], [0, 1, 0]], [0, 0, 1]),
    NamedGerm("so3 hypersurface", "so3", [[0, 1, 0], [0, 0, 1]], [1, 0, 0]),
    NamedGerm("sl2r spacelike normal", "sl2r", [[1, 0, 0], [0, 1, 1]], [0, 1, -1]),
    NamedGerm("su2xsu2 factor subgroup", "su2xsu2", np.eye(6)[:3].tolist(), [0, 0, 0, 0, 0, 1]),
    NamedGerm("su2xsu2 hypersurface", "su2xsu2", np.eye(6)[[0, 1, 3, 4, 5]].tolist(), [0, 0, 1, 0, 0, 0]),
    NamedGerm(
        "su2xsu2 antidiagonal",
        "su2xsu2",
        (np.eye(6)[:3] - np.eye(6)[3:]).tolist(),
        (np.eye(6)[2] + np.eye(6)[5]).tolist(),
    ),
    NamedGerm("su2xR hypersurface", "su2xR", np.eye(4)[[0, 1, 3]].tolist(), [0, 0, 1, 0]),
    NamedGerm("so4 complement of so3", "so4", np.eye(6)[[2, 4, 5]].tolist(), [1, 0, 0, 0, 0, 0]),
    NamedGerm("abelian plane", "abelian:4", np.eye(4)[:2].tolist(), [0, 0, 1, 0]),
    NamedGerm("su2 non-closed normal", "su2", [[1, 0, 0]], [0, 1, 0], closed=False),
]


def named_germ(ng: NamedGerm) -> Germ:
    ctx = CurvatureContext(catalog.metric_algebra(ng.ident))
    eta = np.asarray(ng.eta, float)
    eta = eta / np.sqrt(abs(ctx.form(eta, eta)))
    return Germ.from_vectors(ctx, ng.tangent, eta)
