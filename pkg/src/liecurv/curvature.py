"""Levi-Civita connection and curvature of a bi-invariant metric.

On left-invariant fields the connection is half the bracket and the
curvature endomorphism is ``R(X, Y)Z = 1/4 [Z, [X, Y]]`` with the
convention ``R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from liecurv.errors import DegeneratePlane, DegenerateSubspace, LinearlyDependent, NotBiInvariant, NotUnit
from liecurv.liealg import MetricLieAlgebra, Subspace, check_jacobi, is_ad_invariant, killing_form, orthogonal_complement
from liecurv.semilinear import BilinearForm, Operator, orthonormalize, self_products
from liecurv.tolerances import tols


@dataclass(frozen=True, eq=False)
class CurvatureContext:
    mla: MetricLieAlgebra

    def __post_init__(self):
        alg = self.mla.algebra
        jac = check_jacobi(alg)
        if jac > tols().jacobi * max(1.0, np.abs(alg.structure).max(initial=0.0) ** 2):
            raise NotBiInvariant(f"Jacobi identity fails (residual {jac:.3e})")
        ok, res = is_ad_invariant(alg, self.mla.form)
        if not ok:
            raise NotBiInvariant(f"metric is not bi-invariant (ad-invariance residual {res:.3e})")

    @property
    def dim(self) -> int:
        return self.mla.dim

    @property
    def form(self) -> BilinearForm:
        return self.mla.form

    def inner(self, x, y) -> float:
        return float(self.mla.form(x, y))

    def bracket(self, x, y) -> np.ndarray:
        return self.mla.algebra.bracket(x, y)


def nabla(ctx: CurvatureContext, x, y) -> np.ndarray:
    return 0.5 * ctx.bracket(x, y)


def riem(ctx: CurvatureContext, x, y, z) -> np.ndarray:
    return 0.25 * ctx.bracket(z, ctx.bracket(x, y))


def curvature_tensor(ctx: CurvatureContext, x, y, z, w) -> float:
    """The (0,4) tensor <R(x,y)z, w>."""
    return ctx.inner(riem(ctx, x, y, z), w)


def sectional(ctx: CurvatureContext, x, y) -> float:
    """Sectional curvature of the nondegenerate plane span{x, y}.

    The plane is orthonormalized first; for an orthonormal pair (u, v) the
    value is <R(u,v)v,u> / (<u,u><v,v>), which is 1/4 <[u,v],[u,v]> on
    Riemannian planes and is independent of the basis on any plane.
    """
    try:
        u, v = orthonormalize(ctx.form, np.array([x, y], dtype=float))
    except (DegenerateSubspace, LinearlyDependent) as exc:
        raise DegeneratePlane(str(exc)) from None
    eu, ev = ctx.inner(u, u), ctx.inner(v, v)
    return curvature_tensor(ctx, u, v, v, u) / (eu * ev)


@dataclass(frozen=True, eq=False)
class JacobiOperator:
    """K_x on x-perp, as a matrix in the orthonormal basis ``basis`` (rows)."""

    operator: Operator
    basis: np.ndarray
    direction: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix


def _check_unit(ctx: CurvatureContext, x, exc=NotUnit) -> float:
    nx = ctx.inner(x, x)
    if abs(abs(nx) - 1.0) > tols().tol * 10:
        raise exc(f"|<x,x>| = {abs(nx):.12g}, expected 1")
    return nx


def jacobi_operator(ctx: CurvatureContext, x) -> JacobiOperator:
    x = np.asarray(x, dtype=float)
    _check_unit(ctx, x)
    perp = orthogonal_complement(ctx.mla, Subspace(x[None, :]))
    basis = orthonormalize(ctx.form, perp.basis)
    eps = self_products(ctx.form, basis)
    images = np.array([riem(ctx, x, b, x) for b in basis])
    # column l holds the coefficients of K(b_l) along the orthonormal b_k
    matrix = (basis @ ctx.form.gram @ images.T) * eps[:, None]
    return JacobiOperator(Operator(matrix, BilinearForm(np.diag(eps))), basis, x)


def jacobi_scalar_residual(ctx: CurvatureContext, x) -> tuple[float, float]:
    """How far K_x is from a multiple of the identity; returns (scalar, residual)."""
    k = jacobi_operator(ctx, x).matrix
    scalar = float(np.trace(k) / len(k)) if len(k) else 0.0
    return scalar, float(np.abs(k - scalar * np.eye(len(k))).max(initial=0.0))


@dataclass
class CurvatureVerdict:
    constant: bool
    kappa: float | None
    max_mixed_residual: float
    max_spread: float
    samples: int
    signature: tuple[int, int]
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {
            "constant": self.constant,
            "kappa": self.kappa,
            "max_mixed_residual": self.max_mixed_residual,
            "max_spread": self.max_spread,
            "samples": self.samples,
            "signature": list(self.signature),
            "witness": self.witness,
        }


def _orthonormal_triples(ctx: CurvatureContext, rng: np.random.Generator, count: int):
    """Orthonormal triples; (x, y) of signature (-,+) when the form is indefinite."""
    g = ctx.form.gram
    n = ctx.dim
    w, v = np.linalg.eigh(g)
    neg, pos = v[:, w < 0], v[:, w > 0]
    indefinite = neg.shape[1] > 0 and pos.shape[1] > 0
    produced = 0
    attempts = 0
    while produced < count:
        attempts += 1
        if attempts > 1000 + 10 * count:
            raise RuntimeError("could not sample enough nondegenerate triples")
        if indefinite:
            a = neg @ rng.standard_normal(neg.shape[1])
            b = pos @ rng.standard_normal(pos.shape[1])
            a = a / np.sqrt(-ctx.inner(a, a))
            b = b / np.sqrt(ctx.inner(b, b))
            t = 0.5 * rng.standard_normal()
            x = np.cosh(t) * a + np.sinh(t) * b
            y = np.sinh(t) * a + np.cosh(t) * b
            z = rng.standard_normal(n)
            z = z + ctx.inner(z, x) * x - ctx.inner(z, y) * y
            nz = ctx.inner(z, z)
            if abs(nz) < 1e-3 * (z @ z):
                continue
            z = z / np.sqrt(abs(nz))
        else:
            try:
                x, y, z = orthonormalize(ctx.form, rng.standard_normal((3, n)))
            except (DegenerateSubspace, LinearlyDependent):
                continue
        produced += 1
        yield x, y, z


def constant_curvature_test(ctx: CurvatureContext, samples: int = 200, seed: int = 0) -> CurvatureVerdict:
    """Sampled Cartan / Dajczer-Nomizu test for constant sectional curvature."""
    if ctx.dim < 3:
        raise ValueError("constant curvature test needs dimension at least 3")
    t = tols()
    rng = np.random.default_rng(seed)
    evals = np.linalg.eigvalsh(ctx.form.gram)
    sig = (int((evals > 0).sum()), int((evals < 0).sum()))
    secs, triples = [], []
    worst_mixed, worst_triple = 0.0, None
    for x, y, z in _orthonormal_triples(ctx, rng, samples):
        mixed = abs(curvature_tensor(ctx, x, y, z, x))
        if mixed > worst_mixed:
            worst_mixed, worst_triple = mixed, (x, y, z)
        secs.append(sectional(ctx, x, y))
        triples.append((x, y, z))
    secs = np.array(secs)
    kappa = float(secs.mean())
    dev = np.abs(secs - kappa)
    spread = float(dev.max())
    constant = worst_mixed <= t.cc and spread <= t.cc
    witness = None
    if not constant:
        if worst_mixed > t.cc:
            x, y, z = worst_triple
            witness = {"kind": "mixed_curvature", "x": x.tolist(), "y": y.tolist(), "z": z.tolist(), "value": worst_mixed}
        else:
            i, j = int(np.argmin(secs)), int(np.argmax(secs))
            witness = {
                "kind": "sectional_spread",
                "plane_a": [v.tolist() for v in triples[i][:2]],
                "plane_b": [v.tolist() for v in triples[j][:2]],
                "sec_a": float(secs[i]),
                "sec_b": float(secs[j]),
            }
        kappa = None
    return CurvatureVerdict(constant, kappa, worst_mixed, spread, samples, sig, witness)


def ricci(ctx: CurvatureContext) -> np.ndarray:
    """Ricci(x, y) = trace(z -> R(z, x) y) as a matrix on basis vectors."""
    c = ctx.mla.algebra.structure
    # R(e_k, e_a) e_b = 1/4 [e_b, [e_k, e_a]]; keep the e_k component
    return 0.25 * np.einsum("kal,blk->ab", c, c)


@dataclass
class EinsteinVerdict:
    proportional: bool
    c: float | None
    residual: float
    killing_degenerate: bool

    def to_dict(self) -> dict:
        return {
            "proportional": self.proportional,
            "c": self.c,
            "residual": self.residual,
            "killing_degenerate": self.killing_degenerate,
        }


def einstein_check(ctx: CurvatureContext) -> EinsteinVerdict:
    ric = ricci(ctx)
    kf = killing_form(ctx.mla.algebra)
    b = kf.form.gram
    scale = max(1.0, float(np.abs(ric).max(initial=0.0)))
    bb = float(np.sum(b * b))
    if bb == 0.0:
        residual = float(np.abs(ric).max(initial=0.0))
        return EinsteinVerdict(residual <= tols().tol, None, residual, True)
    c = float(np.sum(ric * b) / bb)
    residual = float(np.abs(ric - c * b).max(initial=0.0))
    return EinsteinVerdict(residual <= tols().tol * scale, c, residual, kf.degenerate)


@dataclass
class AxiomResiduals:
    pair_symmetry: float = 0.0
    skew_symmetry: float = 0.0
    bianchi: float = 0.0
    samples: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pair_symmetry": self.pair_symmetry,
            "skew_symmetry": self.skew_symmetry,
            "bianchi": self.bianchi,
            "samples": self.samples,
        }


def curvature_axioms(ctx: CurvatureContext, samples: int = 100, seed: int = 0) -> AxiomResiduals:
    """Worst residuals of the algebraic curvature identities over random tuples."""
    rng = np.random.default_rng(seed)
    out = AxiomResiduals(samples=samples)
    for _ in range(samples):
        x, y, z, w = rng.standard_normal((4, ctx.dim))
        r = curvature_tensor
        out.pair_symmetry = max(out.pair_symmetry, abs(r(ctx, x, y, z, w) - r(ctx, z, w, x, y)))
        out.skew_symmetry = max(out.skew_symmetry, abs(r(ctx, x, y, z, w) + r(ctx, x, y, w, z)))
        b = riem(ctx, x, y, z) + riem(ctx, y, z, x) + riem(ctx, z, x, y)
        out.bianchi = max(out.bianchi, float(np.abs(b).max()))
    return out
