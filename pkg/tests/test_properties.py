import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ctx_for
from liecurv import catalog
from liecurv.curvature import CurvatureContext, curvature_tensor, sectional
from liecurv.errors import Degenerate, LinearlyDependent, NotUnit
from liecurv.germs import random_closed_germ, random_hypersurface, subalgebra_seeds, umbilic_hypersurface
from liecurv.liealg import is_subalgebra
from liecurv.matrixgroup import MatrixGroupModel
from liecurv.semilinear import BilinearForm, Operator, commute, eigen_orthonormal, orthonormalize, reconstruct
from liecurv.submanifold import (
    Germ,
    germ_from_immersion,
    invariant_shape,
    normal_jacobi,
    sign_guard_residual,
    symmetric_difference_residual,
    verify_prop9,
)

SETTINGS = settings(max_examples=60, deadline=None, derandomize=True)
seeds = st.integers(min_value=0, max_value=2**32 - 1)
ALGEBRAS = ["su2", "so3", "sl2r", "su2xsu2", "su2xR", "so4", "abelian:4"]


def signs_form(rng, n):
    return BilinearForm.diagonal(rng.choice([-1.0, 1.0], size=n) * rng.uniform(0.5, 2.0, size=n))


@SETTINGS
@given(seeds, st.sampled_from(["su2", "sl2r", "su2xsu2", "so4"]))
def test_pair_symmetry(seed, ident):
    rng = np.random.default_rng(seed)
    ctx = ctx_for(ident)
    x, y, z, w = rng.standard_normal((4, ctx.dim))
    assert abs(curvature_tensor(ctx, x, y, z, w) - curvature_tensor(ctx, z, w, x, y)) <= 1e-10


@SETTINGS
@given(seeds)
def test_commute_symmetric(seed):
    rng = np.random.default_rng(seed)
    f = signs_form(rng, 3)
    g = f.gram
    a, b = rng.standard_normal((2, 3, 3))
    # self-adjoint for f: g^-1 times a symmetric matrix
    a = Operator(np.linalg.solve(g, a + a.T), f)
    b = Operator(np.linalg.solve(g, b + b.T), f)
    r1, r2 = commute(a, b), commute(b, a)
    assert r1.commute == r2.commute
    assert r1.residual == pytest.approx(r2.residual, rel=1e-12, abs=1e-15)


@SETTINGS
@given(seeds, st.integers(min_value=1, max_value=4))
def test_orthonormalize_idempotent(seed, k):
    rng = np.random.default_rng(seed)
    f = signs_form(rng, 5)
    try:
        once = orthonormalize(f, rng.standard_normal((k, 5)))
    except (Degenerate, LinearlyDependent):
        return
    p = f.products(once)
    assert np.allclose(np.abs(p), np.eye(k), atol=1e-9)
    twice = orthonormalize(f, once)
    assert np.allclose(np.abs(f.products(twice)), np.eye(k), atol=1e-9)
    # same span
    assert np.linalg.matrix_rank(np.vstack([once, twice]), tol=1e-8) == k


@SETTINGS
@given(seeds)
def test_eigen_reconstruction(seed):
    rng = np.random.default_rng(seed)
    f = signs_form(rng, 4)
    s = rng.standard_normal((4, 4))
    op = Operator(np.linalg.solve(f.gram, s + s.T), f)
    d = eigen_orthonormal(op)
    if d.diagonalizable:
        assert np.allclose(reconstruct(d, f), op.matrix, atol=1e-8 * max(1, np.abs(op.matrix).max()))


def random_germ(ctx, rng, dim):
    for _ in range(50):
        try:
            t = rng.standard_normal((dim, ctx.dim))
            g = Germ.from_vectors(ctx, t)
            return g
        except (Degenerate, LinearlyDependent, NotUnit):
            continue
    raise RuntimeError("no nondegenerate germ")


@SETTINGS
@given(seeds, st.sampled_from(["sl2r", "su2xsu2", "so4", "su2xR"]))
def test_alpha_skew_k_self_adjoint(seed, ident):
    rng = np.random.default_rng(seed)
    ctx = ctx_for(ident)
    g = random_germ(ctx, rng, int(rng.integers(1, ctx.dim)))
    assert invariant_shape(g).operator.skew_adjoint_residual() <= 1e-9
    assert normal_jacobi(g).operator.self_adjoint_residual() <= 1e-9


@SETTINGS
@given(seeds, st.sampled_from(["sl2r", "su2xsu2", "so4", "indefinite"]))
def test_two_dim_alpha_squared_scalar(seed, ident):
    # holds for any signature of the restricted form, closed normal or not
    rng = np.random.default_rng(seed)
    if ident == "indefinite":
        ctx = CurvatureContext(catalog.metric_algebra("su2xsu2", np.diag([1.0, 1, 1, -1, -1, -1])))
    else:
        ctx = ctx_for(ident)
    g = random_germ(ctx, rng, 2)
    a = invariant_shape(g).matrix
    sq = a @ a
    assert np.allclose(sq, sq[0, 0] * np.eye(2), atol=1e-10)


def test_two_dim_lorentzian_case_occurs():
    rng = np.random.default_rng(3)
    found = 0
    for _ in range(40):
        g = random_germ(ctx_for("sl2r"), rng, 2)
        if not g.frame.tangent_positive_definite:
            a = invariant_shape(g).matrix
            assert np.allclose(a @ a, (a @ a)[0, 0] * np.eye(2), atol=1e-10)
            found += 1
    assert found > 0


@pytest.mark.parametrize("ident", ALGEBRAS + ["su2xsu2:indefinite"])
def test_prop9_random_closed_germs(ident):
    base = ident.split(":indefinite")[0]
    if ident.endswith("indefinite"):
        ctx = CurvatureContext(catalog.metric_algebra(base, np.diag([1.0, 1, 1, -1, -1, -1])))
    else:
        ctx = ctx_for(ident)
    rng = np.random.default_rng([11, len(ident)])
    worst = 0.0
    for _ in range(500):
        g, _ = random_closed_germ(ctx, rng, subalgebra_seeds(base), spacelike=None)
        assert is_subalgebra(ctx.mla.algebra, g.frame.normal)[0]
        worst = max(worst, verify_prop9(g), normal_jacobi(g).tangent_invariance_residual)
    assert worst <= 1e-9


@SETTINGS
@given(seeds, st.sampled_from(["sl2r", "su2xsu2:indefinite", "so4"]))
def test_sign_relation_any_causal_character(seed, ident):
    rng = np.random.default_rng(seed)
    base = ident.split(":")[0]
    if ident.endswith("indefinite"):
        ctx = CurvatureContext(catalog.metric_algebra(base, np.diag([1.0, 1, 1, -1, -1, -1])))
    else:
        ctx = ctx_for(ident)
    g, _ = random_closed_germ(ctx, rng, subalgebra_seeds(base), spacelike=None)
    dec = eigen_orthonormal(normal_jacobi(g).operator)
    if not dec.diagonalizable:
        return
    assert sign_guard_residual(g) <= 1e-9
    eps = np.sign(ctx.inner(g.eta, g.eta))
    for lam, c in zip(dec.eigenvalues, dec.eigenbasis):
        assert lam == pytest.approx(-eps * sectional(ctx, g.vector(c), g.eta), abs=1e-9)


@settings(max_examples=8, deadline=None, derandomize=True)
@given(seeds, st.sampled_from(["su2", "su2xR", "su2xsu2"]))
def test_symmetric_difference_immersion_germs(seed, ident):
    rng = np.random.default_rng(seed)
    model = MatrixGroupModel.from_catalog(ident)
    ctx = CurvatureContext(model.mla)
    if rng.random() < 0.5:
        imm, eta = random_hypersurface(model, rng)
    else:
        eta = rng.standard_normal(model.dim)
        eta /= np.linalg.norm(eta)
        imm = umbilic_hypersurface(model, eta, rng.uniform(-1, 1), rng)
    g = germ_from_immersion(ctx, imm, eta=eta)
    # positive-definite tangent: the derivative table is symmetric across distinct eigenvalues
    assert symmetric_difference_residual(g) <= 10 * 5e-6
