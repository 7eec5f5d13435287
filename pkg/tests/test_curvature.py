import numpy as np
import pytest

import oracles
from conftest import ctx_for
from liecurv import catalog
from liecurv.curvature import (
    CurvatureContext,
    constant_curvature_test,
    curvature_axioms,
    einstein_check,
    jacobi_operator,
    jacobi_scalar_residual,
    nabla,
    ricci,
    riem,
    sectional,
)
from liecurv.errors import DegeneratePlane, NotBiInvariant, NotUnit
from liecurv.liealg import MetricLieAlgebra
from liecurv.semilinear import BilinearForm

E3 = np.eye(3)


def oracle_for(ident, metric="default"):
    e = catalog.entry(ident)
    return oracles.MatrixOracle(e.matrices, catalog.metric_form(ident, metric).gram)


def test_context_rejects_non_invariant():
    with pytest.raises(NotBiInvariant):
        CurvatureContext(MetricLieAlgebra(catalog.algebra("su2"), BilinearForm.diagonal([1, 1, 2]), strict=False))


def test_nabla_examples(rng):
    ctx = ctx_for("su2")
    assert np.allclose(nabla(ctx, E3[0], E3[1]), [0, 0, 0.5])
    x = rng.standard_normal(3)
    assert np.allclose(nabla(ctx, x, x), 0)
    assert np.all(nabla(ctx_for("abelian:3"), x, rng.standard_normal(3)) == 0)


def test_riem_examples(rng):
    ctx = ctx_for("su2")
    assert np.allclose(riem(ctx, E3[0], E3[1], E3[0]), [0, -0.25, 0])
    x, z = rng.standard_normal((2, 3))
    assert np.allclose(riem(ctx, x, x, z), 0)


@pytest.mark.parametrize("ident", ["su2", "sl2r", "su2xsu2", "so4", "su2xR"])
def test_riem_matches_matrix_oracle(ident, rng):
    ctx = ctx_for(ident)
    orc = oracle_for(ident)
    for _ in range(5):
        x, y, z = rng.standard_normal((3, ctx.dim))
        assert np.allclose(riem(ctx, x, y, z), orc.riem(x, y, z), atol=1e-12)


def test_sectional_su2_identity():
    ctx = ctx_for("su2", "identity")
    assert sectional(ctx, E3[0], E3[1]) == pytest.approx(0.25, abs=1e-14)
    assert sectional(ctx_for("abelian:3"), E3[0], E3[1]) == 0.0


def test_sectional_scaled_form():
    # frozen from the oracle: the form 4 I scales every sectional curvature by 1/4
    mla = MetricLieAlgebra(catalog.algebra("su2"), BilinearForm(4 * np.eye(3)))
    ctx = CurvatureContext(mla)
    orc = oracles.MatrixOracle(catalog.entry("su2").matrices, 4 * np.eye(3))
    assert orc.sectional(E3[0] / 2, E3[1] / 2) == pytest.approx(1 / 16, abs=1e-14)
    assert sectional(ctx, E3[0] / 2, E3[1] / 2) == pytest.approx(1 / 16, abs=1e-14)


@pytest.mark.parametrize("ident", ["su2", "sl2r", "su2xsu2", "so4"])
def test_sectional_matches_oracle_and_is_basis_free(ident, rng):
    ctx = ctx_for(ident)
    orc = oracle_for(ident)
    for _ in range(10):
        x, y = rng.standard_normal((2, ctx.dim))
        s = sectional(ctx, x, y)
        assert s == pytest.approx(orc.sectional(x, y), abs=1e-10)
        a, b, c, d = rng.standard_normal(4)
        assert sectional(ctx, a * x + b * y, c * x + d * y) == pytest.approx(s, abs=1e-8)


def test_sectional_degenerate_plane():
    ctx = ctx_for("sl2r")
    # E is null and orthogonal to H, so span{H, E} is degenerate
    with pytest.raises(DegeneratePlane):
        sectional(ctx, [1, 0, 0], [0, 1, 0])
    with pytest.raises(DegeneratePlane):
        sectional(ctx, [0, 1, 0], [0, 2, 0])


def test_jacobi_operator_su2():
    k = jacobi_operator(ctx_for("su2", "identity"), E3[2])
    assert np.allclose(k.matrix, -0.25 * np.eye(2), atol=1e-14)
    scalar, res = jacobi_scalar_residual(ctx_for("su2"), E3[2])
    assert scalar == pytest.approx(-0.25) and res < 1e-14


def test_jacobi_operator_su2xsu2():
    k = jacobi_operator(ctx_for("su2xsu2"), np.eye(6)[2])
    assert np.allclose(np.sort(np.linalg.eigvals(k.matrix).real), [-0.25, -0.25, 0, 0, 0], atol=1e-14)


def test_jacobi_operator_requires_unit():
    with pytest.raises(NotUnit):
        jacobi_operator(ctx_for("su2"), [2.0, 0, 0])


@pytest.mark.parametrize("ident", ["su2", "sl2r", "so4"])
def test_jacobi_operator_self_adjoint(ident, rng):
    ctx = ctx_for(ident)
    for _ in range(5):
        x = rng.standard_normal(ctx.dim)
        q = ctx.inner(x, x)
        if abs(q) < 0.1:
            continue
        k = jacobi_operator(ctx, x / np.sqrt(abs(q)))
        assert k.operator.self_adjoint_residual() <= 1e-12


def test_constant_curvature_examples():
    v = constant_curvature_test(ctx_for("su2", "identity"))
    assert v.constant and v.kappa == pytest.approx(0.25, abs=1e-8)
    v = constant_curvature_test(ctx_for("abelian:4"))
    assert v.constant and v.kappa == pytest.approx(0.0, abs=1e-12)
    v = constant_curvature_test(ctx_for("su2xsu2"))
    assert not v.constant and v.witness is not None


def test_constant_curvature_sl2r_killing_scaled():
    v = constant_curvature_test(ctx_for("sl2r"))
    assert v.constant and v.signature == (1, 2)
    # frozen from the oracle: sectional of a spacelike-timelike plane
    orc = oracle_for("sl2r")
    assert v.kappa == pytest.approx(orc.sectional([0, 1, -1], [1, 0, 0]), abs=1e-8)


def test_constant_curvature_needs_dim3():
    with pytest.raises(ValueError):
        constant_curvature_test(ctx_for("abelian:2"))


def ricci_oracle(ident):
    orc = oracle_for(ident)
    n = len(orc.basis)
    e = np.eye(n)
    return np.array([[sum(orc.riem(e[k], e[a], e[b])[k] for k in range(n)) for b in range(n)] for a in range(n)])


@pytest.mark.parametrize("ident", ["su2", "sl2r", "su2xR", "so4"])
def test_ricci_matches_oracle(ident):
    assert np.allclose(ricci(ctx_for(ident)), ricci_oracle(ident), atol=1e-12)


def test_einstein_examples():
    v = einstein_check(ctx_for("su2"))
    # Ricci = +1/2 I and B = -2 I
    assert v.proportional and v.c == pytest.approx(-0.25, abs=1e-14)
    v = einstein_check(ctx_for("abelian:3"))
    assert v.proportional and v.c is None and v.residual == 0.0 and v.killing_degenerate
    v = einstein_check(ctx_for("su2xR"))
    assert v.killing_degenerate and v.proportional
    assert v.c == pytest.approx(-0.25, abs=1e-14)


@pytest.mark.parametrize("ident", ["su2", "sl2r", "so3", "su2xsu2", "so4", "abelian:4"])
def test_curvature_axioms(ident):
    r = curvature_axioms(ctx_for(ident), samples=50, seed=1)
    assert max(r.pair_symmetry, r.skew_symmetry, r.bianchi) <= 1e-10
