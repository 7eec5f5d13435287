import numpy as np
import pytest

import oracles
from conftest import ctx_for
from liecurv import catalog
from liecurv.curvature import CurvatureContext
from liecurv.errors import HypothesisFailed, InconsistentGaussTerm, NotUmbilic, NotUnitNormal
from liecurv.germs import (
    NAMED_GERMS,
    adapted_shape,
    gauss_for_shape,
    graph_immersion,
    mixing_shape,
    named_germ,
    random_closed_germ,
    subalgebra_seeds,
    umbilic_hypersurface,
)
from liecurv.matrixgroup import Immersion, MatrixGroupModel, NormalField, frame_at
from liecurv.semilinear import commute, eigen_orthonormal
from liecurv.submanifold import (
    Germ,
    check_adapted,
    check_corollary11,
    check_prop4,
    check_umbilic,
    gauss_term_from_immersion,
    germ_from_immersion,
    invariant_shape,
    normal_closed,
    normal_jacobi,
    shape_operator,
    sign_guard_residual,
    symmetric_difference_residual,
    verify_prop9,
    verify_theorem1,
)

E3 = np.eye(3)
E6 = np.eye(6)


@pytest.fixture(scope="module")
def su2_germ():
    return Germ.from_vectors(ctx_for("su2"), E3[:2], E3[2])


def test_invariant_shape_su2(su2_germ):
    # alpha(e1) = 1/2 [e1, e3] = -1/2 e2, alpha(e2) = 1/2 e1 (columns are images)
    s = invariant_shape(su2_germ)
    assert np.allclose(s.matrix, [[0, 0.5], [-0.5, 0]], atol=1e-15)
    assert s.dropped_normal_residual <= 1e-15


def test_invariant_shape_vanishing_cases():
    g = Germ.from_vectors(ctx_for("abelian:4"), np.eye(4)[:2], np.eye(4)[3])
    assert np.all(invariant_shape(g).matrix == 0)
    g = Germ.from_vectors(ctx_for("su2xsu2"), E6[:3], E6[5])
    assert np.allclose(invariant_shape(g).matrix, 0)


def test_invariant_shape_rejects_bad_eta(su2_germ):
    with pytest.raises(NotUnitNormal):
        invariant_shape(su2_germ, [0, 0, 2.0])
    with pytest.raises(NotUnitNormal):
        invariant_shape(su2_germ, [1.0, 0, 0])


def test_normal_jacobi_su2(su2_germ):
    nj = normal_jacobi(su2_germ)
    assert np.allclose(nj.matrix, -0.25 * np.eye(2), atol=1e-15)
    assert not nj.restricted
    assert np.all(normal_jacobi(Germ.from_vectors(ctx_for("abelian:3"), E3[:2], E3[2])).matrix == 0)


@pytest.mark.parametrize("ng", NAMED_GERMS, ids=lambda ng: ng.name)
def test_alpha_and_k_match_oracle(ng):
    germ = named_germ(ng)
    e = catalog.entry(ng.ident)
    orc = oracles.MatrixOracle(e.matrices, germ.ctx.form.gram)
    alpha, k = orc.shape_data(germ.frame.tangent, germ.eta)
    assert np.allclose(invariant_shape(germ).matrix, alpha, atol=1e-12)
    assert np.allclose(normal_jacobi(germ).matrix, k, atol=1e-12)


def test_prop9_su2(su2_germ):
    assert verify_prop9(su2_germ) <= 1e-15


def test_prop9_non_closed_control():
    # K(e1) = -1/4 e1 while alpha(e1) = 0: residual 1/4
    g = Germ.from_vectors(ctx_for("su2"), [E3[0]], E3[1])
    assert not normal_closed(g)[0]
    assert verify_prop9(g) == pytest.approx(0.25, abs=1e-15)


def test_commute_k_alpha_su2(su2_germ):
    assert commute(normal_jacobi(su2_germ).operator, invariant_shape(su2_germ).operator).commute


def test_subgroup_germ_requires_subalgebra():
    with pytest.raises(HypothesisFailed):
        Germ.subgroup(ctx_for("su2"), E3[:2])
    g = Germ.subgroup(ctx_for("su2xsu2"), E6[:3], E6[3])
    assert np.all(g.gauss_term == 0)
    assert np.allclose(shape_operator(g).matrix, 0)


def test_gauss_term_subgroup_immersion_vanishes():
    model = MatrixGroupModel.from_catalog("su2xsu2")
    imm = Immersion(model, "product", {"generators": E6[:3].tolist()})
    assert np.abs(gauss_term_from_immersion(imm).matrix).max() <= 1e-9


@pytest.mark.parametrize("a, b, sign", [(1.0, 1.0, 1.0), (1.0, 1.0, -1.0), (2.0, -0.5, 1.0)])
def test_paraboloid_matches_classical_shape(a, b, sign):
    model = MatrixGroupModel.from_catalog("abelian:3", "identity")
    imm = graph_immersion(model, [0, 0, 1.0], E3[:2], np.diag([a, b]))
    gt = gauss_term_from_immersion(imm, eta=[0, 0, sign])
    want = oracles.paraboloid_shape(a, b, sign)
    assert np.allclose(gt.matrix, want, atol=5e-6)
    germ = germ_from_immersion(CurvatureContext(model.mla), imm, eta=[0, 0, sign])
    assert np.allclose(shape_operator(germ).matrix, want, atol=5e-6)
    assert np.allclose(invariant_shape(germ).matrix, 0)


def test_gauss_term_independent_of_normal_extension(rng):
    # codimension 2: exp-graph in su2xsu2 with four tangent directions
    model = MatrixGroupModel.from_catalog("su2xsu2")
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    h = rng.standard_normal((4, 4))
    imm = graph_immersion(model, q[:, 0], q[:, 2:].T, h + h.T, [(0.7, [1, 1, 1, 0])], 0.5 * rng.standard_normal(6))
    frame = frame_at(imm)
    twist = np.outer(frame.normal[1], rng.standard_normal(4))
    base = gauss_term_from_immersion(imm).matrix
    other = gauss_term_from_immersion(imm, normal_field=NormalField(imm, imm.base_point, frame.eta, twist)).matrix
    assert np.abs(base - other).max() <= 5e-6
    # the twist is not a no-op: it changes the eta-normal pairing away from u0
    u = imm.base_point + 0.1
    assert abs(NormalField(imm, imm.base_point, frame.eta)(u) @ frame.normal[1]
               - NormalField(imm, imm.base_point, frame.eta, twist)(u) @ frame.normal[1]) > 1e-3


def test_shape_operator_inconsistent_gauss(su2_germ):
    with pytest.raises(InconsistentGaussTerm):
        shape_operator(su2_germ.with_gauss_term(0.3 * np.eye(2)))
    # W absorbing the skew part of alpha is consistent
    w = 0.3 * np.eye(2) - invariant_shape(su2_germ).matrix
    assert np.allclose(shape_operator(su2_germ.with_gauss_term(w)).matrix, 0.3 * np.eye(2))


def test_shape_operator_needs_gauss_term(su2_germ):
    with pytest.raises(HypothesisFailed):
        shape_operator(su2_germ)


def test_explicit_gauss_basis_change():
    ctx = ctx_for("su2xsu2")
    given = [[2.0, 0, 0, 0, 0, 0], [1.0, 1, 0, 0, 0, 0], *E6[[3, 4, 5]]]
    w = np.diag([0.0, 0.0, 1.0, 2.0, 3.0])
    g = Germ.from_vectors(ctx, given, E6[2], gauss_term=w)
    # W maps given[k] -> w[k, k] given[k]
    for col, vec in enumerate(given):
        img = g.vector(g.gauss_term @ g.frame.tangent_coefficients(vec))
        assert np.allclose(img, w[col, col] * np.asarray(vec), atol=1e-12)


def nonadapted_su2xsu2(rng):
    g = Germ.from_vectors(ctx_for("su2xsu2"), E6[[0, 1, 3, 4, 5]], E6[2])
    return g.with_gauss_term(gauss_for_shape(g, mixing_shape(g, rng, strength=0.5)))


def test_check_adapted_examples(rng):
    sub = Germ.subgroup(ctx_for("su2xsu2"), E6[:3], E6[5])
    r = check_adapted(sub)
    assert r.adapted and r.commute_AK and r.closed_normal
    bad = check_adapted(nonadapted_su2xsu2(rng))
    assert not bad.commute_AK and bad.K_tangent_invariant and not bad.adapted
    assert bad.multiplicity_profile == [{"eigenvalue": pytest.approx(-0.25), "multiplicity": 2},
                                        {"eigenvalue": pytest.approx(0.0), "multiplicity": 3}]


def test_check_adapted_abelian_normal():
    g = Germ.subgroup(ctx_for("su2xR"), np.eye(4)[:3], np.eye(4)[3])
    r = check_adapted(g)
    assert r.abelian_normal and r.adapted


def test_theorem1_subgroup():
    r = verify_theorem1(Germ.subgroup(ctx_for("su2xsu2"), E6[:3], E6[5]))
    assert r.i and r.ii and r.iii and r.agree


def test_theorem1_nonadapted(rng):
    r = verify_theorem1(nonadapted_su2xsu2(rng))
    assert not r.i and not r.ii and not r.iii and r.agree


def test_theorem1_adapted_immersion(rng):
    model = MatrixGroupModel.from_catalog("su2xsu2")
    eta = rng.standard_normal(6)
    eta /= np.linalg.norm(eta)
    imm = umbilic_hypersurface(model, eta, 0.7, rng)
    germ = germ_from_immersion(CurvatureContext(model.mla), imm, eta=eta)
    r = verify_theorem1(germ)
    assert r.i and r.ii and r.iii and r.pairs > 0


def test_theorem1_requires_closed_normal():
    g = Germ.from_vectors(ctx_for("su2"), [E3[0]], E3[1], gauss_term=[[0.0]])
    with pytest.raises(HypothesisFailed):
        verify_theorem1(g)


def test_corollary11_examples(su2_germ):
    v = check_corollary11(su2_germ)
    assert v.passed and v.details["profile"] == [{"eigenvalue": pytest.approx(-0.25), "multiplicity": 2}]
    g = named_germ(next(ng for ng in NAMED_GERMS if ng.name == "su2xsu2 antidiagonal"))
    prof = check_corollary11(g).details["profile"]
    assert [p["multiplicity"] for p in prof] == [2, 1] and prof[0]["eigenvalue"] < 0
    assert check_corollary11(Germ.from_vectors(ctx_for("abelian:4"), np.eye(4)[:2], np.eye(4)[2])).passed


def test_corollary11_requires_riemannian_tangent():
    g = named_germ(next(ng for ng in NAMED_GERMS if ng.name == "sl2r spacelike normal"))
    with pytest.raises(HypothesisFailed):
        check_corollary11(g)


def prop4_germ():
    return named_germ(next(ng for ng in NAMED_GERMS if ng.name == "su2xsu2 antidiagonal"))


def test_prop4_umbilic_shape():
    g = prop4_germ()
    v = check_prop4(g.with_gauss_term(gauss_for_shape(g, 0.4 * np.eye(3))))
    assert v.passed and v.details["commute_AK"] and v.details["kernel_line_invariant"]


def test_prop4_rotated_kernel(rng):
    g = prop4_germ()
    dec = eigen_orthonormal(normal_jacobi(g).operator)
    zero = int(np.argmin(np.abs(dec.cluster_values())))
    shape = mixing_shape(g, rng, 0.5, clusters=(zero, 1 - zero))
    v = check_prop4(g.with_gauss_term(gauss_for_shape(g, shape)))
    assert v.passed and not v.details["commute_AK"] and not v.details["kernel_line_invariant"]


def test_prop4_diagonal_gauss(rng):
    g = prop4_germ()
    v = check_prop4(g.with_gauss_term(gauss_for_shape(g, adapted_shape(g, rng))))
    assert v.passed and v.details["commute_AK"] and v.details["kernel_line_invariant"]


def test_prop4_hypotheses(su2_germ):
    with pytest.raises(HypothesisFailed):
        check_prop4(su2_germ.with_gauss_term(-invariant_shape(su2_germ).matrix))
    flat = Germ.subgroup(ctx_for("abelian:4"), np.eye(4)[:3], np.eye(4)[3])
    with pytest.raises(HypothesisFailed):
        check_prop4(flat)


def test_umbilic_examples(rng):
    v = check_umbilic(Germ.subgroup(ctx_for("su2xsu2"), E6[:3], E6[5]))
    assert v.passed and v.details["max_residual"] == 0.0
    model = MatrixGroupModel.from_catalog("su2xR")
    eta = np.array([0.3, -0.2, 0.5, 0.6])
    eta /= np.linalg.norm(eta)
    germ = germ_from_immersion(CurvatureContext(model.mla), umbilic_hypersurface(model, eta, 1.1, rng), eta=eta)
    v = check_umbilic(germ)
    assert v.passed and v.details["max_residual"] <= 5e-6 and v.details["scalar"] == pytest.approx(1.1, abs=5e-6)
    assert v.details["alpha_relation_residual"] <= 5e-6


def test_umbilic_rejects_non_umbilic(rng):
    with pytest.raises(NotUmbilic):
        check_umbilic(nonadapted_su2xsu2(rng))


def test_sign_guard_named():
    for ng in NAMED_GERMS:
        assert sign_guard_residual(named_germ(ng)) <= 1e-12


def test_symmetric_difference_on_immersion(rng):
    model = MatrixGroupModel.from_catalog("su2xsu2")
    eta = rng.standard_normal(6)
    eta /= np.linalg.norm(eta)
    germ = germ_from_immersion(CurvatureContext(model.mla), umbilic_hypersurface(model, eta, -0.6, rng), eta=eta)
    assert symmetric_difference_residual(germ) <= 10 * 5e-6


def test_random_closed_germ_is_closed(rng):
    ctx = ctx_for("so4")
    for _ in range(10):
        g, name = random_closed_germ(ctx, rng, subalgebra_seeds("so4"))
        assert normal_closed(g)[0]
        assert name in {n for n, _ in subalgebra_seeds("so4")}
