"""The bundled verification battery.

Each criterion draws its random germs from its own seeded stream, so the
report depends only on the suite name, the seed and the toolkit version.
Reports carry no timing, which keeps the JSON byte-stable.
"""

from __future__ import annotations

import numpy as np

from liecurv import __version__, catalog
from liecurv.curvature import CurvatureContext, constant_curvature_test, curvature_axioms
from liecurv.germs import (
    NAMED_GERMS,
    adapted_shape,
    gauss_for_shape,
    mixing_shape,
    named_germ,
    prop4_seeds,
    random_closed_germ,
    random_hypersurface,
    random_self_adjoint,
    subalgebra_seeds,
    umbilic_hypersurface,
)
from liecurv.matrixgroup import MatrixGroupModel, frame_at, second_fundamental_shape
from liecurv.semilinear import eigen_orthonormal
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
    sign_guard_residual,
    verify_prop9,
    verify_theorem1,
)

SCHEMA_VERSION = "1"
RANDOM_ALGEBRAS = ["su2", "so3", "sl2r", "su2xsu2", "su2xR", "so4", "abelian:4", "su2xsu2:indefinite"]
PROP6_STEP = 2e-4
MIN_MIXING = 1e-3


def _r(x) -> float | None:
    """Round to 6 significant digits for stable reports."""
    return None if x is None else float(f"{float(x):.6e}")


def _ctx(key: str) -> CurvatureContext:
    if key == "su2xsu2:indefinite":
        return CurvatureContext(catalog.metric_algebra("su2xsu2", np.diag([1.0, 1, 1, -1, -1, -1])))
    return CurvatureContext(catalog.metric_algebra(key))


def _seeds(key: str):
    return subalgebra_seeds(key.split(":indefinite")[0])


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream])


def _criterion(number, title, passed, germs, max_residual, **details):
    return {
        "criterion": number,
        "title": title,
        "passed": bool(passed),
        "germs": int(germs),
        "max_residual": _r(max_residual),
        "details": details,
    }


def c1_axioms(seed):
    worst, rows = 0.0, {}
    for ident in ["su2", "sl2r", "so3", "su2xsu2", "so4", "abelian:4"]:
        res = curvature_axioms(_ctx(ident), samples=100, seed=seed)
        rows[ident] = {k: _r(v) for k, v in res.to_dict().items() if k != "samples"}
        worst = max(worst, res.pair_symmetry, res.skew_symmetry, res.bianchi)
    return _criterion(1, "curvature axioms", worst <= 1e-10, 6, worst, algebras=rows)


def c2_constant_curvature(seed):
    rows, ok = {}, True
    expected = {"su2": 0.25, "sl2r": None, "abelian:3": 0.0, "so3": 0.25, "su2xsu2": False, "su2xR": False}
    atol = {"su2": 1e-8, "abelian:3": 1e-12, "so3": 1e-8}
    worst = 0.0
    for ident, want in expected.items():
        v = constant_curvature_test(_ctx(ident), samples=200, seed=seed)
        if want is False:
            good = (not v.constant) and v.witness is not None
        else:
            good = v.constant and (want is None or abs(v.kappa - want) <= atol[ident])
            worst = max(worst, v.max_spread, v.max_mixed_residual)
        ok &= good
        rows[ident] = {"constant": v.constant, "kappa": _r(v.kappa), "ok": good,
                       "witness": None if v.witness is None else v.witness["kind"]}
    return _criterion(2, "dimension-3 constant curvature", ok, len(expected), worst, algebras=rows)


def criterion3_population(seed, per_algebra=70):
    """Named closed germs plus random closed-normal germs with spacelike eta."""
    germs = [(ng.name, named_germ(ng)) for ng in NAMED_GERMS if ng.closed]
    for k, key in enumerate(RANDOM_ALGEBRAS):
        rng = _rng(seed, 300 + k)
        ctx = _ctx(key)
        for _ in range(per_algebra):
            g, name = random_closed_germ(ctx, rng, _seeds(key))
            germs.append((f"{key}/{name}", g))
    return germs


def c3_prop9(population):
    worst = 0.0
    for _, g in population:
        worst = max(worst, verify_prop9(g), normal_jacobi(g).tangent_invariance_residual)
    bad = named_germ(next(ng for ng in NAMED_GERMS if not ng.closed))
    control = verify_prop9(bad)
    ok = worst <= 1e-9 and abs(control - 0.25) <= 1e-9 and not normal_closed(bad)[0]
    return _criterion(3, "K = alpha^2 on closed normal spaces", ok, len(population), worst,
                      random_germs=len(population) - sum(ng.closed for ng in NAMED_GERMS),
                      non_closed_control=_r(control))


def c4_corollary11(population):
    count, worst, ok = 0, 0.0, True
    for _, g in population:
        if not g.frame.tangent_positive_definite:
            continue
        v = check_corollary11(g)
        count += 1
        ok &= v.passed
        worst = max(worst, v.details["alpha_skew_residual"])
    return _criterion(4, "nonzero K eigenvalues negative, even multiplicity", ok and worst <= 1e-10, count, worst)


def c5_theorem1(seed, count=120):
    agree, n_adapted = True, 0
    max_pass, min_fail = 0.0, np.inf
    made = 0
    for k, ident in enumerate(["su2xsu2", "so4"]):
        rng = _rng(seed, 500 + k)
        ctx = _ctx(ident)
        target = count // 2
        i = 0
        while i < target:
            g, _ = random_closed_germ(ctx, rng, subalgebra_seeds(ident))
            adapted = i % 2 == 0
            if adapted:
                shape = adapted_shape(g, rng)
            else:
                dec = eigen_orthonormal(normal_jacobi(g).operator)
                if len(dec.clusters) < 2:
                    continue
                shape = mixing_shape(g, rng, strength=rng.uniform(0.05, 1.0))
            r = verify_theorem1(g.with_gauss_term(gauss_for_shape(g, shape)))
            if not adapted and min(r.commute_residual, r.ii_residual, r.iii_residual) < MIN_MIXING:
                # the construction guarantees a clear failure; redraw a weak coupling
                continue
            agree &= r.agree
            residuals = (r.commute_residual, r.ii_residual, r.iii_residual)
            if r.i:
                n_adapted += 1
                max_pass = max(max_pass, *residuals)
            else:
                min_fail = min(min_fail, *residuals)
            i += 1
            made += 1
    gap = min_fail / max(max_pass, 1e-300)
    ok = agree and max_pass <= 1e-8 and min_fail >= 1e-3 and gap >= 1e5 and 0 < n_adapted < made
    return _criterion(5, "adaptedness three-way agreement", ok, made, max_pass,
                      adapted=n_adapted, non_adapted=made - n_adapted,
                      max_passing_residual=_r(max_pass), min_failing_residual=_r(min_fail),
                      orders_of_magnitude=_r(np.log10(gap)) if np.isfinite(gap) else None)


def c6_prop6(seed, per_algebra=4):
    worst, worst_ratio = 0.0, np.inf
    rows = []
    for k, ident in enumerate(["su2", "su2xR", "su2xsu2"]):
        rng = _rng(seed, 600 + k)
        model = MatrixGroupModel.from_catalog(ident)
        ctx = CurvatureContext(model.mla)
        for _ in range(per_algebra):
            imm, eta = random_hypersurface(model, rng)
            frame = frame_at(imm, eta=eta)
            alpha = invariant_shape(Germ(ctx, frame)).matrix
            disc = []
            for h in (PROP6_STEP, PROP6_STEP / 2):
                w = gauss_term_from_immersion(imm, eta=eta, h=h, extrapolate=False).matrix
                disc.append(float(np.abs(second_fundamental_shape(imm, frame, h=h) - alpha - w).max()))
            ratio = disc[0] / max(disc[1], 1e-300)
            worst = max(worst, disc[0])
            worst_ratio = min(worst_ratio, ratio)
            rows.append({"algebra": ident, "discrepancy": _r(disc[0]), "halved": _r(disc[1]), "ratio": _r(ratio)})
    ok = worst <= 5e-6 and worst_ratio >= 3
    return _criterion(6, "A = alpha + W against the second fundamental form", ok, len(rows), worst,
                      step=PROP6_STEP, min_ratio=_r(worst_ratio), germs_detail=rows)


def c7_prop40(seed, count=200):
    ok, worst = True, 0.0
    per = count // len(RANDOM_ALGEBRAS) + 1
    made = 0
    for k, key in enumerate(RANDOM_ALGEBRAS):
        rng = _rng(seed, 700 + k)
        ctx = _ctx(key)
        for _ in range(per):
            if made == count:
                break
            g, _ = random_closed_germ(ctx, rng, _seeds(key), spacelike=None, tangent_dims={2})
            g = g.with_gauss_term(gauss_for_shape(g, random_self_adjoint(g.frame.tangent_signs, rng)))
            rep = check_adapted(g)
            ok &= rep.commute_AK and rep.K_tangent_invariant
            worst = max(worst, rep.commute_residual)
            made += 1
    return _criterion(7, "surfaces with closed normal space are adapted", ok and made == count, made, worst)


def c8_prop4(seed, count=60):
    ok, made, both_true, both_false = True, 0, 0, 0
    worst = 0.0
    for k, ident in enumerate(["su2xsu2", "so4"]):
        rng = _rng(seed, 800 + k)
        ctx = _ctx(ident)
        for i in range(count // 2):
            g, _ = random_closed_germ(ctx, rng, prop4_seeds(ident))
            kind = i % 4
            if kind == 0:
                shape = rng.uniform(-1, 1) * np.eye(g.dim)
            elif kind == 1:
                shape = adapted_shape(g, rng)
            else:
                dec = eigen_orthonormal(normal_jacobi(g).operator)
                zero = int(np.argmin(np.abs(dec.cluster_values())))
                other = 1 - zero if len(dec.clusters) == 2 else (zero + 1) % len(dec.clusters)
                if kind == 2:
                    shape = mixing_shape(g, rng, rng.uniform(0.05, 1.0), clusters=(zero, other))
                else:
                    shape = random_self_adjoint(g.frame.tangent_signs, rng)
            v = check_prop4(g.with_gauss_term(gauss_for_shape(g, shape)))
            ok &= v.passed
            made += 1
            if v.details["commute_AK"]:
                both_true += 1
                worst = max(worst, v.details["kernel_line_residual"])
            else:
                both_false += 1
    return _criterion(8, "kernel of K is an A-eigenvector iff adapted", ok and both_true and both_false, made, worst,
                      commuting=both_true, non_commuting=both_false)


def c9_umbilic(seed, per_algebra=6):
    ok, worst, rows = True, 0.0, 0
    for k, ident in enumerate(["su2xR", "su2xsu2"]):
        rng = _rng(seed, 900 + k)
        model = MatrixGroupModel.from_catalog(ident)
        ctx = CurvatureContext(model.mla)
        for _ in range(per_algebra):
            eta = rng.standard_normal(model.dim)
            eta /= np.linalg.norm(eta)
            imm = umbilic_hypersurface(model, eta, rng.uniform(-1.5, 1.5), rng)
            v = check_umbilic(germ_from_immersion(ctx, imm, eta=eta))
            ok &= v.passed and v.details["pairs"] > 0
            worst = max(worst, v.details["max_residual"])
            rows += 1
    return _criterion(9, "umbilic germs: cross-eigenspace derivatives vanish", ok and worst <= 5e-6, rows, worst)


def c10_sign_guard(population):
    worst = max(sign_guard_residual(g) for _, g in population)
    return _criterion(10, "lambda_j = -sec(e_j, eta)", worst <= 1e-9, len(population), worst)


def paper_verification(seed: int = 0) -> dict:
    population = criterion3_population(seed)
    criteria = [
        c1_axioms(seed),
        c2_constant_curvature(seed),
        c3_prop9(population),
        c4_corollary11(population),
        c5_theorem1(seed),
        c6_prop6(seed),
        c7_prop40(seed),
        c8_prop4(seed),
        c9_umbilic(seed),
        c10_sign_guard(population),
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "toolkit_version": __version__,
        "suite": "paper-verification",
        "seed": seed,
        "passed": all(c["passed"] for c in criteria),
        "criteria": criteria,
    }


SUITES = {"paper-verification": paper_verification}


def run_suite(name: str, seed: int = 0) -> dict:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    return SUITES[name](seed)


def summary_rows(report: dict) -> list[tuple]:
    return [(c["criterion"], c["title"], c["germs"], c["max_residual"], "PASS" if c["passed"] else "FAIL")
            for c in report["criteria"]]
