"""Scenario files: loading, validation and execution.

A scenario names an algebra and metric, a target (algebra checks,
curvature, an explicit germ or an immersion) and a list of checks. Each
check yields a verdict: ``pass``/``fail`` when it asserts something,
``info`` when it only reports, ``error`` when a domain error escaped.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from liecurv import __version__, catalog
from liecurv.curvature import (
    CurvatureContext,
    constant_curvature_test,
    curvature_axioms,
    einstein_check,
    jacobi_operator,
    jacobi_scalar_residual,
    sectional,
)
from liecurv.errors import LieCurvError, SchemaError
from liecurv.liealg import (
    LieAlgebra,
    MetricLieAlgebra,
    abelian_residual,
    check_jacobi,
    is_ad_invariant,
    is_subalgebra,
    killing_form,
)
from liecurv.matrixgroup import (
    FAMILIES,
    Immersion,
    MatrixGroupModel,
    NormalField,
    frame_at,
    second_fundamental_shape,
)
from liecurv.semilinear import BilinearForm, signature
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
    verify_prop9,
    verify_theorem1,
)
from liecurv.tolerances import override, tols

SCHEMA_VERSION = "1"
PROP6_STEP = 2e-4


def schema() -> dict:
    return json.loads(resources.files("liecurv").joinpath("scenario.schema.json").read_text())


def _line_of(text: str, path) -> int | None:
    keys = [p for p in path if isinstance(p, str)]
    pos = 0
    for key in keys:
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if not m:
            break
        pos = m.start()
    if not keys:
        return None
    return text.count("\n", 0, pos) + 1


def _field(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def parse(text: str, source: str = "<string>") -> dict:
    """Parse and validate scenario JSON; raises SchemaError with line and field."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}: line {exc.lineno}, column {exc.colno}: invalid JSON ({exc.msg})") from None
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = list(err.absolute_path)
        line = _line_of(text, path)
        where = f"line {line}, " if line else ""
        raise SchemaError(f"{source}: {where}field {_field(path)}: {err.message}")
    return data


def load(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read scenario ({exc.strerror})") from None
    return parse(text, str(path))


def bundled() -> list[str]:
    root = resources.files("liecurv").joinpath("scenarios")
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("liecurv").joinpath("scenarios", name)))


# ------------------------------------------------------------------ building


@dataclass
class Built:
    scenario: dict
    mla: MetricLieAlgebra
    ident: str | None
    ctx: CurvatureContext | None = None
    germ: Germ | None = None
    immersion: Immersion | None = None
    seed: int = 0


def _input_error(field, msg):
    return SchemaError(f"field {field}: {msg}")


def _dims(value, field, shape):
    arr = np.asarray(value, dtype=float)
    if arr.ndim != len(shape) or any(s is not None and a != s for a, s in zip(arr.shape, shape)):
        want = "x".join("m" if s is None else str(s) for s in shape)
        raise _input_error(field, f"expected shape {want}, got {'x'.join(map(str, arr.shape))}")
    return arr


def _algebra(scn):
    spec = scn["algebra"]
    if isinstance(spec, str):
        try:
            return catalog.entry(spec), spec
        except KeyError as exc:
            raise _input_error("algebra", exc.args[0]) from None
    c = np.asarray(spec["structure"], dtype=float)
    if c.ndim != 3 or len(set(c.shape)) != 1:
        raise _input_error("algebra.structure", f"must be n x n x n, got shape {c.shape}")
    try:
        return LieAlgebra(c, spec.get("name", "inline")), None
    except ValueError as exc:
        raise _input_error("algebra.structure", str(exc)) from None


def build(scn: dict) -> Built:
    entry, ident = _algebra(scn)
    alg = entry.algebra if ident else entry
    n = alg.dim
    metric = scn.get("metric", "default")
    if isinstance(metric, list):
        gram = _dims(metric, "metric", (n, n))
    elif metric == "killing":
        gram = killing_form(alg).form.gram
    elif metric == "identity" or (metric == "default" and not ident):
        gram = np.eye(n)
    else:
        gram = entry.default_gram
    try:
        form = BilinearForm(gram)
        strict = scn["target"] != "algebra_checks"
        mla = MetricLieAlgebra(alg, form, name=ident or alg.name, strict=strict)
    except LieCurvError as exc:
        raise _input_error("metric", str(exc)) from None
    built = Built(scn, mla, ident)
    target = scn["target"]
    if target == "algebra_checks":
        return built
    built.ctx = CurvatureContext(mla)
    if target == "germ":
        if "germ" not in scn:
            raise _input_error("germ", "target 'germ' needs a germ block")
        g = scn["germ"]
        tangent = _dims(g["tangent"], "germ.tangent", (None, n))
        eta = _dims(g["eta"], "germ.eta", (n,)) if "eta" in g else None
        m = len(tangent)
        try:
            if g.get("subgroup"):
                built.germ = Germ.subgroup(built.ctx, tangent, eta)
            else:
                w = _dims(g["gauss_term"], "germ.gauss_term", (m, m)) if "gauss_term" in g else None
                built.germ = Germ.from_vectors(built.ctx, tangent, eta, w, g.get("gauss_basis", "given"))
        except LieCurvError as exc:
            raise _input_error("germ", f"{type(exc).__name__}: {exc}") from None
    elif target == "immersion":
        if "immersion" not in scn:
            raise _input_error("immersion", "target 'immersion' needs an immersion block")
        if not ident:
            raise _input_error("algebra", "immersions need a catalog algebra with a matrix model")
        spec = scn["immersion"]
        if spec["family"] not in FAMILIES:
            raise _input_error("immersion.family", f"unknown family {spec['family']!r}; known: {', '.join(FAMILIES)}")
        try:
            model = MatrixGroupModel(tuple(entry.matrices), mla, ident)
            bp = _dims(spec["base_point"], "immersion.base_point", (None,)) if "base_point" in spec else None
            imm = Immersion(model, spec["family"], spec["params"], bp)
            eta = _dims(spec["eta"], "immersion.eta", (n,)) if "eta" in spec else None
            built.immersion = imm
            built.germ = germ_from_immersion(built.ctx, imm, eta=eta, h=spec.get("h"))
        except (LieCurvError, ValueError, KeyError) as exc:
            raise _input_error("immersion", f"{type(exc).__name__}: {exc}") from None
    return built


# ------------------------------------------------------------------- checks


def _vec(built, args, key):
    if key not in args:
        raise _input_error(f"checks.{key}", "missing argument")
    return _dims(args[key], f"checks.{key}", (built.mla.dim,))


def _need_germ(built, name):
    if built.germ is None:
        raise _input_error("checks", f"check {name!r} needs target 'germ' or 'immersion'")
    return built.germ


def _need_ctx(built, name):
    if built.ctx is None:
        raise _input_error("checks", f"check {name!r} needs a bi-invariant metric (target other than algebra_checks)")
    return built.ctx


def ck_jacobi(b, a):
    res = check_jacobi(b.mla.algebra)
    scale = max(1.0, np.abs(b.mla.algebra.structure).max(initial=0.0) ** 2)
    return res <= tols().jacobi * scale, {"residual": res}


def ck_ad_invariance(b, a):
    ok, res = is_ad_invariant(b.mla.algebra, b.mla.form)
    return ok, {"ad_invariant": ok, "residual": res}


def ck_killing(b, a):
    kf = killing_form(b.mla.algebra)
    return None, {"gram": kf.form.gram, "degenerate": kf.degenerate}


def ck_signature(b, a):
    p, q = signature(b.mla.form)
    return None, {"p": p, "q": q}


def ck_subalgebra(b, a):
    s = _dims(a.get("subspace"), "checks.subspace", (None, b.mla.dim))
    ok, res = is_subalgebra(b.mla.algebra, s)
    return None, {"subalgebra": ok, "residual": res, "abelian_residual": abelian_residual(b.mla.algebra, s)}


def ck_constant_curvature(b, a):
    v = constant_curvature_test(_need_ctx(b, "constant_curvature"), int(a.get("samples", 200)), b.seed)
    return None, v.to_dict()


def ck_einstein(b, a):
    return None, einstein_check(_need_ctx(b, "einstein")).to_dict()


def ck_axioms(b, a):
    r = curvature_axioms(_need_ctx(b, "curvature_axioms"), int(a.get("samples", 100)), b.seed)
    return max(r.pair_symmetry, r.skew_symmetry, r.bianchi) <= 1e-10, r.to_dict()


def ck_sectional(b, a):
    ctx = _need_ctx(b, "sectional")
    return None, {"sec": sectional(ctx, _vec(b, a, "x"), _vec(b, a, "y"))}


def ck_jacobi_operator(b, a):
    ctx = _need_ctx(b, "jacobi_operator")
    x = _vec(b, a, "x")
    k = jacobi_operator(ctx, x)
    scalar, res = jacobi_scalar_residual(ctx, x)
    return None, {"matrix": k.matrix, "basis": k.basis, "scalar": scalar, "scalar_residual": res}


def ck_invariant_shape(b, a):
    g = _need_germ(b, "invariant_shape")
    s = invariant_shape(g)
    return None, {"matrix": s.matrix, "dropped_normal_residual": s.dropped_normal_residual,
                  "skew_residual": s.operator.skew_adjoint_residual()}


def ck_normal_jacobi(b, a):
    k = normal_jacobi(_need_germ(b, "normal_jacobi"))
    return None, {"matrix": k.matrix, "tangent_invariance_residual": k.tangent_invariance_residual,
                  "restricted": k.restricted}


def ck_gauss_term(b, a):
    g = _need_germ(b, "gauss_term")
    return None, {"matrix": g.gauss_term, "fd_discrepancy": g.fd_discrepancy, "source": g.source}


def ck_shape_operator(b, a):
    op = shape_operator(_need_germ(b, "shape_operator"))
    return None, {"matrix": op.matrix, "self_adjoint_residual": op.self_adjoint_residual()}


def ck_prop9(b, a):
    g = _need_germ(b, "prop9")
    closed, _ = normal_closed(g)
    res = verify_prop9(g)
    inv = normal_jacobi(g).tangent_invariance_residual
    passed = (res <= tols().tol and inv <= tols().tol) if closed else None
    return passed, {"closed_normal": closed, "residual": res, "tangent_invariance_residual": inv}


def ck_adapted(b, a):
    return None, check_adapted(_need_germ(b, "adapted")).to_dict()


def ck_theorem1(b, a):
    r = verify_theorem1(_need_germ(b, "theorem1"))
    return r.agree, r.to_dict()


def ck_corollary11(b, a):
    v = check_corollary11(_need_germ(b, "corollary11"))
    return v.passed, v.details


def ck_prop4(b, a):
    v = check_prop4(_need_germ(b, "prop4"))
    return v.passed, v.details


def ck_umbilic(b, a):
    v = check_umbilic(_need_germ(b, "umbilic"))
    return v.passed, v.details


def ck_sign_guard(b, a):
    res = sign_guard_residual(_need_germ(b, "sign_guard"))
    return res <= tols().tol, {"residual": res}


def ck_prop6(b, a):
    g = _need_germ(b, "prop6")
    if b.immersion is None:
        raise _input_error("checks", "check 'prop6' needs target 'immersion'")
    h = float(a.get("h", PROP6_STEP))
    imm = b.immersion
    frame = frame_at(imm, eta=g.eta)
    alpha = invariant_shape(g).matrix
    disc = []
    for step in (h, h / 2):
        w = gauss_term_from_immersion(imm, eta=g.eta, h=step, extrapolate=False).matrix
        disc.append(float(np.abs(second_fundamental_shape(imm, frame, h=step) - alpha - w).max()))
    ratio = disc[0] / disc[1] if disc[1] > 0 else None
    passed = disc[0] <= tols().fd and (ratio is None or ratio >= 3 or disc[0] <= 1e-10)
    return passed, {"h": h, "discrepancy": disc[0], "halved_discrepancy": disc[1], "ratio": ratio}


def ck_normal_independence(b, a):
    g = _need_germ(b, "normal_independence")
    if b.immersion is None:
        raise _input_error("checks", "check 'normal_independence' needs target 'immersion'")
    rng = np.random.default_rng(b.seed)
    frame = g.frame
    other = frame.normal[1] if frame.codim > 1 else frame.eta
    twist = np.outer(other, rng.standard_normal(b.immersion.source_dim))
    field = NormalField(b.immersion, g.u0, g.eta, twist)
    w2 = gauss_term_from_immersion(b.immersion, g.u0, g.eta, g.h, field).matrix
    diff = float(np.abs(w2 - g.gauss_term).max())
    return diff <= tols().fd, {"difference": diff}


CHECKS = {
    "jacobi": ck_jacobi,
    "ad_invariance": ck_ad_invariance,
    "killing_form": ck_killing,
    "signature": ck_signature,
    "subalgebra": ck_subalgebra,
    "constant_curvature": ck_constant_curvature,
    "einstein": ck_einstein,
    "curvature_axioms": ck_axioms,
    "sectional": ck_sectional,
    "jacobi_operator": ck_jacobi_operator,
    "invariant_shape": ck_invariant_shape,
    "normal_jacobi": ck_normal_jacobi,
    "gauss_term": ck_gauss_term,
    "shape_operator": ck_shape_operator,
    "prop9": ck_prop9,
    "adapted": ck_adapted,
    "theorem1": ck_theorem1,
    "corollary11": ck_corollary11,
    "prop4": ck_prop4,
    "umbilic": ck_umbilic,
    "sign_guard": ck_sign_guard,
    "prop6": ck_prop6,
    "normal_independence": ck_normal_independence,
}


# ------------------------------------------------------------------ running


def jsonable(x):
    """Plain-Python copy of ``x`` (arrays to lists, numpy scalars to Python)."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else None
    return x


def _matches(expected, actual, atol) -> bool:
    if isinstance(expected, dict):
        return isinstance(actual, dict) and all(k in actual and _matches(v, actual[k], atol) for k, v in expected.items())
    if isinstance(expected, bool) or expected is None or isinstance(expected, str):
        return expected == actual
    if isinstance(expected, (int, float)) and not isinstance(actual, bool):
        return actual is not None and not isinstance(actual, (list, dict)) and abs(float(actual) - expected) <= atol
    if isinstance(expected, list):
        try:
            return np.allclose(np.asarray(actual, float), np.asarray(expected, float), rtol=0, atol=atol)
        except (TypeError, ValueError):
            return False
    return False


def _check_entry(item):
    if isinstance(item, str):
        return item, {}, None
    args = {k: v for k, v in item.items() if k not in ("name", "expect")}
    return item["name"], args, item.get("expect")


def run_checks(built: Built, timings: list | None = None) -> list[dict]:
    """Run the scenario's checks in order; wall times go to ``timings`` (not the report)."""
    out = []
    for k, item in enumerate(built.scenario["checks"]):
        start = time.perf_counter()
        name, args, expect = _check_entry(item)
        if name not in CHECKS:
            raise _input_error(f"checks[{k}]", f"unknown check {name!r}; known: {', '.join(CHECKS)}")
        entry = {"name": name}
        try:
            passed, result = CHECKS[name](built, args)
            entry["result"] = jsonable(result)
            error = None
        except SchemaError:
            raise
        except LieCurvError as exc:
            passed, error = False, {"type": type(exc).__name__, "message": str(exc)}
            entry["error"] = error
        if expect is not None:
            atol = float(expect.get("atol", 1e-8))
            want = {k: v for k, v in expect.items() if k != "atol"}
            if "error" in want:
                ok = error is not None and error["type"] == want["error"]
            else:
                ok = error is None and _matches(want, entry["result"], atol)
            entry["asserted"] = True
            entry["verdict"] = "pass" if ok else "fail"
            entry["expect"] = jsonable(expect)
        elif error is not None:
            entry["asserted"] = True
            entry["verdict"] = "error"
        elif passed is None:
            entry["asserted"] = False
            entry["verdict"] = "info"
        else:
            entry["asserted"] = True
            entry["verdict"] = "pass" if passed else "fail"
        out.append(entry)
        if timings is not None:
            timings.append(time.perf_counter() - start)
    return out


def run(scn: dict, seed: int | None = None, tol_fd: float | None = None, timings: list | None = None) -> dict:
    """Execute a validated scenario; returns the report dictionary."""
    seed = int(scn.get("seed", 0) if seed is None else seed)
    changes = dict(scn.get("tolerances", {}))
    if tol_fd is not None:
        changes["fd"] = tol_fd
    try:
        tols().replace(**changes)
    except KeyError as exc:
        raise _input_error("tolerances", exc.args[0]) from None
    with override(**changes):
        built = build(scn)
        built.seed = seed
        checks = run_checks(built, timings)
        effective = tols().as_dict()
    return {
        "schema_version": SCHEMA_VERSION,
        "toolkit_version": __version__,
        "seed": seed,
        "scenario": scn,
        "tolerances": effective,
        "checks": checks,
        "passed": all(c["verdict"] in ("pass", "info") for c in checks),
    }
