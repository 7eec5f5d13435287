"""Matrix Lie group backend: exponentials, immersions and finite-difference frames.

Tangent vectors at a group element ``g`` are carried back to the identity
by left translation, ``v -> g^-1 v``, and expressed in algebra coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from liecurv import catalog
from liecurv.errors import (
    DegenerateNormal,
    DegenerateSubspace,
    DegenerateTangent,
    LinearlyDependent,
    NotUnitNormal,
    OffAlgebra,
    OrientationFlip,
)
from liecurv.liealg import LieAlgebra, MetricLieAlgebra, Subspace, orthogonal_complement
from liecurv.semilinear import BilinearForm, _is_degenerate, orthonormalize, self_products
from liecurv.tolerances import tols

MAX_EXP_NORM = 50.0


@dataclass(frozen=True, eq=False)
class MatrixGroupModel:
    basis: tuple  # n matrices of size d x d
    mla: MetricLieAlgebra
    name: str = ""
    _pinv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mats = tuple(np.array(b, dtype=float) for b in self.basis)
        object.__setattr__(self, "basis", mats)
        flat = np.array([m.ravel() for m in mats]).T
        if np.linalg.matrix_rank(flat) < len(mats):
            raise ValueError("algebra basis matrices are linearly dependent")
        object.__setattr__(self, "_pinv", np.linalg.pinv(flat))
        induced, residual = self._induced()
        if residual > 1e-10:
            raise ValueError(f"basis is not closed under commutators (residual {residual:.3e})")
        mismatch = np.abs(induced - self.mla.algebra.structure).max(initial=0.0)
        if mismatch > 1e-10:
            raise ValueError(f"commutators do not reproduce the structure constants (mismatch {mismatch:.3e})")

    @classmethod
    def from_catalog(cls, ident: str, metric="default") -> "MatrixGroupModel":
        e = catalog.entry(ident)
        return cls(tuple(e.matrices), catalog.metric_algebra(ident, metric), ident)

    @property
    def matrix_size(self) -> int:
        return self.basis[0].shape[0]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def form(self) -> BilinearForm:
        return self.mla.form

    def to_matrix(self, x) -> np.ndarray:
        return np.tensordot(np.asarray(x, dtype=float), np.array(self.basis), axes=1)

    def coords(self, m) -> tuple[np.ndarray, float]:
        """Least-squares algebra coordinates of a matrix, and the off-span residual."""
        m = np.asarray(m, dtype=float)
        c = self._pinv @ m.ravel()
        return c, float(np.linalg.norm(self.to_matrix(c) - m))

    def _induced(self):
        n = self.dim
        c = np.zeros((n, n, n))
        worst = 0.0
        for i in range(n):
            for j in range(n):
                a, b = self.basis[i], self.basis[j]
                c[i, j], res = self.coords(a @ b - b @ a)
                worst = max(worst, res)
        return c, worst

    def induced_structure(self) -> np.ndarray:
        return self._induced()[0]

    def induced_algebra(self) -> LieAlgebra:
        c = self.induced_structure()
        return LieAlgebra(0.5 * (c - c.transpose(1, 0, 2)))


def expm(m) -> np.ndarray:
    return scipy.linalg.expm(np.asarray(m, dtype=float))


def group_exp(model: MatrixGroupModel, x, t: float = 1.0) -> np.ndarray:
    """exp(t X) for the algebra vector ``x``; checks exp(X) exp(-X) = I."""
    mat = t * model.to_matrix(x)
    if np.linalg.norm(mat) > MAX_EXP_NORM:
        raise ValueError(f"|t x| = {np.linalg.norm(mat):.3g} exceeds {MAX_EXP_NORM}")
    e, einv = expm(mat), expm(-mat)
    residual = np.abs(e @ einv - np.eye(len(e))).max()
    if residual > 1e-12 * max(1.0, np.linalg.norm(e, 2) * np.linalg.norm(einv, 2)):
        raise ArithmeticError(f"matrix exponential failed its inverse check ({residual:.3e})")
    return e


def exp_directional_derivative(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d/ds exp(x + s y) at s = 0, read off the block exponential."""
    d = x.shape[0]
    block = np.zeros((2 * d, 2 * d))
    block[:d, :d] = x
    block[d:, d:] = x
    block[:d, d:] = y
    return expm(block)[:d, d:]


# ---------------------------------------------------------------- families


def _vec(model, v, what):
    v = np.asarray(v, dtype=float)
    if v.shape != (model.dim,):
        raise ValueError(f"{what} must have length {model.dim}, got shape {v.shape}")
    return v


class Family:
    name = ""
    summary = ""
    param_names: tuple = ()

    def prepare(self, model: MatrixGroupModel, params: dict) -> dict:
        raise NotImplementedError

    def source_dim(self, prepared: dict) -> int:
        raise NotImplementedError

    def evaluate(self, prepared: dict, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivatives(self, prepared: dict, u: np.ndarray) -> list[np.ndarray]:
        raise NotImplementedError

    @staticmethod
    def _left(model, params) -> np.ndarray:
        if params.get("left") is None:
            return np.eye(model.matrix_size)
        return group_exp(model, _vec(model, params["left"], "left"))


class OneParameter(Family):
    name = "one-parameter"
    summary = "u -> L exp(u x)"
    param_names = ("generator", "left")

    def prepare(self, model, params):
        return {"L": self._left(model, params), "X": model.to_matrix(_vec(model, params["generator"], "generator"))}

    def source_dim(self, p):
        return 1

    def evaluate(self, p, u):
        return p["L"] @ expm(u[0] * p["X"])

    def derivatives(self, p, u):
        return [p["L"] @ p["X"] @ expm(u[0] * p["X"])]


class Product(Family):
    name = "product"
    summary = "u -> L exp(u_1 x_1) ... exp(u_m x_m)"
    param_names = ("generators", "left")

    def prepare(self, model, params):
        gens = [model.to_matrix(_vec(model, g, "generator")) for g in params["generators"]]
        if not gens:
            raise ValueError("product family needs at least one generator")
        return {"L": self._left(model, params), "X": gens}

    def source_dim(self, p):
        return len(p["X"])

    def evaluate(self, p, u):
        out = p["L"]
        for uj, x in zip(u, p["X"]):
            out = out @ expm(uj * x)
        return out

    def derivatives(self, p, u):
        factors = [expm(uj * x) for uj, x in zip(u, p["X"])]
        out = []
        for j, x in enumerate(p["X"]):
            m = p["L"]
            for k, f in enumerate(factors):
                m = m @ (x @ f if k == j else f)
            out.append(m)
        return out


class ExpGraph(Family):
    name = "exp-graph"
    summary = "u -> L exp(sum_j u_j x_j) exp(f(u) nu), f a polynomial"
    param_names = ("coefficients", "source_dim", "tangent", "normal", "left")

    def prepare(self, model, params):
        m = int(params["source_dim"])
        tangent = [model.to_matrix(_vec(model, t, "tangent vector")) for t in params["tangent"]]
        if len(tangent) != m:
            raise ValueError(f"exp-graph needs {m} tangent vectors, got {len(tangent)}")
        monomials = []
        for term in params.get("coefficients", []):
            coef, *powers = term
            if len(powers) != m or any(int(k) != k or k < 0 for k in powers):
                raise ValueError(f"bad monomial {term!r}: expected [coef, {m} nonnegative integer powers]")
            monomials.append((float(coef), np.array(powers, dtype=int)))
        return {
            "L": self._left(model, params),
            "X": tangent,
            "N": model.to_matrix(_vec(model, params["normal"], "normal")),
            "f": monomials,
            "m": m,
        }

    def source_dim(self, p):
        return p["m"]

    @staticmethod
    def poly(p, u):
        return sum(c * np.prod(u ** k) for c, k in p["f"])

    @staticmethod
    def poly_grad(p, u):
        g = np.zeros(p["m"])
        for c, k in p["f"]:
            for j in range(p["m"]):
                if k[j]:
                    kk = k.copy()
                    kk[j] -= 1
                    g[j] += c * k[j] * np.prod(u ** kk)
        return g

    def evaluate(self, p, u):
        x = sum(uj * xj for uj, xj in zip(u, p["X"]))
        return p["L"] @ expm(x) @ expm(self.poly(p, u) * p["N"])

    def derivatives(self, p, u):
        x = sum(uj * xj for uj, xj in zip(u, p["X"]))
        ex, en = expm(x), expm(self.poly(p, u) * p["N"])
        grad = self.poly_grad(p, u)
        return [
            p["L"] @ (exp_directional_derivative(x, xj) @ en + ex @ (grad[j] * p["N"]) @ en)
            for j, xj in enumerate(p["X"])
        ]


class Orbit(Family):
    name = "orbit"
    summary = "u -> L E(u) exp(point) E(u)^-1 with E(u) = exp(sum_j u_j x_j)"
    param_names = ("generators", "point", "left")

    def prepare(self, model, params):
        gens = [model.to_matrix(_vec(model, g, "generator")) for g in params["generators"]]
        return {"L": self._left(model, params), "X": gens, "P": group_exp(model, _vec(model, params["point"], "point"))}

    def source_dim(self, p):
        return len(p["X"])

    def evaluate(self, p, u):
        e = expm(sum(uj * xj for uj, xj in zip(u, p["X"])))
        return p["L"] @ e @ p["P"] @ np.linalg.inv(e)

    def derivatives(self, p, u):
        x = sum(uj * xj for uj, xj in zip(u, p["X"]))
        e = expm(x)
        einv = np.linalg.inv(e)
        out = []
        for xj in p["X"]:
            de = exp_directional_derivative(x, xj)
            out.append(p["L"] @ (de @ p["P"] @ einv - e @ p["P"] @ einv @ de @ einv))
        return out


FAMILIES: dict[str, Family] = {f.name: f for f in (OneParameter(), Product(), ExpGraph(), Orbit())}


def family_listing() -> list[str]:
    out = []
    for f in FAMILIES.values():
        names = ", ".join(n for n in f.param_names if n != "left")
        out.append(f"{f.name} (params: {names}; optional: left) -- {f.summary}")
    return out


@dataclass(frozen=True, eq=False)
class Immersion:
    model: MatrixGroupModel
    family: str
    params: dict
    base_point: np.ndarray | None = None
    _prepared: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise KeyError(f"unknown immersion family {self.family!r}; known: {sorted(FAMILIES)}")
        try:
            prepared = FAMILIES[self.family].prepare(self.model, self.params)
        except KeyError as exc:
            raise ValueError(f"family {self.family!r} is missing parameter {exc}") from None
        object.__setattr__(self, "_prepared", prepared)
        m = FAMILIES[self.family].source_dim(prepared)
        u0 = np.zeros(m) if self.base_point is None else np.asarray(self.base_point, dtype=float)
        if u0.shape != (m,):
            raise ValueError(f"base point must have length {m}")
        object.__setattr__(self, "base_point", u0)
        tangent = self.tangent(u0)
        if np.linalg.matrix_rank(tangent, tol=1e-9 * max(1.0, np.abs(tangent).max())) < m:
            raise DegenerateTangent("immersion differential is not injective at the base point")

    @property
    def source_dim(self) -> int:
        return len(self.base_point)

    def __call__(self, u) -> np.ndarray:
        return FAMILIES[self.family].evaluate(self._prepared, np.asarray(u, dtype=float))

    def derivatives(self, u) -> list[np.ndarray]:
        return FAMILIES[self.family].derivatives(self._prepared, np.asarray(u, dtype=float))

    def tangent(self, u) -> np.ndarray:
        """Left-translated partial derivatives F(u)^-1 dF/du_j (rows, algebra coordinates)."""
        g = self(u)
        ginv = np.linalg.inv(g)
        return np.array([self.model.coords(ginv @ d)[0] for d in self.derivatives(u)])


def left_log_derivative(imm: Immersion, u0, j: int, h: float | None = None) -> np.ndarray:
    """Central-difference estimate of F(u0)^-1 dF/du_j in algebra coordinates."""
    h = tols().fd_step if h is None else h
    u0 = np.asarray(u0, dtype=float)
    step = np.zeros_like(u0)
    step[j] = h
    diff = (imm(u0 + step) - imm(u0 - step)) / (2 * h)
    c, residual = imm.model.coords(np.linalg.solve(imm(u0), diff))
    if residual > 100 * h * h + 1e-9:
        raise OffAlgebra(f"derivative leaves the algebra (residual {residual:.3e})")
    return c


# ------------------------------------------------------------------ frames


def _first_significant_positive(v: np.ndarray) -> np.ndarray:
    k = int(np.flatnonzero(np.abs(v) > 1e-9 * np.abs(v).max())[0])
    return -v if v[k] < 0 else v


@dataclass(frozen=True, eq=False)
class PointFrame:
    """Orthonormal tangent and normal bases at a point, translated to the identity.

    ``normal[0]`` is the selected unit normal ``eta``.
    """

    form: BilinearForm
    tangent: np.ndarray
    normal: np.ndarray
    tangent_signs: np.ndarray
    normal_signs: np.ndarray

    @property
    def eta(self) -> np.ndarray:
        return self.normal[0]

    @property
    def dim(self) -> int:
        return len(self.tangent)

    @property
    def codim(self) -> int:
        return len(self.normal)

    @property
    def basis(self) -> np.ndarray:
        return np.vstack([self.tangent, self.normal])

    @property
    def signs(self) -> np.ndarray:
        return np.concatenate([self.tangent_signs, self.normal_signs])

    @property
    def tangent_space(self) -> Subspace:
        return Subspace(self.tangent)

    @property
    def normal_space(self) -> Subspace:
        return Subspace(self.normal)

    @property
    def restricted_form_tangent(self) -> BilinearForm:
        return BilinearForm(np.diag(self.tangent_signs))

    @property
    def restricted_form_normal(self) -> BilinearForm:
        return BilinearForm(np.diag(self.normal_signs))

    @property
    def tangent_positive_definite(self) -> bool:
        return bool(np.all(self.tangent_signs > 0))

    def tangent_coefficients(self, v) -> np.ndarray:
        """Coefficients of the tangential part of ``v`` along the tangent basis."""
        return (self.tangent @ self.form.gram @ np.asarray(v, float)) * self.tangent_signs

    def project_tangent(self, v) -> np.ndarray:
        return self.tangent_coefficients(v) @ self.tangent

    def orthonormality_residual(self) -> float:
        b = self.basis
        return float(np.abs(np.abs(self.form.products(b)) - np.eye(len(b))).max(initial=0.0))

    @classmethod
    def build(cls, form: BilinearForm, tangent_vectors, eta=None) -> "PointFrame":
        tv = np.atleast_2d(np.asarray(tangent_vectors, dtype=float))
        n = form.dim
        if tv.shape[1] != n:
            raise ValueError(f"tangent vectors must have length {n}")
        try:
            tangent = orthonormalize(form, tv)
        except DegenerateSubspace:
            raise DegenerateTangent("induced metric on the tangent space is degenerate") from None
        except LinearlyDependent:
            raise DegenerateTangent("tangent vectors are linearly dependent") from None
        normal_space = orthogonal_complement(form, Subspace(tangent))
        if normal_space.dim == 0:
            raise ValueError("germ has no normal directions")
        if _is_degenerate(form.products(normal_space.basis)):
            raise DegenerateNormal("induced metric on the normal space is degenerate")
        if eta is None:
            if normal_space.dim == 1:
                eta = normal_space.basis[0]
            else:
                eta = orthonormalize(form, normal_space.basis)[0]
            eta = _first_significant_positive(eta / np.sqrt(abs(form(eta, eta))))
        eta = np.asarray(eta, dtype=float)
        tangential = float(np.abs(tangent @ form.gram @ eta).max(initial=0.0))
        if tangential > 10 * tols().tol * max(1.0, np.abs(eta).max()):
            raise NotUnitNormal(f"eta is not normal (tangential component {tangential:.3e})")
        if abs(abs(form(eta, eta)) - 1.0) > 10 * tols().tol:
            raise NotUnitNormal(f"|<eta,eta>| = {abs(form(eta, eta)):.12g}, expected 1")
        others = orthogonal_complement(form, Subspace(np.vstack([tangent, eta])))
        rest = orthonormalize(form, others.basis) if others.dim else np.zeros((0, n))
        normal = np.vstack([eta, rest])
        return cls(form, tangent, normal, self_products(form, tangent), self_products(form, normal))


def frame_at(imm: Immersion, u0=None, eta=None, h: float | None = None) -> PointFrame:
    """Frame at F(u0). Tangent vectors are exact left-log derivatives, or
    central differences with step ``h`` when one is given."""
    u0 = imm.base_point if u0 is None else np.asarray(u0, dtype=float)
    if h is None:
        tv = imm.tangent(u0)
    else:
        tv = np.array([left_log_derivative(imm, u0, j, h) for j in range(imm.source_dim)])
    return PointFrame.build(imm.model.form, tv, eta)


# ---------------------------------------------------- normal fields and FD


@dataclass(frozen=True, eq=False)
class NormalField:
    """Unit normal extension of ``eta`` near ``u0``, left-translated to the identity.

    n(u) is the normalized normal projection at F(u) of
    ``eta + twist @ (u - u0)``; ``twist`` (n x m, columns normal at u0)
    gives a second, genuinely different extension with the same value at u0.
    """

    imm: Immersion
    u0: np.ndarray
    eta: np.ndarray
    twist: np.ndarray | None = None

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        form = self.imm.model.form
        g = form.gram
        t = self.imm.tangent(u)
        target = self.eta if self.twist is None else self.eta + self.twist @ (u - self.u0)
        proj = target - t.T @ np.linalg.solve(t @ g @ t.T, t @ g @ target)
        norm2 = proj @ g @ proj
        if abs(norm2) < 0.5 * abs(target @ g @ target) or np.sign(norm2) != np.sign(self.eta @ g @ self.eta):
            raise OrientationFlip("normal space turned by more than 45 degrees")
        return proj / math.sqrt(abs(norm2))


@dataclass(frozen=True)
class Richardson:
    coarse: float  # step h
    fine: float  # step h/2
    extrapolated: float

    @property
    def discrepancy(self) -> float:
        return abs(self.coarse - self.fine)


def central_difference(fn: Callable[[np.ndarray], float], u0, direction, h: float):
    u0 = np.asarray(u0, dtype=float)
    d = np.asarray(direction, dtype=float)
    return (fn(u0 + h * d) - fn(u0 - h * d)) / (2 * h)


def richardson(fn, u0, direction, h: float) -> Richardson:
    coarse = central_difference(fn, u0, direction, h)
    fine = central_difference(fn, u0, direction, h / 2)
    return Richardson(coarse, fine, (4 * fine - coarse) / 3)


def source_direction(imm: Immersion, u0, v) -> np.ndarray:
    """The u-space direction d with dF(d) = v (v a tangent vector in algebra coordinates)."""
    t = imm.tangent(u0)
    d, *_ = np.linalg.lstsq(t.T, np.asarray(v, dtype=float), rcond=None)
    return d


def normal_pairing_derivative(
    imm: Immersion, u0, v, target, h: float | None = None, field: NormalField | None = None
) -> Richardson:
    """Derivative along tangent vector ``v`` of u -> <n(u), target>."""
    h = tols().fd_step if h is None else h
    u0 = np.asarray(u0, dtype=float)
    if field is None:
        field = NormalField(imm, u0, frame_at(imm, u0).eta)
    g = imm.model.form.gram
    target = np.asarray(target, dtype=float)
    return richardson(lambda u: field(u) @ g @ target, u0, source_direction(imm, u0, v), h)


def normal_coefficient_derivative(
    imm: Immersion, u0, v, i: int, h: float | None = None, frame: PointFrame | None = None, field=None
) -> float:
    """v(<N, b_i^L>) for the frame vector b_i (tangent first, then normal; eta is normal index 0).

    ``v`` is a tangent vector, or an int selecting a tangent frame vector.
    """
    u0 = imm.base_point if u0 is None else np.asarray(u0, dtype=float)
    frame = frame_at(imm, u0) if frame is None else frame
    field = NormalField(imm, u0, frame.eta) if field is None else field
    direction = frame.tangent[v] if isinstance(v, (int, np.integer)) else v
    return normal_pairing_derivative(imm, u0, direction, frame.basis[i], h, field).extrapolated


def second_fundamental_shape(imm: Immersion, frame: PointFrame, u0=None, h: float | None = None) -> np.ndarray:
    """Shape operator along frame.eta from second derivatives of the immersion.

    Uses <A x, y> = -<II(x, y), eta> with II(d_i, d_j) the normal part of
    d_i w_j + 1/2 [w_i, w_j], where w_j = F^-1 dF/du_j. Returns the matrix
    in the frame's tangent basis. This path never touches a normal field.
    """
    h = tols().fd_step if h is None else h
    u0 = imm.base_point if u0 is None else np.asarray(u0, dtype=float)
    m = imm.source_dim
    alg = imm.model.mla.algebra
    g = imm.model.form.gram
    w = imm.tangent(u0)
    s = np.zeros((m, m))
    for i in range(m):
        step = np.zeros(m)
        step[i] = h
        dw = (imm.tangent(u0 + step) - imm.tangent(u0 - step)) / (2 * h)
        for j in range(m):
            s[i, j] = (dw[j] + 0.5 * alg.bracket(w[i], w[j])) @ g @ frame.eta
    s = 0.5 * (s + s.T)
    # express the frame's tangent vectors in the coordinate tangent vectors
    d = np.linalg.solve(w @ g @ w.T, w @ g @ frame.tangent.T).T
    inner = -(d @ s @ d.T)  # <A e_l, e_k> at [l, k]
    return inner.T * frame.tangent_signs[:, None]
