"""Submanifold germs in a group with bi-invariant metric.

A germ is the pointwise data of a submanifold at p, left-translated to the
identity: an orthonormal tangent frame, a unit normal eta and optionally the
Gauss term W (the tangential derivative of the translated normal). All
tangent operators are matrices in the germ's orthonormal tangent frame.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from liecurv.curvature import CurvatureContext, sectional
from liecurv.errors import (
    HypothesisFailed,
    InconsistentGaussTerm,
    NotDiagonalizable,
    NotUmbilic,
    NotUnitNormal,
)
from liecurv.liealg import abelian_residual, is_subalgebra
from liecurv.matrixgroup import (
    Immersion,
    NormalField,
    PointFrame,
    frame_at,
    normal_pairing_derivative,
)
from liecurv.semilinear import (
    BilinearForm,
    EigenDecomposition,
    Operator,
    cluster_projector,
    commute,
    eigen_orthonormal,
)
from liecurv.tolerances import tols


@dataclass(frozen=True, eq=False)
class Germ:
    ctx: CurvatureContext
    frame: PointFrame
    gauss_term: np.ndarray | None = None
    source: str = "explicit"  # explicit | subgroup | immersion
    immersion: Immersion | None = None
    u0: np.ndarray | None = None
    h: float | None = None
    fd_discrepancy: float = 0.0
    normal_field: NormalField | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.gauss_term is not None:
            w = np.array(self.gauss_term, dtype=float)
            if w.shape != (self.dim, self.dim):
                raise ValueError(f"Gauss term must be {self.dim}x{self.dim}, got {w.shape}")
            w.setflags(write=False)
            object.__setattr__(self, "gauss_term", w)

    @classmethod
    def from_vectors(cls, ctx: CurvatureContext, tangent_vectors, eta=None, gauss_term=None, gauss_basis="given"):
        """Germ with tangent space span(tangent_vectors).

        An explicit Gauss term is read in the basis ``tangent_vectors``
        (``gauss_basis="given"``) or in the orthonormalized frame
        (``gauss_basis="frame"``); its columns are images of basis vectors.
        """
        frame = PointFrame.build(ctx.form, tangent_vectors, eta)
        germ = cls(ctx, frame)
        if gauss_term is None:
            return germ
        w = np.asarray(gauss_term, dtype=float)
        if gauss_basis == "given":
            w = _change_basis(frame, np.atleast_2d(np.asarray(tangent_vectors, float)), w)
        return germ.with_gauss_term(w)

    @classmethod
    def subgroup(cls, ctx: CurvatureContext, tangent_vectors, eta=None):
        """Germ of a Lie subgroup (the tangent space must be a subalgebra); W = 0."""
        ok, res = is_subalgebra(ctx.mla.algebra, np.atleast_2d(tangent_vectors))
        if not ok:
            raise HypothesisFailed(f"tangent space is not a subalgebra (residual {res:.3e})")
        frame = PointFrame.build(ctx.form, tangent_vectors, eta)
        return cls(ctx, frame, np.zeros((frame.dim, frame.dim)), source="subgroup")

    def with_gauss_term(self, w) -> "Germ":
        return Germ(self.ctx, self.frame, np.asarray(w, float), "explicit")

    @property
    def dim(self) -> int:
        return self.frame.dim

    @property
    def eta(self) -> np.ndarray:
        return self.frame.eta

    @property
    def tangent_form(self) -> BilinearForm:
        return self.frame.restricted_form_tangent

    @property
    def tol(self) -> float:
        return tols().fd if self.source == "immersion" else tols().theorem

    @property
    def commute_tol(self) -> float:
        return tols().fd if self.source == "immersion" else tols().commute

    def vector(self, coefficients) -> np.ndarray:
        """Algebra vector with the given tangent-frame coefficients."""
        return np.asarray(coefficients, float) @ self.frame.tangent


def _change_basis(frame: PointFrame, given: np.ndarray, w_given: np.ndarray) -> np.ndarray:
    # frame rows E = C @ given  =>  frame coefficients b = C^-T a
    c = np.linalg.lstsq(given.T, frame.tangent.T, rcond=None)[0].T
    ct = c.T
    return np.linalg.solve(ct, w_given @ ct)


def _eta_for(germ: Germ, eta) -> np.ndarray:
    if eta is None:
        return germ.eta
    eta = np.asarray(eta, dtype=float)
    form = germ.ctx.form
    if np.abs(germ.frame.tangent @ form.gram @ eta).max() > 10 * tols().tol or abs(abs(form(eta, eta)) - 1) > 10 * tols().tol:
        raise NotUnitNormal("eta must be a unit normal vector of the germ")
    return eta


def _tangent_matrix(germ: Germ, images: np.ndarray) -> tuple[np.ndarray, float]:
    """Matrix of a map whose images of the frame vectors are ``images`` (rows),
    plus the largest normal component that was discarded."""
    coeffs = np.array([germ.frame.tangent_coefficients(v) for v in images]).T
    leftover = images - coeffs.T @ germ.frame.tangent
    return coeffs, float(np.linalg.norm(leftover, axis=1).max(initial=0.0))


@dataclass(frozen=True, eq=False)
class InvariantShape:
    operator: Operator
    dropped_normal_residual: float  # size of the normal part of 1/2 [v, eta] that the projection dropped

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix


def invariant_shape(germ: Germ, eta=None) -> InvariantShape:
    """alpha(v) = tangential part of 1/2 [v, eta]."""
    eta = _eta_for(germ, eta)
    images = np.array([0.5 * germ.ctx.bracket(e, eta) for e in germ.frame.tangent])
    m, dropped = _tangent_matrix(germ, images)
    return InvariantShape(Operator(m, germ.tangent_form), dropped)


@dataclass(frozen=True, eq=False)
class NormalJacobi:
    operator: Operator  # tangential part of K
    tangent_invariance_residual: float
    restricted: bool  # True when a normal component had to be dropped

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix


def normal_jacobi(germ: Germ, eta=None) -> NormalJacobi:
    """K(v) = R(eta, v) eta = 1/4 [eta, [eta, v]]."""
    eta = _eta_for(germ, eta)
    br = germ.ctx.bracket
    images = np.array([0.25 * br(eta, br(eta, e)) for e in germ.frame.tangent])
    m, dropped = _tangent_matrix(germ, images)
    return NormalJacobi(Operator(m, germ.tangent_form), dropped, dropped > tols().tol)


@dataclass(frozen=True, eq=False)
class GaussTerm:
    matrix: np.ndarray
    frame: PointFrame
    discrepancy: float  # worst |D(h) - D(h/2)| over the entries


def gauss_term_from_immersion(
    imm: Immersion, u0=None, eta=None, h: float | None = None, normal_field: NormalField | None = None,
    extrapolate: bool = True,
) -> GaussTerm:
    """W(e_j) = sum_h eps_h e_j(<N, e_h^L>) e_h over the tangent frame."""
    u0 = imm.base_point if u0 is None else np.asarray(u0, dtype=float)
    h = tols().fd_step if h is None else h
    frame = frame_at(imm, u0, eta)
    nf = NormalField(imm, u0, frame.eta) if normal_field is None else normal_field
    m = frame.dim
    w = np.zeros((m, m))
    worst = 0.0
    for j in range(m):
        for k in range(m):
            r = normal_pairing_derivative(imm, u0, frame.tangent[j], frame.tangent[k], h, nf)
            w[k, j] = frame.tangent_signs[k] * (r.extrapolated if extrapolate else r.coarse)
            worst = max(worst, r.discrepancy)
    return GaussTerm(w, frame, worst)


def germ_from_immersion(ctx: CurvatureContext, imm: Immersion, u0=None, eta=None, h: float | None = None) -> Germ:
    u0 = imm.base_point if u0 is None else np.asarray(u0, dtype=float)
    gt = gauss_term_from_immersion(imm, u0, eta, h)
    nf = NormalField(imm, u0, gt.frame.eta)
    return Germ(ctx, gt.frame, gt.matrix, "immersion", imm, u0, h or tols().fd_step, gt.discrepancy, nf)


def shape_operator(germ: Germ, eta=None) -> Operator:
    """A = alpha + W, checked for self-adjointness."""
    if germ.gauss_term is None:
        raise HypothesisFailed("germ carries no Gauss term; the shape operator is unavailable")
    if eta is not None and np.abs(np.asarray(eta, float) - germ.eta).max() > 10 * tols().tol:
        raise ValueError("the Gauss term belongs to the germ's own eta")
    alpha = invariant_shape(germ).operator
    a = Operator(alpha.matrix + germ.gauss_term, germ.tangent_form)
    if a.self_adjoint_residual() > 10 * tols().fd:
        raise InconsistentGaussTerm(
            f"alpha + W is not self-adjoint (residual {a.self_adjoint_residual():.3e}); W is inconsistent"
        )
    return a


def verify_prop9(germ: Germ, eta=None) -> float:
    """Operator-norm residual |K - alpha o alpha|."""
    a = invariant_shape(germ, eta).matrix
    k = normal_jacobi(germ, eta).matrix
    return float(np.linalg.norm(k - a @ a, 2)) if len(k) else 0.0


def normal_closed(germ: Germ) -> tuple[bool, float]:
    return is_subalgebra(germ.ctx.mla.algebra, germ.frame.normal)


def sign_guard_residual(germ: Germ) -> float:
    """max_j |lambda_j + eps_eta sec(e_j, eta)| over a K-eigenbasis.

    For spacelike eta this is the plain relation lambda_j = -sec(e_j, eta);
    a timelike eta flips the sign because sec divides by <eta, eta>.
    """
    dec = eigen_orthonormal(normal_jacobi(germ).operator)
    if not dec.diagonalizable:
        raise NotDiagonalizable("K is not diagonalizable")
    eps = np.sign(germ.ctx.inner(germ.eta, germ.eta))
    worst = 0.0
    for lam, c in zip(dec.eigenvalues, dec.eigenbasis):
        worst = max(worst, abs(lam + eps * sectional(germ.ctx, germ.vector(c), germ.eta)))
    return worst


# ------------------------------------------------------------ adaptedness criteria


def _derivative_table(germ: Germ, dec: EigenDecomposition) -> np.ndarray:
    """d[j, h] = e_j(<N, e_h^L>) in the K-eigenbasis."""
    vecs = dec.eigenbasis
    m = len(vecs)
    d = np.zeros((m, m))
    if germ.source == "immersion":
        for j, h in itertools.product(range(m), repeat=2):
            r = normal_pairing_derivative(
                germ.immersion, germ.u0, germ.vector(vecs[j]), germ.vector(vecs[h]), germ.h, germ.normal_field
            )
            d[j, h] = r.extrapolated
        return d
    eps = germ.frame.tangent_signs
    for j, h in itertools.product(range(m), repeat=2):
        d[j, h] = (germ.gauss_term @ vecs[j]) @ (eps * vecs[h])
    return d


def _required_pairs(dec: EigenDecomposition, positive_definite: bool) -> list[tuple[int, int]]:
    m = len(dec.eigenvalues)
    out = []
    for j, h in itertools.product(range(m), repeat=2):
        if dec.cluster_of(j) == dec.cluster_of(h):
            continue
        if positive_definite and not j < h:
            continue
        out.append((j, h))
    return out


def _eigenspace_mixing(germ: Germ, dec: EigenDecomposition) -> float:
    """max over distinct clusters of |pi_j o W restricted to Lambda_h|."""
    form = germ.tangent_form
    projs = [cluster_projector(dec, form, c) for c in range(len(dec.clusters))]
    worst = 0.0
    for a, b in itertools.permutations(range(len(projs)), 2):
        worst = max(worst, float(np.linalg.norm(projs[a] @ germ.gauss_term @ projs[b], 2)))
    return worst


@dataclass
class Theorem1Result:
    i: bool
    ii: bool
    iii: bool
    commute_residual: float
    ii_residual: float
    iii_residual: float
    pairs: int
    spectral_gaps: list
    tolerance: float

    @property
    def agree(self) -> bool:
        return bool(self.i == self.ii == self.iii)

    def to_dict(self) -> dict:
        return {
            "i": self.i,
            "ii": self.ii,
            "iii": self.iii,
            "agree": bool(self.agree),
            "commute_residual": self.commute_residual,
            "ii_residual": self.ii_residual,
            "iii_residual": self.iii_residual,
            "pairs": self.pairs,
            "spectral_gaps": list(self.spectral_gaps),
            "tolerance": self.tolerance,
        }


def verify_theorem1(germ: Germ, eta=None, imm: Immersion | None = None) -> Theorem1Result:
    """Evaluate the three equivalent conditions independently.

    (i) from the commutator of A and K, (ii) from the derivatives
    e_j(<N, e_h^L>) in a K-eigenbasis, (iii) from the blocks of W between
    distinct K-eigenspaces.
    """
    if imm is not None and germ.immersion is None:
        germ = germ_from_immersion(germ.ctx, imm, eta=germ.eta)
    closed, res = normal_closed(germ)
    if not closed:
        raise HypothesisFailed(f"normal space is not closed under the bracket (residual {res:.3e})")
    k = normal_jacobi(germ, eta).operator
    dec = eigen_orthonormal(k)
    if not dec.diagonalizable:
        raise NotDiagonalizable(f"K is not diagonalizable (condition {dec.condition:.3e})")
    a = shape_operator(germ, eta)
    tol = germ.tol
    cres = commute(a, k, germ.commute_tol)
    table = _derivative_table(germ, dec)
    pairs = _required_pairs(dec, germ.frame.tangent_positive_definite)
    ii_res = max((abs(table[j, h]) for j, h in pairs), default=0.0)
    iii_res = _eigenspace_mixing(germ, dec)
    return Theorem1Result(
        i=cres.commute,
        ii=bool(ii_res <= tol),
        iii=bool(iii_res <= tol),
        commute_residual=cres.residual,
        ii_residual=float(ii_res),
        iii_residual=float(iii_res),
        pairs=len(pairs),
        spectral_gaps=dec.spectral_gaps(),
        tolerance=tol,
    )


def symmetric_difference_residual(germ: Germ) -> float:
    """max |e_j(<N,e_h^L>) - e_h(<N,e_j^L>)| over pairs with lambda_j != lambda_h."""
    dec = eigen_orthonormal(normal_jacobi(germ).operator)
    table = _derivative_table(germ, dec)
    pairs = _required_pairs(dec, positive_definite=False)
    return max((abs(table[j, h] - table[h, j]) for j, h in pairs), default=0.0)


# ------------------------------------------------------------ reports


@dataclass
class AdaptednessReport:
    closed_normal: bool
    abelian_normal: bool
    K_tangent_invariant: bool
    K_diagonalizable: bool
    commute_AK: bool
    thm1_ii_residual: float | None
    thm1_iii_residual: float | None
    K_minus_alpha_sq_residual: float
    multiplicity_profile: list
    adapted: bool = False
    commute_residual: float = 0.0
    tangent_invariance_residual: float = 0.0
    closed_normal_residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "closed_normal": self.closed_normal,
            "abelian_normal": self.abelian_normal,
            "K_tangent_invariant": self.K_tangent_invariant,
            "K_diagonalizable": self.K_diagonalizable,
            "commute_AK": self.commute_AK,
            "thm1_ii_residual": self.thm1_ii_residual,
            "thm1_iii_residual": self.thm1_iii_residual,
            "K_minus_alpha_sq_residual": self.K_minus_alpha_sq_residual,
            "multiplicity_profile": self.multiplicity_profile,
            "adapted": self.adapted,
            "commute_residual": self.commute_residual,
            "tangent_invariance_residual": self.tangent_invariance_residual,
            "closed_normal_residual": self.closed_normal_residual,
        }


def check_adapted(germ: Germ, eta=None) -> AdaptednessReport:
    """Both conditions of curvature adaptedness at the germ's point, for its eta.

    ``commute_AK`` uses the tangential part of K; together with
    ``K_tangent_invariant`` it is the full definition, alone it is the
    weaker projected notion.
    """
    alg = germ.ctx.mla.algebra
    closed, closed_res = normal_closed(germ)
    nj = normal_jacobi(germ, eta)
    k = nj.operator
    a = shape_operator(germ, eta)
    dec = eigen_orthonormal(k)
    cres = commute(a, k, germ.commute_tol)
    ii = iii = None
    if dec.diagonalizable:
        table = _derivative_table(germ, dec)
        pairs = _required_pairs(dec, germ.frame.tangent_positive_definite)
        ii = float(max((abs(table[j, h]) for j, h in pairs), default=0.0))
        iii = _eigenspace_mixing(germ, dec)
    invariant = nj.tangent_invariance_residual <= tols().tol
    return AdaptednessReport(
        closed_normal=closed,
        abelian_normal=abelian_residual(alg, germ.frame.normal) <= tols().tol,
        K_tangent_invariant=invariant,
        K_diagonalizable=dec.diagonalizable,
        commute_AK=cres.commute,
        thm1_ii_residual=ii,
        thm1_iii_residual=iii,
        K_minus_alpha_sq_residual=verify_prop9(germ, eta),
        multiplicity_profile=[{"eigenvalue": v, "multiplicity": n} for v, n in dec.multiplicities()],
        adapted=invariant and cres.commute,
        commute_residual=cres.residual,
        tangent_invariance_residual=nj.tangent_invariance_residual,
        closed_normal_residual=closed_res,
    )


@dataclass
class Verdict:
    passed: bool
    details: dict

    def to_dict(self) -> dict:
        return {"passed": self.passed, **self.details}


def _require_closed(germ: Germ):
    closed, res = normal_closed(germ)
    if not closed:
        raise HypothesisFailed(f"normal space is not closed under the bracket (residual {res:.3e})")


def check_corollary11(germ: Germ, eta=None) -> Verdict:
    """Nonzero eigenvalues of K are negative with even multiplicity."""
    if not germ.frame.tangent_positive_definite:
        raise HypothesisFailed("induced metric is not positive definite")
    _require_closed(germ)
    alpha = invariant_shape(germ, eta).operator
    dec = eigen_orthonormal(normal_jacobi(germ, eta).operator)
    thr = dec.threshold
    bad = []
    for value, mult in dec.multiplicities():
        if abs(value) <= thr:
            continue
        if value >= -thr or mult % 2:
            bad.append({"eigenvalue": value, "multiplicity": mult})
    skew = alpha.skew_adjoint_residual()
    return Verdict(
        not bad and skew <= tols().tol,
        {
            "profile": [{"eigenvalue": v, "multiplicity": n} for v, n in dec.multiplicities()],
            "violations": bad,
            "alpha_skew_residual": skew,
        },
    )


def check_prop4(germ: Germ, eta=None) -> Verdict:
    """commute(A, K) <=> A maps the kernel line of K to itself."""
    if germ.dim != 3:
        raise HypothesisFailed(f"germ has dimension {germ.dim}, need 3")
    if not germ.frame.tangent_positive_definite:
        raise HypothesisFailed("induced metric is not positive definite")
    _require_closed(germ)
    k = normal_jacobi(germ, eta).operator
    if np.abs(k.matrix).max() <= tols().tol:
        raise HypothesisFailed("K vanishes")
    dec = eigen_orthonormal(k)
    zero = [c for c, v in zip(dec.clusters, dec.cluster_values()) if abs(v) <= dec.threshold]
    if len(zero) != 1 or len(zero[0]) != 1:
        raise HypothesisFailed(f"K has no simple zero eigenvalue (profile {dec.multiplicities()})")
    kernel = dec.eigenbasis[zero[0][0]]
    a = shape_operator(germ, eta)
    ak = a.matrix @ kernel
    line_res = float(np.linalg.norm(ak - (ak @ kernel) * kernel))
    tol = germ.commute_tol
    preserves = bool(line_res <= tol * (np.linalg.norm(a.matrix) + 1.0))
    cres = commute(a, k, tol)
    return Verdict(
        bool(cres.commute == preserves),
        {
            "commute_AK": cres.commute,
            "kernel_line_invariant": preserves,
            "commute_residual": cres.residual,
            "kernel_line_residual": line_res,
            "kernel": kernel.tolist(),
        },
    )


def check_umbilic(germ: Germ, eta=None) -> Verdict:
    """At an umbilic point e_j(<N, e_h^L>) = 0 whenever lambda_j != lambda_h."""
    _require_closed(germ)
    a = shape_operator(germ, eta)
    m = germ.dim
    c = float(np.trace(a.matrix) / m)
    umb = float(np.abs(a.matrix - c * np.eye(m)).max())
    if umb > germ.tol:
        raise NotUmbilic(f"shape operator is not a multiple of the identity (residual {umb:.3e})")
    dec = eigen_orthonormal(normal_jacobi(germ, eta).operator)
    if not dec.diagonalizable:
        raise NotDiagonalizable("K is not diagonalizable")
    table = _derivative_table(germ, dec)
    pairs = _required_pairs(dec, positive_definite=False)
    worst = max((abs(table[j, h]) for j, h in pairs), default=0.0)
    alpha = invariant_shape(germ, eta).matrix
    eps = germ.frame.tangent_signs
    relation = 0.0
    for j, h in itertools.permutations(range(m), 2):
        a_jh = (alpha @ dec.eigenbasis[j]) @ (eps * dec.eigenbasis[h])
        relation = max(relation, abs(a_jh + table[j, h]))
    return Verdict(
        bool(worst <= germ.tol),
        {"scalar": c, "umbilic_residual": umb, "max_residual": float(worst), "pairs": len(pairs),
         "alpha_relation_residual": float(relation)},
    )
